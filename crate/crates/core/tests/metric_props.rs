use std::sync::Arc;

use perdyn::corpus::{build_example, BuildParams, ExampleId};
use perdyn::space::{Ball, Scope, StateSpace};
use proptest::prelude::*;

fn spaces() -> Vec<Arc<StateSpace>> {
    [ExampleId::E1, ExampleId::E2, ExampleId::E3, ExampleId::E4, ExampleId::GoldenRotation, ExampleId::SturmianShift]
        .into_iter()
        .map(|id| build_example(id, &BuildParams::default()).unwrap().space().clone())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_axioms(seed in any::<u64>(), which in 0usize..6) {
        let space = &spaces()[which];
        let pts = space.sample_points(3, seed, Scope::All).unwrap();
        // pairs agreeing past the symbol window have no decidable distance
        let decidable = (0..3).all(|i| (0..3).all(|j| i == j || space.distance(&pts[i], &pts[j]).is_ok()));
        prop_assume!(decidable);
        let d = |i: usize, j: usize| space.distance(&pts[i], &pts[j]).unwrap();
        for i in 0..3 {
            prop_assert_eq!(d(i, i), 0.0);
            for j in 0..3 {
                prop_assert_eq!(d(i, j), d(j, i));
                prop_assert!(d(i, j) >= 0.0 && d(i, j) <= space.diameter());
                for k in 0..3 {
                    prop_assert!(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
                    if space.is_symbolic() {
                        prop_assert!(d(i, k) <= d(i, j).max(d(j, k)));
                    }
                }
            }
        }
    }

    #[test]
    fn text_form_round_trips(seed in any::<u64>(), which in 0usize..6) {
        let space = &spaces()[which];
        for x in space.sample_points(4, seed, Scope::All).unwrap() {
            let back = space.parse_point(&x.to_string()).unwrap();
            prop_assert!(!space.separated(&x, &back, 1e-12).unwrap());
        }
    }

    #[test]
    fn ball_samples_stay_inside(seed in any::<u64>(), which in 0usize..6, j in 1i32..8) {
        let space = &spaces()[which];
        let centre = space.sample_points(1, seed, Scope::All).unwrap().remove(0);
        let ball = Ball::new(centre, 2f64.powi(-j));
        for y in space.sample_in_ball(&ball, 8, seed).unwrap() {
            prop_assert!(space.contains(&ball, &y).unwrap());
        }
    }

    #[test]
    fn nets_cover_samples(seed in any::<u64>(), which in 0usize..6, j in 2i32..6) {
        let space = &spaces()[which];
        let eps = 2f64.powi(-j);
        let net = space.epsilon_net(eps, seed, Scope::All).unwrap();
        for y in space.sample_points(16, seed ^ 1, Scope::All).unwrap() {
            let near = net.iter().any(|c| !space.separated(c, &y, eps).unwrap());
            prop_assert!(near, "{} is farther than {} from the net", y, eps);
        }
    }
}
