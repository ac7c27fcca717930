use perdyn::corpus::{build_example, BuildParams, ExampleId};
use perdyn::detect::{
    equicontinuity_verdict, eventual_sensitivity_check, minimality_estimate, sensitivity_verdict,
    verify, visit_times_verdict, Certificate, DetectorParams, Evidence, SensitivityMode, Verdict,
};
use perdyn::space::{Ball, Isolated, Point, Scope};
use perdyn::system::PeriodicSystem;

fn entry(id: ExampleId) -> PeriodicSystem {
    build_example(id, &BuildParams::default()).unwrap().system
}

/// Replays every replayable certificate after a JSON round trip.
fn replay_all(sys: &PeriodicSystem, v: &Verdict) -> usize {
    let back: Verdict = serde_json::from_str(&serde_json::to_string(v).unwrap()).unwrap();
    assert_eq!(&back, v);
    let mut replayed = 0;
    for c in &back.certificates {
        if let Some(ok) = verify(sys, c).unwrap() {
            assert!(ok, "certificate does not replay: {c:?}");
            replayed += 1;
        }
    }
    replayed
}

#[test]
fn sturmian_separations_replay() {
    let sys = entry(ExampleId::SturmianShift);
    let p = DetectorParams { net_radius: 1.0 / 16.0, ..Default::default() };
    let v = sensitivity_verdict(&sys, SensitivityMode::Plain, &p).unwrap();
    assert_eq!(v.outcome, Evidence::For);
    assert!(replay_all(&sys, &v) > 0);
}

#[test]
fn e3_equicontinuity_witness_replays() {
    let sys = entry(ExampleId::E3);
    let p = DetectorParams { scope: Scope::B, eps_e: 0.5, ..Default::default() };
    let v = equicontinuity_verdict(&sys, &p).unwrap();
    assert_eq!(v.outcome, Evidence::Against);
    assert!(replay_all(&sys, &v) > 0);
}

#[test]
fn delayed_pairs_replay() {
    let sys = entry(ExampleId::SturmianShift);
    let p = DetectorParams { starts: 4, ..Default::default() };
    let v = eventual_sensitivity_check(&sys, &p, 0.5).unwrap();
    assert_eq!(v.outcome, Evidence::For);
    assert!(v.certificates.iter().any(|c| matches!(c, Certificate::DelayedPair { .. })));
    assert!(replay_all(&sys, &v) > 0);
}

#[test]
fn first_hits_replay_and_tampering_is_caught() {
    let sys = entry(ExampleId::E1);
    let target = [Ball::new(Point::Isolated(Isolated::Two), 0.1)];
    let v = visit_times_verdict(&sys, &Point::Isolated(Isolated::Three), &target, &DetectorParams::default()).unwrap();
    assert_eq!(replay_all(&sys, &v), 1);
    let Certificate::FirstHit { start, target, center, radius, .. } = v.certificates[0].clone() else {
        panic!("expected a first-hit certificate")
    };
    let forged = Certificate::FirstHit { start, target, center, radius, n: Some(3) };
    assert_eq!(verify(&sys, &forged).unwrap(), Some(false));
}

#[test]
fn identity_is_equicontinuous_and_not_minimal() {
    let sys = entry(ExampleId::Identity);
    let p = DetectorParams { horizon: 200, ..Default::default() };
    assert_eq!(sensitivity_verdict(&sys, SensitivityMode::Plain, &p).unwrap().outcome, Evidence::Against);
    assert_eq!(sensitivity_verdict(&sys, SensitivityMode::Thick, &p).unwrap().outcome, Evidence::Against);
    assert_eq!(equicontinuity_verdict(&sys, &p).unwrap().outcome, Evidence::For);
    assert_eq!(minimality_estimate(&sys, &p).unwrap().outcome, Evidence::Against);
}

#[test]
fn same_seed_same_verdict() {
    let sys = entry(ExampleId::E4);
    let p = DetectorParams { scope: Scope::A, net_radius: 1.0 / 16.0, seed: 9, ..Default::default() };
    let a = sensitivity_verdict(&sys, SensitivityMode::Thick, &p).unwrap();
    let b = sensitivity_verdict(&sys, SensitivityMode::Thick, &p).unwrap();
    assert_eq!(a, b);
}
