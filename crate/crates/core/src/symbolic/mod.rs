//! Sturmian words, the dyadic odometer, substitution subshifts and the
//! coding trees that conjugate them.

pub mod automaton;
pub mod mechanical;
pub mod model;
pub mod odometer;
pub mod seq;
pub mod substitution;
pub mod tree;

use std::sync::Arc;

pub use mechanical::{QuadraticSlope, SturmianParams};
pub use model::SymbolicModel;
pub use seq::{Seq, SeqExpr, SymbolContext};
pub use substitution::{FixedPoint, SubstitutionRule};
pub use tree::CodingTree;

/// Shift map.
pub fn sigma(x: &Seq) -> Seq {
    seq::shift(x, 1)
}

/// Odometer `z -> z + 1`.
pub fn add_one(z: &Seq) -> Seq {
    seq::add_integer(z, 1)
}

/// `h^-1(R(h(x)))` where `h` codes through `source` and `R` adds one.
pub fn conjugate_odometer(source: &Arc<CodingTree>, x: &Seq) -> Seq {
    seq::decode(source, &add_one(&seq::encode(source, x)))
}

/// `h^-1(sigma(h(x)))` where `h = dec(target) . enc(source)` carries `x`
/// into the target subshift.
pub fn conjugate_shift(source: &Arc<CodingTree>, target: &Arc<CodingTree>, x: &Seq) -> Seq {
    let h = seq::decode(target, &seq::encode(source, x));
    seq::decode(source, &seq::encode(target, &sigma(&h)))
}

/// `h^-1(F(h(x)))` for an arbitrary target map `F` on coded sequences.
pub fn conjugate_apply(
    source: &Arc<CodingTree>,
    target: &Arc<CodingTree>,
    target_map: impl Fn(&Seq) -> Seq,
    x: &Seq,
) -> Seq {
    let h = seq::decode(target, &seq::encode(source, x));
    seq::decode(source, &seq::encode(target, &target_map(&h)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    #[test]
    fn conjugated_orbits_stay_compact() {
        let ctx = SymbolContext::golden();
        let s = ctx.sturmian_tree.clone();
        let c = CodingTree::chacon();
        let mut rng = stream_rng(3, 0);
        let mut x = SymbolicModel::CodedChacon.sample(&ctx, &mut rng).unwrap();
        let mut z = SymbolicModel::CodedOdometer.sample(&ctx, &mut rng).unwrap();
        for _ in 0..100 {
            x = conjugate_shift(&s, &c, &x);
            z = conjugate_odometer(&s, &z);
        }
        assert!(x.to_string().starts_with("dec(S,enc(C,subst("));
        assert!(z.to_string().starts_with("dec(S,add(100,"));
    }

    #[test]
    fn identity_target_map_is_identity() {
        let ctx = SymbolContext::golden();
        let s = ctx.sturmian_tree.clone();
        let mut rng = stream_rng(4, 0);
        let x = SymbolicModel::Sturmian.sample(&ctx, &mut rng).unwrap();
        let y = conjugate_apply(&s, &CodingTree::chacon(), |h| h.clone(), &x);
        assert_eq!(x.prefix(200).unwrap(), y.prefix(200).unwrap());
    }
}
