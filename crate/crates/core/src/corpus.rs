//! Ready-made periodic systems with the properties they are expected to
//! have.
//!
//! The four two-map systems are built from an irrational rotation number
//! `rho` (rotation angle `alpha = 2 pi rho`). Sturmian coordinates use the
//! same slope.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::space::{Copy, Isolated, Point, SpaceKind, StateSpace};
use crate::symbolic::{self, CodingTree, QuadraticSlope, SturmianParams, SymbolContext, SymbolicModel};
use crate::system::{FnMap, Identity, MapHandle, Modulus, PeriodicSystem};

const HALF_TURN: u128 = 1 << 127;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExampleId {
    /// Circle plus two isolated points; `g` loses a transitive point.
    E1,
    /// Two tangent circles; minimal while `g` has no transitive point.
    E2,
    /// Two Sturmian copies, conjugated odometer on one and shift on the other.
    E3,
    /// Two Sturmian copies, shift on one and conjugated Chacon shift on the other.
    E4,
    GoldenRotation,
    SturmianShift,
    Odometer,
    ConjugatedOdometer,
    ChaconShift,
    ConjugatedChacon,
    Identity,
}

impl ExampleId {
    pub const ALL: [ExampleId; 11] = [
        ExampleId::E1,
        ExampleId::E2,
        ExampleId::E3,
        ExampleId::E4,
        ExampleId::GoldenRotation,
        ExampleId::SturmianShift,
        ExampleId::Odometer,
        ExampleId::ConjugatedOdometer,
        ExampleId::ChaconShift,
        ExampleId::ConjugatedChacon,
        ExampleId::Identity,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ExampleId::E1 => "e1",
            ExampleId::E2 => "e2",
            ExampleId::E3 => "e3",
            ExampleId::E4 => "e4",
            ExampleId::GoldenRotation => "golden-rotation",
            ExampleId::SturmianShift => "sturmian-shift",
            ExampleId::Odometer => "odometer",
            ExampleId::ConjugatedOdometer => "conjugated-odometer",
            ExampleId::ChaconShift => "chacon-shift",
            ExampleId::ConjugatedChacon => "conjugated-chacon",
            ExampleId::Identity => "identity",
        }
    }
}

impl fmt::Display for ExampleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExampleId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExampleId::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown corpus entry {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Property {
    Minimal,
    Sensitive,
    Equicontinuous,
    EventuallySensitive,
    SyndeticallyEquicontinuous,
    ThicklySensitive,
    MultiSensitive,
    TopologicallyEquicontinuous,
    SyndeticallyTopologicallyEquicontinuous,
    HausdorffSensitive,
    ThicklyHausdorffSensitive,
    MultiHausdorffSensitive,
    /// The induced map has no transitive point.
    InducedTransEmpty,
}

impl Property {
    pub fn name(&self) -> &'static str {
        match self {
            Property::Minimal => "minimal",
            Property::Sensitive => "sensitive",
            Property::Equicontinuous => "equicontinuous",
            Property::EventuallySensitive => "eventually-sensitive",
            Property::SyndeticallyEquicontinuous => "syndetically-equicontinuous",
            Property::ThicklySensitive => "thickly-sensitive",
            Property::MultiSensitive => "multi-sensitive",
            Property::TopologicallyEquicontinuous => "topologically-equicontinuous",
            Property::SyndeticallyTopologicallyEquicontinuous => {
                "syndetically-topologically-equicontinuous"
            }
            Property::HausdorffSensitive => "hausdorff-sensitive",
            Property::ThicklyHausdorffSensitive => "thickly-hausdorff-sensitive",
            Property::MultiHausdorffSensitive => "multi-hausdorff-sensitive",
            Property::InducedTransEmpty => "induced-trans-empty",
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Expectation {
    pub property: Property,
    pub expected: Option<bool>,
    /// Why the value is expected.
    pub anchor: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub items: Vec<Expectation>,
}

impl Manifest {
    fn with(mut self, property: Property, expected: bool, anchor: &str) -> Self {
        self.items.push(Expectation { property, expected: Some(expected), anchor: anchor.into() });
        self
    }

    pub fn expected(&self, property: Property) -> Option<bool> {
        self.items.iter().find(|e| e.property == property).and_then(|e| e.expected)
    }

    pub fn anchor(&self, property: Property) -> Option<&str> {
        self.items.iter().find(|e| e.property == property).map(|e| e.anchor.as_str())
    }

    /// Compact `+minimal -sensitive ...` summary.
    pub fn summary(&self) -> String {
        let parts: Vec<String> = self
            .items
            .iter()
            .filter_map(|e| e.expected.map(|v| format!("{}{}", if v { '+' } else { '-' }, e.property)))
            .collect();
        parts.join(" ")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BuildParams {
    /// Rotation number / Sturmian slope as `(a + b sqrt(d)) / c`.
    pub slope: QuadraticSlope,
    /// Cap on epsilon-net sizes.
    pub max_net: usize,
}

impl Default for BuildParams {
    fn default() -> Self {
        BuildParams { slope: QuadraticSlope::GOLDEN, max_net: crate::space::DEFAULT_MAX_NET }
    }
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub id: ExampleId,
    pub system: PeriodicSystem,
    pub manifest: Manifest,
    pub description: &'static str,
}

impl CorpusEntry {
    pub fn space(&self) -> &Arc<StateSpace> {
        self.system.space()
    }
}

pub fn build_example(id: ExampleId, params: &BuildParams) -> Result<CorpusEntry> {
    let sturmian = if params.slope == QuadraticSlope::GOLDEN {
        SturmianParams::golden()
    } else {
        SturmianParams::new(params.slope)?
    };
    let ctx = SymbolContext::new(sturmian.clone());
    let alpha = sturmian.rho_fixed();
    let space = |kind| StateSpace::with_max_net(kind, ctx.clone(), params.max_net);
    let m = Manifest::default();
    use Property::*;
    let entry = match id {
        ExampleId::E1 => CorpusEntry {
            id,
            system: PeriodicSystem::new("e1", space(SpaceKind::CirclePlusIsolated), e1_maps(alpha))?,
            manifest: m
                .with(Minimal, false, "orbits of circle points never reach the isolated points")
                .with(InducedTransEmpty, false, "(2,0) has dense g-orbit: g sends it to (3,0), then (1,0), then rotates")
                .with(Equicontinuous, true, "both maps rotate the circle and permute isolated points"),
            description: "circle plus two isolated points; (3,0) is transitive for the sequence but not for g",
        },
        ExampleId::E2 => {
            let maps = e2_maps(alpha)?;
            CorpusEntry {
                id,
                system: PeriodicSystem::new("e2", space(SpaceKind::TwoTangentCircles), maps)?,
                manifest: m
                    .with(Minimal, true, "orbits alternate between the circles and rotate irrationally on each")
                    .with(InducedTransEmpty, true, "g maps the whole space into circle A, so no g-orbit enters B"),
                description: "two tangent circles pasted at p = 1; minimal, while g(X) lies in circle A",
            }
        }
        ExampleId::E3 => {
            let s_tree = ctx.sturmian_tree.clone();
            let f: MapFn = Arc::new(move |x| Ok(symbolic::conjugate_odometer(&s_tree, x)));
            let kind = SpaceKind::TwoCopySymbolic {
                a: SymbolicModel::CodedOdometer,
                b: SymbolicModel::Sturmian,
            };
            CorpusEntry {
                id,
                system: PeriodicSystem::new(
                    "e3",
                    space(kind),
                    two_copy_maps(("f", f, Modulus::Lipschitz(1.0)), ("σ", shift_fn(), Modulus::Lipschitz(2.0))),
                )?,
                manifest: m
                    .with(Minimal, true, "g is the conjugated odometer on copy a and the shift on copy b, both minimal, and f1 carries each copy onto the other")
                    .with(InducedTransEmpty, true, "g preserves each copy")
                    .with(Sensitive, false, "copy a evolves by an equicontinuous map")
                    .with(Equicontinuous, false, "copy b evolves by the Sturmian shift, which is sensitive"),
                description: "Sturmian copies a, b: f1 = (conjugated odometer a->b, shift b->a), f2 = copy swap",
            }
        }
        ExampleId::E4 => {
            let s_tree = ctx.sturmian_tree.clone();
            let c_tree = CodingTree::chacon();
            let f: MapFn = Arc::new(move |x| Ok(symbolic::conjugate_shift(&s_tree, &c_tree, x)));
            let kind = SpaceKind::TwoCopySymbolic {
                a: SymbolicModel::Sturmian,
                b: SymbolicModel::CodedChacon,
            };
            CorpusEntry {
                id,
                system: PeriodicSystem::new(
                    "e4",
                    space(kind),
                    two_copy_maps(("σ", shift_fn(), Modulus::Lipschitz(2.0)), ("f", f, Modulus::Unknown)),
                )?,
                manifest: m
                    .with(Minimal, true, "g is the shift on copy a and the conjugated Chacon shift on copy b, both minimal, and f1 carries each copy onto the other")
                    .with(InducedTransEmpty, true, "g preserves each copy")
                    .with(ThicklySensitive, false, "copy a evolves by the Sturmian shift, which is syndetically equicontinuous")
                    .with(SyndeticallyEquicontinuous, false, "copy b evolves by a weakly mixing map, which is thickly sensitive"),
                description: "Sturmian copies a, b: f1 = (shift a->b, conjugated Chacon shift b->a), f2 = copy swap",
            }
        }
        ExampleId::GoldenRotation => CorpusEntry {
            id,
            system: PeriodicSystem::autonomous("golden-rotation", space(SpaceKind::Circle), rotation("R", alpha)),
            manifest: m
                .with(Minimal, true, "irrational rotation")
                .with(InducedTransEmpty, false, "irrational rotation")
                .with(Equicontinuous, true, "rotations are isometries")
                .with(Sensitive, false, "rotations are isometries"),
            description: "rotation of the circle by alpha",
        },
        ExampleId::SturmianShift => CorpusEntry {
            id,
            system: PeriodicSystem::autonomous(
                "sturmian-shift",
                space(SpaceKind::PlainSymbolic(SymbolicModel::Sturmian)),
                FnMap::new("σ", |x| map_seq(x, |s| Ok(symbolic::sigma(s))))
                    .on_part(0, Modulus::Lipschitz(2.0), Some(0))
                    .handle(),
            ),
            manifest: m
                .with(Minimal, true, "Sturmian subshifts are minimal")
                .with(InducedTransEmpty, false, "minimal")
                .with(Sensitive, true, "infinite expansive subshift")
                .with(Equicontinuous, false, "infinite expansive subshift")
                .with(SyndeticallyEquicontinuous, true, "almost one-to-one extension of an irrational rotation")
                .with(ThicklySensitive, false, "syndetically equicontinuous"),
            description: "shift on the Sturmian subshift of slope rho",
        },
        ExampleId::Odometer => CorpusEntry {
            id,
            system: PeriodicSystem::autonomous(
                "odometer",
                space(SpaceKind::PlainSymbolic(SymbolicModel::Odometer)),
                FnMap::new("+1", |x| map_seq(x, |s| Ok(symbolic::add_one(s))))
                    .on_part(0, Modulus::Lipschitz(1.0), Some(0))
                    .handle(),
            ),
            manifest: m
                .with(Minimal, true, "adding machine")
                .with(InducedTransEmpty, false, "minimal")
                .with(Equicontinuous, true, "adding one is an isometry of the 2-adic integers")
                .with(Sensitive, false, "isometry"),
            description: "add one with carry on binary sequences",
        },
        ExampleId::ConjugatedOdometer => {
            let s_tree = ctx.sturmian_tree.clone();
            CorpusEntry {
                id,
                system: PeriodicSystem::autonomous(
                    "conjugated-odometer",
                    space(SpaceKind::PlainSymbolic(SymbolicModel::CodedOdometer)),
                    FnMap::new("f", move |x| map_seq(x, |s| Ok(symbolic::conjugate_odometer(&s_tree, s))))
                        .on_part(0, Modulus::Lipschitz(1.0), Some(0))
                        .handle(),
                ),
                manifest: m
                    .with(Minimal, true, "conjugate of the adding machine")
                    .with(InducedTransEmpty, false, "minimal")
                    .with(Equicontinuous, true, "conjugate of an isometry")
                    .with(Sensitive, false, "equicontinuous"),
                description: "adding machine transported onto the Sturmian subshift by the coding tree",
            }
        }
        ExampleId::ChaconShift => CorpusEntry {
            id,
            system: PeriodicSystem::autonomous(
                "chacon-shift",
                space(SpaceKind::PlainSymbolic(SymbolicModel::Chacon)),
                FnMap::new("σ", |x| map_seq(x, |s| Ok(symbolic::sigma(s))))
                    .on_part(0, Modulus::Lipschitz(2.0), Some(0))
                    .handle(),
            ),
            manifest: m
                .with(Minimal, true, "primitive substitution")
                .with(InducedTransEmpty, false, "minimal")
                .with(Sensitive, true, "weakly mixing")
                .with(ThicklySensitive, true, "weakly mixing")
                .with(SyndeticallyEquicontinuous, false, "thickly sensitive"),
            description: "shift on the Chacon subshift (0 -> 0010, 1 -> 1)",
        },
        ExampleId::ConjugatedChacon => {
            let s_tree = ctx.sturmian_tree.clone();
            let c_tree = CodingTree::chacon();
            CorpusEntry {
                id,
                system: PeriodicSystem::autonomous(
                    "conjugated-chacon",
                    space(SpaceKind::PlainSymbolic(SymbolicModel::CodedChacon)),
                    FnMap::new("f", move |x| {
                        map_seq(x, |s| Ok(symbolic::conjugate_shift(&s_tree, &c_tree, s)))
                    })
                    .handle(),
                ),
                manifest: m
                    .with(Minimal, true, "conjugate of a minimal subshift")
                    .with(InducedTransEmpty, false, "minimal")
                    .with(ThicklySensitive, true, "conjugate of a weakly mixing map")
                    .with(SyndeticallyEquicontinuous, false, "thickly sensitive"),
                description: "Chacon shift transported onto the Sturmian subshift by the coding trees",
            }
        }
        ExampleId::Identity => CorpusEntry {
            id,
            system: PeriodicSystem::autonomous("identity", space(SpaceKind::Circle), Arc::new(Identity)),
            manifest: m
                .with(Minimal, false, "every point is fixed")
                .with(InducedTransEmpty, true, "every orbit is a single point")
                .with(Equicontinuous, true, "identity")
                .with(Sensitive, false, "identity"),
            description: "identity map of the circle",
        },
    };
    Ok(entry)
}

type MapFn = Arc<dyn Fn(&symbolic::Seq) -> Result<symbolic::Seq> + Send + Sync>;

fn shift_fn() -> MapFn {
    Arc::new(|x| Ok(symbolic::sigma(x)))
}

fn map_seq(x: &Point, f: impl Fn(&symbolic::Seq) -> Result<symbolic::Seq>) -> Result<Point> {
    match x {
        Point::Symbolic { copy, seq } => Ok(Point::symbolic(*copy, f(seq)?)),
        other => Err(Error::MixedSpace(other.to_string())),
    }
}

fn rotation(label: &str, turns: u128) -> MapHandle {
    FnMap::new(label, move |x| match x {
        Point::Circle { turns: t } => Ok(Point::Circle { turns: t.wrapping_add(turns) }),
        other => Err(Error::MixedSpace(other.to_string())),
    })
    .on_part(0, Modulus::Lipschitz(1.0), Some(0))
    .handle()
}

fn e1_maps(alpha: u128) -> Vec<MapHandle> {
    let half = alpha >> 1;
    let f1 = FnMap::new("f1", move |x| match x {
        Point::Circle { turns } => Ok(Point::Circle { turns: turns.wrapping_add(half) }),
        Point::Isolated(Isolated::Two) => Ok(Point::Isolated(Isolated::Three)),
        Point::Isolated(Isolated::Three) => Ok(Point::Isolated(Isolated::Two)),
        other => Err(Error::MixedSpace(other.to_string())),
    })
    .on_part(0, Modulus::Lipschitz(1.0), Some(0))
    .on_part(1, Modulus::Lipschitz(1.0), Some(1));
    let f2 = FnMap::new("f2", move |x| match x {
        Point::Circle { turns } => Ok(Point::Circle { turns: turns.wrapping_add(half) }),
        Point::Isolated(Isolated::Two) => Ok(Point::Circle { turns: 0 }),
        Point::Isolated(Isolated::Three) => Ok(Point::Isolated(Isolated::Three)),
        other => Err(Error::MixedSpace(other.to_string())),
    })
    .on_part(0, Modulus::Lipschitz(1.0), Some(0))
    .on_part(1, Modulus::Lipschitz(1.0), None);
    vec![f1.handle(), f2.handle()]
}

/// Branch formulas of the two tangent-circle maps, on raw angles.
/// `A` is `e^{iθ}`, `B` is `2 + e^{iθ}`, and they touch at `p = 1`.
pub mod tangent {
    use super::HALF_TURN;
    use crate::space::Copy;

    /// `A -> B`, `e^{iθ} -> 2 + e^{i(θ+α)}`.
    pub fn g1(alpha: u128, t: u128) -> (Copy, u128) {
        (Copy::B, t.wrapping_add(alpha))
    }

    /// `B -> B`, `2 + e^{iθ} -> 2 + e^{i(θ+α+π)}`.
    pub fn g2(alpha: u128, t: u128) -> (Copy, u128) {
        (Copy::B, t.wrapping_add(alpha).wrapping_add(HALF_TURN))
    }

    /// `A -> A`, `e^{iθ} -> e^{i(θ+π)}`.
    pub fn g3(t: u128) -> (Copy, u128) {
        (Copy::A, t.wrapping_add(HALF_TURN))
    }

    /// `B -> A`, `2 + e^{iθ} -> e^{iθ}`.
    pub fn g4(t: u128) -> (Copy, u128) {
        (Copy::A, t)
    }
}

fn e2_maps(alpha: u128) -> Result<Vec<MapHandle>> {
    use tangent::{g1, g2, g3, g4};
    // the tangent point is A at angle 0 and B at angle π
    if g1(alpha, 0) != g2(alpha, HALF_TURN) {
        return Err(Error::ConstructionFailed("f1 branches disagree at the tangent point".into()));
    }
    if g3(0) != g4(HALF_TURN) {
        return Err(Error::ConstructionFailed("f2 branches disagree at the tangent point".into()));
    }
    let pasted = |label: &str, on_a: Arc<dyn Fn(u128) -> (Copy, u128) + Send + Sync>, on_b: Arc<dyn Fn(u128) -> (Copy, u128) + Send + Sync>| {
        FnMap::new(label, move |x| match x {
            Point::Tangent { circle: Copy::A, turns } => {
                let (c, t) = on_a(*turns);
                Ok(Point::tangent(c, t))
            }
            Point::Tangent { circle: Copy::B, turns } => {
                let (c, t) = on_b(*turns);
                Ok(Point::tangent(c, t))
            }
            other => Err(Error::MixedSpace(other.to_string())),
        })
    };
    let f1 = pasted("f1", Arc::new(move |t| g1(alpha, t)), Arc::new(move |t| g2(alpha, t)))
        .on_part(0, Modulus::Lipschitz(1.0), Some(1))
        .on_part(1, Modulus::Lipschitz(1.0), Some(1));
    let f2 = pasted("f2", Arc::new(g3), Arc::new(g4))
        .on_part(0, Modulus::Lipschitz(1.0), Some(0))
        .on_part(1, Modulus::Lipschitz(1.0), Some(0));
    Ok(vec![f1.handle(), f2.handle()])
}

/// `f1(x,a) = (on_a x, b)`, `f1(x,b) = (on_b x, a)`, `f2` swaps copies.
fn two_copy_maps(on_a: (&str, MapFn, Modulus), on_b: (&str, MapFn, Modulus)) -> Vec<MapHandle> {
    let (la, fa, ma) = on_a;
    let (lb, fb, mb) = on_b;
    let f1 = FnMap::new(format!("f1[a:{la},b:{lb}]"), move |x| match x {
        Point::Symbolic { copy: Some(Copy::A), seq } => Ok(Point::symbolic(Some(Copy::B), fa(seq)?)),
        Point::Symbolic { copy: Some(Copy::B), seq } => Ok(Point::symbolic(Some(Copy::A), fb(seq)?)),
        other => Err(Error::MixedSpace(other.to_string())),
    })
    .on_part(0, ma, Some(1))
    .on_part(1, mb, Some(0));
    let f2 = FnMap::new("f2[swap]", |x| match x {
        Point::Symbolic { copy: Some(c), seq } => Ok(Point::symbolic(Some(c.other()), seq.clone())),
        other => Err(Error::MixedSpace(other.to_string())),
    })
    .on_part(0, Modulus::Lipschitz(1.0), Some(1))
    .on_part(1, Modulus::Lipschitz(1.0), Some(0));
    vec![f1.handle(), f2.handle()]
}

/// One line per entry: id, period, space, manifest summary.
pub fn list(params: &BuildParams) -> Result<Vec<String>> {
    let mut lines = Vec::new();
    for id in ExampleId::ALL {
        let e = build_example(id, params)?;
        let anchors: Vec<String> = e
            .manifest
            .items
            .iter()
            .map(|i| format!("{}: {}", i.property, i.anchor))
            .collect();
        lines.push(format!(
            "{:<20} p={} space={:<21} {}\n    {}\n    {}",
            id.name(),
            e.system.period(),
            e.space().id(),
            e.manifest.summary(),
            e.description,
            anchors.join("; "),
        ));
    }
    Ok(lines)
}
