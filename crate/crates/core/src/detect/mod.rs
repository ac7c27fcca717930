//! Finite-horizon detectors with three-valued verdicts.
//!
//! Every detector is a pure function of `(system, params)`. Region work runs
//! in parallel with per-region sub-seeds `mix(seed, index)`, and results are
//! merged in region order, so the thread count never changes the output.
//!
//! `evidence-against` for a universally quantified property means every
//! sampled candidate failed within the horizon. It is never a proof.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::corpus::Property;
use crate::error::{Error, Result};
use crate::hitting::{HittingSet, Mode, Outcome, Span, HORIZON_FACTOR};
use crate::rng::mix;
use crate::space::{symbols_for, Ball, Point, Scope, StateSpace, CROSS_COMPONENT};
use crate::system::{max_horizon, PeriodicSystem};

mod equicontinuity;
mod recurrence;
mod report;
mod sensitivity;

pub use equicontinuity::{
    eqp_check, equicontinuity_at, equicontinuity_verdict, seqp_check, stability_set,
    syndetic_equicontinuity_at, syndetic_equicontinuity_verdict,
    topological_equicontinuity_verdict,
};
pub use recurrence::{
    induced_trans_empty, minimality_estimate, omega_nonwandering_estimate, omega_verdict,
    visit_times, visit_times_verdict, Coverage,
};
pub use report::{dichotomy_report, evaluate, DichotomyReport, MatrixRow, RowKind, RowStatus};
pub use sensitivity::{
    cover_hitting_set, eventual_sensitivity_check, hausdorff_sensitivity_verdict, net_regions,
    separation_hitting_set, sensitivity_verdict, standard_cover, RegionScan, SensitivityMode,
};

/// Salt of the sampled starting points shared by point-level detectors.
pub(crate) const START_SALT: u64 = 0x5747;

/// Explicit region, used instead of the epsilon net when given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BallSpec {
    pub center: String,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DetectorParams {
    /// Orbit horizon `N`; times `0..=N` are examined.
    pub horizon: u64,
    /// Points per region, the centre included.
    pub pair_samples: usize,
    /// Radius of the epsilon net that supplies the regions.
    pub net_radius: f64,
    /// Explicit regions; overrides the net when non-empty.
    pub balls: Vec<BallSpec>,
    pub scope: Scope,
    /// Separation threshold `eps_D`.
    pub eps_d: f64,
    /// Stability threshold `eps_E`.
    pub eps_e: f64,
    /// Neighbourhood basis radii are `2^-j` for `basis_from <= j <= basis_depth`.
    pub basis_from: u32,
    pub basis_depth: u32,
    pub seed: u64,
    /// Tuple size for multi-sensitivity.
    pub multi_m: usize,
    /// Cap on the number of region tuples examined.
    pub max_tuples: usize,
    /// Run length `k+1` demanded by thick modes.
    pub thick_k: u64,
    /// Fixed syndetic bound; `None` searches for the smallest one.
    pub syndetic_m: Option<u64>,
    /// Member radius of the cover used by Hausdorff detectors.
    pub cover_radius: f64,
    /// Containment in `O` is tested against radius `(1 - margin) * r_O`.
    pub margin: f64,
    /// Sampled starting points for point-level detectors.
    pub starts: usize,
    /// Radius of the target neighbourhood `O` in pair detectors.
    pub o_radius: f64,
    /// Points of `U` whose images stand in for `f^n(U)` in pair detectors.
    pub image_samples: usize,
}

impl Default for DetectorParams {
    fn default() -> Self {
        DetectorParams {
            horizon: 2000,
            pair_samples: 8,
            net_radius: 0.25,
            balls: Vec::new(),
            scope: Scope::All,
            eps_d: 0.5,
            eps_e: 0.25,
            basis_from: 1,
            basis_depth: 8,
            seed: 0,
            multi_m: 3,
            max_tuples: 256,
            thick_k: 10,
            syndetic_m: None,
            cover_radius: 1.0,
            margin: 0.1,
            starts: 8,
            o_radius: 0.0625,
            image_samples: 64,
        }
    }
}

impl DetectorParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::InvalidParameter(what.to_string()));
        let positive = [
            ("net_radius", self.net_radius),
            ("eps_d", self.eps_d),
            ("eps_e", self.eps_e),
            ("cover_radius", self.cover_radius),
            ("o_radius", self.o_radius),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return bad(&format!("{name} must be positive, got {v}"));
            }
        }
        if self.horizon == 0 {
            return bad("horizon must be positive");
        }
        if self.horizon > max_horizon() {
            return Err(Error::HorizonTooLarge { requested: self.horizon, max: max_horizon() });
        }
        if self.pair_samples < 2 || self.image_samples < 2 {
            return bad("pair_samples and image_samples must be at least 2");
        }
        if self.basis_from == 0 || self.basis_from > self.basis_depth || self.basis_depth > 60 {
            return bad("basis needs 1 <= basis_from <= basis_depth <= 60");
        }
        if self.multi_m < 2 || self.max_tuples == 0 || self.starts == 0 {
            return bad("multi_m >= 2, max_tuples >= 1 and starts >= 1 required");
        }
        if !(0.0..1.0).contains(&self.margin) {
            return bad("margin must lie in [0, 1)");
        }
        for b in &self.balls {
            if !(b.radius > 0.0) {
                return bad(&format!("ball radius {}", b.radius));
            }
        }
        Ok(())
    }

    /// Basis radii, largest first.
    pub fn basis_radii(&self) -> Vec<f64> {
        (self.basis_from..=self.basis_depth).map(|j| (-(j as f64)).exp2()).collect()
    }

    pub fn sub_seed(&self, salt: u64) -> u64 {
        mix(self.seed, salt)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Evidence {
    #[serde(rename = "evidence-for")]
    For,
    #[serde(rename = "evidence-against")]
    Against,
    #[serde(rename = "inconclusive")]
    Inconclusive,
}

impl Evidence {
    pub fn from_bool(holds: bool) -> Evidence {
        if holds {
            Evidence::For
        } else {
            Evidence::Against
        }
    }

    pub fn as_bool(self) -> Option<bool> {
        match self {
            Evidence::For => Some(true),
            Evidence::Against => Some(false),
            Evidence::Inconclusive => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Evidence::For => "evidence-for",
            Evidence::Against => "evidence-against",
            Evidence::Inconclusive => "inconclusive",
        }
    }

    /// All-of combination: any against wins, then any inconclusive.
    fn all(items: impl IntoIterator<Item = Evidence>) -> Evidence {
        let mut out = Evidence::For;
        for e in items {
            match e {
                Evidence::Against => return Evidence::Against,
                Evidence::Inconclusive => out = Evidence::Inconclusive,
                Evidence::For => {}
            }
        }
        out
    }

    /// Some-of combination: any for wins, then any inconclusive.
    fn any(items: impl IntoIterator<Item = Evidence>) -> Evidence {
        let mut out = Evidence::Against;
        for e in items {
            match e {
                Evidence::For => return Evidence::For,
                Evidence::Inconclusive => out = Evidence::Inconclusive,
                Evidence::Against => {}
            }
        }
        out
    }
}

impl std::fmt::Display for Evidence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpanKind {
    Run,
    Hole,
}

/// Re-checkable evidence. Points use the report serialization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Certificate {
    /// `d(f^n x, f^n y) = distance`, both started at time 0.
    SeparatedPair { region: Option<usize>, x: String, y: String, n: u64, distance: f64 },
    /// No sampled pair of the region reached `eps` within the horizon.
    NoSeparation {
        region: usize,
        center: String,
        radius: f64,
        samples: usize,
        horizon: u64,
        initial_max: f64,
        observed_max: f64,
    },
    /// Run or hole of a region's hitting set.
    Window { region: Option<usize>, span_kind: SpanKind, start: u64, len: u64 },
    /// Smallest syndetic bound of a set on the full and half horizon.
    SyndeticBound {
        region: Option<usize>,
        point: Option<String>,
        delta: f64,
        bound: Option<u64>,
        half_bound: Option<u64>,
        horizon: u64,
    },
    /// Every sampled `y` within `delta` of `x` stayed within `eps`.
    Stable { x: String, delta: f64, samples: usize, horizon: u64, observed_max: f64 },
    CommonTime { regions: Vec<usize>, n: u64 },
    EmptyIntersection { regions: Vec<usize>, horizon: u64 },
    /// First `n` with `f^n(start)` in the target ball.
    FirstHit { start: String, target: usize, center: String, radius: f64, n: Option<u64> },
    /// Pair-neighbourhood search; `n = None` means no violation.
    Containment {
        x: String,
        y: String,
        u_radius: f64,
        v_radius: f64,
        o_radius: f64,
        margin: f64,
        n: Option<u64>,
        escapee: Option<String>,
    },
    /// `O` around `y` that every basis pair `(U, V)` failed.
    SplittingNeighborhood { x: String, y: String, o_radius: f64 },
    /// `d(f^{n+k} x, f^k y) = distance` with `y` within `eps_e` of `f^n x`.
    DelayedPair { x: String, n: u64, y: String, k: u64, eps_e: f64, distance: f64 },
    NoDelayedSeparation { x: String, eps_e: f64, delays: Vec<u64>, samples: usize, horizon: u64 },
    Structural { statement: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    Gaps,
    Runs,
    Separation,
    FirstHit,
    Members,
}

impl SeriesKind {
    pub fn name(self) -> &'static str {
        match self {
            SeriesKind::Gaps => "gaps",
            SeriesKind::Runs => "runs",
            SeriesKind::Separation => "separation",
            SeriesKind::FirstHit => "first-hit",
            SeriesKind::Members => "members",
        }
    }
}

/// Plot table carried inside a verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Series {
    pub kind: SeriesKind,
    pub label: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Series {
    pub fn to_csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(s, "{}", r.join(","));
        }
        s
    }

    /// First [`SERIES_CAP`] members of a hitting set.
    fn members(label: String, set: &crate::hitting::HittingSet) -> Series {
        Series {
            kind: SeriesKind::Members,
            label,
            columns: vec!["n".into()],
            rows: set.members.iter().take(SERIES_CAP as usize).map(|n| vec![n.to_string()]).collect(),
        }
    }

    fn histogram(kind: SeriesKind, label: String, h: &BTreeMap<u64, u64>) -> Series {
        let col = if kind == SeriesKind::Gaps { "gap" } else { "run" };
        Series {
            kind,
            label,
            columns: vec![col.into(), "count".into()],
            rows: h.iter().map(|(k, v)| vec![k.to_string(), v.to_string()]).collect(),
        }
    }
}

/// Separation time series rows are capped at this many entries.
pub const SERIES_CAP: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub detector: String,
    pub property: Option<Property>,
    pub system: String,
    pub outcome: Evidence,
    pub summary: String,
    pub params: DetectorParams,
    pub certificates: Vec<Certificate>,
    pub measurements: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<Series>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Verdict {
    fn new(detector: &str, property: Option<Property>, sys: &PeriodicSystem, p: &DetectorParams) -> Self {
        Verdict {
            detector: detector.to_string(),
            property,
            system: sys.id().to_string(),
            outcome: Evidence::Inconclusive,
            summary: String::new(),
            params: p.clone(),
            certificates: Vec::new(),
            measurements: BTreeMap::new(),
            series: Vec::new(),
            error: None,
        }
    }

    /// Row standing in for a detector that raised an error.
    pub fn failed(detector: &str, property: Option<Property>, sys: &PeriodicSystem, p: &DetectorParams, e: &Error) -> Self {
        let mut v = Verdict::new(detector, property, sys, p);
        v.summary = format!("detector error: {e}");
        v.error = Some(e.to_string());
        v
    }

    fn measure(&mut self, key: &str, value: f64) {
        self.measurements.insert(key.to_string(), value);
    }

    pub fn series(&self, kind: SeriesKind) -> Option<&Series> {
        self.series.iter().find(|s| s.kind == kind)
    }
}

/// Region of a detector with its sample points (centre first).
#[derive(Debug, Clone)]
pub struct Region {
    pub index: usize,
    pub ball: Ball,
    pub samples: Vec<Point>,
}

fn check_horizon(h: u64) -> Result<()> {
    let max = max_horizon();
    if h > max {
        return Err(Error::HorizonTooLarge { requested: h, max });
    }
    Ok(())
}

/// Centre plus `n - 1` points of the ball.
pub(crate) fn ball_samples(space: &StateSpace, ball: &Ball, n: usize, seed: u64) -> Result<Vec<Point>> {
    if n == 0 {
        return Err(Error::EmptyRegion(format!("{} r={}", ball.center, ball.radius)));
    }
    let mut out = vec![ball.center.clone()];
    out.extend(space.sample_in_ball(ball, n - 1, seed)?);
    Ok(out)
}

/// Advance every state from time `n` to `n + 1`.
pub(crate) fn advance(sys: &PeriodicSystem, states: &mut [Point], n: u64) -> Result<()> {
    for s in states.iter_mut() {
        *s = sys.step(s, n)?;
    }
    Ok(())
}

/// Distance resolved at threshold `eps`: exact when at least `eps`
/// (and in general for non-symbolic points); symbolic distances below the
/// comparison window read as 0.
pub(crate) fn resolved_distance(space: &StateSpace, x: &Point, y: &Point, eps: f64) -> Result<f64> {
    match (x, y) {
        (Point::Symbolic { copy: c1, seq: s1 }, Point::Symbolic { copy: c2, seq: s2 }) => {
            if c1 != c2 {
                return Ok(CROSS_COMPONENT);
            }
            let len = symbols_for(eps) + 1;
            let (a, b) = (s1.prefix(len)?, s2.prefix(len)?);
            Ok(first_difference(&a, &b).map_or(0.0, |k| (-(k as f64)).exp2()))
        }
        _ => space.distance(x, y),
    }
}

fn first_difference(a: &[u8], b: &[u8]) -> Option<usize> {
    a.iter().zip(b).position(|(u, v)| u != v)
}

/// Largest pairwise distance among `states` as `(i, j, value)`, resolved at
/// `eps` like [`resolved_distance`].
pub(crate) fn spread(space: &StateSpace, states: &[Point], eps: f64) -> Result<(usize, usize, f64)> {
    if states.len() < 2 {
        return Ok((0, 0, 0.0));
    }
    if let Point::Symbolic { copy: c0, .. } = &states[0] {
        // ultrametric: the widest pair always involves states[0]
        if let Some(j) = states.iter().position(|s| s.copy() != *c0) {
            return Ok((0, j, CROSS_COMPONENT));
        }
        let len = symbols_for(eps) + 1;
        let first = states[0].seq().expect("symbolic").prefix(len)?;
        let mut best = (0, 0, 0.0);
        let mut best_k = len;
        for (j, s) in states.iter().enumerate().skip(1) {
            let w = s.seq().expect("symbolic").prefix(len)?;
            if let Some(k) = first_difference(&first, &w) {
                if k < best_k {
                    best_k = k;
                    best = (0, j, (-(k as f64)).exp2());
                    if k == 0 {
                        break;
                    }
                }
            }
        }
        return Ok(best);
    }
    let mut best = (0, 0, 0.0);
    for i in 0..states.len() {
        for j in i + 1..states.len() {
            let d = space.distance(&states[i], &states[j])?;
            if d > best.2 {
                best = (i, j, d);
            }
        }
    }
    Ok(best)
}

/// Bound-search classification of a set under the finite-horizon rules:
/// a fixed bound goes straight to `classify`; otherwise the smallest bound
/// `M` counts as evidence-for when the half-horizon already needed it and
/// `N >= 10 M`, and as evidence-against when the set is empty or `10 M > N`.
pub(crate) fn syndetic_evidence(set: &HittingSet, fixed: Option<u64>) -> SyndeticEvidence {
    let bound = set.min_syndetic_bound();
    let half_bound = set.truncate(set.horizon / 2).min_syndetic_bound();
    let hole = set.longest_hole();
    let outcome = match fixed {
        Some(m) => match set.classify(Mode::Syndetic(m)).outcome {
            Outcome::Holds => Evidence::For,
            Outcome::Fails => Evidence::Against,
            Outcome::Inconclusive => Evidence::Inconclusive,
        },
        None => match bound {
            None => Evidence::Against,
            Some(m) if m.saturating_mul(HORIZON_FACTOR) > set.horizon => Evidence::Against,
            Some(m) if half_bound == Some(m) => Evidence::For,
            Some(_) => Evidence::Inconclusive,
        },
    };
    SyndeticEvidence { outcome, bound, half_bound, hole }
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct SyndeticEvidence {
    pub outcome: Evidence,
    pub bound: Option<u64>,
    pub half_bound: Option<u64>,
    pub hole: Option<Span>,
}

/// Thick classification with run saturation: a failing set whose longest
/// run already appeared in the first half counts as evidence-against.
pub(crate) fn thick_evidence(set: &HittingSet, k: u64) -> (Evidence, Option<Span>) {
    let c = set.classify(Mode::Thick(k));
    let outcome = match c.outcome {
        Outcome::Holds => Evidence::For,
        Outcome::Inconclusive => Evidence::Inconclusive,
        Outcome::Fails => {
            let whole = set.longest_run().map_or(0, |r| r.len);
            let half = set.truncate(set.horizon / 2).longest_run().map_or(0, |r| r.len);
            if whole == half {
                Evidence::Against
            } else {
                Evidence::Inconclusive
            }
        }
    };
    (outcome, c.certificate)
}

/// Replays a certificate on `sys`. `None` for kinds that carry no
/// replayable claim.
pub fn verify(sys: &PeriodicSystem, cert: &Certificate) -> Result<Option<bool>> {
    let space = sys.space();
    let same = |claimed: f64, got: f64| {
        if space.is_symbolic() {
            claimed == got
        } else {
            (claimed - got).abs() <= 1e-9
        }
    };
    Ok(Some(match cert {
        Certificate::SeparatedPair { x, y, n, distance, .. } => {
            let fx = sys.iterate(&space.parse_point(x)?, *n)?;
            let fy = sys.iterate(&space.parse_point(y)?, *n)?;
            same(*distance, resolved_distance(space, &fx, &fy, *distance)?)
        }
        Certificate::DelayedPair { x, n, y, k, distance, .. } => {
            let fx = sys.iterate(&space.parse_point(x)?, n + k)?;
            let fy = sys.iterate(&space.parse_point(y)?, *k)?;
            same(*distance, resolved_distance(space, &fx, &fy, *distance)?)
        }
        Certificate::FirstHit { start, center, radius, n, .. } => {
            let ball = Ball::new(space.parse_point(center)?, *radius);
            let x = space.parse_point(start)?;
            match n {
                Some(n) => {
                    let before = (0..*n).try_fold(false, |hit, t| {
                        Ok::<bool, Error>(hit || space.contains(&ball, &sys.iterate(&x, t)?)?)
                    })?;
                    !before && space.contains(&ball, &sys.iterate(&x, *n)?)?
                }
                None => return Ok(None),
            }
        }
        _ => return Ok(None),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hitting::Role;

    #[test]
    fn evidence_combinators() {
        use Evidence::*;
        assert_eq!(Evidence::all([For, Inconclusive, For]), Inconclusive);
        assert_eq!(Evidence::all([For, Inconclusive, Against]), Against);
        assert_eq!(Evidence::any([Against, Inconclusive]), Inconclusive);
        assert_eq!(Evidence::any([Against, For]), For);
        assert_eq!(Evidence::all([]), For);
    }

    #[test]
    fn syndetic_rules() {
        let periodic = HittingSet::new(1000, Role::Stability, (0..=1000).step_by(4).collect());
        let e = syndetic_evidence(&periodic, None);
        assert_eq!(e.outcome, Evidence::For);
        assert_eq!(e.bound, Some(3));
        let early = HittingSet::new(1000, Role::Stability, (0..20).collect());
        assert_eq!(syndetic_evidence(&early, None).outcome, Evidence::Against);
        let empty = HittingSet::new(1000, Role::Stability, vec![]);
        assert_eq!(syndetic_evidence(&empty, None).outcome, Evidence::Against);
        let late_gap: Vec<u64> = (0..=1000).filter(|n| !(700..750).contains(n)).collect();
        let late = HittingSet::new(1000, Role::Stability, late_gap);
        assert_eq!(syndetic_evidence(&late, None).outcome, Evidence::Inconclusive);
        assert_eq!(syndetic_evidence(&late, Some(60)).outcome, Evidence::For);
    }

    #[test]
    fn thick_rules() {
        let sparse = HittingSet::new(1000, Role::Separation, (0..=1000).step_by(2).collect());
        assert_eq!(thick_evidence(&sparse, 10).0, Evidence::Against);
        let late: Vec<u64> = (0..=1000).step_by(2).chain(800..805).collect();
        let growing = HittingSet::new(1000, Role::Separation, late);
        assert_eq!(thick_evidence(&growing, 10).0, Evidence::Inconclusive);
        let blocks = HittingSet::new(1000, Role::Separation, (100..200).collect());
        let (e, span) = thick_evidence(&blocks, 10);
        assert_eq!(e, Evidence::For);
        assert_eq!(span, Some(Span { start: 100, len: 11 }));
    }

    #[test]
    fn basis_and_validation() {
        let p = DetectorParams { basis_from: 2, basis_depth: 4, ..Default::default() };
        assert_eq!(p.basis_radii(), vec![0.25, 0.125, 0.0625]);
        assert!(p.validate().is_ok());
        let bad = DetectorParams { pair_samples: 1, ..Default::default() };
        assert!(matches!(bad.validate(), Err(Error::InvalidParameter(_))));
    }
}
