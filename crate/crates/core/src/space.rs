//! Concrete metric state spaces with balls, finite covers, nets and
//! deterministic sampling.
//!
//! Angles are `u128` fractions of a full turn, so rotation is wrapping
//! addition and reduction mod 2π is exact. Distinct components (the circle
//! and the isolated points, the two symbolic copies) sit at distance
//! [`CROSS_COMPONENT`].

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::stream_rng;
use crate::symbolic::{seq, Seq, SymbolContext, SymbolicModel};

/// Distance between points of different components.
pub const CROSS_COMPONENT: f64 = 2.0;
/// Symbols shown in serialized symbolic points.
pub const DEFAULT_WINDOW: usize = 64;
/// Symbols compared before falling back to structural equality.
pub const MAX_WINDOW: usize = 4096;
/// Default cap on epsilon-net size.
pub const DEFAULT_MAX_NET: usize = 1 << 16;

const TURN: f64 = 340_282_366_920_938_463_463_374_607_431_768_211_456.0; // 2^128
const HALF_TURN: u128 = 1 << 127;

pub fn turns_to_radians(t: u128) -> f64 {
    t as f64 / TURN * TAU
}

pub fn radians_to_turns(theta: f64) -> u128 {
    let r = theta.rem_euclid(TAU) / TAU;
    let scaled = r * TURN;
    if scaled >= TURN {
        0
    } else {
        scaled as u128
    }
}

/// Arc length between two angles given in turns.
pub fn arc(a: u128, b: u128) -> f64 {
    let d = a.wrapping_sub(b);
    turns_to_radians(d.min(d.wrapping_neg()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Copy {
    #[serde(rename = "a")]
    A,
    #[serde(rename = "b")]
    B,
}

impl Copy {
    pub fn other(self) -> Copy {
        match self {
            Copy::A => Copy::B,
            Copy::B => Copy::A,
        }
    }

    fn tag(self) -> char {
        match self {
            Copy::A => 'a',
            Copy::B => 'b',
        }
    }
}

/// The two isolated points `(2,0)` and `(3,0)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Isolated {
    Two,
    Three,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Point {
    Circle { turns: u128 },
    Isolated(Isolated),
    /// Point of circle `A` (centre 0) or `B` (centre 2); the tangent point
    /// is always stored as `A` at angle 0.
    Tangent { circle: Copy, turns: u128 },
    /// `copy` is `None` in single-copy symbolic spaces.
    Symbolic { copy: Option<Copy>, seq: Seq },
}

impl Point {
    pub fn circle(theta: f64) -> Point {
        Point::Circle { turns: radians_to_turns(theta) }
    }

    pub fn tangent(circle: Copy, turns: u128) -> Point {
        if circle == Copy::B && turns == HALF_TURN {
            Point::Tangent { circle: Copy::A, turns: 0 }
        } else {
            Point::Tangent { circle, turns }
        }
    }

    pub fn symbolic(copy: Option<Copy>, seq: Seq) -> Point {
        Point::Symbolic { copy, seq }
    }

    /// Component index used for region scoping (0 = circle / copy `a`).
    pub fn component(&self) -> usize {
        match self {
            Point::Circle { .. } => 0,
            Point::Isolated(_) => 1,
            Point::Tangent { circle: Copy::A, .. } => 0,
            Point::Tangent { circle: Copy::B, .. } => 1,
            Point::Symbolic { copy: Some(Copy::B), .. } => 1,
            Point::Symbolic { .. } => 0,
        }
    }

    pub fn seq(&self) -> Option<&Seq> {
        match self {
            Point::Symbolic { seq, .. } => Some(seq),
            _ => None,
        }
    }

    pub fn copy(&self) -> Option<Copy> {
        match self {
            Point::Symbolic { copy, .. } => *copy,
            Point::Tangent { circle, .. } => Some(*circle),
            _ => None,
        }
    }

    /// Angle in radians for circle-like points.
    pub fn angle(&self) -> Option<f64> {
        match self {
            Point::Circle { turns } | Point::Tangent { turns, .. } => Some(turns_to_radians(*turns)),
            _ => None,
        }
    }
}

fn fmt_angle(f: &mut fmt::Formatter<'_>, turns: u128) -> fmt::Result {
    write!(f, "θ={:.17}@t=0x{turns:032x}", turns_to_radians(turns))
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Point::Circle { turns } => {
                f.write_str("circle:")?;
                fmt_angle(f, *turns)
            }
            Point::Isolated(Isolated::Two) => f.write_str("iso:(2,0)"),
            Point::Isolated(Isolated::Three) => f.write_str("iso:(3,0)"),
            Point::Tangent { circle, turns } => {
                write!(f, "tan:{}:", if *circle == Copy::A { 'A' } else { 'B' })?;
                fmt_angle(f, *turns)
            }
            Point::Symbolic { copy, seq } => {
                f.write_str("sym:")?;
                if let Some(c) = copy {
                    write!(f, "{}:", c.tag())?;
                }
                let len = seq.literal_len().unwrap_or(DEFAULT_WINDOW).min(DEFAULT_WINDOW);
                match seq.prefix(len) {
                    Ok(w) => {
                        for s in w {
                            write!(f, "{s}")?;
                        }
                    }
                    Err(_) => f.write_str("?")?,
                }
                if seq.literal_len().is_none() {
                    write!(f, "|{seq}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SpaceId {
    Circle,
    CirclePlusIsolated,
    TwoTangentCircles,
    PlainSymbolic,
    TwoCopySymbolic,
}

impl fmt::Display for SpaceId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpaceId::Circle => "circle",
            SpaceId::CirclePlusIsolated => "circle-plus-isolated",
            SpaceId::TwoTangentCircles => "two-tangent-circles",
            SpaceId::PlainSymbolic => "plain-symbolic",
            SpaceId::TwoCopySymbolic => "two-copy-symbolic",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpaceKind {
    Circle,
    CirclePlusIsolated,
    TwoTangentCircles,
    PlainSymbolic(SymbolicModel),
    TwoCopySymbolic { a: SymbolicModel, b: SymbolicModel },
}

/// Which part of a space a detector looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scope {
    #[default]
    All,
    /// Circle `A`, the circle of the isolated-point space, or copy `a`.
    A,
    /// Circle `B`, the isolated points, or copy `b`.
    B,
}

impl Scope {
    pub fn admits(self, component: usize) -> bool {
        match self {
            Scope::All => true,
            Scope::A => component == 0,
            Scope::B => component == 1,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::All => "all",
            Scope::A => "a",
            Scope::B => "b",
        })
    }
}

/// Open ball `{y : d(center, y) < radius}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Point,
    pub radius: f64,
}

impl Ball {
    pub fn new(center: Point, radius: f64) -> Ball {
        Ball { center, radius }
    }
}

#[derive(Debug, Clone)]
pub struct FiniteCover {
    pub members: Vec<Ball>,
    pub certified_on: Vec<Point>,
}

#[derive(Debug)]
pub struct StateSpace {
    kind: SpaceKind,
    ctx: SymbolContext,
    max_net: usize,
}

impl StateSpace {
    pub fn new(kind: SpaceKind, ctx: SymbolContext) -> Arc<Self> {
        Arc::new(StateSpace { kind, ctx, max_net: DEFAULT_MAX_NET })
    }

    pub fn circle() -> Arc<Self> {
        Self::new(SpaceKind::Circle, SymbolContext::golden())
    }

    pub fn with_max_net(kind: SpaceKind, ctx: SymbolContext, max_net: usize) -> Arc<Self> {
        Arc::new(StateSpace { kind, ctx, max_net })
    }

    pub fn kind(&self) -> SpaceKind {
        self.kind
    }

    pub fn id(&self) -> SpaceId {
        match self.kind {
            SpaceKind::Circle => SpaceId::Circle,
            SpaceKind::CirclePlusIsolated => SpaceId::CirclePlusIsolated,
            SpaceKind::TwoTangentCircles => SpaceId::TwoTangentCircles,
            SpaceKind::PlainSymbolic(_) => SpaceId::PlainSymbolic,
            SpaceKind::TwoCopySymbolic { .. } => SpaceId::TwoCopySymbolic,
        }
    }

    pub fn context(&self) -> &SymbolContext {
        &self.ctx
    }

    pub fn is_symbolic(&self) -> bool {
        matches!(self.kind, SpaceKind::PlainSymbolic(_) | SpaceKind::TwoCopySymbolic { .. })
    }

    pub fn diameter(&self) -> f64 {
        match self.kind {
            SpaceKind::Circle => PI,
            SpaceKind::CirclePlusIsolated => PI,
            SpaceKind::TwoTangentCircles => TAU,
            SpaceKind::PlainSymbolic(_) => 1.0,
            SpaceKind::TwoCopySymbolic { .. } => CROSS_COMPONENT,
        }
    }

    /// Components present in this space.
    pub fn components(&self) -> &'static [usize] {
        match self.kind {
            SpaceKind::Circle | SpaceKind::PlainSymbolic(_) => &[0],
            _ => &[0, 1],
        }
    }

    /// Symbolic model backing copy `copy` (or the single copy).
    pub fn model(&self, copy: Option<Copy>) -> Option<SymbolicModel> {
        match (self.kind, copy) {
            (SpaceKind::PlainSymbolic(m), _) => Some(m),
            (SpaceKind::TwoCopySymbolic { a, .. }, Some(Copy::A)) => Some(a),
            (SpaceKind::TwoCopySymbolic { b, .. }, Some(Copy::B)) => Some(b),
            _ => None,
        }
    }

    fn check(&self, x: &Point) -> Result<()> {
        let ok = match (self.kind, x) {
            (SpaceKind::Circle, Point::Circle { .. }) => true,
            (SpaceKind::CirclePlusIsolated, Point::Circle { .. } | Point::Isolated(_)) => true,
            (SpaceKind::TwoTangentCircles, Point::Tangent { .. }) => true,
            (SpaceKind::PlainSymbolic(_), Point::Symbolic { copy: None, .. }) => true,
            (SpaceKind::TwoCopySymbolic { .. }, Point::Symbolic { copy: Some(_), .. }) => true,
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::MixedSpace(format!("{x} is not a point of the {} space", self.id())))
        }
    }

    pub fn distance(&self, x: &Point, y: &Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(match (x, y) {
            (Point::Circle { turns: a }, Point::Circle { turns: b }) => arc(*a, *b),
            (Point::Isolated(a), Point::Isolated(b)) if a == b => 0.0,
            (Point::Isolated(_), _) | (_, Point::Isolated(_)) => CROSS_COMPONENT,
            (Point::Tangent { circle: c1, turns: a }, Point::Tangent { circle: c2, turns: b }) => {
                if c1 == c2 {
                    arc(*a, *b)
                } else {
                    let (ta, tb) = if *c1 == Copy::A { (*a, *b) } else { (*b, *a) };
                    arc(ta, 0) + arc(tb, HALF_TURN)
                }
            }
            (Point::Symbolic { copy: c1, seq: s1 }, Point::Symbolic { copy: c2, seq: s2 }) => {
                if c1 != c2 {
                    CROSS_COMPONENT
                } else {
                    match agreement(s1, s2, MAX_WINDOW)? {
                        None => 0.0,
                        Some(k) => (-(k as f64)).exp2(),
                    }
                }
            }
            _ => return Err(Error::MixedSpace(format!("{x} and {y}"))),
        })
    }

    /// Whether `d(x, y) >= eps`, reading only the symbols that decide it.
    pub fn separated(&self, x: &Point, y: &Point, eps: f64) -> Result<bool> {
        if let (Point::Symbolic { copy: c1, seq: s1 }, Point::Symbolic { copy: c2, seq: s2 }) =
            (x, y)
        {
            self.check(x)?;
            self.check(y)?;
            if c1 != c2 {
                return Ok(CROSS_COMPONENT >= eps);
            }
            if eps > 1.0 {
                return Ok(false);
            }
            let len = symbols_for(eps) + 1;
            return Ok(s1.prefix(len)? != s2.prefix(len)?);
        }
        Ok(self.distance(x, y)? >= eps)
    }

    pub fn contains(&self, ball: &Ball, y: &Point) -> Result<bool> {
        Ok(!self.separated(&ball.center, y, ball.radius)?)
    }

    /// Indices of the cover members containing `x` (possibly none).
    pub fn locate_in_cover(&self, cover: &FiniteCover, x: &Point) -> Result<Vec<usize>> {
        let mut hits = Vec::new();
        for (i, b) in cover.members.iter().enumerate() {
            if self.contains(b, x)? {
                hits.push(i);
            }
        }
        Ok(hits)
    }

    /// Build a cover, failing with `CoverageGap` if a sample is uncovered.
    pub fn certify_cover(&self, members: Vec<Ball>, samples: Vec<Point>) -> Result<FiniteCover> {
        let cover = FiniteCover { members, certified_on: Vec::new() };
        for p in &samples {
            if self.locate_in_cover(&cover, p)?.is_empty() {
                return Err(Error::CoverageGap(p.to_string()));
            }
        }
        Ok(FiniteCover { certified_on: samples, ..cover })
    }

    /// Largest radius `r` on the dyadic grid below `max` such that every
    /// sampled ball of radius `r` lies inside one cover member (checked on
    /// the given probe points).
    pub fn lebesgue_radius(&self, cover: &FiniteCover, probes: &[Point], max: f64) -> Result<f64> {
        let mut r = max;
        'shrink: for _ in 0..40 {
            for p in probes {
                let inside = cover.members.iter().try_fold(false, |acc, b| {
                    if acc {
                        return Ok::<bool, Error>(true);
                    }
                    Ok(self.distance(&b.center, p)? + r < b.radius)
                })?;
                if !inside {
                    r /= 2.0;
                    continue 'shrink;
                }
            }
            return Ok(r);
        }
        Ok(0.0)
    }

    /// Finite net: every point of the scoped region lies within `eps` of a
    /// net point.
    pub fn epsilon_net(&self, eps: f64, seed: u64, scope: Scope) -> Result<Vec<Point>> {
        if !(eps > 0.0) {
            return Err(Error::InvalidParameter(format!("net radius {eps}")));
        }
        let mut net = Vec::new();
        match self.kind {
            SpaceKind::Circle | SpaceKind::CirclePlusIsolated => {
                if scope.admits(0) {
                    for t in self.circle_net(eps)? {
                        net.push(Point::Circle { turns: t });
                    }
                }
                if self.kind == SpaceKind::CirclePlusIsolated && scope.admits(1) {
                    net.push(Point::Isolated(Isolated::Two));
                    net.push(Point::Isolated(Isolated::Three));
                }
            }
            SpaceKind::TwoTangentCircles => {
                let turns = self.circle_net(eps)?;
                for c in [Copy::A, Copy::B] {
                    if !scope.admits(if c == Copy::A { 0 } else { 1 }) {
                        continue;
                    }
                    for &t in &turns {
                        let p = Point::tangent(c, t);
                        if !net.contains(&p) {
                            net.push(p);
                        }
                    }
                }
            }
            SpaceKind::PlainSymbolic(_) | SpaceKind::TwoCopySymbolic { .. } => {
                let depth = symbols_for(eps) + 1;
                let copies: Vec<Option<Copy>> = match self.kind {
                    SpaceKind::PlainSymbolic(_) => vec![None],
                    _ => [Copy::A, Copy::B]
                        .into_iter()
                        .filter(|c| scope.admits(if *c == Copy::A { 0 } else { 1 }))
                        .map(Some)
                        .collect(),
                };
                let mut index = 0u64;
                for copy in copies {
                    let model = self.model(copy).expect("symbolic copy has a model");
                    let words = model.words(&self.ctx, depth)?;
                    if net.len() + words.len() > self.max_net {
                        return Err(Error::NetTooLarge {
                            needed: net.len() + words.len(),
                            max: self.max_net,
                        });
                    }
                    for w in words {
                        let mut rng = stream_rng(seed, index);
                        index += 1;
                        let s = model.sample_in_cylinder(&self.ctx, &w, &mut rng)?;
                        net.push(Point::symbolic(copy, s));
                    }
                }
            }
        }
        Ok(net)
    }

    fn circle_net(&self, eps: f64) -> Result<Vec<u128>> {
        let n = (TAU / eps).ceil() as usize;
        if n > self.max_net {
            return Err(Error::NetTooLarge { needed: n, max: self.max_net });
        }
        let step = u128::MAX / n as u128 + 1;
        Ok((0..n as u128).map(|i| i.wrapping_mul(step)).collect())
    }

    /// `n` points, deterministic in `seed`; point `i` depends only on
    /// `(seed, i)`.
    pub fn sample_points(&self, n: usize, seed: u64, scope: Scope) -> Result<Vec<Point>> {
        (0..n as u64).map(|i| self.sample_point(seed, i, scope)).collect()
    }

    pub fn sample_point(&self, seed: u64, index: u64, scope: Scope) -> Result<Point> {
        let mut rng = stream_rng(seed, index);
        let pick = |rng: &mut rand_chacha::ChaCha8Rng| -> usize {
            match scope {
                Scope::A => 0,
                Scope::B => 1,
                Scope::All => {
                    if index < 2 {
                        index as usize
                    } else {
                        rng.random_range(0..2)
                    }
                }
            }
        };
        Ok(match self.kind {
            SpaceKind::Circle => Point::Circle { turns: rng.random() },
            SpaceKind::CirclePlusIsolated => {
                // the first samples are the isolated points, later ones
                // land on them with probability 1/10
                let isolated = match scope {
                    Scope::A => None,
                    Scope::B => Some(index % 2 == 0),
                    Scope::All if index < 2 => Some(index == 0),
                    Scope::All => {
                        (rng.random_range(0..10) == 0).then(|| rng.random_range(0..2) == 0)
                    }
                };
                match isolated {
                    Some(true) => Point::Isolated(Isolated::Two),
                    Some(false) => Point::Isolated(Isolated::Three),
                    None => Point::Circle { turns: rng.random() },
                }
            }
            SpaceKind::TwoTangentCircles => {
                let c = if pick(&mut rng) == 0 { Copy::A } else { Copy::B };
                Point::tangent(c, rng.random())
            }
            SpaceKind::PlainSymbolic(m) => Point::symbolic(None, m.sample(&self.ctx, &mut rng)?),
            SpaceKind::TwoCopySymbolic { .. } => {
                let c = if pick(&mut rng) == 0 { Copy::A } else { Copy::B };
                let m = self.model(Some(c)).expect("copy model");
                Point::symbolic(Some(c), m.sample(&self.ctx, &mut rng)?)
            }
        })
    }

    /// `n` points of `ball`, deterministic in `seed`. The centre is not
    /// included.
    pub fn sample_in_ball(&self, ball: &Ball, n: usize, seed: u64) -> Result<Vec<Point>> {
        self.check(&ball.center)?;
        let r = ball.radius;
        let mut out = Vec::with_capacity(n);
        for i in 0..n as u64 {
            let mut rng = stream_rng(seed, i);
            let p = match &ball.center {
                Point::Circle { turns } => {
                    Point::Circle { turns: turns.wrapping_add(arc_offset(&mut rng, r)) }
                }
                Point::Isolated(_) if r <= CROSS_COMPONENT => ball.center.clone(),
                Point::Isolated(_) => self.sample_point(seed, i, Scope::All)?,
                Point::Tangent { circle, turns } => {
                    let to_p = match circle {
                        Copy::A => arc(*turns, 0),
                        Copy::B => arc(*turns, HALF_TURN),
                    };
                    if to_p < r && rng.random_range(0..2) == 0 {
                        let (other, base) = match circle {
                            Copy::A => (Copy::B, HALF_TURN),
                            Copy::B => (Copy::A, 0),
                        };
                        Point::tangent(other, base.wrapping_add(arc_offset(&mut rng, r - to_p)))
                    } else {
                        Point::tangent(*circle, turns.wrapping_add(arc_offset(&mut rng, r)))
                    }
                }
                Point::Symbolic { copy, seq } => {
                    if r > CROSS_COMPONENT {
                        self.sample_point(seed, i, Scope::All)?
                    } else {
                        let depth = if r > 1.0 { 0 } else { symbols_for(r) + 1 };
                        let word = seq.prefix(depth)?;
                        let model = self.model(*copy).expect("symbolic copy has a model");
                        Point::symbolic(*copy, model.sample_in_cylinder(&self.ctx, &word, &mut rng)?)
                    }
                }
            };
            out.push(p);
        }
        Ok(out)
    }

    pub fn format_point(&self, x: &Point) -> String {
        x.to_string()
    }

    pub fn parse_point(&self, text: &str) -> Result<Point> {
        let p = parse_point(&self.ctx, text)?;
        self.check(&p)?;
        Ok(p)
    }
}

/// Largest `k` with `2^-k >= eps` (symbols that decide separation at `eps`
/// are indices `0..=k`).
pub fn symbols_for(eps: f64) -> usize {
    if eps >= 1.0 {
        return 0;
    }
    let k = (-eps.log2()).floor();
    let mut k = k as usize;
    // guard against log rounding at exact powers of two
    while (-((k + 1) as f64)).exp2() >= eps {
        k += 1;
    }
    while k > 0 && (-(k as f64)).exp2() < eps {
        k -= 1;
    }
    k
}

/// Signed offset of absolute size below `r` radians, as turns.
fn arc_offset<R: Rng>(rng: &mut R, r: f64) -> u128 {
    let max = (r.min(PI) / TAU * TURN * (1.0 - 1e-12)) as u128;
    if max == 0 {
        return 0;
    }
    let off = rng.random_range(0..max);
    if rng.random_range(0..2) == 0 {
        off
    } else {
        off.wrapping_neg()
    }
}

/// Index of the first disagreement within `limit` symbols; `None` if the
/// sequences are structurally identical.
pub fn agreement(x: &Seq, y: &Seq, limit: usize) -> Result<Option<usize>> {
    if std::sync::Arc::ptr_eq(x, y) || x == y {
        return Ok(None);
    }
    let mut sx = x.stream();
    let mut sy = y.stream();
    for i in 0..limit {
        if sx.next_symbol()? != sy.next_symbol()? {
            return Ok(Some(i));
        }
    }
    Err(Error::WindowExhausted { limit })
}

fn parse_angle(text: &str) -> Result<u128> {
    let body = text
        .strip_prefix("θ=")
        .ok_or_else(|| Error::Parse(format!("expected θ= in {text:?}")))?;
    if let Some((_, hex)) = body.split_once("@t=0x") {
        return u128::from_str_radix(hex, 16).map_err(|e| Error::Parse(format!("{hex:?}: {e}")));
    }
    let theta: f64 = body.parse().map_err(|_| Error::Parse(format!("angle {body:?}")))?;
    Ok(radians_to_turns(theta))
}

/// Parse the tagged text form used in reports.
pub fn parse_point(ctx: &SymbolContext, text: &str) -> Result<Point> {
    if let Some(rest) = text.strip_prefix("circle:") {
        return Ok(Point::Circle { turns: parse_angle(rest)? });
    }
    match text {
        "iso:(2,0)" => return Ok(Point::Isolated(Isolated::Two)),
        "iso:(3,0)" => return Ok(Point::Isolated(Isolated::Three)),
        _ => {}
    }
    if let Some(rest) = text.strip_prefix("tan:") {
        let (c, angle) = rest.split_at(rest.find(':').unwrap_or(0));
        let circle = match c {
            "A" => Copy::A,
            "B" => Copy::B,
            _ => return Err(Error::Parse(format!("circle tag in {text:?}"))),
        };
        return Ok(Point::tangent(circle, parse_angle(&angle[1..])?));
    }
    if let Some(rest) = text.strip_prefix("sym:") {
        let (copy, body) = match rest.split_once(':') {
            Some(("a", b)) => (Some(Copy::A), b),
            Some(("b", b)) => (Some(Copy::B), b),
            Some(_) => return Err(Error::Parse(format!("copy tag in {text:?}"))),
            None => (None, rest),
        };
        let (window, expr) = match body.split_once('|') {
            Some((w, e)) => (w, Some(e)),
            None => (body, None),
        };
        if !window.bytes().all(|b| b == b'0' || b == b'1') {
            return Err(Error::Parse(format!("window in {text:?}")));
        }
        let bits: Vec<u8> = window.bytes().map(|b| b - b'0').collect();
        let s = match expr {
            None => seq::literal(&bits),
            Some(e) => {
                let s = ctx.parse(e)?;
                if s.prefix(bits.len())? != bits {
                    return Err(Error::Parse(format!("window disagrees with generator in {text:?}")));
                }
                s
            }
        };
        return Ok(Point::symbolic(copy, s));
    }
    Err(Error::Parse(format!("unrecognized point {text:?}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e1() -> Arc<StateSpace> {
        StateSpace::new(SpaceKind::CirclePlusIsolated, SymbolContext::golden())
    }

    #[test]
    fn circle_distance_is_arc_length() {
        let s = StateSpace::circle();
        let d = s.distance(&Point::circle(0.0), &Point::circle(PI)).unwrap();
        assert!((d - PI).abs() < 1e-12);
        let d = s.distance(&Point::circle(0.1), &Point::circle(TAU - 0.1)).unwrap();
        assert!((d - 0.2).abs() < 1e-12);
    }

    #[test]
    fn symbolic_distance_is_first_disagreement() {
        let s = StateSpace::new(SpaceKind::PlainSymbolic(SymbolicModel::Odometer), SymbolContext::golden());
        let x = Point::symbolic(None, seq::prefixed(&[0, 1, 0, 0], seq::random_bits(1)));
        let y = Point::symbolic(None, seq::prefixed(&[0, 1, 0, 1], seq::random_bits(1)));
        assert_eq!(s.distance(&x, &y).unwrap(), 0.125);
        assert_eq!(s.distance(&x, &x).unwrap(), 0.0);
        assert!(s.separated(&x, &y, 0.125).unwrap());
        assert!(!s.separated(&x, &y, 0.126).unwrap());
    }

    #[test]
    fn cross_copy_distance_is_constant() {
        let s = StateSpace::new(
            SpaceKind::TwoCopySymbolic { a: SymbolicModel::Sturmian, b: SymbolicModel::Sturmian },
            SymbolContext::golden(),
        );
        let x = s.sample_point(1, 0, Scope::A).unwrap();
        let y = s.sample_point(1, 1, Scope::B).unwrap();
        assert_eq!(s.distance(&x, &y).unwrap(), 2.0);
    }

    #[test]
    fn mixed_points_are_rejected() {
        let s = StateSpace::circle();
        assert!(matches!(
            s.distance(&Point::circle(0.0), &Point::Isolated(Isolated::Two)),
            Err(Error::MixedSpace(_))
        ));
    }

    #[test]
    fn exhausted_window_is_an_error() {
        let s = StateSpace::new(SpaceKind::PlainSymbolic(SymbolicModel::Odometer), SymbolContext::golden());
        let x = Point::symbolic(None, seq::literal(&[0, 1]));
        let y = Point::symbolic(None, seq::literal(&[0, 1, 1]));
        assert!(matches!(s.distance(&x, &y), Err(Error::WindowExhausted { .. })));
    }

    #[test]
    fn tangent_point_is_canonical() {
        let s = StateSpace::new(SpaceKind::TwoTangentCircles, SymbolContext::golden());
        let p_b = Point::tangent(Copy::B, HALF_TURN);
        assert_eq!(p_b, Point::tangent(Copy::A, 0));
        let a = Point::tangent(Copy::A, radians_to_turns(0.3));
        let b = Point::tangent(Copy::B, radians_to_turns(PI - 0.2));
        assert!((s.distance(&a, &b).unwrap() - 0.5).abs() < 1e-9);
    }

    #[test]
    fn cover_lookup() {
        let s = StateSpace::circle();
        let cover = FiniteCover {
            members: vec![Ball::new(Point::circle(0.0), 1.0), Ball::new(Point::circle(PI), 1.0)],
            certified_on: vec![],
        };
        assert_eq!(s.locate_in_cover(&cover, &Point::circle(0.5)).unwrap(), vec![0]);
        assert!(s.locate_in_cover(&cover, &Point::circle(PI / 2.0)).unwrap().is_empty());
        let big = FiniteCover {
            members: vec![Ball::new(Point::circle(0.0), 4.0), Ball::new(Point::circle(PI), 4.0)],
            certified_on: vec![],
        };
        assert_eq!(s.locate_in_cover(&big, &Point::circle(PI / 2.0)).unwrap(), vec![0, 1]);
        assert!(matches!(
            s.certify_cover(cover.members.clone(), vec![Point::circle(PI / 2.0)]),
            Err(Error::CoverageGap(_))
        ));
    }

    #[test]
    fn circle_net_quarter_turns() {
        let net = StateSpace::circle().epsilon_net(PI / 2.0, 0, Scope::All).unwrap();
        assert_eq!(net.len(), 4);
        let angles: Vec<f64> = net.iter().map(|p| p.angle().unwrap()).collect();
        for (i, a) in angles.iter().enumerate() {
            assert!((a - i as f64 * PI / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symbolic_net_one_point_per_cylinder() {
        let ctx = SymbolContext::golden();
        let s = StateSpace::new(SpaceKind::PlainSymbolic(SymbolicModel::Sturmian), ctx.clone());
        let net = s.epsilon_net(0.125, 3, Scope::All).unwrap();
        let words = ctx.params.factor_language(4).unwrap();
        assert_eq!(net.len(), words.len());
        let got: std::collections::BTreeSet<_> =
            net.iter().map(|p| p.seq().unwrap().prefix(4).unwrap()).collect();
        assert_eq!(got, words);
    }

    #[test]
    fn e1_sampling_includes_isolated_points() {
        let pts = e1().sample_points(100, 9, Scope::All).unwrap();
        assert!(pts.contains(&Point::Isolated(Isolated::Two)));
        assert!(pts.contains(&Point::Isolated(Isolated::Three)));
    }

    #[test]
    fn ball_samples_stay_inside() {
        let ctx = SymbolContext::golden();
        let spaces = [
            StateSpace::circle(),
            StateSpace::new(SpaceKind::TwoTangentCircles, ctx.clone()),
            StateSpace::new(
                SpaceKind::TwoCopySymbolic { a: SymbolicModel::CodedOdometer, b: SymbolicModel::CodedChacon },
                ctx,
            ),
        ];
        for s in spaces {
            for center in s.sample_points(6, 2, Scope::All).unwrap() {
                for r in [0.3, 1.0 / 64.0] {
                    let ball = Ball::new(center.clone(), r);
                    for y in s.sample_in_ball(&ball, 5, 8).unwrap() {
                        assert!(s.distance(&center, &y).unwrap() < r, "{center} {y}");
                    }
                }
            }
        }
    }

    #[test]
    fn codec_round_trip() {
        let ctx = SymbolContext::golden();
        let spaces = [
            e1(),
            StateSpace::new(SpaceKind::TwoTangentCircles, ctx.clone()),
            StateSpace::new(
                SpaceKind::TwoCopySymbolic { a: SymbolicModel::CodedOdometer, b: SymbolicModel::Sturmian },
                ctx.clone(),
            ),
            StateSpace::new(SpaceKind::PlainSymbolic(SymbolicModel::Chacon), ctx),
        ];
        for s in spaces {
            for p in s.sample_points(10, 4, Scope::All).unwrap() {
                let text = p.to_string();
                assert_eq!(s.parse_point(&text).unwrap(), p, "{text}");
            }
        }
        let p = e1().parse_point("circle:θ=3.14159265358979").unwrap();
        assert!((p.angle().unwrap() - 3.14159265358979).abs() < 1e-12);
    }

    #[test]
    fn symbols_for_powers_of_two() {
        assert_eq!(symbols_for(1.0), 0);
        assert_eq!(symbols_for(0.5), 1);
        assert_eq!(symbols_for(0.3), 1);
        assert_eq!(symbols_for(0.125), 3);
        assert_eq!(symbols_for(0.1), 3);
    }
}
