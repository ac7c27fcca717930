//! Periodic non-autonomous systems `f_1, f_2, ...` with `f_{n+p} = f_n`.

use std::fmt;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::space::{Point, StateSpace};

/// Default cap on orbit horizons, overridable through `PERDYN_MAX_HORIZON`.
pub const DEFAULT_MAX_HORIZON: u64 = 10_000_000;

pub fn max_horizon() -> u64 {
    static MAX: OnceLock<u64> = OnceLock::new();
    *MAX.get_or_init(|| {
        std::env::var("PERDYN_MAX_HORIZON")
            .ok()
            .and_then(|v| v.trim().parse().ok())
            .unwrap_or(DEFAULT_MAX_HORIZON)
    })
}

/// Declared continuity modulus of a map on one component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Modulus {
    Unknown,
    /// `d(fx, fy) <= factor * d(x, y)` for points of the component.
    Lipschitz(f64),
}

/// A total continuous map of a state space. Maps are pure functions of the
/// point.
pub trait Map: Send + Sync + fmt::Debug {
    fn apply(&self, x: &Point) -> Result<Point>;

    fn label(&self) -> String;

    /// Modulus on component `part`.
    fn modulus(&self, _part: usize) -> Modulus {
        Modulus::Unknown
    }

    /// Component receiving the whole of component `part`, if there is one.
    fn image_part(&self, _part: usize) -> Option<usize> {
        None
    }
}

pub type MapHandle = Arc<dyn Map>;

type PointFn = dyn Fn(&Point) -> Result<Point> + Send + Sync;

/// Map given by a closure plus declared per-component structure.
#[derive(Clone)]
pub struct FnMap {
    label: String,
    f: Arc<PointFn>,
    moduli: Vec<Modulus>,
    images: Vec<Option<usize>>,
}

impl fmt::Debug for FnMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FnMap").field("label", &self.label).finish()
    }
}

impl FnMap {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(&Point) -> Result<Point> + Send + Sync + 'static,
    ) -> Self {
        FnMap { label: label.into(), f: Arc::new(f), moduli: Vec::new(), images: Vec::new() }
    }

    /// Declare modulus and image component for component `part`.
    pub fn on_part(mut self, part: usize, modulus: Modulus, image: Option<usize>) -> Self {
        if self.moduli.len() <= part {
            self.moduli.resize(part + 1, Modulus::Unknown);
            self.images.resize(part + 1, None);
        }
        self.moduli[part] = modulus;
        self.images[part] = image;
        self
    }

    pub fn handle(self) -> MapHandle {
        Arc::new(self)
    }
}

impl Map for FnMap {
    fn apply(&self, x: &Point) -> Result<Point> {
        (self.f)(x)
    }

    fn label(&self) -> String {
        self.label.clone()
    }

    fn modulus(&self, part: usize) -> Modulus {
        self.moduli.get(part).copied().unwrap_or(Modulus::Unknown)
    }

    fn image_part(&self, part: usize) -> Option<usize> {
        self.images.get(part).copied().flatten()
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Identity;

impl Map for Identity {
    fn apply(&self, x: &Point) -> Result<Point> {
        Ok(x.clone())
    }

    fn label(&self) -> String {
        "id".into()
    }

    fn modulus(&self, _part: usize) -> Modulus {
        Modulus::Lipschitz(1.0)
    }

    fn image_part(&self, part: usize) -> Option<usize> {
        Some(part)
    }
}

/// `maps[k-1] ∘ ... ∘ maps[0]`, applied in sequence.
#[derive(Debug, Clone)]
pub struct Composition {
    maps: Vec<MapHandle>,
}

impl Composition {
    pub fn new(maps: Vec<MapHandle>) -> Self {
        Composition { maps }
    }
}

impl Map for Composition {
    fn apply(&self, x: &Point) -> Result<Point> {
        let mut y = x.clone();
        for m in &self.maps {
            y = m.apply(&y)?;
        }
        Ok(y)
    }

    fn label(&self) -> String {
        if self.maps.is_empty() {
            return "id".into();
        }
        let names: Vec<String> = self.maps.iter().rev().map(|m| m.label()).collect();
        names.join("∘")
    }

    fn modulus(&self, part: usize) -> Modulus {
        let mut factor = 1.0;
        let mut p = part;
        for m in &self.maps {
            match m.modulus(p) {
                Modulus::Lipschitz(l) => factor *= l,
                Modulus::Unknown => return Modulus::Unknown,
            }
            match m.image_part(p) {
                Some(q) => p = q,
                None => return Modulus::Unknown,
            }
        }
        Modulus::Lipschitz(factor)
    }

    fn image_part(&self, part: usize) -> Option<usize> {
        self.maps.iter().try_fold(part, |p, m| m.image_part(p))
    }
}

/// Finite orbit `x, f_1(x), f_1^2(x), ..., f_1^N(x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrbitSegment {
    pub start: Point,
    pub horizon: u64,
    pub states: Vec<Point>,
}

#[derive(Debug, Clone)]
pub struct PeriodicSystem {
    id: String,
    space: Arc<StateSpace>,
    maps: Vec<MapHandle>,
}

impl PeriodicSystem {
    pub fn new(id: impl Into<String>, space: Arc<StateSpace>, maps: Vec<MapHandle>) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidParameter("a periodic system needs at least one map".into()));
        }
        Ok(PeriodicSystem { id: id.into(), space, maps })
    }

    pub fn autonomous(id: impl Into<String>, space: Arc<StateSpace>, map: MapHandle) -> Self {
        PeriodicSystem { id: id.into(), space, maps: vec![map] }
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn space(&self) -> &Arc<StateSpace> {
        &self.space
    }

    pub fn period(&self) -> usize {
        self.maps.len()
    }

    pub fn maps(&self) -> &[MapHandle] {
        &self.maps
    }

    /// `f_i` for `i >= 1`, read cyclically.
    pub fn map(&self, i: usize) -> &MapHandle {
        assert!(i >= 1, "maps are indexed from 1");
        &self.maps[(i - 1) % self.maps.len()]
    }

    /// State at time `n + 1` from the state at time `n`.
    pub fn step(&self, x: &Point, n: u64) -> Result<Point> {
        self.maps[(n % self.maps.len() as u64) as usize].apply(x)
    }

    /// `f_1^n(x)`.
    pub fn iterate(&self, x: &Point, n: u64) -> Result<Point> {
        self.iterate_from(x, 0, n)
    }

    /// `f_{t+1}^n(x)`: `n` steps starting at time `t`.
    pub fn iterate_from(&self, x: &Point, t: u64, n: u64) -> Result<Point> {
        let mut y = x.clone();
        for k in t..t + n {
            y = self.step(&y, k)?;
        }
        Ok(y)
    }

    /// Autonomous system of `g = f_p ∘ ... ∘ f_1`.
    pub fn induced(&self) -> PeriodicSystem {
        if self.maps.len() == 1 {
            return PeriodicSystem { id: format!("{}/g", self.id), ..self.clone() };
        }
        PeriodicSystem {
            id: format!("{}/g", self.id),
            space: self.space.clone(),
            maps: vec![Arc::new(Composition::new(self.maps.clone()))],
        }
    }

    /// `f_i^k = f_{i+k-1} ∘ ... ∘ f_i`.
    pub fn window_compose(&self, i: usize, k: usize) -> MapHandle {
        assert!(i >= 1, "windows start at index 1");
        if k == 0 {
            return Arc::new(Identity);
        }
        Arc::new(Composition::new((i..i + k).map(|j| self.map(j).clone()).collect()))
    }

    pub fn orbit_segment(&self, x: &Point, horizon: u64) -> Result<OrbitSegment> {
        let max = max_horizon();
        if horizon > max {
            return Err(Error::HorizonTooLarge { requested: horizon, max });
        }
        let mut states = Vec::with_capacity(horizon as usize + 1);
        states.push(x.clone());
        for n in 0..horizon {
            let next = self.step(&states[n as usize], n)?;
            states.push(next);
        }
        Ok(OrbitSegment { start: x.clone(), horizon, states })
    }

    /// Lazy orbit starting at time 0.
    pub fn orbit(&self, x: &Point) -> Orbit<'_> {
        Orbit { sys: self, next: Some(Ok(x.clone())), time: 0 }
    }
}

pub struct Orbit<'a> {
    sys: &'a PeriodicSystem,
    next: Option<Result<Point>>,
    time: u64,
}

impl Iterator for Orbit<'_> {
    type Item = Result<Point>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        if let Ok(x) = &current {
            self.next = Some(self.sys.step(x, self.time));
            self.time += 1;
        }
        Some(current)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{radians_to_turns, Scope};

    fn rotation(label: &str, turns: u128) -> MapHandle {
        FnMap::new(label, move |x| match x {
            Point::Circle { turns: t } => Ok(Point::Circle { turns: t.wrapping_add(turns) }),
            _ => Err(Error::MixedSpace(x.to_string())),
        })
        .on_part(0, Modulus::Lipschitz(1.0), Some(0))
        .handle()
    }

    fn two_rotations() -> PeriodicSystem {
        PeriodicSystem::new(
            "two-rotations",
            StateSpace::circle(),
            vec![rotation("r1", radians_to_turns(0.5)), rotation("r2", radians_to_turns(1.25))],
        )
        .unwrap()
    }

    #[test]
    fn iterate_zero_is_identity() {
        let sys = two_rotations();
        let x = Point::circle(1.0);
        assert_eq!(sys.iterate(&x, 0).unwrap(), x);
    }

    #[test]
    fn induced_matches_period_multiples() {
        let sys = two_rotations();
        let g = sys.induced();
        assert_eq!(g.period(), 1);
        for x in sys.space().sample_points(20, 3, Scope::All).unwrap() {
            for k in 0..10 {
                assert_eq!(sys.iterate(&x, 2 * k).unwrap(), g.iterate(&x, k).unwrap());
            }
        }
        let g2 = g.induced();
        let x = Point::circle(0.2);
        assert_eq!(g.iterate(&x, 5).unwrap(), g2.iterate(&x, 5).unwrap());
    }

    #[test]
    fn window_compose_agrees_with_iterate() {
        let sys = two_rotations();
        let x = Point::circle(2.0);
        for n in 0..6 {
            assert_eq!(sys.window_compose(1, n).apply(&x).unwrap(), sys.iterate(&x, n as u64).unwrap());
        }
        assert_eq!(sys.window_compose(2, 3).apply(&x).unwrap(), sys.iterate_from(&x, 1, 3).unwrap());
        assert_eq!(sys.window_compose(3, 0).apply(&x).unwrap(), x);
    }

    #[test]
    fn orbit_segment_is_consistent() {
        let sys = two_rotations();
        let x = Point::circle(0.0);
        let seg = sys.orbit_segment(&x, 7).unwrap();
        assert_eq!(seg.states.len(), 8);
        assert_eq!(seg.states[0], x);
        for n in 0..7 {
            assert_eq!(seg.states[n + 1], sys.step(&seg.states[n], n as u64).unwrap());
        }
        let lazy: Vec<Point> = sys.orbit(&x).take(8).map(|p| p.unwrap()).collect();
        assert_eq!(lazy, seg.states);
        assert!(matches!(
            sys.orbit_segment(&x, max_horizon() + 1),
            Err(Error::HorizonTooLarge { .. })
        ));
    }

    #[test]
    fn composition_modulus_multiplies() {
        let half = FnMap::new("h", |x| Ok(x.clone()))
            .on_part(0, Modulus::Lipschitz(2.0), Some(1))
            .on_part(1, Modulus::Lipschitz(1.0), Some(0))
            .handle();
        let c = Composition::new(vec![half.clone(), half.clone(), half]);
        assert_eq!(c.modulus(0), Modulus::Lipschitz(4.0));
        assert_eq!(c.image_part(0), Some(1));
        assert_eq!(c.label(), "h∘h∘h");
    }
}
