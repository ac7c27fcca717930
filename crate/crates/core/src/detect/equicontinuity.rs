use rayon::prelude::*;

use super::sensitivity::scan_separation;
use super::{
    advance, ball_samples, check_horizon, resolved_distance, syndetic_evidence, Certificate,
    DetectorParams, Evidence, Series, SeriesKind, SpanKind, Verdict, START_SALT,
};
use crate::corpus::Property;
use crate::error::{Error, Result};
use crate::hitting::{HittingSet, Role, HORIZON_FACTOR};
use crate::rng::mix;
use crate::space::{Ball, Point};
use crate::system::PeriodicSystem;

/// Largest `delta` in `eps_e * 2^-j` (`0 <= j <= basis_depth`) such that every
/// sampled `y` with `d(x, y) < delta` stays within `eps_e` of `x` up to the
/// horizon.
pub fn equicontinuity_at(
    sys: &PeriodicSystem,
    x: &Point,
    eps_e: f64,
    p: &DetectorParams,
) -> Result<Verdict> {
    p.validate()?;
    point_equicontinuity(sys, x, eps_e, p, p.seed)
}

fn point_equicontinuity(
    sys: &PeriodicSystem,
    x: &Point,
    eps_e: f64,
    p: &DetectorParams,
    seed: u64,
) -> Result<Verdict> {
    check_horizon(p.horizon)?;
    let space = sys.space();
    let mut v = Verdict::new("equicontinuity-at", Some(Property::Equicontinuous), sys, p);
    v.measure("eps-e", eps_e);
    for j in 0..=p.basis_depth {
        let delta = eps_e * (-(j as f64)).exp2();
        let ys = space.sample_in_ball(&Ball::new(x.clone(), delta), p.pair_samples - 1, mix(seed, j as u64))?;
        let mut states = vec![x.clone()];
        states.extend(ys.iter().cloned());
        // per sample: (widest distance, time of it)
        let mut widest = vec![(0.0f64, 0u64); states.len()];
        for n in 0..=p.horizon {
            for i in 1..states.len() {
                let d = resolved_distance(space, &states[0], &states[i], eps_e)?;
                if d > widest[i].0 {
                    widest[i] = (d, n);
                }
            }
            if n < p.horizon {
                advance(sys, &mut states, n)?;
            }
        }
        let (i, &(d, n)) = widest
            .iter()
            .enumerate()
            .skip(1)
            .fold((0, &(0.0, 0)), |best, cur| if cur.1 .0 > best.1 .0 { cur } else { best });
        if d < eps_e {
            v.outcome = Evidence::For;
            v.summary = format!("delta {delta} keeps {} samples within {eps_e}", ys.len());
            v.measure("best-delta", delta);
            v.certificates.push(Certificate::Stable {
                x: x.to_string(),
                delta,
                samples: ys.len(),
                horizon: p.horizon,
                observed_max: d,
            });
            return Ok(v);
        }
        v.certificates.push(Certificate::SeparatedPair {
            region: None,
            x: x.to_string(),
            y: ys[i - 1].to_string(),
            n,
            distance: d,
        });
    }
    v.outcome = Evidence::Against;
    let weakest = v
        .certificates
        .iter()
        .filter_map(|c| match c {
            Certificate::SeparatedPair { distance, .. } => Some(*distance),
            _ => None,
        })
        .fold(f64::INFINITY, f64::min);
    v.measure("min-witness-separation", weakest);
    v.summary = format!("every delta down to {eps_e}*2^-{} admits a separating sample", p.basis_depth);
    Ok(v)
}

/// Equicontinuity at every sampled start.
pub fn equicontinuity_verdict(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Verdict> {
    p.validate()?;
    let starts = sys.space().sample_points(p.starts, p.sub_seed(START_SALT), p.scope)?;
    let rows: Vec<Verdict> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x)| point_equicontinuity(sys, x, p.eps_e, p, p.sub_seed(i as u64)))
        .collect::<Result<_>>()?;
    let mut v = Verdict::new("equicontinuity", Some(Property::Equicontinuous), sys, p);
    combine_points(&mut v, rows, "best-delta");
    Ok(v)
}

/// All-of combination of per-point verdicts; against keeps the first
/// failing point's certificates, for keeps one certificate per point.
fn combine_points(v: &mut Verdict, rows: Vec<Verdict>, key: &str) {
    v.outcome = Evidence::all(rows.iter().map(|r| r.outcome));
    let failing = rows.iter().filter(|r| r.outcome == Evidence::Against).count();
    let open = rows.iter().filter(|r| r.outcome == Evidence::Inconclusive).count();
    v.summary = format!("{} points: {failing} against, {open} inconclusive", rows.len());
    v.measure("points", rows.len() as f64);
    let values: Vec<f64> = rows.iter().filter_map(|r| r.measurements.get(key).copied()).collect();
    if !values.is_empty() {
        v.measure(&format!("min-{key}"), values.iter().copied().fold(f64::INFINITY, f64::min));
        v.measure(&format!("max-{key}"), values.iter().copied().fold(0.0, f64::max));
    }
    match rows.iter().find(|r| r.outcome == Evidence::Against) {
        Some(bad) if v.outcome == Evidence::Against => {
            v.certificates = bad.certificates.clone();
            v.series = bad.series.clone();
            v.measurements.extend(bad.measurements.iter().map(|(k, x)| (format!("witness-{k}"), *x)));
        }
        _ => {
            for r in &rows {
                v.certificates.extend(r.certificates.iter().take(2).cloned());
            }
            if let Some(r) = rows.first() {
                v.series = r.series.clone();
            }
        }
    }
}

/// `J(U, E)` for `U = ball(x, delta)` over the basis; evidence-for when some
/// `delta` gives a syndetic set under the finite-horizon rules.
pub fn syndetic_equicontinuity_at(
    sys: &PeriodicSystem,
    x: &Point,
    eps_e: f64,
    p: &DetectorParams,
) -> Result<Verdict> {
    p.validate()?;
    point_syndetic(sys, x, eps_e, p, p.seed)
}

/// Stability set `J(U, E)` of the sampled ball around `x`.
pub fn stability_set(
    sys: &PeriodicSystem,
    x: &Point,
    delta: f64,
    eps_e: f64,
    p: &DetectorParams,
    seed: u64,
) -> Result<HittingSet> {
    let samples = ball_samples(sys.space(), &Ball::new(x.clone(), delta), p.pair_samples, seed)?;
    Ok(scan_separation(sys, &samples, eps_e, p.horizon, false)?.set.complement(Role::Stability))
}

fn point_syndetic(
    sys: &PeriodicSystem,
    x: &Point,
    eps_e: f64,
    p: &DetectorParams,
    seed: u64,
) -> Result<Verdict> {
    let mut v = Verdict::new(
        "syndetic-equicontinuity-at",
        Some(Property::SyndeticallyEquicontinuous),
        sys,
        p,
    );
    v.measure("eps-e", eps_e);
    let mut best: Option<(u64, f64, HittingSet)> = None;
    let mut outcomes = Vec::new();
    for (j, delta) in p.basis_radii().into_iter().enumerate() {
        let set = stability_set(sys, x, delta, eps_e, p, mix(seed, j as u64))?;
        let e = syndetic_evidence(&set, p.syndetic_m);
        outcomes.push(e.outcome);
        v.certificates.push(Certificate::SyndeticBound {
            region: None,
            point: Some(x.to_string()),
            delta,
            bound: e.bound,
            half_bound: e.half_bound,
            horizon: set.horizon,
        });
        if e.outcome == Evidence::Against {
            if let Some(h) = e.hole {
                v.certificates.push(Certificate::Window {
                    region: None,
                    span_kind: SpanKind::Hole,
                    start: h.start,
                    len: h.len,
                });
            }
        }
        if e.outcome == Evidence::For {
            let m = e.bound.unwrap_or(0);
            if best.as_ref().is_none_or(|b| m < b.0) {
                best = Some((m, delta, set));
            }
        }
    }
    v.outcome = Evidence::any(outcomes);
    match best {
        Some((m, delta, set)) => {
            v.measure("syndetic-bound", m as f64);
            v.measure("delta", delta);
            v.summary = format!("J(U,E) syndetic with bound {m} at delta {delta}");
            v.series.push(Series::histogram(SeriesKind::Gaps, format!("J at delta {delta}"), &set.gap_histogram()));
            v.series.push(Series::members(format!("J at delta {delta}"), &set));
        }
        None => {
            v.summary = format!("no basis radius gives a syndetic J(U,E) within {}", p.horizon);
        }
    }
    Ok(v)
}

/// Syndetic equicontinuity at every sampled start.
pub fn syndetic_equicontinuity_verdict(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Verdict> {
    p.validate()?;
    let starts = sys.space().sample_points(p.starts, p.sub_seed(START_SALT), p.scope)?;
    let rows: Vec<Verdict> = starts
        .par_iter()
        .enumerate()
        .map(|(i, x)| point_syndetic(sys, x, p.eps_e, p, p.sub_seed(i as u64)))
        .collect::<Result<_>>()?;
    let mut v = Verdict::new(
        "syndetic-equicontinuity",
        Some(Property::SyndeticallyEquicontinuous),
        sys,
        p,
    );
    combine_points(&mut v, rows, "syndetic-bound");
    Ok(v)
}

/// Outcome of one `(U, V)` candidate.
struct PairScan {
    /// Times at which the implication holds.
    set: HittingSet,
    violation: Option<(u64, String)>,
}

/// Checks `f^n(U) ∩ V ≠ ∅ ⇒ f^n(U) ⊆ O` on images of `U`'s samples, with
/// `O` shrunk by the margin.
#[allow(clippy::too_many_arguments)]
fn scan_pair(
    sys: &PeriodicSystem,
    x: &Point,
    v_ball: &Ball,
    o: &Ball,
    u_radius: f64,
    p: &DetectorParams,
    seed: u64,
    stop_early: bool,
) -> Result<PairScan> {
    let space = sys.space();
    let mut states = ball_samples(space, &Ball::new(x.clone(), u_radius), p.image_samples, seed)?;
    let shrunk = o.radius * (1.0 - p.margin);
    let mut members = Vec::new();
    let mut violation = None;
    // a hole longer than N/10 already decides the bound search
    let hole_cap = match p.syndetic_m {
        None => p.horizon / HORIZON_FACTOR,
        Some(_) => u64::MAX,
    };
    let mut hole = 0u64;
    for n in 0..=p.horizon {
        let mut meets = false;
        for s in &states {
            if space.contains(v_ball, s)? {
                meets = true;
                break;
            }
        }
        let mut escapee = None;
        if meets {
            for s in &states {
                if space.separated(&o.center, s, shrunk)? {
                    escapee = Some(s.to_string());
                    break;
                }
            }
        }
        match escapee {
            None => {
                members.push(n);
                hole = 0;
            }
            Some(e) => {
                if violation.is_none() {
                    violation = Some((n, e));
                }
                hole += 1;
                if stop_early || hole > hole_cap {
                    break;
                }
            }
        }
        if n < p.horizon {
            advance(sys, &mut states, n)?;
        }
    }
    Ok(PairScan { set: HittingSet::new(p.horizon, Role::PairContainment, members), violation })
}

fn check_pair_inputs(sys: &PeriodicSystem, y: &Point, o: &Ball, p: &DetectorParams) -> Result<()> {
    p.validate()?;
    check_horizon(p.horizon)?;
    if !sys.space().contains(o, y)? {
        return Err(Error::InvalidParameter(format!("{y} is not inside O (radius {})", o.radius)));
    }
    Ok(())
}

/// Candidate `(U, V)` radii, smallest first. `V` is never smaller than `U`:
/// a miss of a tiny `V` by a handful of image samples is not evidence that
/// the true image misses it.
fn pair_radii(p: &DetectorParams) -> Vec<(f64, f64)> {
    let mut radii = p.basis_radii();
    radii.reverse();
    radii.iter().flat_map(|&u| radii.iter().filter(move |&&v| v >= u).map(move |&v| (u, v))).collect()
}

/// Topological equicontinuity pair search over basis balls around `x`, `y`.
pub fn eqp_check(
    sys: &PeriodicSystem,
    x: &Point,
    y: &Point,
    o: &Ball,
    p: &DetectorParams,
) -> Result<Verdict> {
    check_pair_inputs(sys, y, o, p)?;
    pair_equicontinuity(sys, x, y, o, p, p.seed)
}

fn pair_equicontinuity(
    sys: &PeriodicSystem,
    x: &Point,
    y: &Point,
    o: &Ball,
    p: &DetectorParams,
    seed: u64,
) -> Result<Verdict> {
    let mut v = Verdict::new("eqp", Some(Property::TopologicallyEquicontinuous), sys, p);
    v.measure("margin", p.margin);
    let combos = pair_radii(p);
    for (c, &(ru, rv)) in combos.iter().enumerate() {
        let v_ball = Ball::new(y.clone(), rv);
        let scan = scan_pair(sys, x, &v_ball, o, ru, p, mix(seed, c as u64), true)?;
        let cert = |n: Option<u64>, escapee: Option<String>| Certificate::Containment {
            x: x.to_string(),
            y: y.to_string(),
            u_radius: ru,
            v_radius: rv,
            o_radius: o.radius,
            margin: p.margin,
            n,
            escapee,
        };
        match scan.violation {
            None => {
                v.outcome = Evidence::For;
                v.summary = format!("U radius {ru}, V radius {rv} satisfy the implication up to {}", p.horizon);
                v.certificates = vec![cert(None, None)];
                return Ok(v);
            }
            Some((n, e)) => {
                if v.certificates.len() < 4 {
                    v.certificates.push(cert(Some(n), Some(e)));
                }
            }
        }
    }
    v.outcome = Evidence::Against;
    v.summary = format!("all {} basis pairs violate; O is a splitting neighbourhood", combos.len());
    v.certificates.push(Certificate::SplittingNeighborhood {
        x: x.to_string(),
        y: y.to_string(),
        o_radius: o.radius,
    });
    Ok(v)
}

/// As [`eqp_check`], but the implication times must form a syndetic set.
pub fn seqp_check(
    sys: &PeriodicSystem,
    x: &Point,
    y: &Point,
    o: &Ball,
    p: &DetectorParams,
) -> Result<Verdict> {
    check_pair_inputs(sys, y, o, p)?;
    pair_syndetic(sys, x, y, o, p, p.seed)
}

fn pair_syndetic(
    sys: &PeriodicSystem,
    x: &Point,
    y: &Point,
    o: &Ball,
    p: &DetectorParams,
    seed: u64,
) -> Result<Verdict> {
    let mut v = Verdict::new(
        "seqp",
        Some(Property::SyndeticallyTopologicallyEquicontinuous),
        sys,
        p,
    );
    v.measure("margin", p.margin);
    let combos = pair_radii(p);
    let mut best: Option<(u64, f64, f64)> = None;
    let mut outcomes = Vec::new();
    for (c, &(ru, rv)) in combos.iter().enumerate() {
        let scan = scan_pair(sys, x, &Ball::new(y.clone(), rv), o, ru, p, mix(seed, c as u64), false)?;
        let e = syndetic_evidence(&scan.set, p.syndetic_m);
        outcomes.push(e.outcome);
        if e.outcome == Evidence::For {
            let m = e.bound.unwrap_or(0);
            if best.is_none_or(|b| m < b.0) {
                best = Some((m, ru, rv));
            }
            if m == 0 {
                break;
            }
        }
    }
    v.outcome = Evidence::any(outcomes);
    match best {
        Some((m, ru, rv)) => {
            v.measure("syndetic-bound", m as f64);
            v.summary = format!("implication times syndetic with bound {m} at U radius {ru}, V radius {rv}");
            v.certificates.push(Certificate::SyndeticBound {
                region: None,
                point: Some(x.to_string()),
                delta: ru,
                bound: Some(m),
                half_bound: None,
                horizon: p.horizon,
            });
        }
        None => {
            v.summary = format!("no basis pair gives syndetic implication times within {}", p.horizon);
            v.certificates.push(Certificate::SplittingNeighborhood {
                x: x.to_string(),
                y: y.to_string(),
                o_radius: o.radius,
            });
        }
    }
    Ok(v)
}

/// Pair search over consecutive sampled starts `(x_i, x_{i+1})` with
/// `O = ball(x_{i+1}, o_radius)`.
pub fn topological_equicontinuity_verdict(
    sys: &PeriodicSystem,
    syndetic: bool,
    p: &DetectorParams,
) -> Result<Verdict> {
    p.validate()?;
    let pts = sys.space().sample_points(p.starts + 1, p.sub_seed(START_SALT), p.scope)?;
    let rows: Vec<Verdict> = (0..p.starts)
        .into_par_iter()
        .map(|i| {
            let (x, y) = (&pts[i], &pts[i + 1]);
            let o = Ball::new(y.clone(), p.o_radius);
            let seed = p.sub_seed(i as u64);
            if syndetic {
                pair_syndetic(sys, x, y, &o, p, seed)
            } else {
                pair_equicontinuity(sys, x, y, &o, p, seed)
            }
        })
        .collect::<Result<_>>()?;
    let (name, property) = if syndetic {
        ("syndetic-topological-equicontinuity", Property::SyndeticallyTopologicallyEquicontinuous)
    } else {
        ("topological-equicontinuity", Property::TopologicallyEquicontinuous)
    };
    let mut v = Verdict::new(name, Some(property), sys, p);
    combine_points(&mut v, rows, "syndetic-bound");
    Ok(v)
}
