use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    advance, ball_samples, check_horizon, Certificate, DetectorParams, Evidence, Series,
    SeriesKind, Verdict, START_SALT,
};
use crate::corpus::Property;
use crate::error::Result;
use crate::space::{Ball, Point, Scope};
use crate::system::PeriodicSystem;

const PROBE_SALT: u64 = 0x7EA5;

/// First `n <= horizon` with `f^n(x)` in each target; `None` marks a miss.
pub fn visit_times(
    sys: &PeriodicSystem,
    x: &Point,
    targets: &[Ball],
    horizon: u64,
) -> Result<Vec<Option<u64>>> {
    check_horizon(horizon)?;
    let space = sys.space();
    let mut hits = vec![None; targets.len()];
    let mut open = targets.len();
    let mut y = x.clone();
    for n in 0..=horizon {
        for (t, ball) in targets.iter().enumerate() {
            if hits[t].is_none() && space.contains(ball, &y)? {
                hits[t] = Some(n);
                open -= 1;
            }
        }
        if open == 0 || n == horizon {
            break;
        }
        y = sys.step(&y, n)?;
    }
    Ok(hits)
}

fn hit_label(n: Option<u64>) -> String {
    n.map_or_else(|| "inf".to_string(), |n| n.to_string())
}

fn first_hit_series(label: String, hits: &[Option<u64>]) -> Series {
    Series {
        kind: SeriesKind::FirstHit,
        label,
        columns: vec!["target".into(), "first_hit".into()],
        rows: hits.iter().enumerate().map(|(t, n)| vec![t.to_string(), hit_label(*n)]).collect(),
    }
}

fn hit_certificates(x: &Point, targets: &[Ball], hits: &[Option<u64>]) -> Vec<Certificate> {
    targets
        .iter()
        .zip(hits)
        .enumerate()
        .map(|(t, (b, n))| Certificate::FirstHit {
            start: x.to_string(),
            target: t,
            center: b.center.to_string(),
            radius: b.radius,
            n: *n,
        })
        .collect()
}

/// [`visit_times`] as a report row: evidence-for when every target is hit.
pub fn visit_times_verdict(
    sys: &PeriodicSystem,
    x: &Point,
    targets: &[Ball],
    p: &DetectorParams,
) -> Result<Verdict> {
    let hits = visit_times(sys, x, targets, p.horizon)?;
    let mut v = Verdict::new("visit-times", None, sys, p);
    let missed = hits.iter().filter(|h| h.is_none()).count();
    v.outcome = Evidence::from_bool(missed == 0);
    v.summary = format!("{x}: {missed} of {} targets missed within {}", targets.len(), p.horizon);
    v.certificates = hit_certificates(x, targets, &hits);
    v.series.push(first_hit_series(x.to_string(), &hits));
    Ok(v)
}

fn net_targets(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Vec<Ball>> {
    Ok(sys
        .space()
        .epsilon_net(p.net_radius, p.seed, Scope::All)?
        .into_iter()
        .map(|c| Ball::new(c, p.net_radius))
        .collect())
}

/// Every sampled start must hit every net ball within the horizon.
pub fn minimality_estimate(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Verdict> {
    p.validate()?;
    let targets = net_targets(sys, p)?;
    let starts = sys.space().sample_points(p.starts, p.sub_seed(START_SALT), p.scope)?;
    let tables: Vec<Vec<Option<u64>>> = starts
        .par_iter()
        .map(|x| visit_times(sys, x, &targets, p.horizon))
        .collect::<Result<_>>()?;
    let mut v = Verdict::new("minimality", Some(Property::Minimal), sys, p);
    let failing = tables.iter().position(|t| t.iter().any(Option::is_none));
    let worst = tables.iter().flatten().flatten().copied().max().unwrap_or(0);
    v.measure("targets", targets.len() as f64);
    v.measure("starts", starts.len() as f64);
    v.measure("worst-first-hit", worst as f64);
    match failing {
        Some(s) => {
            v.outcome = Evidence::Against;
            let missed = tables[s].iter().filter(|h| h.is_none()).count();
            v.summary = format!("start {} misses {missed} of {} net balls", starts[s], targets.len());
            v.certificates = hit_certificates(&starts[s], &targets, &tables[s])
                .into_iter()
                .filter(|c| matches!(c, Certificate::FirstHit { n: None, .. }))
                .take(16)
                .collect();
            v.series.push(first_hit_series(starts[s].to_string(), &tables[s]));
        }
        None => {
            v.outcome = Evidence::For;
            v.summary = format!(
                "{} starts hit all {} net balls; worst first hit {worst}",
                starts.len(),
                targets.len()
            );
            for (x, t) in starts.iter().zip(&tables) {
                let (i, n) = t.iter().enumerate().max_by_key(|(_, n)| **n).expect("targets");
                v.certificates.push(hit_certificates(x, &targets[i..=i], &[*n]).remove(0));
            }
            let slowest = tables
                .iter()
                .enumerate()
                .max_by_key(|(_, t)| t.iter().flatten().max().copied())
                .map_or(0, |(i, _)| i);
            if let Some(t) = tables.get(slowest) {
                v.series.push(first_hit_series(starts[slowest].to_string(), t));
            }
        }
    }
    Ok(v)
}

/// Net-ball coverage of the orbit tail of `x` and of a small ball around it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coverage {
    pub centers: Vec<String>,
    pub radius: f64,
    /// Balls hit by `f^n(x)` for `N/2 < n <= N`.
    pub omega: Vec<bool>,
    /// Balls hit by `f^n(u)` for `N/2 < n <= N`, `u` sampled near `x`.
    pub nonwandering: Vec<bool>,
}

fn bitmap(bits: &[bool]) -> String {
    bits.iter().map(|b| if *b { '1' } else { '0' }).collect()
}

/// Tail coverage of `x` (omega surrogate) and of the smallest basis ball
/// around `x` (non-wandering surrogate).
pub fn omega_nonwandering_estimate(sys: &PeriodicSystem, x: &Point, p: &DetectorParams) -> Result<Coverage> {
    p.validate()?;
    let space = sys.space();
    let targets = net_targets(sys, p)?;
    let r = p.basis_radii().last().copied().expect("non-empty basis");
    let samples = ball_samples(space, &Ball::new(x.clone(), r), p.pair_samples, p.seed)?;
    let tail_start = p.horizon / 2 + 1;
    let per_sample: Vec<Vec<bool>> = samples
        .par_iter()
        .map(|u| {
            let mut seen = vec![false; targets.len()];
            let mut states = vec![u.clone()];
            for n in 0..=p.horizon {
                if n >= tail_start {
                    for (t, b) in targets.iter().enumerate() {
                        if !seen[t] && space.contains(b, &states[0])? {
                            seen[t] = true;
                        }
                    }
                }
                if n < p.horizon {
                    advance(sys, &mut states, n)?;
                }
            }
            Ok(seen)
        })
        .collect::<Result<_>>()?;
    let omega = per_sample[0].clone();
    let nonwandering =
        (0..targets.len()).map(|t| per_sample.iter().any(|s| s[t])).collect();
    Ok(Coverage {
        centers: targets.iter().map(|b| b.center.to_string()).collect(),
        radius: p.net_radius,
        omega,
        nonwandering,
    })
}

/// Coverage as a row: evidence-for when the two surrogates agree.
pub fn omega_verdict(sys: &PeriodicSystem, x: &Point, p: &DetectorParams) -> Result<Verdict> {
    let c = omega_nonwandering_estimate(sys, x, p)?;
    let mut v = Verdict::new("omega-nonwandering", None, sys, p);
    let count = |b: &[bool]| b.iter().filter(|x| **x).count();
    v.outcome = Evidence::from_bool(c.omega == c.nonwandering);
    v.summary = format!(
        "{x}: omega covers {}, non-wandering covers {} of {} balls",
        count(&c.omega),
        count(&c.nonwandering),
        c.omega.len()
    );
    v.measure("omega-hits", count(&c.omega) as f64);
    v.measure("nonwandering-hits", count(&c.nonwandering) as f64);
    v.certificates.push(Certificate::Structural {
        statement: format!("omega={} nonwandering={}", bitmap(&c.omega), bitmap(&c.nonwandering)),
    });
    Ok(v)
}

/// Whether the induced map has no transitive point. Exact structural
/// certificates where the components allow one; otherwise a sampled start
/// that is transitive for `g` at the horizon counts against.
pub fn induced_trans_empty(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Verdict> {
    p.validate()?;
    let g = sys.induced();
    let space = sys.space();
    let gmap = &g.maps()[0];
    let mut v = Verdict::new("induced-trans-empty", Some(Property::InducedTransEmpty), sys, p);
    let comps = space.components();
    if comps.len() >= 2 {
        let probes = space.sample_points(100, p.sub_seed(PROBE_SALT), Scope::All)?;
        let images: Vec<(usize, usize)> = probes
            .iter()
            .map(|x| Ok((x.component(), gmap.apply(x)?.component())))
            .collect::<Result<_>>()?;
        let declared_ok = |c: usize, target: usize| gmap.image_part(c).is_none_or(|t| t == target);
        if images.iter().all(|(a, b)| a == b) && comps.iter().all(|&c| declared_ok(c, c)) {
            v.outcome = Evidence::For;
            v.summary = "g maps each component into itself".into();
            v.certificates.push(Certificate::Structural {
                statement: format!(
                    "g preserves all {} components on 100 samples and by declaration; no orbit meets both",
                    comps.len()
                ),
            });
            return Ok(v);
        }
        for &c0 in comps {
            if images.iter().all(|(_, b)| *b == c0) && comps.iter().all(|&c| declared_ok(c, c0)) {
                v.outcome = Evidence::For;
                v.summary = format!("g maps the space into component {c0}");
                v.certificates.push(Certificate::Structural {
                    statement: format!(
                        "g(X) lies in component {c0} on 100 samples and by declaration; orbits never return to the others"
                    ),
                });
                return Ok(v);
            }
        }
    }
    let targets = net_targets(sys, p)?;
    let starts = space.sample_points(p.starts, p.sub_seed(START_SALT), p.scope)?;
    let horizon = p.horizon.div_ceil(sys.period() as u64);
    let tables: Vec<Vec<Option<u64>>> = starts
        .par_iter()
        .map(|x| visit_times(&g, x, &targets, horizon))
        .collect::<Result<_>>()?;
    match tables.iter().position(|t| t.iter().all(Option::is_some)) {
        Some(s) => {
            v.outcome = Evidence::Against;
            v.summary = format!("start {} is g-transitive on the net within {horizon}", starts[s]);
            let (i, n) = tables[s].iter().enumerate().max_by_key(|(_, n)| **n).expect("targets");
            v.certificates = hit_certificates(&starts[s], &targets[i..=i], &[*n]);
        }
        None => {
            v.outcome = Evidence::Inconclusive;
            v.summary = format!("no sampled start is g-transitive at horizon {horizon}");
        }
    }
    Ok(v)
}
