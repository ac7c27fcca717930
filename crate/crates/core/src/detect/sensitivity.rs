use std::fmt;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{
    advance, ball_samples, check_horizon, resolved_distance, spread, syndetic_evidence,
    thick_evidence, Certificate, DetectorParams, Evidence, Region, Series, SeriesKind, SpanKind,
    Verdict, SERIES_CAP, START_SALT,
};
use crate::corpus::Property;
use crate::error::{Error, Result};
use crate::hitting::{HittingSet, Role, Witness};
use crate::rng::{mix, stream_rng};
use crate::space::{Ball, FiniteCover, Point, Scope};
use crate::system::PeriodicSystem;

const COVER_SALT: u64 = 0xC0FE;
const TUPLE_SALT: u64 = 0x7091;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SensitivityMode {
    Plain,
    Syndetic,
    Thick,
    Multi,
}

impl fmt::Display for SensitivityMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SensitivityMode::Plain => "plain",
            SensitivityMode::Syndetic => "syndetic",
            SensitivityMode::Thick => "thick",
            SensitivityMode::Multi => "multi",
        })
    }
}

/// Hitting set of one region plus its spread profile.
#[derive(Debug, Clone)]
pub struct RegionScan {
    pub set: HittingSet,
    /// Widest sampled pair at time 0.
    pub initial_max: f64,
    /// Widest sampled pair over all times.
    pub observed_max: f64,
    /// Widest pair per time, for the first [`SERIES_CAP`] times when kept.
    pub trace: Vec<f64>,
}

/// Regions from the explicit balls, or from the epsilon net in scope.
pub fn net_regions(sys: &PeriodicSystem, p: &DetectorParams) -> Result<Vec<Region>> {
    let space = sys.space();
    let balls: Vec<Ball> = if p.balls.is_empty() {
        space
            .epsilon_net(p.net_radius, p.seed, p.scope)?
            .into_iter()
            .map(|c| Ball::new(c, p.net_radius))
            .collect()
    } else {
        p.balls
            .iter()
            .map(|b| Ok(Ball::new(space.parse_point(&b.center)?, b.radius)))
            .collect::<Result<_>>()?
    };
    balls
        .into_iter()
        .enumerate()
        .map(|(index, ball)| {
            let samples = ball_samples(space, &ball, p.pair_samples, p.sub_seed(index as u64))?;
            Ok(Region { index, ball, samples })
        })
        .collect()
}

/// Times `n <= horizon` at which some sampled pair is at least `eps` apart.
pub(crate) fn scan_separation(
    sys: &PeriodicSystem,
    samples: &[Point],
    eps: f64,
    horizon: u64,
    keep_trace: bool,
) -> Result<RegionScan> {
    check_horizon(horizon)?;
    let space = sys.space();
    let mut states = samples.to_vec();
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    let mut trace = Vec::new();
    let (mut initial_max, mut observed_max) = (0.0, 0.0f64);
    for n in 0..=horizon {
        let (i, j, value) = spread(space, &states, eps)?;
        if n == 0 {
            initial_max = value;
        }
        observed_max = observed_max.max(value);
        if keep_trace && n < SERIES_CAP {
            trace.push(value);
        }
        if value >= eps {
            members.push(n);
            witnesses.push(Witness { n, i, j, value });
        }
        if n < horizon {
            advance(sys, &mut states, n)?;
        }
    }
    let mut set = HittingSet::new(horizon, Role::Separation, members);
    set.witnesses = witnesses;
    Ok(RegionScan { set, initial_max, observed_max, trace })
}

/// Separation set of `ball` with `p.pair_samples` points (centre first).
pub fn separation_hitting_set(
    sys: &PeriodicSystem,
    ball: &Ball,
    eps_d: f64,
    p: &DetectorParams,
) -> Result<HittingSet> {
    let samples = ball_samples(sys.space(), ball, p.pair_samples, p.seed)?;
    if samples.len() < 2 {
        return Err(Error::EmptyRegion(format!("{} r={}", ball.center, ball.radius)));
    }
    Ok(scan_separation(sys, &samples, eps_d, p.horizon, false)?.set)
}

pub fn sensitivity_verdict(
    sys: &PeriodicSystem,
    mode: SensitivityMode,
    p: &DetectorParams,
) -> Result<Verdict> {
    p.validate()?;
    let regions = net_regions(sys, p)?;
    let scans: Vec<RegionScan> = regions
        .par_iter()
        .map(|r| scan_separation(sys, &r.samples, p.eps_d, p.horizon, r.index == 0))
        .collect::<Result<_>>()?;
    let property = match mode {
        SensitivityMode::Plain => Some(Property::Sensitive),
        SensitivityMode::Thick => Some(Property::ThicklySensitive),
        SensitivityMode::Multi => Some(Property::MultiSensitive),
        SensitivityMode::Syndetic => None,
    };
    let mut v = Verdict::new(&format!("sensitivity/{mode}"), property, sys, p);
    aggregate(&mut v, mode, &regions, &scans, p)?;
    let growth = scans.iter().map(|s| s.observed_max - s.initial_max).fold(0.0, f64::max);
    v.measure("separation-growth", growth);
    if let Some(s) = scans.first() {
        v.series.push(Series {
            kind: SeriesKind::Separation,
            label: "region 0 widest sampled pair".into(),
            columns: vec!["n".into(), "distance".into()],
            rows: s.trace.iter().enumerate().map(|(n, d)| vec![n.to_string(), d.to_string()]).collect(),
        });
    }
    Ok(v)
}

/// Combine per-region sets according to `mode`.
fn aggregate(
    v: &mut Verdict,
    mode: SensitivityMode,
    regions: &[Region],
    scans: &[RegionScan],
    p: &DetectorParams,
) -> Result<()> {
    v.measure("regions", regions.len() as f64);
    if let Some(s) = scans.first() {
        v.series.push(Series::histogram(SeriesKind::Gaps, "region 0".into(), &s.set.gap_histogram()));
        v.series.push(Series::histogram(SeriesKind::Runs, "region 0".into(), &s.set.run_histogram()));
        v.series.push(Series::members("region 0".into(), &s.set));
    }
    let what = if v.detector.starts_with("hausdorff") { "cover-separation" } else { "separation" };
    match mode {
        SensitivityMode::Plain => {
            let mut empty = 0;
            for (r, s) in regions.iter().zip(scans) {
                match s.set.witnesses.first() {
                    Some(w) => v.certificates.push(pair_certificate(r, w)),
                    None => {
                        empty += 1;
                        v.certificates.push(Certificate::NoSeparation {
                            region: r.index,
                            center: r.ball.center.to_string(),
                            radius: r.ball.radius,
                            samples: r.samples.len(),
                            horizon: s.set.horizon,
                            initial_max: s.initial_max,
                            observed_max: s.observed_max,
                        });
                    }
                }
            }
            v.outcome = Evidence::from_bool(empty == 0);
            v.measure("empty-regions", empty as f64);
            v.summary = format!("{empty} of {} regions have an empty {what} set", regions.len());
        }
        SensitivityMode::Syndetic => {
            let mut outcomes = Vec::new();
            let mut worst = 0u64;
            for (r, s) in regions.iter().zip(scans) {
                let e = syndetic_evidence(&s.set, p.syndetic_m);
                outcomes.push(e.outcome);
                worst = worst.max(e.bound.unwrap_or(u64::MAX));
                v.certificates.push(Certificate::SyndeticBound {
                    region: Some(r.index),
                    point: None,
                    delta: r.ball.radius,
                    bound: e.bound,
                    half_bound: e.half_bound,
                    horizon: s.set.horizon,
                });
            }
            v.outcome = Evidence::all(outcomes);
            v.measure("max-syndetic-bound", worst as f64);
            v.summary = format!("largest {what} hole bound {worst} over {} regions", regions.len());
        }
        SensitivityMode::Thick => {
            let mut outcomes = Vec::new();
            let mut shortest = u64::MAX;
            for (r, s) in regions.iter().zip(scans) {
                let (e, span) = thick_evidence(&s.set, p.thick_k);
                outcomes.push(e);
                shortest = shortest.min(s.set.longest_run().map_or(0, |x| x.len));
                if let Some(span) = span {
                    v.certificates.push(Certificate::Window {
                        region: Some(r.index),
                        span_kind: SpanKind::Run,
                        start: span.start,
                        len: span.len,
                    });
                }
            }
            v.outcome = Evidence::all(outcomes);
            let shortest = if regions.is_empty() { 0 } else { shortest };
            v.measure("min-longest-run", shortest as f64);
            v.summary = format!(
                "shortest longest {what} run {shortest} (need {}) over {} regions",
                p.thick_k + 1,
                regions.len()
            );
        }
        SensitivityMode::Multi => {
            let tuples = region_tuples(regions.len(), p.multi_m, p.max_tuples, p.sub_seed(TUPLE_SALT));
            if tuples.is_empty() {
                v.outcome = Evidence::Inconclusive;
                v.summary = format!("fewer than {} regions", p.multi_m);
                return Ok(());
            }
            let mut failed = None;
            for t in &tuples {
                match common_member(t.iter().map(|&i| &scans[i].set.members[..])) {
                    Some(n) if v.certificates.len() < 8 => {
                        v.certificates.push(Certificate::CommonTime { regions: t.clone(), n })
                    }
                    Some(_) => {}
                    None => {
                        failed = Some(t.clone());
                        break;
                    }
                }
            }
            v.measure("tuples", tuples.len() as f64);
            match failed {
                Some(t) => {
                    v.outcome = Evidence::Against;
                    v.summary = format!("regions {t:?} share no {what} time");
                    v.certificates =
                        vec![Certificate::EmptyIntersection { regions: t, horizon: p.horizon }];
                }
                None => {
                    v.outcome = Evidence::For;
                    v.summary = format!("all {} region {}-tuples share a {what} time", tuples.len(), p.multi_m);
                }
            }
        }
    }
    Ok(())
}

fn pair_certificate(r: &Region, w: &Witness) -> Certificate {
    Certificate::SeparatedPair {
        region: Some(r.index),
        x: r.samples[w.i].to_string(),
        y: r.samples[w.j].to_string(),
        n: w.n,
        distance: w.value,
    }
}

/// Lexicographic `m`-subsets of `0..r`, or `cap` seeded random ones when
/// there are more than `cap`.
fn region_tuples(r: usize, m: usize, cap: usize, seed: u64) -> Vec<Vec<usize>> {
    if r < m {
        return Vec::new();
    }
    let mut total: u128 = 1;
    for i in 0..m as u128 {
        total = total * (r as u128 - i) / (i + 1);
    }
    if total <= cap as u128 {
        let mut out = Vec::new();
        let mut t: Vec<usize> = (0..m).collect();
        loop {
            out.push(t.clone());
            let Some(pos) = (0..m).rev().find(|&i| t[i] < r - m + i) else { break };
            t[pos] += 1;
            for i in pos + 1..m {
                t[i] = t[i - 1] + 1;
            }
        }
        return out;
    }
    (0..cap as u64)
        .map(|i| {
            let mut t = sample(&mut stream_rng(seed, i), r, m).into_vec();
            t.sort_unstable();
            t
        })
        .collect()
}

/// Smallest time present in every sorted list.
fn common_member<'a>(lists: impl Iterator<Item = &'a [u64]>) -> Option<u64> {
    let lists: Vec<&[u64]> = lists.collect();
    let (first, rest) = lists.split_first()?;
    first.iter().copied().find(|n| rest.iter().all(|l| l.binary_search(n).is_ok()))
}

/// Delayed-orbit separation: for each sampled `x` and basis radius `e`,
/// look for `n` (a multiple of the period, so the map phases line up),
/// `y` within `e` of `f^n x` and `k` with `d(f^{n+k} x, f^k y) >= eps_d`.
pub fn eventual_sensitivity_check(
    sys: &PeriodicSystem,
    p: &DetectorParams,
    eps_d: f64,
) -> Result<Verdict> {
    p.validate()?;
    let space = sys.space();
    let starts = space.sample_points(p.starts, p.sub_seed(START_SALT), p.scope)?;
    let radii = p.basis_radii();
    let period = sys.period() as u64;
    let delays: Vec<u64> = (0..4).map(|i| i * period).filter(|n| *n <= p.horizon).collect();
    let jobs: Vec<(usize, usize)> =
        (0..starts.len()).flat_map(|s| (0..radii.len()).map(move |j| (s, j))).collect();
    let certs: Vec<Certificate> = jobs
        .par_iter()
        .map(|&(s, j)| {
            let x = &starts[s];
            let e = radii[j];
            for (d, &n) in delays.iter().enumerate() {
                let z = sys.iterate(x, n)?;
                let seed = p.sub_seed(mix(s as u64, (j * delays.len() + d) as u64));
                let ys = space.sample_in_ball(&Ball::new(z.clone(), e), p.pair_samples - 1, seed)?;
                let mut states = vec![z];
                states.extend(ys.iter().cloned());
                for k in 0..=p.horizon {
                    for i in 1..states.len() {
                        if space.separated(&states[0], &states[i], eps_d)? {
                            let distance = resolved_distance(space, &states[0], &states[i], eps_d)?;
                            return Ok(Certificate::DelayedPair {
                                x: x.to_string(),
                                n,
                                y: ys[i - 1].to_string(),
                                k,
                                eps_e: e,
                                distance,
                            });
                        }
                    }
                    if k < p.horizon {
                        advance(sys, &mut states, k)?;
                    }
                }
            }
            Ok(Certificate::NoDelayedSeparation {
                x: x.to_string(),
                eps_e: e,
                delays: delays.clone(),
                samples: p.pair_samples - 1,
                horizon: p.horizon,
            })
        })
        .collect::<Result<_>>()?;
    let missing = certs.iter().filter(|c| matches!(c, Certificate::NoDelayedSeparation { .. })).count();
    let mut v = Verdict::new("eventual-sensitivity", Some(Property::EventuallySensitive), sys, p);
    v.outcome = Evidence::from_bool(missing == 0);
    v.summary = format!("{missing} of {} (start, radius) pairs found no delayed separation", certs.len());
    v.measure("eps-d", eps_d);
    v.measure("missing", missing as f64);
    v.certificates = certs;
    Ok(v)
}

/// Cover by balls of `radius` around the epsilon net of that radius,
/// certified on 256 sampled points.
pub fn standard_cover(sys: &PeriodicSystem, radius: f64, seed: u64) -> Result<FiniteCover> {
    let space = sys.space();
    let members = space
        .epsilon_net(radius, seed, Scope::All)?
        .into_iter()
        .map(|c| Ball::new(c, radius))
        .collect();
    let probes = space.sample_points(256, mix(seed, COVER_SALT), Scope::All)?;
    space.certify_cover(members, probes)
}

pub(crate) fn scan_cover(
    sys: &PeriodicSystem,
    samples: &[Point],
    cover: &FiniteCover,
    horizon: u64,
) -> Result<RegionScan> {
    check_horizon(horizon)?;
    let space = sys.space();
    let mut states = samples.to_vec();
    let mut members = Vec::new();
    let mut witnesses = Vec::new();
    let (mut initial_max, mut observed_max) = (0.0, 0.0f64);
    let resolution = cover.members.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min) / 4.0;
    for n in 0..=horizon {
        let located: Vec<Vec<usize>> =
            states.iter().map(|s| space.locate_in_cover(cover, s)).collect::<Result<_>>()?;
        if let Some(i) = located.iter().position(Vec::is_empty) {
            return Err(Error::CoverageGap(states[i].to_string()));
        }
        let (_, _, value) = spread(space, &states, resolution)?;
        if n == 0 {
            initial_max = value;
        }
        observed_max = observed_max.max(value);
        'pairs: for i in 0..states.len() {
            for j in i + 1..states.len() {
                if located[i].iter().all(|m| !located[j].contains(m)) {
                    let value = space.distance(&states[i], &states[j])?;
                    members.push(n);
                    witnesses.push(Witness { n, i, j, value });
                    break 'pairs;
                }
            }
        }
        if n < horizon {
            advance(sys, &mut states, n)?;
        }
    }
    let mut set = HittingSet::new(horizon, Role::CoverSeparation, members);
    set.witnesses = witnesses;
    Ok(RegionScan { set, initial_max, observed_max, trace: Vec::new() })
}

/// Times at which some sampled pair of `ball` has images sharing no cover
/// member.
pub fn cover_hitting_set(
    sys: &PeriodicSystem,
    ball: &Ball,
    cover: &FiniteCover,
    p: &DetectorParams,
) -> Result<HittingSet> {
    let samples = ball_samples(sys.space(), ball, p.pair_samples, p.seed)?;
    Ok(scan_cover(sys, &samples, cover, p.horizon)?.set)
}

pub fn hausdorff_sensitivity_verdict(
    sys: &PeriodicSystem,
    mode: SensitivityMode,
    p: &DetectorParams,
) -> Result<Verdict> {
    p.validate()?;
    let cover = standard_cover(sys, p.cover_radius, p.seed)?;
    let regions = net_regions(sys, p)?;
    let scans: Vec<RegionScan> = regions
        .par_iter()
        .map(|r| scan_cover(sys, &r.samples, &cover, p.horizon))
        .collect::<Result<_>>()?;
    let property = match mode {
        SensitivityMode::Plain => Some(Property::HausdorffSensitive),
        SensitivityMode::Thick => Some(Property::ThicklyHausdorffSensitive),
        SensitivityMode::Multi => Some(Property::MultiHausdorffSensitive),
        SensitivityMode::Syndetic => None,
    };
    let mut v = Verdict::new(&format!("hausdorff-sensitivity/{mode}"), property, sys, p);
    aggregate(&mut v, mode, &regions, &scans, p)?;
    let probes: Vec<Point> = cover.certified_on.iter().take(64).cloned().collect();
    let lebesgue = sys.space().lebesgue_radius(&cover, &probes, p.cover_radius)?;
    v.measure("cover-members", cover.members.len() as f64);
    v.measure("cover-lebesgue-radius", lebesgue);
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tuples_enumerate_and_sample() {
        let t = region_tuples(5, 3, 100, 1);
        assert_eq!(t.len(), 10);
        assert_eq!(t[0], vec![0, 1, 2]);
        assert_eq!(t[9], vec![2, 3, 4]);
        let s = region_tuples(40, 3, 50, 1);
        assert_eq!(s.len(), 50);
        assert!(s.iter().all(|t| t.len() == 3 && t[0] < t[1] && t[1] < t[2] && t[2] < 40));
        assert_eq!(s, region_tuples(40, 3, 50, 1));
        assert!(region_tuples(2, 3, 10, 1).is_empty());
    }

    #[test]
    fn common_member_of_sorted_lists() {
        let a = [1u64, 4, 9, 12];
        let b = [2u64, 4, 12];
        let c = [0u64, 12];
        assert_eq!(common_member([&a[..], &b[..]].into_iter()), Some(4));
        assert_eq!(common_member([&a[..], &b[..], &c[..]].into_iter()), Some(12));
        assert_eq!(common_member([&a[..], &[3u64][..]].into_iter()), None);
    }
}
