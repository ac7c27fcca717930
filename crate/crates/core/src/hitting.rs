//! Finite-horizon subsets of `{0, ..., N}` and their syndetic / thick
//! classification.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

/// What the members of a hitting set record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Some sampled pair is at least `eps_D` apart.
    Separation,
    /// All sampled pairs stay within `eps_E`.
    Stability,
    /// Some sampled pair has images sharing no cover member.
    CoverSeparation,
    /// If the image of `U` meets `V` then it lies in `O`.
    PairContainment,
}

/// Sample indices and the value that put time `n` in (or out of) the set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub n: u64,
    pub i: usize,
    pub j: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HittingSet {
    pub horizon: u64,
    pub role: Role,
    pub members: Vec<u64>,
    /// One witness per member, in member order (may be empty for derived
    /// sets).
    #[serde(default)]
    pub witnesses: Vec<Witness>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "bound")]
pub enum Mode {
    /// Every window `{n, ..., n+M}` meets the set.
    Syndetic(u64),
    /// The set contains `{n, ..., n+k}` for some `n`.
    Thick(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Holds,
    Fails,
    Inconclusive,
}

/// Interval `[start, start + len)` of times.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: u64,
    pub len: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub mode: Mode,
    pub outcome: Outcome,
    /// Syndetic: the longest hole (a violating window if it fails).
    /// Thick: the longest run (a witnessing run if it holds).
    pub certificate: Option<Span>,
}

/// Finite horizons shorter than this multiple of the bound are not evidence.
pub const HORIZON_FACTOR: u64 = 10;

impl HittingSet {
    pub fn new(horizon: u64, role: Role, mut members: Vec<u64>) -> Self {
        members.sort_unstable();
        members.dedup();
        members.retain(|&n| n <= horizon);
        HittingSet { horizon, role, members, witnesses: Vec::new() }
    }

    /// Complement within `{0, ..., horizon}`.
    pub fn complement(&self, role: Role) -> HittingSet {
        let mut out = Vec::with_capacity(self.horizon as usize + 1 - self.members.len());
        let mut it = self.members.iter().peekable();
        for n in 0..=self.horizon {
            if it.peek() == Some(&&n) {
                it.next();
            } else {
                out.push(n);
            }
        }
        HittingSet { horizon: self.horizon, role, members: out, witnesses: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.members.binary_search(&n).is_ok()
    }

    /// Maximal runs of consecutive members.
    pub fn runs(&self) -> Vec<Span> {
        let mut out: Vec<Span> = Vec::new();
        for &n in &self.members {
            match out.last_mut() {
                Some(s) if s.start + s.len == n => s.len += 1,
                _ => out.push(Span { start: n, len: 1 }),
            }
        }
        out
    }

    /// Maximal runs of non-members inside `{0, ..., horizon}`.
    pub fn holes(&self) -> Vec<Span> {
        let mut out = Vec::new();
        let mut next = 0u64;
        for &n in &self.members {
            if n > next {
                out.push(Span { start: next, len: n - next });
            }
            next = n + 1;
        }
        if next <= self.horizon {
            out.push(Span { start: next, len: self.horizon + 1 - next });
        }
        out
    }

    fn longest(spans: Vec<Span>) -> Option<Span> {
        // earliest among the longest
        spans.into_iter().fold(None, |best, s| match best {
            Some(b) if b.len >= s.len => Some(b),
            _ => Some(s),
        })
    }

    pub fn longest_hole(&self) -> Option<Span> {
        Self::longest(self.holes())
    }

    pub fn longest_run(&self) -> Option<Span> {
        Self::longest(self.runs())
    }

    /// Smallest `M` for which every window of `M+1` meets the set; `None`
    /// for the empty set.
    pub fn min_syndetic_bound(&self) -> Option<u64> {
        if self.members.is_empty() {
            return None;
        }
        Some(self.longest_hole().map_or(0, |h| h.len))
    }

    /// Largest `k` such that the set contains `k+1` consecutive times.
    pub fn max_thick_bound(&self) -> Option<u64> {
        self.longest_run().map(|r| r.len - 1)
    }

    pub fn classify(&self, mode: Mode) -> Classification {
        let (bound, outcome, certificate) = match mode {
            Mode::Syndetic(m) => {
                let hole = self.longest_hole();
                let holds = hole.is_none_or(|h| h.len <= m);
                let cert = match hole {
                    Some(h) if !holds => Some(Span { start: h.start, len: m + 1 }),
                    other => other,
                };
                (m, holds, cert)
            }
            Mode::Thick(k) => {
                // earliest witnessing run, else the longest one
                let run = self
                    .runs()
                    .into_iter()
                    .find(|r| r.len > k)
                    .or_else(|| self.longest_run());
                let holds = run.is_some_and(|r| r.len > k);
                let cert = match run {
                    Some(r) if holds => Some(Span { start: r.start, len: k + 1 }),
                    other => other,
                };
                (k, holds, cert)
            }
        };
        let outcome = if self.horizon < HORIZON_FACTOR.saturating_mul(bound) {
            Outcome::Inconclusive
        } else if outcome {
            Outcome::Holds
        } else {
            Outcome::Fails
        };
        Classification { mode, outcome, certificate }
    }

    pub fn gap_histogram(&self) -> BTreeMap<u64, u64> {
        histogram(self.holes())
    }

    pub fn run_histogram(&self) -> BTreeMap<u64, u64> {
        histogram(self.runs())
    }

    pub fn members_csv(&self) -> String {
        let mut s = String::from("n\n");
        for n in &self.members {
            let _ = writeln!(s, "{n}");
        }
        s
    }

    pub fn gap_csv(&self) -> String {
        histogram_csv("gap", &self.gap_histogram())
    }

    pub fn run_csv(&self) -> String {
        histogram_csv("run", &self.run_histogram())
    }

    /// Same set shifted by `t`, with the horizon extended by `t`.
    pub fn translate(&self, t: u64) -> HittingSet {
        HittingSet {
            horizon: self.horizon + t,
            role: self.role,
            members: self.members.iter().map(|n| n + t).collect(),
            witnesses: self.witnesses.iter().map(|w| Witness { n: w.n + t, ..*w }).collect(),
        }
    }

    /// The same set seen on the shorter horizon `h`.
    pub fn truncate(&self, h: u64) -> HittingSet {
        let keep = self.members.partition_point(|n| *n <= h);
        HittingSet {
            horizon: h.min(self.horizon),
            role: self.role,
            members: self.members[..keep].to_vec(),
            witnesses: self.witnesses.get(..keep).map(<[Witness]>::to_vec).unwrap_or_default(),
        }
    }

    /// `{j : j * p is a member}` on horizon `floor(N / p)`.
    pub fn subsample(&self, p: u64) -> HittingSet {
        let members = self.members.iter().filter(|n| *n % p == 0).map(|n| n / p).collect();
        HittingSet { horizon: self.horizon / p, role: self.role, members, witnesses: Vec::new() }
    }
}

fn histogram(spans: Vec<Span>) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for s in spans {
        *h.entry(s.len).or_insert(0) += 1;
    }
    h
}

pub fn histogram_csv(label: &str, h: &BTreeMap<u64, u64>) -> String {
    let mut s = format!("{label},count\n");
    for (k, v) in h {
        let _ = writeln!(s, "{k},{v}");
    }
    s
}
