//! Binary substitutions and random access into their fixed points.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::symbolic::automaton::SuffixAutomaton;

/// Iteration level whose image of `0` is kept in memory for direct indexing.
const CACHE_LEVEL: usize = 12;
/// Give up certifying a factor language beyond this iteration count.
const MAX_ITERATIONS: usize = 16;

/// Rule table `0 -> images[0]`, `1 -> images[1]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubstitutionRule {
    images: [Vec<u8>; 2],
}

impl SubstitutionRule {
    pub fn new(zero: &[u8], one: &[u8]) -> Result<Self> {
        if zero.first() != Some(&0) || zero.len() < 2 {
            return Err(Error::InvalidParameter(
                "image of 0 must start with 0 and have length >= 2".into(),
            ));
        }
        if one.is_empty() || zero.iter().chain(one).any(|&s| s > 1) {
            return Err(Error::InvalidParameter("images must be nonempty binary words".into()));
        }
        Ok(SubstitutionRule { images: [zero.to_vec(), one.to_vec()] })
    }

    /// `0 -> 0010`, `1 -> 1`.
    pub fn chacon() -> Self {
        SubstitutionRule { images: [vec![0, 0, 1, 0], vec![1]] }
    }

    pub fn image(&self, symbol: u8) -> &[u8] {
        &self.images[symbol as usize]
    }

    /// Apply the rule once to every symbol of `word`.
    pub fn apply(&self, word: &[u8]) -> Vec<u8> {
        word.iter().flat_map(|&s| self.images[s as usize].iter().copied()).collect()
    }

    /// `tau^iterations(0)`.
    pub fn prefix(&self, iterations: usize) -> Vec<u8> {
        (0..iterations).fold(vec![0], |w, _| self.apply(&w))
    }

    /// Length-`n` factors of the fixed point, certified by requiring the
    /// factor count to be unchanged across two further iterations.
    pub fn factor_language(&self, n: usize) -> Result<BTreeSet<Vec<u8>>> {
        if n == 0 {
            return Ok(BTreeSet::from([Vec::new()]));
        }
        let k = self.certified_iterations(n)?;
        Ok(self.prefix(k).windows(n).map(<[u8]>::to_vec).collect())
    }

    /// Smallest iteration count `k` with `|tau^k(0)| >= n` whose length-`n`
    /// factor count agrees with that of `tau^{k+1}(0)` and `tau^{k+2}(0)`.
    pub fn certified_iterations(&self, n: usize) -> Result<usize> {
        let mut k = 0;
        let mut word = vec![0u8];
        while word.len() < n.max(1) {
            word = self.apply(&word);
            k += 1;
            if k > MAX_ITERATIONS {
                return Err(Error::CertificationFailed { length: n, iterations: k });
            }
        }
        let mut counts = Vec::new();
        let mut current = word;
        loop {
            counts.push(SuffixAutomaton::new(&current).count_factors(n));
            let len = counts.len();
            if len >= 3 && counts[len - 1] == counts[len - 3] {
                return Ok(k + len - 3);
            }
            if k + len > MAX_ITERATIONS {
                return Err(Error::CertificationFailed { length: n, iterations: k + len });
            }
            current = self.apply(&current);
        }
    }
}

/// Random access into the one-sided fixed point `tau^infinity(0)`.
#[derive(Debug)]
pub struct FixedPoint {
    rule: SubstitutionRule,
    /// `lengths[k][a] = |tau^k(a)|`, saturating.
    lengths: Vec<[u64; 2]>,
    cache: Vec<u8>,
}

impl PartialEq for FixedPoint {
    fn eq(&self, other: &Self) -> bool {
        self.rule == other.rule
    }
}

impl FixedPoint {
    /// Shared fixed point of the Chacon rule.
    pub fn chacon() -> Arc<Self> {
        static FIXED: OnceLock<Arc<FixedPoint>> = OnceLock::new();
        FIXED.get_or_init(|| FixedPoint::new(SubstitutionRule::chacon())).clone()
    }

    pub fn new(rule: SubstitutionRule) -> Arc<Self> {
        let mut lengths = vec![[1u64, 1u64]];
        while lengths.len() < 64 {
            let prev = *lengths.last().unwrap();
            let len_of = |a: usize| {
                rule.images[a]
                    .iter()
                    .fold(0u64, |acc, &s| acc.saturating_add(prev[s as usize]))
            };
            let next = [len_of(0), len_of(1)];
            lengths.push(next);
            if next[0] == u64::MAX {
                break;
            }
        }
        let cache = rule.prefix(CACHE_LEVEL);
        Arc::new(FixedPoint { rule, lengths, cache })
    }

    pub fn rule(&self) -> &SubstitutionRule {
        &self.rule
    }

    /// Symbols `[start, start + len)` of the fixed point.
    pub fn read(&self, start: u64, len: usize) -> Vec<u8> {
        let mut out = Vec::with_capacity(len);
        if len == 0 {
            return out;
        }
        let end = start.saturating_add(len as u64);
        let level = self
            .lengths
            .iter()
            .position(|l| l[0] >= end)
            .unwrap_or(self.lengths.len() - 1);
        self.emit(0, level, start, end, 0, &mut out);
        out
    }

    /// Append symbols of `tau^level(symbol)` (placed at absolute `base`)
    /// that fall in `[lo, hi)`.
    fn emit(&self, symbol: u8, level: usize, lo: u64, hi: u64, base: u64, out: &mut Vec<u8>) {
        let size = self.lengths[level][symbol as usize];
        let block_end = base.saturating_add(size);
        if block_end <= lo || base >= hi {
            return;
        }
        if symbol == 0 && (size as usize) <= self.cache.len() {
            let from = (lo.max(base) - base) as usize;
            let to = (hi.min(block_end) - base) as usize;
            out.extend_from_slice(&self.cache[from..to]);
            return;
        }
        if level == 0 {
            out.push(symbol);
            return;
        }
        let mut offset = base;
        for &s in self.rule.image(symbol) {
            let sub = self.lengths[level - 1][s as usize];
            self.emit(s, level - 1, lo, hi, offset, out);
            offset = offset.saturating_add(sub);
            if offset >= hi {
                break;
            }
        }
    }
}
