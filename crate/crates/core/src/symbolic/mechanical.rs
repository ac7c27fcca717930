//! Lower mechanical words of irrational slope.
//!
//! A Sturmian point is addressed by an exact dyadic intercept `gamma`
//! (a `u128` fraction of the unit interval) plus a shift count. Symbol `n`
//! is `floor((n+1)rho + gamma) - floor(n rho + gamma)`, decided with a
//! guarded fixed-point evaluation that escalates precision when the
//! interval straddles the threshold.

use std::collections::BTreeSet;
use std::sync::{Arc, OnceLock};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Roots;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Precision ladder for symbol evaluation, in bits.
const PRECISION_LADDER: [u32; 5] = [256, 512, 1024, 2048, 4096];

/// Slope `(a + b*sqrt(d)) / c`, required irrational and inside (0, 1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticSlope {
    pub a: i64,
    pub b: i64,
    pub c: i64,
    pub d: u64,
}

impl QuadraticSlope {
    /// `(sqrt(5) - 1) / 2`.
    pub const GOLDEN: QuadraticSlope = QuadraticSlope { a: -1, b: 1, c: 2, d: 5 };

    pub fn new(a: i64, b: i64, c: i64, d: u64) -> Result<Self> {
        let slope = QuadraticSlope { a, b, c, d };
        slope.validate()?;
        Ok(slope)
    }

    fn validate(&self) -> Result<()> {
        if self.c <= 0 || self.b == 0 {
            return Err(Error::InvalidParameter(format!("degenerate slope {self}")));
        }
        let r = self.d.sqrt();
        if r * r == self.d {
            return Err(Error::InvalidParameter(format!("slope {self} is rational")));
        }
        let v = self.to_f64();
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::InvalidParameter(format!("slope {self} outside (0,1)")));
        }
        Ok(())
    }

    pub fn to_f64(&self) -> f64 {
        (self.a as f64 + self.b as f64 * (self.d as f64).sqrt()) / self.c as f64
    }

    /// `floor(rho * 2^bits)`, within 2 units of the true scaled value.
    pub fn scaled(&self, bits: u32) -> BigUint {
        let one = BigInt::one();
        let scale = &one << bits;
        let b_abs = BigInt::from(self.b.unsigned_abs());
        let radicand = (&b_abs * &b_abs) * BigInt::from(self.d) * (&scale * &scale);
        let root = radicand.sqrt();
        let mut num = BigInt::from(self.a) * &scale;
        if self.b > 0 {
            num += root;
        } else {
            num -= root;
        }
        let q = num / BigInt::from(self.c);
        match q.sign() {
            Sign::Minus => BigUint::zero(),
            _ => q.to_biguint().unwrap_or_default(),
        }
    }
}

impl std::fmt::Display for QuadraticSlope {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}{:+}*sqrt({}))/{}", self.a, self.b, self.d, self.c)
    }
}

/// Slope data for a Sturmian subshift, with cached fixed-point expansions.
#[derive(Debug)]
pub struct SturmianParams {
    slope: QuadraticSlope,
    fixed128: u128,
    ladder: [OnceLock<BigUint>; PRECISION_LADDER.len()],
    cf: Vec<u64>,
}

impl PartialEq for SturmianParams {
    fn eq(&self, other: &Self) -> bool {
        self.slope == other.slope
    }
}

impl SturmianParams {
    pub fn new(slope: QuadraticSlope) -> Result<Arc<Self>> {
        slope.validate()?;
        let fixed = slope.scaled(128);
        let fixed128 = fixed.to_u128().ok_or_else(|| {
            Error::InvalidParameter(format!("slope {slope} overflows fixed point"))
        })?;
        let cf = continued_fraction(&slope.scaled(4096), 4096);
        if cf.len() < 40 {
            return Err(Error::InvalidParameter(format!(
                "only {} certified continued-fraction terms for {slope}",
                cf.len()
            )));
        }
        Ok(Arc::new(SturmianParams {
            slope,
            fixed128,
            ladder: Default::default(),
            cf,
        }))
    }

    pub fn golden() -> Arc<Self> {
        Self::new(QuadraticSlope::GOLDEN).expect("golden slope is valid")
    }

    pub fn slope(&self) -> QuadraticSlope {
        self.slope
    }

    pub fn rho(&self) -> f64 {
        self.slope.to_f64()
    }

    /// `floor(rho * 2^128)` (within two units).
    pub fn rho_fixed(&self) -> u128 {
        self.fixed128
    }

    /// Continued-fraction partial quotients `[a1, a2, ...]` of rho.
    pub fn continued_fraction(&self) -> &[u64] {
        &self.cf
    }

    /// Convergent denominators `q_0 = 1, q_1 = a1, ...`.
    pub fn denominators(&self) -> Vec<u128> {
        let mut qs = Vec::with_capacity(self.cf.len() + 1);
        let (mut q_prev, mut q) = (0u128, 1u128);
        qs.push(q);
        for &a in &self.cf {
            let next = match (a as u128).checked_mul(q).and_then(|v| v.checked_add(q_prev)) {
                Some(v) => v,
                None => break,
            };
            q_prev = q;
            q = next;
            qs.push(q);
        }
        qs
    }

    fn scaled_at(&self, level: usize) -> &BigUint {
        self.ladder[level].get_or_init(|| self.slope.scaled(PRECISION_LADDER[level]))
    }

    /// Symbol at absolute index `m` of the word with intercept `gamma`.
    pub fn symbol(&self, gamma: u128, m: u64) -> Result<u8> {
        let rho = self.fixed128;
        let pos = gamma.wrapping_add(rho.wrapping_mul(m as u128));
        let threshold = rho.wrapping_neg();
        if let Some(bit) = decide_u128(pos, threshold, m) {
            return Ok(bit);
        }
        for (level, &bits) in PRECISION_LADDER.iter().enumerate() {
            let rho_p = self.scaled_at(level);
            let modulus = BigUint::one() << bits;
            let g = BigUint::from(gamma) << (bits - 128);
            let pos = (g + rho_p * BigUint::from(m)) % &modulus;
            let threshold = &modulus - rho_p;
            if let Some(bit) = decide_big(&pos, &threshold, &modulus, m) {
                return Ok(bit);
            }
        }
        Err(Error::PrecisionExhausted {
            index: m,
            bits: *PRECISION_LADDER.last().unwrap_or(&128),
        })
    }

    /// Symbols `m0 .. m0 + len` for intercept `gamma`.
    pub fn word(&self, gamma: u128, m0: u64, len: usize) -> Result<Vec<u8>> {
        (0..len as u64).map(|i| self.symbol(gamma, m0 + i)).collect()
    }

    /// Length of a scanned word guaranteed to contain every factor of
    /// length `n`: `q_{j+2} + q_{j+1} + n`, `q_j` the largest convergent
    /// denominator not exceeding `n`.
    pub fn scan_length(&self, n: usize) -> Result<usize> {
        let qs = self.denominators();
        let j = qs
            .iter()
            .rposition(|&q| q <= n as u128)
            .unwrap_or(0);
        if j + 2 >= qs.len() {
            return Err(Error::CertificationFailed { length: n, iterations: qs.len() });
        }
        let total = qs[j + 2] + qs[j + 1] + n as u128;
        usize::try_from(total)
            .map_err(|_| Error::CertificationFailed { length: n, iterations: qs.len() })
    }

    /// All length-`n` factors of the subshift.
    pub fn factor_language(&self, n: usize) -> Result<BTreeSet<Vec<u8>>> {
        if n == 0 {
            return Ok(BTreeSet::from([Vec::new()]));
        }
        let len = self.scan_length(n)?;
        let word = self.word(0, 0, len)?;
        Ok(word.windows(n).map(<[u8]>::to_vec).collect())
    }
}

/// Guarded decision at 128 bits. The scaled slope and threshold are within
/// 2 units of their true values, so the position is within `2m` units.
fn decide_u128(pos: u128, threshold: u128, m: u64) -> Option<u8> {
    let err = 2u128 * m as u128;
    if pos < err || pos > u128::MAX - err {
        return None;
    }
    if pos - err >= threshold.checked_add(2)? {
        Some(1)
    } else if pos + err < threshold.checked_sub(2)? {
        Some(0)
    } else {
        None
    }
}

fn decide_big(pos: &BigUint, threshold: &BigUint, modulus: &BigUint, m: u64) -> Option<u8> {
    let err = BigUint::from(2u128 * m as u128);
    let two = BigUint::from(2u8);
    if pos < &err || pos + &err >= *modulus {
        return None;
    }
    if pos - &err >= threshold + &two {
        Some(1)
    } else if threshold >= &two && pos + &err < threshold - &two {
        Some(0)
    } else {
        None
    }
}

/// Partial quotients of `num / 2^bits`, keeping only terms whose
/// convergent denominators stay well inside the available precision.
fn continued_fraction(num: &BigUint, bits: u32) -> Vec<u64> {
    let mut p = num.clone();
    let mut q = BigUint::one() << bits;
    // rho = p / q < 1, so the leading term is 0 and is skipped.
    let mut terms = Vec::new();
    let limit = BigUint::one() << (bits / 2 - 8);
    let (mut d_prev, mut d) = (BigUint::zero(), BigUint::one());
    while !p.is_zero() {
        let (a, r) = (&q / &p, &q % &p);
        let next = &a * &d + &d_prev;
        if next > limit {
            break;
        }
        match a.to_u64() {
            Some(v) => terms.push(v),
            None => break,
        }
        d_prev = std::mem::replace(&mut d, next);
        q = std::mem::replace(&mut p, r);
    }
    terms
}
