//! How points of one symbolic copy are generated.
//!
//! The coordinate sequence of a point is always what the metric sees; the
//! model decides which generator backs it. Sturmian-coordinate models
//! differ only in representation: `CodedOdometer` points are decoded 2-adic
//! integers and `CodedChacon` points are decoded Chacon sequences, so the
//! conjugated maps act on them by exact rewriting.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::symbolic::seq::{self, Seq, SymbolContext};
use crate::symbolic::substitution::FixedPoint;
use crate::symbolic::tree::CodingTree;

/// Positions scanned for an occurrence of a Chacon word before giving up.
const OCCURRENCE_SCAN: u64 = 1 << 22;
/// Upper end of the offsets used for Chacon samples.
const CHACON_OFFSET_RANGE: u64 = 1 << 36;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolicModel {
    /// Mechanical words given by their intercept.
    Sturmian,
    /// Sturmian points `h^-1(z)` for 2-adic `z`.
    CodedOdometer,
    /// Sturmian points `h^-1(y)` for Chacon sequences `y`.
    CodedChacon,
    /// Raw 2-adic integers.
    Odometer,
    /// Raw Chacon sequences.
    Chacon,
}

impl SymbolicModel {
    pub const ALL: [SymbolicModel; 5] = [
        SymbolicModel::Sturmian,
        SymbolicModel::CodedOdometer,
        SymbolicModel::CodedChacon,
        SymbolicModel::Odometer,
        SymbolicModel::Chacon,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            SymbolicModel::Sturmian => "sturmian",
            SymbolicModel::CodedOdometer => "coded-odometer",
            SymbolicModel::CodedChacon => "coded-chacon",
            SymbolicModel::Odometer => "odometer",
            SymbolicModel::Chacon => "chacon",
        }
    }

    /// Language tree of the coordinate sequences, `None` for the full shift.
    pub fn language_tree(&self, ctx: &SymbolContext) -> Option<Arc<CodingTree>> {
        match self {
            SymbolicModel::Sturmian | SymbolicModel::CodedOdometer | SymbolicModel::CodedChacon => {
                Some(ctx.sturmian_tree.clone())
            }
            SymbolicModel::Chacon => Some(CodingTree::chacon()),
            SymbolicModel::Odometer => None,
        }
    }

    /// Admissible words of length `len`.
    pub fn words(&self, ctx: &SymbolContext, len: usize) -> Result<Vec<Vec<u8>>> {
        match self.language_tree(ctx) {
            Some(tree) => tree.words(len),
            None => {
                if len > 24 {
                    return Err(Error::NetTooLarge { needed: usize::MAX, max: 1 << 24 });
                }
                Ok((0..1u64 << len)
                    .map(|v| (0..len).map(|i| ((v >> (len - 1 - i)) & 1) as u8).collect())
                    .collect())
            }
        }
    }

    pub fn language(&self, ctx: &SymbolContext, len: usize) -> Result<BTreeSet<Vec<u8>>> {
        Ok(self.words(ctx, len)?.into_iter().collect())
    }

    /// A point drawn from the whole copy.
    pub fn sample<R: Rng>(&self, ctx: &SymbolContext, rng: &mut R) -> Result<Seq> {
        self.sample_in_cylinder(ctx, &[], rng)
    }

    /// A point whose coordinates begin with `word`.
    pub fn sample_in_cylinder<R: Rng>(
        &self,
        ctx: &SymbolContext,
        word: &[u8],
        rng: &mut R,
    ) -> Result<Seq> {
        let s_tree = &ctx.sturmian_tree;
        match self {
            SymbolicModel::Sturmian => {
                let (start, width) = s_tree
                    .intercept_interval(word)?
                    .expect("sturmian tree has intercept intervals");
                let gamma = if width == 0 {
                    rng.random::<u128>()
                } else {
                    start.wrapping_add(rng.random_range(0..width))
                };
                Ok(seq::mechanical(ctx.params.clone(), gamma, 0))
            }
            SymbolicModel::CodedOdometer => {
                let bits = s_tree.encode(word)?;
                let z = seq::prefixed(&bits, seq::random_bits(rng.random()));
                Ok(seq::decode(s_tree, &z))
            }
            SymbolicModel::CodedChacon => {
                let c_tree = CodingTree::chacon();
                let bits = s_tree.encode(word)?;
                let chacon_word = c_tree.decode(&bits)?;
                let y = chacon_occurrence(&chacon_word, rng)?;
                Ok(seq::decode(s_tree, &seq::encode(&c_tree, &y)))
            }
            SymbolicModel::Odometer => {
                if word.iter().any(|&b| b > 1) {
                    return Err(Error::InvalidWord(format!("{word:?}")));
                }
                Ok(seq::prefixed(word, seq::random_bits(rng.random())))
            }
            SymbolicModel::Chacon => chacon_occurrence(word, rng),
        }
    }
}

impl fmt::Display for SymbolicModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SymbolicModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SymbolicModel::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown symbolic model {s:?}")))
    }
}

/// Shift of the Chacon fixed point starting with `word`, at a random
/// occurrence.
fn chacon_occurrence<R: Rng>(word: &[u8], rng: &mut R) -> Result<Seq> {
    let fixed = FixedPoint::chacon();
    let start = rng.random_range(0..CHACON_OFFSET_RANGE);
    if word.is_empty() {
        return Ok(seq::substitution(fixed, start));
    }
    let chunk = 4096usize.max(4 * word.len());
    let mut pos = start;
    while pos - start < OCCURRENCE_SCAN {
        let window = fixed.read(pos, chunk + word.len());
        if let Some(i) = window.windows(word.len()).position(|w| w == word) {
            return Ok(seq::substitution(fixed, pos + i as u64));
        }
        pos += chunk as u64;
    }
    Err(Error::EmptyRegion(format!("no occurrence of a Chacon word of length {}", word.len())))
}
