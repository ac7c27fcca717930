//! Cylinder-refinement coding trees.
//!
//! Nodes are admissible words; a node with two admissible one-symbol
//! extensions emits one bit (the chosen symbol), a node with one extension
//! emits nothing. Walking a point down the tree yields its code, and
//! walking a bit string yields the longest word it determines.
//!
//! The Sturmian tree is exact at every depth: the words of length `n` are
//! the cells of the circle cut at `{-k rho : 0 <= k <= n}`, and a node
//! splits exactly when the next cut point `-(n+1) rho` falls inside its
//! cell. Other languages use a suffix automaton of a certified witness
//! word and are exact up to the certified depth.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::symbolic::automaton::SuffixAutomaton;
use crate::symbolic::mechanical::SturmianParams;
use crate::symbolic::substitution::SubstitutionRule;

/// Longest forced run tolerated while walking without a split.
const MAX_FORCED_RUN: u64 = 1 << 26;
/// Block level fixing the certified depth of the shared Chacon tree.
const CHACON_BLOCK_LEVEL: usize = 12;

/// What a node does with the next symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Node {
    Split,
    Forced(u8),
}

/// Position in a coding tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cursor {
    /// Cell `[B_left, B_right)` of the circle, `B_j = -j rho`. At depth 0
    /// both indices are 0 and the cell is the whole circle.
    Arc { depth: u64, left: u64, right: u64 },
    State { depth: u64, state: u32 },
}

impl Cursor {
    pub fn depth(&self) -> u64 {
        match *self {
            Cursor::Arc { depth, .. } | Cursor::State { depth, .. } => depth,
        }
    }
}

#[derive(Debug)]
enum Backing {
    Sturmian(Arc<SturmianParams>),
    Automaton { automaton: SuffixAutomaton, certified_depth: usize },
}

#[derive(Debug)]
pub struct CodingTree {
    id: String,
    backing: Backing,
}

impl PartialEq for CodingTree {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id
    }
}

impl CodingTree {
    /// Exact tree of the Sturmian language with the given slope.
    pub fn sturmian(params: Arc<SturmianParams>) -> Arc<Self> {
        Arc::new(CodingTree {
            id: format!("sturmian{}", params.slope()),
            backing: Backing::Sturmian(params),
        })
    }

    /// Tree of a substitution language, exact up to `certified_depth`.
    pub fn substitution(
        name: &str,
        rule: &SubstitutionRule,
        certified_depth: usize,
    ) -> Result<Arc<Self>> {
        let k = rule.certified_iterations(certified_depth + 1)?;
        let automaton = SuffixAutomaton::new(&rule.prefix(k));
        Ok(Arc::new(CodingTree {
            id: name.to_string(),
            backing: Backing::Automaton { automaton, certified_depth },
        }))
    }

    /// Shared golden-slope Sturmian tree.
    pub fn golden() -> Arc<Self> {
        static TREE: OnceLock<Arc<CodingTree>> = OnceLock::new();
        TREE.get_or_init(|| CodingTree::sturmian(SturmianParams::golden())).clone()
    }

    /// Shared Chacon tree. With `B_k = tau^k(0)` the fixed point is a
    /// concatenation of blocks `B_k` separated by at most one `1`, so every
    /// factor of length up to `|B_k| + 1` already occurs in
    /// `B_{k+1} = B_k B_k 1 B_k`.
    pub fn chacon() -> Arc<Self> {
        static TREE: OnceLock<Arc<CodingTree>> = OnceLock::new();
        TREE.get_or_init(|| {
            let rule = SubstitutionRule::chacon();
            let certified_depth = rule.prefix(CHACON_BLOCK_LEVEL).len();
            let automaton = SuffixAutomaton::new(&rule.prefix(CHACON_BLOCK_LEVEL + 1));
            Arc::new(CodingTree {
                id: "chacon".into(),
                backing: Backing::Automaton { automaton, certified_depth },
            })
        })
        .clone()
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// One-letter tag used in serialized sequence expressions.
    pub fn letter(&self) -> char {
        match &self.backing {
            Backing::Sturmian(_) => 'S',
            Backing::Automaton { .. } => {
                self.id.chars().next().map_or('T', |c| c.to_ascii_uppercase())
            }
        }
    }

    /// `None` for trees exact at every depth.
    pub fn certified_depth(&self) -> Option<usize> {
        match &self.backing {
            Backing::Sturmian(_) => None,
            Backing::Automaton { certified_depth, .. } => Some(*certified_depth),
        }
    }

    pub fn root(&self) -> Cursor {
        match &self.backing {
            Backing::Sturmian(_) => Cursor::Arc { depth: 0, left: 0, right: 0 },
            Backing::Automaton { automaton, .. } => Cursor::State { depth: 0, state: automaton.root() },
        }
    }

    pub fn node(&self, cursor: &Cursor) -> Result<Node> {
        match (&self.backing, *cursor) {
            (Backing::Sturmian(params), Cursor::Arc { depth, left, right }) => {
                if arc_contains_next(params, depth, left, right)? {
                    Ok(Node::Split)
                } else {
                    Ok(Node::Forced(params.symbol(0, depth - left)?))
                }
            }
            (Backing::Automaton { automaton, certified_depth }, Cursor::State { depth, state }) => {
                if depth as usize >= *certified_depth {
                    return Err(Error::CertifiedDepthExceeded {
                        requested: depth as usize + 1,
                        certified: *certified_depth,
                    });
                }
                match (automaton.step(state, 0), automaton.step(state, 1)) {
                    (Some(_), Some(_)) => Ok(Node::Split),
                    (Some(_), None) => Ok(Node::Forced(0)),
                    (None, Some(_)) => Ok(Node::Forced(1)),
                    (None, None) => Err(Error::CertificationFailed {
                        length: depth as usize + 1,
                        iterations: 0,
                    }),
                }
            }
            _ => Err(Error::InvalidParameter(format!("cursor does not belong to tree {}", self.id))),
        }
    }

    /// Move to the child along `symbol`; errors if that child is not admissible.
    pub fn advance(&self, cursor: &mut Cursor, symbol: u8) -> Result<()> {
        self.step(cursor, symbol).map(|_| ())
    }

    /// Like [`advance`](Self::advance), returning the node that was left.
    pub fn step(&self, cursor: &mut Cursor, symbol: u8) -> Result<Node> {
        let node = self.node(cursor)?;
        if let Node::Forced(s) = node {
            if s != symbol {
                return Err(Error::InvalidWord(format!(
                    "symbol {symbol} not admissible at depth {} of tree {}",
                    cursor.depth(),
                    self.id
                )));
            }
        }
        match cursor {
            Cursor::Arc { depth, left, right } => {
                if node == Node::Split {
                    if symbol == 0 {
                        *right = *depth + 1;
                    } else {
                        *left = *depth + 1;
                    }
                }
                *depth += 1;
            }
            Cursor::State { depth, state } => {
                let Backing::Automaton { automaton, .. } = &self.backing else {
                    unreachable!("state cursor on automaton tree")
                };
                *state = automaton.step(*state, symbol).expect("checked by node");
                *depth += 1;
            }
        }
        Ok(node)
    }

    /// Branch bits along `word`.
    pub fn encode(&self, word: &[u8]) -> Result<Vec<u8>> {
        let mut cursor = self.root();
        let mut bits = Vec::new();
        for &s in word {
            if self.step(&mut cursor, s)? == Node::Split {
                bits.push(s);
            }
        }
        Ok(bits)
    }

    /// Longest word determined by `bits`: the path stops at the first split
    /// after the bits run out.
    pub fn decode(&self, bits: &[u8]) -> Result<Vec<u8>> {
        let mut cursor = self.root();
        let mut word = Vec::new();
        let mut used = 0;
        let mut forced_run = 0u64;
        loop {
            let symbol = match self.node(&cursor)? {
                Node::Split if used == bits.len() => return Ok(word),
                Node::Split => {
                    used += 1;
                    forced_run = 0;
                    bits[used - 1]
                }
                Node::Forced(s) => {
                    forced_run += 1;
                    if forced_run > MAX_FORCED_RUN {
                        return Err(Error::WindowExhausted { limit: MAX_FORCED_RUN as usize });
                    }
                    s
                }
            };
            if symbol > 1 {
                return Err(Error::InvalidWord(format!("bit value {symbol}")));
            }
            word.push(symbol);
            self.advance(&mut cursor, symbol)?;
        }
    }

    /// Split counts `(min, max)` over all words of each length `0..=max_len`.
    pub fn split_profile(&self, max_len: usize) -> Result<Vec<(u32, u32)>> {
        let mut profile = Vec::with_capacity(max_len + 1);
        match &self.backing {
            Backing::Sturmian(params) => {
                let mut cells = CellPartition::new(params);
                profile.push((0, 0));
                for _ in 0..max_len {
                    cells.refine()?;
                    profile.push(cells.min_max());
                }
            }
            Backing::Automaton { .. } => {
                let mut layer = vec![(self.root(), 0u32)];
                profile.push((0, 0));
                for _ in 0..max_len {
                    let mut next = Vec::with_capacity(layer.len() + 2);
                    for (cursor, bits) in layer {
                        match self.node(&cursor)? {
                            Node::Split => {
                                for s in 0..2 {
                                    let mut c = cursor;
                                    self.advance(&mut c, s)?;
                                    next.push((c, bits + 1));
                                }
                            }
                            Node::Forced(s) => {
                                let mut c = cursor;
                                self.advance(&mut c, s)?;
                                next.push((c, bits));
                            }
                        }
                    }
                    let min = next.iter().map(|e| e.1).min().unwrap_or(0);
                    let max = next.iter().map(|e| e.1).max().unwrap_or(0);
                    profile.push((min, max));
                    layer = next;
                }
            }
        }
        Ok(profile)
    }

    /// Most bits any word of length `len` emits (code bits needed to pin
    /// down `len` symbols).
    pub fn bits_needed(&self, len: usize) -> Result<u32> {
        Ok(self.split_profile(len)?[len].1)
    }

    /// Least word length at which every word has emitted at least `bits`.
    pub fn input_depth(&self, bits: u32, max_len: usize) -> Result<usize> {
        if bits == 0 {
            return Ok(0);
        }
        match &self.backing {
            Backing::Sturmian(params) => {
                let mut cells = CellPartition::new(params);
                for len in 1..=max_len {
                    cells.refine()?;
                    if cells.min_max().0 >= bits {
                        return Ok(len);
                    }
                }
            }
            Backing::Automaton { certified_depth, .. } => {
                let limit = max_len.min(*certified_depth);
                let profile = self.split_profile(limit)?;
                if let Some(len) = profile.iter().position(|&(min, _)| min >= bits) {
                    return Ok(len);
                }
                return Err(Error::CertifiedDepthExceeded { requested: limit + 1, certified: limit });
            }
        }
        Err(Error::CertifiedDepthExceeded { requested: max_len + 1, certified: max_len })
    }

    /// All admissible words of length `len`, in lexicographic order.
    pub fn words(&self, len: usize) -> Result<Vec<Vec<u8>>> {
        let mut layer = vec![(self.root(), Vec::<u8>::new())];
        for _ in 0..len {
            let mut next = Vec::with_capacity(layer.len() + 2);
            for (cursor, word) in layer {
                let symbols: &[u8] = match self.node(&cursor)? {
                    Node::Split => &[0, 1],
                    Node::Forced(0) => &[0],
                    Node::Forced(_) => &[1],
                };
                for &s in symbols {
                    let mut c = cursor;
                    self.advance(&mut c, s)?;
                    let mut w = word.clone();
                    w.push(s);
                    next.push((c, w));
                }
            }
            layer = next;
        }
        let mut words: Vec<_> = layer.into_iter().map(|(_, w)| w).collect();
        words.sort();
        Ok(words)
    }

    /// For the Sturmian tree: the intercept interval `(start, width)` of
    /// words beginning with `word`, in units of `2^-128` (width 0 means the
    /// whole circle). `None` for other trees.
    pub fn intercept_interval(&self, word: &[u8]) -> Result<Option<(u128, u128)>> {
        let Backing::Sturmian(params) = &self.backing else {
            return Ok(None);
        };
        let mut cursor = self.root();
        for &s in word {
            self.advance(&mut cursor, s)?;
        }
        let Cursor::Arc { left, right, .. } = cursor else {
            unreachable!("sturmian tree uses arc cursors")
        };
        if left == right {
            return Ok(Some((0, 0)));
        }
        let start = cut(params, left);
        Ok(Some((start, cut(params, right).wrapping_sub(start))))
    }

    /// Plain-text dump: per depth, each admissible word with its child links
    /// and bit assignments.
    pub fn dump(&self, max_depth: usize) -> Result<String> {
        let mut out = format!("tree {}\n", self.id);
        let mut layer = vec![(self.root(), Vec::<u8>::new())];
        for depth in 0..=max_depth {
            let _ = writeln!(out, "depth {depth}");
            let mut next = Vec::new();
            for (cursor, word) in layer {
                let child = |s: u8| {
                    let mut w = word.clone();
                    w.push(s);
                    w
                };
                match self.node(&cursor)? {
                    Node::Split => {
                        let _ = writeln!(
                            out,
                            "  {} -> {} bit 0 | {} bit 1",
                            word_str(&word),
                            word_str(&child(0)),
                            word_str(&child(1))
                        );
                        for s in 0..2u8 {
                            let mut c = cursor;
                            self.advance(&mut c, s)?;
                            next.push((c, child(s)));
                        }
                    }
                    Node::Forced(s) => {
                        let _ = writeln!(
                            out,
                            "  {} -> {} forced",
                            word_str(&word),
                            word_str(&child(s))
                        );
                        let mut c = cursor;
                        self.advance(&mut c, s)?;
                        next.push((c, child(s)));
                    }
                }
            }
            next.sort_by(|a, b| a.1.cmp(&b.1));
            layer = next;
        }
        Ok(out)
    }
}

fn word_str(word: &[u8]) -> String {
    if word.is_empty() {
        "-".into()
    } else {
        word.iter().map(|&s| char::from(b'0' + s)).collect()
    }
}

fn cut(params: &SturmianParams, j: u64) -> u128 {
    params.rho_fixed().wrapping_mul(j as u128).wrapping_neg()
}

/// Whether `-(depth+1) rho` lies strictly inside the cell `[B_left, B_right)`.
fn arc_contains_next(params: &SturmianParams, depth: u64, left: u64, right: u64) -> Result<bool> {
    let b = cut(params, depth + 1);
    let l = cut(params, left);
    let from_left = b.wrapping_sub(l);
    let margin = 4 * (depth as u128 + 2);
    if left == right {
        // whole circle
        if from_left < margin || from_left.wrapping_neg() < margin {
            return Err(Error::PrecisionExhausted { index: depth, bits: 128 });
        }
        return Ok(true);
    }
    let width = cut(params, right).wrapping_sub(l);
    let inside = from_left < width;
    let gap = if inside { from_left.min(width - from_left) } else { from_left - width };
    if gap < margin {
        return Err(Error::PrecisionExhausted { index: depth, bits: 128 });
    }
    Ok(inside)
}

/// All cells of the Sturmian partition at the current depth, with the
/// number of splits on the path to each.
struct CellPartition {
    rho: u128,
    depth: u64,
    /// Keyed by left cut position.
    cells: BTreeMap<u128, u32>,
    histogram: BTreeMap<u32, usize>,
}

impl CellPartition {
    fn new(params: &SturmianParams) -> Self {
        CellPartition {
            rho: params.rho_fixed(),
            depth: 0,
            cells: BTreeMap::from([(0u128, 0u32)]),
            histogram: BTreeMap::from([(0u32, 1usize)]),
        }
    }

    fn refine(&mut self) -> Result<()> {
        let b = self.rho.wrapping_mul(self.depth as u128 + 1).wrapping_neg();
        let margin = 4 * (self.depth as u128 + 2);
        let (&left, &bits) = self
            .cells
            .range(..=b)
            .next_back()
            .or_else(|| self.cells.iter().next_back())
            .expect("partition is never empty");
        if b.wrapping_sub(left) < margin {
            return Err(Error::PrecisionExhausted { index: self.depth, bits: 128 });
        }
        self.cells.insert(b, bits + 1);
        self.cells.insert(left, bits + 1);
        let slot = self.histogram.get_mut(&bits).expect("count present");
        *slot -= 1;
        if *slot == 0 {
            self.histogram.remove(&bits);
        }
        *self.histogram.entry(bits + 1).or_default() += 2;
        self.depth += 1;
        Ok(())
    }

    fn min_max(&self) -> (u32, u32) {
        let min = *self.histogram.keys().next().unwrap_or(&0);
        let max = *self.histogram.keys().next_back().unwrap_or(&0);
        (min, max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    /// Tree built directly from a scanned factor language.
    fn language_tree_bits(lang: &[BTreeSet<Vec<u8>>], word: &[u8]) -> Vec<u8> {
        let mut bits = Vec::new();
        for n in 0..word.len() {
            let prefix = &word[..n];
            let ext = |s: u8| {
                let mut w = prefix.to_vec();
                w.push(s);
                lang[n + 1].contains(&w)
            };
            if ext(0) && ext(1) {
                bits.push(word[n]);
            }
        }
        bits
    }

    #[test]
    fn sturmian_tree_matches_scanned_language() {
        let params = SturmianParams::golden();
        let tree = CodingTree::sturmian(params.clone());
        let depth = 40;
        let lang: Vec<_> = (0..=depth).map(|n| params.factor_language(n).unwrap()).collect();
        for w in &lang[depth] {
            assert_eq!(tree.encode(w).unwrap(), language_tree_bits(&lang, w));
        }
        assert!(tree.encode(&[0, 0]).is_err());
    }

    #[test]
    fn chacon_tree_matches_scanned_language() {
        let rule = SubstitutionRule::chacon();
        let tree = CodingTree::substitution("chacon-test", &rule, 64).unwrap();
        let lang: Vec<_> = (0..=30).map(|n| rule.factor_language(n).unwrap()).collect();
        for w in &lang[30] {
            assert_eq!(tree.encode(w).unwrap(), language_tree_bits(&lang, w));
        }
    }

    #[test]
    fn root_split_emits_first_symbol() {
        for tree in [CodingTree::golden(), CodingTree::chacon()] {
            assert_eq!(tree.node(&tree.root()).unwrap(), Node::Split);
            assert_eq!(tree.decode(&[]).unwrap(), Vec::<u8>::new());
            assert_eq!(tree.decode(&[0]).unwrap()[0], 0);
            assert_eq!(tree.decode(&[1]).unwrap()[0], 1);
        }
    }

    #[test]
    fn decode_then_encode_is_identity_depth_8() {
        for tree in [CodingTree::golden(), CodingTree::chacon()] {
            let mut seen = BTreeSet::new();
            for code in 0u32..256 {
                let bits: Vec<u8> = (0..8).map(|i| ((code >> i) & 1) as u8).collect();
                let word = tree.decode(&bits).unwrap();
                assert_eq!(tree.encode(&word).unwrap(), bits);
                seen.insert(word);
            }
            assert_eq!(seen.len(), 256);
        }
    }

    #[test]
    fn split_profile_matches_enumeration() {
        let params = SturmianParams::golden();
        let tree = CodingTree::sturmian(params.clone());
        let profile = tree.split_profile(25).unwrap();
        for n in 1..=25 {
            let counts: Vec<u32> = params
                .factor_language(n)
                .unwrap()
                .iter()
                .map(|w| tree.encode(w).unwrap().len() as u32)
                .collect();
            let min = *counts.iter().min().unwrap();
            let max = *counts.iter().max().unwrap();
            assert_eq!(profile[n], (min, max), "n={n}");
        }
        let depth = tree.input_depth(4, 1 << 16).unwrap();
        assert!(profile.len() <= depth || profile[depth].0 >= 4);
    }

    #[test]
    fn dump_lists_children() {
        let dump = CodingTree::golden().dump(2).unwrap();
        assert!(dump.contains("depth 0\n  - -> 0 bit 0 | 1 bit 1"));
        assert!(dump.contains("forced"));
    }
}
