//! Lazily evaluated infinite binary sequences.
//!
//! A [`SeqExpr`] is a small expression tree whose leaves generate symbols
//! (mechanical words, substitution fixed points, hashed random bits) and
//! whose inner nodes transform streams (shift, dyadic addition, coding
//! through a tree and back). Constructors normalize on the fly so that
//! orbits under the corpus maps stay compact: `shift` folds into offsets,
//! additions merge, and `enc(T, dec(T, x))` / `dec(T, enc(T, x))` cancel.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::rng::mix;
use crate::symbolic::mechanical::SturmianParams;
use crate::symbolic::substitution::FixedPoint;
use crate::symbolic::tree::{CodingTree, Cursor, Node};

/// Longest run of non-split symbols read while producing one code bit.
const MAX_ENCODE_RUN: u64 = 1 << 24;
/// Chunk size for fixed-point reads.
const SUBST_CHUNK: usize = 256;

pub type Seq = Arc<SeqExpr>;

#[derive(Debug, PartialEq)]
pub enum SeqExpr {
    /// Lower mechanical word with intercept `gamma / 2^128`, shifted by `offset`.
    Mechanical { params: Arc<SturmianParams>, gamma: u128, offset: u64 },
    /// Substitution fixed point read from `offset`.
    Substitution { fixed: Arc<FixedPoint>, offset: u64 },
    /// Hashed pseudo-random bits.
    RandomBits { key: u64 },
    /// Finite word; reading past its end is an error.
    Literal(Arc<[u8]>),
    Prefixed { prefix: Arc<[u8]>, inner: Seq },
    Shift { inner: Seq, k: u64 },
    /// Dyadic sum with a non-negative integer, bit 0 least significant.
    AddInteger { inner: Seq, n: u64 },
    /// Branch bits of `inner` along `tree`.
    Encode { tree: Arc<CodingTree>, inner: Seq },
    /// Word of `tree` selected by the bits of `inner`.
    Decode { tree: Arc<CodingTree>, inner: Seq },
}

pub fn mechanical(params: Arc<SturmianParams>, gamma: u128, offset: u64) -> Seq {
    Arc::new(SeqExpr::Mechanical { params, gamma, offset })
}

pub fn substitution(fixed: Arc<FixedPoint>, offset: u64) -> Seq {
    Arc::new(SeqExpr::Substitution { fixed, offset })
}

pub fn random_bits(key: u64) -> Seq {
    Arc::new(SeqExpr::RandomBits { key })
}

pub fn literal(bits: &[u8]) -> Seq {
    Arc::new(SeqExpr::Literal(bits.into()))
}

pub fn prefixed(prefix: &[u8], inner: Seq) -> Seq {
    if prefix.is_empty() {
        return inner;
    }
    Arc::new(SeqExpr::Prefixed { prefix: prefix.into(), inner })
}

pub fn shift(inner: &Seq, k: u64) -> Seq {
    if k == 0 {
        return inner.clone();
    }
    match inner.as_ref() {
        SeqExpr::Mechanical { params, gamma, offset } => {
            mechanical(params.clone(), *gamma, offset + k)
        }
        SeqExpr::Substitution { fixed, offset } => substitution(fixed.clone(), offset + k),
        SeqExpr::Shift { inner, k: k0 } => shift(inner, k0 + k),
        SeqExpr::Prefixed { prefix, inner } => {
            let len = prefix.len() as u64;
            if k >= len {
                shift(inner, k - len)
            } else {
                prefixed(&prefix[k as usize..], inner.clone())
            }
        }
        SeqExpr::Literal(bits) if (k as usize) <= bits.len() => literal(&bits[k as usize..]),
        _ => Arc::new(SeqExpr::Shift { inner: inner.clone(), k }),
    }
}

pub fn add_integer(inner: &Seq, n: u64) -> Seq {
    if n == 0 {
        return inner.clone();
    }
    if let SeqExpr::AddInteger { inner: base, n: n0 } = inner.as_ref() {
        if let Some(total) = n0.checked_add(n) {
            return add_integer(base, total);
        }
    }
    Arc::new(SeqExpr::AddInteger { inner: inner.clone(), n })
}

pub fn encode(tree: &Arc<CodingTree>, inner: &Seq) -> Seq {
    if let SeqExpr::Decode { tree: t, inner: base } = inner.as_ref() {
        if t == tree {
            return base.clone();
        }
    }
    Arc::new(SeqExpr::Encode { tree: tree.clone(), inner: inner.clone() })
}

pub fn decode(tree: &Arc<CodingTree>, inner: &Seq) -> Seq {
    if let SeqExpr::Encode { tree: t, inner: base } = inner.as_ref() {
        if t == tree {
            return base.clone();
        }
    }
    Arc::new(SeqExpr::Decode { tree: tree.clone(), inner: inner.clone() })
}

/// Pull-based symbol source.
pub trait SymbolStream {
    fn next_symbol(&mut self) -> Result<u8>;
}

impl SeqExpr {
    pub fn stream(&self) -> Box<dyn SymbolStream + '_> {
        match self {
            SeqExpr::Mechanical { params, gamma, offset } => {
                Box::new(MechStream { params, gamma: *gamma, index: *offset })
            }
            SeqExpr::Substitution { fixed, offset } => Box::new(SubstStream {
                fixed,
                next: *offset,
                buf: Vec::new(),
                pos: 0,
            }),
            SeqExpr::RandomBits { key } => Box::new(RandStream { key: *key, index: 0 }),
            SeqExpr::Literal(bits) => Box::new(LitStream { bits, pos: 0, tail: None }),
            SeqExpr::Prefixed { prefix, inner } => {
                Box::new(LitStream { bits: prefix, pos: 0, tail: Some(inner.stream()) })
            }
            SeqExpr::Shift { inner, k } => {
                Box::new(ShiftStream { inner: inner.stream(), pending: *k })
            }
            SeqExpr::AddInteger { inner, n } => {
                Box::new(AddStream { inner: inner.stream(), addend: *n, index: 0, carry: 0 })
            }
            SeqExpr::Encode { tree, inner } => {
                Box::new(EncodeStream { tree, cursor: tree.root(), inner: inner.stream() })
            }
            SeqExpr::Decode { tree, inner } => {
                Box::new(DecodeStream { tree, cursor: tree.root(), inner: inner.stream() })
            }
        }
    }

    /// First `len` symbols.
    pub fn prefix(&self, len: usize) -> Result<Vec<u8>> {
        let mut stream = self.stream();
        (0..len).map(|_| stream.next_symbol()).collect()
    }

    /// Symbol at index `i`.
    pub fn symbol(&self, i: u64) -> Result<u8> {
        match self {
            SeqExpr::Mechanical { params, gamma, offset } => params.symbol(*gamma, offset + i),
            SeqExpr::Substitution { fixed, offset } => Ok(fixed.read(offset + i, 1)[0]),
            SeqExpr::RandomBits { key } => Ok(random_bit(*key, i)),
            _ => {
                let mut stream = self.stream();
                for _ in 0..i {
                    stream.next_symbol()?;
                }
                stream.next_symbol()
            }
        }
    }

    /// Finite length, if this is a bare literal.
    pub fn literal_len(&self) -> Option<usize> {
        match self {
            SeqExpr::Literal(bits) => Some(bits.len()),
            _ => None,
        }
    }
}

fn random_bit(key: u64, i: u64) -> u8 {
    ((mix(key, i / 64) >> (i % 64)) & 1) as u8
}

struct MechStream<'a> {
    params: &'a SturmianParams,
    gamma: u128,
    index: u64,
}

impl SymbolStream for MechStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        let s = self.params.symbol(self.gamma, self.index)?;
        self.index += 1;
        Ok(s)
    }
}

struct SubstStream<'a> {
    fixed: &'a FixedPoint,
    next: u64,
    buf: Vec<u8>,
    pos: usize,
}

impl SymbolStream for SubstStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        if self.pos == self.buf.len() {
            self.buf = self.fixed.read(self.next, SUBST_CHUNK);
            self.next += SUBST_CHUNK as u64;
            self.pos = 0;
        }
        self.pos += 1;
        Ok(self.buf[self.pos - 1])
    }
}

struct RandStream {
    key: u64,
    index: u64,
}

impl SymbolStream for RandStream {
    fn next_symbol(&mut self) -> Result<u8> {
        let b = random_bit(self.key, self.index);
        self.index += 1;
        Ok(b)
    }
}

struct LitStream<'a> {
    bits: &'a [u8],
    pos: usize,
    tail: Option<Box<dyn SymbolStream + 'a>>,
}

impl SymbolStream for LitStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        if self.pos < self.bits.len() {
            self.pos += 1;
            return Ok(self.bits[self.pos - 1]);
        }
        match &mut self.tail {
            Some(tail) => tail.next_symbol(),
            None => Err(Error::WindowExhausted { limit: self.bits.len() }),
        }
    }
}

struct ShiftStream<'a> {
    inner: Box<dyn SymbolStream + 'a>,
    pending: u64,
}

impl SymbolStream for ShiftStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        while self.pending > 0 {
            self.inner.next_symbol()?;
            self.pending -= 1;
        }
        self.inner.next_symbol()
    }
}

struct AddStream<'a> {
    inner: Box<dyn SymbolStream + 'a>,
    addend: u64,
    index: u32,
    carry: u8,
}

impl SymbolStream for AddStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        let a = if self.index < 64 { ((self.addend >> self.index) & 1) as u8 } else { 0 };
        self.index = self.index.saturating_add(1);
        let sum = self.inner.next_symbol()? + a + self.carry;
        self.carry = sum >> 1;
        Ok(sum & 1)
    }
}

struct EncodeStream<'a> {
    tree: &'a CodingTree,
    cursor: Cursor,
    inner: Box<dyn SymbolStream + 'a>,
}

impl SymbolStream for EncodeStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        for _ in 0..MAX_ENCODE_RUN {
            let s = self.inner.next_symbol()?;
            if self.tree.step(&mut self.cursor, s)? == Node::Split {
                return Ok(s);
            }
        }
        Err(Error::WindowExhausted { limit: MAX_ENCODE_RUN as usize })
    }
}

struct DecodeStream<'a> {
    tree: &'a CodingTree,
    cursor: Cursor,
    inner: Box<dyn SymbolStream + 'a>,
}

impl SymbolStream for DecodeStream<'_> {
    fn next_symbol(&mut self) -> Result<u8> {
        let s = match self.tree.node(&self.cursor)? {
            Node::Split => self.inner.next_symbol()?,
            Node::Forced(s) => s,
        };
        self.tree.advance(&mut self.cursor, s)?;
        Ok(s)
    }
}

/// Everything needed to parse serialized expressions.
#[derive(Debug, Clone)]
pub struct SymbolContext {
    pub params: Arc<SturmianParams>,
    pub sturmian_tree: Arc<CodingTree>,
}

impl SymbolContext {
    pub fn new(params: Arc<SturmianParams>) -> Self {
        let sturmian_tree = if *params == *SturmianParams::golden() {
            CodingTree::golden()
        } else {
            CodingTree::sturmian(params.clone())
        };
        SymbolContext { params, sturmian_tree }
    }

    pub fn golden() -> Self {
        SymbolContext::new(SturmianParams::golden())
    }

    fn tree(&self, letter: char) -> Result<Arc<CodingTree>> {
        match letter {
            'S' => Ok(self.sturmian_tree.clone()),
            'C' => Ok(CodingTree::chacon()),
            other => Err(Error::Parse(format!("unknown tree tag {other}"))),
        }
    }

    pub fn parse(&self, text: &str) -> Result<Seq> {
        let mut parser = Parser { ctx: self, src: text.as_bytes(), pos: 0 };
        let expr = parser.expr()?;
        if parser.pos != text.len() {
            return Err(Error::Parse(format!("trailing input in {text:?}")));
        }
        Ok(expr)
    }
}

fn bits_str(bits: &[u8]) -> String {
    bits.iter().map(|&b| char::from(b'0' + b)).collect()
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::Mechanical { gamma, offset, .. } => write!(f, "mech(0x{gamma:032x},{offset})"),
            SeqExpr::Substitution { offset, .. } => write!(f, "subst({offset})"),
            SeqExpr::RandomBits { key } => write!(f, "rand(0x{key:016x})"),
            SeqExpr::Literal(bits) => write!(f, "lit({})", bits_str(bits)),
            SeqExpr::Prefixed { prefix, inner } => write!(f, "pre({},{inner})", bits_str(prefix)),
            SeqExpr::Shift { inner, k } => write!(f, "shift({k},{inner})"),
            SeqExpr::AddInteger { inner, n } => write!(f, "add({n},{inner})"),
            SeqExpr::Encode { tree, inner } => write!(f, "enc({},{inner})", tree.letter()),
            SeqExpr::Decode { tree, inner } => write!(f, "dec({},{inner})", tree.letter()),
        }
    }
}

struct Parser<'a> {
    ctx: &'a SymbolContext,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, what: &str) -> Result<T> {
        Err(Error::Parse(format!(
            "{what} at byte {} of {:?}",
            self.pos,
            String::from_utf8_lossy(self.src)
        )))
    }

    fn eat(&mut self, c: u8) -> Result<()> {
        if self.src.get(self.pos) == Some(&c) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(&format!("expected {:?}", c as char))
        }
    }

    fn token(&mut self) -> &str {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("")
    }

    fn number(&mut self) -> Result<u128> {
        let tok = self.token().to_string();
        let parsed = match tok.strip_prefix("0x") {
            Some(hex) => u128::from_str_radix(hex, 16),
            None => tok.parse::<u128>(),
        };
        match parsed {
            Ok(v) => Ok(v),
            Err(_) => self.err(&format!("bad number {tok:?}")),
        }
    }

    fn u64(&mut self) -> Result<u64> {
        let v = self.number()?;
        match u64::try_from(v) {
            Ok(v) => Ok(v),
            Err(_) => self.err("number exceeds 64 bits"),
        }
    }

    fn bits(&mut self) -> Result<Vec<u8>> {
        let tok = self.token().to_string();
        if !tok.bytes().all(|b| b == b'0' || b == b'1') {
            return self.err("expected bit string");
        }
        Ok(tok.bytes().map(|b| b - b'0').collect())
    }

    fn expr(&mut self) -> Result<Seq> {
        let head = self.token().to_string();
        self.eat(b'(')?;
        let out = match head.as_str() {
            "mech" => {
                let gamma = self.number()?;
                self.eat(b',')?;
                let offset = self.u64()?;
                mechanical(self.ctx.params.clone(), gamma, offset)
            }
            "subst" => substitution(FixedPoint::chacon(), self.u64()?),
            "rand" => random_bits(self.u64()?),
            "lit" => literal(&self.bits()?),
            "pre" => {
                let bits = self.bits()?;
                self.eat(b',')?;
                prefixed(&bits, self.expr()?)
            }
            "shift" | "add" => {
                let k = self.u64()?;
                self.eat(b',')?;
                let inner = self.expr()?;
                if head == "shift" {
                    shift(&inner, k)
                } else {
                    add_integer(&inner, k)
                }
            }
            "enc" | "dec" => {
                let letter = self.token().chars().next().unwrap_or('?');
                let tree = self.ctx.tree(letter)?;
                self.eat(b',')?;
                let inner = self.expr()?;
                if head == "enc" {
                    encode(&tree, &inner)
                } else {
                    decode(&tree, &inner)
                }
            }
            other => return self.err(&format!("unknown expression {other:?}")),
        };
        self.eat(b')')?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::odometer::add_one_wrapping;

    #[test]
    fn shift_folds_into_offsets() {
        let params = SturmianParams::golden();
        let x = mechanical(params.clone(), 7, 0);
        let y = shift(&shift(&x, 3), 4);
        assert_eq!(*y, *mechanical(params.clone(), 7, 7));
        assert_eq!(y.prefix(10).unwrap(), params.word(7, 7, 10).unwrap());
    }

    #[test]
    fn add_matches_finite_carry() {
        let x = random_bits(42);
        let window = x.prefix(40).unwrap();
        let y = add_integer(&x, 1);
        let expected = add_one_wrapping(&window);
        // the carry out of a finite window only matters past its end
        assert_eq!(y.prefix(40).unwrap(), expected);
        let z = add_integer(&y, 2);
        assert_eq!(*z, *add_integer(&x, 3));
    }

    #[test]
    fn coding_round_trip_cancels() {
        let tree = CodingTree::golden();
        let base = random_bits(9);
        let x = decode(&tree, &base);
        assert_eq!(encode(&tree, &x), base);
        let bits = encode(&tree, &x).prefix(16).unwrap();
        assert_eq!(bits, base.prefix(16).unwrap());
    }

    #[test]
    fn encode_of_decoded_stream_streams_back() {
        // no cancellation when the outer tree differs
        let s = CodingTree::golden();
        let c = CodingTree::chacon();
        let x = decode(&s, &encode(&c, &substitution(FixedPoint::chacon(), 5)));
        let chacon_word = FixedPoint::chacon().read(5, 60);
        let bits = c.encode(&chacon_word).unwrap();
        let word = s.decode(&bits).unwrap();
        let n = word.len().min(20);
        assert_eq!(x.prefix(n).unwrap(), word[..n]);
    }

    #[test]
    fn text_round_trip() {
        let ctx = SymbolContext::golden();
        let s = CodingTree::golden();
        let c = CodingTree::chacon();
        let exprs = vec![
            mechanical(ctx.params.clone(), 0xdead_beef, 12),
            decode(&s, &add_integer(&random_bits(3), 17)),
            decode(&s, &encode(&c, &substitution(FixedPoint::chacon(), 99))),
            prefixed(&[1, 0, 1], random_bits(1)),
            literal(&[0, 1, 1]),
            shift(&decode(&s, &random_bits(5)), 3),
        ];
        for e in exprs {
            let text = e.to_string();
            let back = ctx.parse(&text).unwrap();
            assert_eq!(*back, *e, "{text}");
        }
        assert!(ctx.parse("mech(0x1,").is_err());
        assert!(ctx.parse("enc(Q,rand(1))").is_err());
    }

    #[test]
    fn literal_reads_past_end_fail() {
        let x = literal(&[1, 0]);
        assert!(x.prefix(2).is_ok());
        assert!(matches!(x.prefix(3), Err(Error::WindowExhausted { .. })));
    }
}
