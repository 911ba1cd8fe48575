//! Truth tables over at most [`MAX_VARS`] variables.
//!
//! Bit `p` holds `f(p)` where variable `i` is bit `i` of the assignment, so
//! variable 0 toggles fastest. Bits beyond `2^n` are kept zero.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{BitAnd, BitOr, BitXor, Not};

use thiserror::Error;

pub const MAX_VARS: usize = 10;
const WORDS: usize = 1 << (MAX_VARS - 6);

const PROJ: [u64; 6] = [
    0xAAAA_AAAA_AAAA_AAAA,
    0xCCCC_CCCC_CCCC_CCCC,
    0xF0F0_F0F0_F0F0_F0F0,
    0xFF00_FF00_FF00_FF00,
    0xFFFF_0000_FFFF_0000,
    0xFFFF_FFFF_0000_0000,
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TruthError {
    #[error("arity mismatch: {0} vs {1} variables")]
    ArityMismatch(usize, usize),
    #[error("cone has {0} leaves, at most {MAX_VARS} supported")]
    ConeTooLarge(usize),
    #[error("bad hex truth table {0:?} for {1} variables")]
    BadHex(String, usize),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct TruthTable {
    n: u8,
    w: [u64; WORDS],
}

fn num_words(n: usize) -> usize {
    if n <= 6 {
        1
    } else {
        1 << (n - 6)
    }
}

fn tail_mask(n: usize) -> u64 {
    if n >= 6 {
        !0
    } else {
        (1u64 << (1 << n)) - 1
    }
}

impl TruthTable {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_VARS, "{n} variables exceed the limit");
        TruthTable { n: n as u8, w: [0; WORDS] }
    }

    pub fn ones(n: usize) -> Self {
        !Self::zero(n)
    }

    /// Projection onto variable `i`.
    pub fn var(n: usize, i: usize) -> Self {
        assert!(i < n);
        let mut t = Self::zero(n);
        for (k, w) in t.w[..num_words(n)].iter_mut().enumerate() {
            *w = if i < 6 {
                PROJ[i]
            } else if (k >> (i - 6)) & 1 == 1 {
                !0
            } else {
                0
            };
        }
        t.normalize();
        t
    }

    /// Table from the low `2^n` bits of `bits` (n ≤ 6).
    pub fn from_u64(n: usize, bits: u64) -> Self {
        assert!(n <= 6);
        let mut t = Self::zero(n);
        t.w[0] = bits;
        t.normalize();
        t
    }

    pub fn from_words(n: usize, words: &[u64]) -> Self {
        let mut t = Self::zero(n);
        let k = num_words(n);
        assert_eq!(words.len(), k, "expected {k} words");
        t.w[..k].copy_from_slice(words);
        t.normalize();
        t
    }

    pub fn num_vars(&self) -> usize {
        self.n as usize
    }

    pub fn num_bits(&self) -> usize {
        1 << self.n
    }

    pub fn words(&self) -> &[u64] {
        &self.w[..num_words(self.num_vars())]
    }

    /// Low word; the whole table when n ≤ 6.
    pub fn as_u64(&self) -> u64 {
        self.w[0]
    }

    fn normalize(&mut self) {
        let n = self.num_vars();
        self.w[0] &= tail_mask(n);
        for w in &mut self.w[num_words(n)..] {
            *w = 0;
        }
    }

    pub fn bit(&self, p: usize) -> bool {
        debug_assert!(p < self.num_bits());
        (self.w[p >> 6] >> (p & 63)) & 1 == 1
    }

    pub fn set_bit(&mut self, p: usize, v: bool) {
        assert!(p < self.num_bits());
        if v {
            self.w[p >> 6] |= 1 << (p & 63);
        } else {
            self.w[p >> 6] &= !(1 << (p & 63));
        }
    }

    pub fn count_ones(&self) -> u32 {
        self.words().iter().map(|w| w.count_ones()).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words().iter().all(|&w| w == 0)
    }

    pub fn is_ones(&self) -> bool {
        (!*self).is_zero()
    }

    pub fn try_and(&self, o: &Self) -> Result<Self, TruthError> {
        self.check(o)?;
        Ok(*self & *o)
    }

    pub fn try_or(&self, o: &Self) -> Result<Self, TruthError> {
        self.check(o)?;
        Ok(*self | *o)
    }

    pub fn try_xor(&self, o: &Self) -> Result<Self, TruthError> {
        self.check(o)?;
        Ok(*self ^ *o)
    }

    fn check(&self, o: &Self) -> Result<(), TruthError> {
        if self.n == o.n {
            Ok(())
        } else {
            Err(TruthError::ArityMismatch(self.num_vars(), o.num_vars()))
        }
    }

    fn zip(mut self, o: &Self, f: impl Fn(u64, u64) -> u64) -> Self {
        assert_eq!(self.n, o.n, "truth table arity mismatch");
        for (a, b) in self.w.iter_mut().zip(o.w.iter()) {
            *a = f(*a, *b);
        }
        self.normalize();
        self
    }

    /// Cofactor with respect to `var = polarity`, kept at the same arity.
    pub fn cofactor(&self, var: usize, polarity: bool) -> Self {
        assert!(var < self.num_vars());
        let mut t = *self;
        let k = num_words(self.num_vars());
        if var < 6 {
            let s = 1 << var;
            for w in &mut t.w[..k] {
                *w = if polarity {
                    let x = *w & PROJ[var];
                    x | (x >> s)
                } else {
                    let x = *w & !PROJ[var];
                    x | (x << s)
                };
            }
        } else {
            let step = 1 << (var - 6);
            for i in 0..k {
                let src = if polarity { i | step } else { i & !step };
                t.w[i] = self.w[src];
            }
        }
        t.normalize();
        t
    }

    pub fn depends_on(&self, var: usize) -> bool {
        self.cofactor(var, false) != self.cofactor(var, true)
    }

    /// Variables the function depends on, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.num_vars()).filter(|&v| self.depends_on(v)).collect()
    }

    /// Complements input `var`.
    pub fn flip_var(&self, var: usize) -> Self {
        let mut t = *self;
        let k = num_words(self.num_vars());
        if var < 6 {
            let s = 1 << var;
            for w in &mut t.w[..k] {
                *w = ((*w & PROJ[var]) >> s) | ((*w & !PROJ[var]) << s);
            }
        } else {
            let step = 1 << (var - 6);
            for i in 0..k {
                t.w[i] = self.w[i ^ step];
            }
        }
        t
    }

    /// Re-expresses the function over `m` variables where old variable `i`
    /// becomes `map[i]`. Variables not named in `map` are don't-cares.
    pub fn remap(&self, m: usize, map: &[usize]) -> Self {
        assert_eq!(map.len(), self.num_vars());
        let mut t = Self::zero(m);
        for x in 0..(1usize << m) {
            let mut y = 0;
            for (i, &j) in map.iter().enumerate() {
                y |= ((x >> j) & 1) << i;
            }
            if self.bit(y) {
                t.set_bit(x, true);
            }
        }
        t
    }

    /// `result(x) = out ⊕ self(y)` with `y_j = x_{perm[j]} ⊕ phase_j`.
    pub fn apply_npn_transform(&self, t: &NpnTransform) -> Self {
        let n = self.num_vars();
        assert_eq!(t.num_vars(), n, "transform arity mismatch");
        let mut r = Self::zero(n);
        for x in 0..(1usize << n) {
            let mut y = t.input_phase as usize;
            for j in 0..n {
                y ^= ((x >> t.perm[j]) & 1) << j;
            }
            r.set_bit(x, self.bit(y) ^ t.output_phase);
        }
        r
    }

    /// Hex digits, most significant first; `2^n / 4` digits (at least one).
    pub fn to_hex(&self) -> String {
        let n = self.num_vars();
        let digits = if n >= 2 { 1 << (n - 2) } else { 1 };
        let mut s = String::with_capacity(digits);
        for d in (0..digits).rev() {
            let nib = (self.w[d / 16] >> ((d % 16) * 4)) & 0xF;
            s.push(char::from_digit(nib as u32, 16).unwrap());
        }
        s
    }

    pub fn from_hex(n: usize, s: &str) -> Result<Self, TruthError> {
        let bad = || TruthError::BadHex(s.to_string(), n);
        if n > MAX_VARS {
            return Err(bad());
        }
        let digits = if n >= 2 { 1 << (n - 2) } else { 1 };
        let s = s.strip_prefix("0x").unwrap_or(s);
        if s.len() != digits {
            return Err(bad());
        }
        let mut t = Self::zero(n);
        for (i, c) in s.chars().rev().enumerate() {
            let v = c.to_digit(16).ok_or_else(bad)? as u64;
            t.w[i / 16] |= v << ((i % 16) * 4);
        }
        let before = t;
        t.normalize();
        if t != before {
            return Err(bad());
        }
        Ok(t)
    }
}

impl Not for TruthTable {
    type Output = Self;
    fn not(mut self) -> Self {
        for w in &mut self.w {
            *w = !*w;
        }
        self.normalize();
        self
    }
}

impl BitAnd for TruthTable {
    type Output = Self;
    fn bitand(self, o: Self) -> Self {
        self.zip(&o, |a, b| a & b)
    }
}

impl BitOr for TruthTable {
    type Output = Self;
    fn bitor(self, o: Self) -> Self {
        self.zip(&o, |a, b| a | b)
    }
}

impl BitXor for TruthTable {
    type Output = Self;
    fn bitxor(self, o: Self) -> Self {
        self.zip(&o, |a, b| a ^ b)
    }
}

/// Arity first, then the bit vector read as an unsigned integer.
impl Ord for TruthTable {
    fn cmp(&self, o: &Self) -> Ordering {
        self.n
            .cmp(&o.n)
            .then_with(|| self.w.iter().rev().cmp(o.w.iter().rev()))
    }
}

impl PartialOrd for TruthTable {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruthTable({}, 0x{})", self.n, self.to_hex())
    }
}

/// Input permutation, input negation mask and output negation.
///
/// Applying `t` to `f` gives `g(x) = o ⊕ f(y)` with `y_j = x_{perm[j]} ⊕ phase_j`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct NpnTransform {
    n: u8,
    perm: [u8; MAX_VARS],
    pub input_phase: u16,
    pub output_phase: bool,
}

impl NpnTransform {
    pub fn identity(n: usize) -> Self {
        assert!(n <= MAX_VARS);
        let mut perm = [0u8; MAX_VARS];
        for (i, p) in perm.iter_mut().enumerate() {
            *p = i as u8;
        }
        NpnTransform { n: n as u8, perm, input_phase: 0, output_phase: false }
    }

    /// Panics unless `perm` is a bijection on `0..perm.len()`.
    pub fn new(perm: &[usize], input_phase: u16, output_phase: bool) -> Self {
        let n = perm.len();
        assert!(n <= MAX_VARS);
        let mut seen = 0u32;
        let mut p = [0u8; MAX_VARS];
        for (j, &v) in perm.iter().enumerate() {
            assert!(v < n && seen & (1 << v) == 0, "not a permutation: {perm:?}");
            seen |= 1 << v;
            p[j] = v as u8;
        }
        for (j, slot) in p.iter_mut().enumerate().skip(n) {
            *slot = j as u8;
        }
        assert!(input_phase >> n == 0, "phase mask wider than arity");
        NpnTransform { n: n as u8, perm: p, input_phase, output_phase }
    }

    pub fn num_vars(&self) -> usize {
        self.n as usize
    }

    pub fn perm(&self) -> &[u8] {
        &self.perm[..self.num_vars()]
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.num_vars())
    }

    pub fn phase(&self, j: usize) -> bool {
        (self.input_phase >> j) & 1 == 1
    }

    /// `f.apply(a).apply(b) == f.apply(a.then(&b))`.
    pub fn then(&self, b: &NpnTransform) -> NpnTransform {
        assert_eq!(self.n, b.n);
        let mut c = Self::identity(self.num_vars());
        for j in 0..self.num_vars() {
            let pa = self.perm[j] as usize;
            c.perm[j] = b.perm[pa];
            let ph = self.phase(j) ^ b.phase(pa);
            c.input_phase |= (ph as u16) << j;
        }
        c.output_phase = self.output_phase ^ b.output_phase;
        c
    }

    pub fn inverse(&self) -> NpnTransform {
        let mut q = Self::identity(self.num_vars());
        for j in 0..self.num_vars() {
            q.perm[self.perm[j] as usize] = j as u8;
        }
        for k in 0..self.num_vars() {
            let ph = self.phase(q.perm[k] as usize);
            q.input_phase |= (ph as u16) << k;
        }
        q.output_phase = self.output_phase;
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn projections_and_hex() {
        assert_eq!(TruthTable::var(2, 0).to_hex(), "a");
        assert_eq!(TruthTable::var(2, 1).to_hex(), "c");
        assert_eq!(TruthTable::var(3, 2).to_hex(), "f0");
        let t = TruthTable::var(8, 7);
        assert_eq!(t.count_ones(), 128);
        assert_eq!(TruthTable::from_hex(8, &t.to_hex()).unwrap(), t);
        assert_eq!(TruthTable::zero(0).to_hex(), "0");
        assert_eq!(TruthTable::ones(1).to_hex(), "3");
        assert!(TruthTable::from_hex(2, "1f").is_err());
        assert!(TruthTable::from_hex(1, "4").is_err());
    }

    #[test]
    fn and_of_two_vars_is_eight() {
        let t = TruthTable::var(2, 0) & TruthTable::var(2, 1);
        assert_eq!(t.as_u64(), 0x8);
    }

    #[test]
    fn cofactor_basics() {
        let x0 = TruthTable::var(2, 0);
        let x1 = TruthTable::var(2, 1);
        assert_eq!((x0 & x1).cofactor(0, true), x1);
        assert!((x0 & x1).cofactor(0, false).is_zero());
        let big = TruthTable::var(9, 8) & TruthTable::var(9, 3);
        assert_eq!(big.cofactor(8, true), TruthTable::var(9, 3));
        assert_eq!(big.support(), vec![3, 8]);
    }

    #[test]
    fn arity_mismatch_is_reported() {
        let a = TruthTable::var(2, 0);
        let b = TruthTable::var(3, 0);
        assert_eq!(a.try_and(&b), Err(TruthError::ArityMismatch(2, 3)));
        assert!(a.try_xor(&a).unwrap().is_zero());
    }

    #[test]
    fn ordering_is_numeric() {
        let a = TruthTable::from_u64(4, 0x00ff);
        let b = TruthTable::from_u64(4, 0x0100);
        assert!(a < b);
        let mut c = TruthTable::zero(8);
        c.set_bit(255, true);
        let mut d = TruthTable::zero(8);
        d.set_bit(0, true);
        assert!(d < c);
    }

    #[test]
    fn flip_matches_transform() {
        let t = TruthTable::from_words(7, &[0x1234_5678_9abc_def0, 0x0fed_cba9_8765_4321]);
        for v in 0..7 {
            let tr = NpnTransform::new(&[0, 1, 2, 3, 4, 5, 6], 1 << v, false);
            assert_eq!(t.flip_var(v), t.apply_npn_transform(&tr));
        }
    }

    #[test]
    fn remap_pads_and_reorders() {
        let t = TruthTable::var(2, 0) & !TruthTable::var(2, 1);
        let r = t.remap(4, &[3, 1]);
        assert_eq!(r, TruthTable::var(4, 3) & !TruthTable::var(4, 1));
    }
}
