//! Lazily materialized infinite binary sequences.

use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::rng::mix64;

/// Law of the i.i.d. tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BitLaw {
    /// Fair coin.
    Fair,
    /// `P(bit = 1) = p`, stored as a threshold on a uniform 64-bit draw.
    Bernoulli { p: f64, threshold: u64 },
}

impl BitLaw {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid("Bernoulli parameter must lie in (0,1)"));
        }
        if p == 0.5 {
            return Ok(BitLaw::Fair);
        }
        let threshold = (p * 18_446_744_073_709_551_616.0) as u64;
        Ok(BitLaw::Bernoulli { p, threshold })
    }

    /// Probability of a one.
    pub fn p_one(&self) -> f64 {
        match self {
            BitLaw::Fair => 0.5,
            BitLaw::Bernoulli { p, .. } => *p,
        }
    }
}

/// A one-sided sequence `ω_1 ω_2 …`, stored 0-based: bit `k` is `ω_{k+1}`.
///
/// Coordinates beyond the materialized prefix are a pure function of
/// `(key, k)`, so reading a coordinate twice always gives the same bit.
/// Writes (the adding machine) materialize the touched words first.
#[derive(Clone, Debug, PartialEq)]
pub struct LazyBits {
    key: u64,
    law: BitLaw,
    words: Vec<u64>,
}

impl LazyBits {
    pub fn new(law: BitLaw, key: u64) -> Self {
        Self { key, law, words: Vec::new() }
    }

    pub fn fair(key: u64) -> Self {
        Self::new(BitLaw::Fair, key)
    }

    /// Sequence whose first bits are `prefix` and whose tail is drawn from `law`.
    pub fn with_prefix(prefix: &[bool], law: BitLaw, key: u64) -> Self {
        let mut s = Self::new(law, key);
        s.materialize(prefix.len().div_ceil(64));
        for (k, &b) in prefix.iter().enumerate() {
            s.set(k, b);
        }
        s
    }

    pub fn law(&self) -> BitLaw {
        self.law
    }

    pub fn key(&self) -> u64 {
        self.key
    }

    /// Number of materialized bits.
    pub fn materialized(&self) -> usize {
        self.words.len() * 64
    }

    fn tail_word(&self, w: usize) -> u64 {
        match self.law {
            BitLaw::Fair => mix64(self.key, w as u64),
            BitLaw::Bernoulli { threshold, .. } => {
                let base = (w as u64) * 64;
                let mut word = 0u64;
                for i in 0..64 {
                    if mix64(self.key, base + i) < threshold {
                        word |= 1 << i;
                    }
                }
                word
            }
        }
    }

    /// Bits `64w .. 64w+63`, low bit first.
    #[inline]
    pub fn word(&self, w: usize) -> u64 {
        match self.words.get(w) {
            Some(x) => *x,
            None => self.tail_word(w),
        }
    }

    #[inline]
    pub fn bit(&self, k: usize) -> bool {
        (self.word(k / 64) >> (k % 64)) & 1 == 1
    }

    fn materialize(&mut self, nwords: usize) {
        while self.words.len() < nwords {
            let w = self.tail_word(self.words.len());
            self.words.push(w);
        }
    }

    fn set(&mut self, k: usize, b: bool) {
        self.materialize(k / 64 + 1);
        let m = 1u64 << (k % 64);
        if b {
            self.words[k / 64] |= m;
        } else {
            self.words[k / 64] &= !m;
        }
    }

    /// Number of leading ones, i.e. `ℓ(ω) − 1`.
    pub fn trailing_ones(&self) -> usize {
        self.trailing_ones_from(0)
    }

    /// Length of the run of ones starting at bit `k`.
    pub fn trailing_ones_from(&self, k: usize) -> usize {
        let mut w = k / 64;
        let off = k % 64;
        let first = self.word(w) >> off;
        let t = (!first).trailing_zeros() as usize;
        if t < 64 - off {
            return t;
        }
        let mut count = 64 - off;
        loop {
            w += 1;
            let x = self.word(w);
            if x != u64::MAX {
                return count + x.trailing_ones() as usize;
            }
            count += 64;
        }
    }

    /// Length of the run of zeros starting at bit `k`.
    pub fn trailing_zeros_from(&self, k: usize) -> usize {
        let mut w = k / 64;
        let off = k % 64;
        let first = self.word(w) >> off;
        let t = first.trailing_zeros() as usize;
        if t < 64 - off {
            return t;
        }
        let mut count = 64 - off;
        loop {
            w += 1;
            let x = self.word(w);
            if x != 0 {
                return count + x.trailing_zeros() as usize;
            }
            count += 64;
        }
    }

    /// `ℓ(ω) = min{n ≥ 1 : ω_n = 0}`.
    pub fn first_zero(&self) -> usize {
        self.trailing_ones() + 1
    }

    /// Binary odometer: ones at positions `1..ℓ−1` become zeros and position `ℓ` becomes one.
    pub fn increment(&mut self) {
        let t = self.trailing_ones();
        self.materialize(t / 64 + 1);
        let full = t / 64;
        for w in 0..full {
            self.words[w] = 0;
        }
        let m = (1u64 << (t % 64)) - 1;
        self.words[full] = (self.words[full] & !m) | (1u64 << (t % 64));
    }

    /// Number of ones among the first `k` bits.
    pub fn count_ones_below(&self, k: usize) -> u32 {
        let mut c = 0;
        for w in 0..k / 64 {
            c += self.word(w).count_ones();
        }
        if k % 64 != 0 {
            c += (self.word(k / 64) & ((1u64 << (k % 64)) - 1)).count_ones();
        }
        c
    }

    /// The first `n` bits as a `u64` (`n ≤ 64`), bit `k` at position `k`.
    pub fn low_bits(&self, n: usize) -> u64 {
        assert!(n <= 64);
        if n == 64 {
            self.word(0)
        } else {
            self.word(0) & ((1u64 << n) - 1)
        }
    }

    /// Overwrites bits `lo .. lo+len` with `fill`.
    pub fn fill_range(&mut self, lo: usize, len: usize, fill: bool) {
        if len == 0 {
            return;
        }
        self.materialize((lo + len).div_ceil(64));
        let mut k = lo;
        let end = lo + len;
        while k < end {
            if k % 64 == 0 && end - k >= 64 {
                self.words[k / 64] = if fill { u64::MAX } else { 0 };
                k += 64;
            } else {
                self.set(k, fill);
                k += 1;
            }
        }
    }

    /// First `n` bits as booleans.
    pub fn prefix(&self, n: usize) -> Vec<bool> {
        (0..n).map(|k| self.bit(k)).collect()
    }
}

/// A two-sided fair sequence `(y_j)_{j ∈ ℤ}` with an optional explicit window.
#[derive(Clone, Debug, PartialEq)]
pub struct TwoSidedBits {
    key: u64,
    lo: i64,
    window: Vec<bool>,
}

impl TwoSidedBits {
    pub fn new(key: u64) -> Self {
        Self { key, lo: 0, window: Vec::new() }
    }

    /// Sequence equal to `window` on indices `lo .. lo + window.len()`.
    pub fn with_window(key: u64, lo: i64, window: Vec<bool>) -> Self {
        Self { key, lo, window }
    }

    #[inline]
    pub fn bit(&self, j: i64) -> bool {
        let off = j - self.lo;
        if off >= 0 && (off as usize) < self.window.len() {
            return self.window[off as usize];
        }
        let (side, idx) = if j >= 0 { (0u64, j as u64) } else { (0x5bd1_e995_u64, (!j) as u64) };
        (mix64(self.key ^ side, idx / 64) >> (idx % 64)) & 1 == 1
    }

    /// Replaces the bit at index `j`, growing the explicit window as needed.
    pub fn set(&mut self, j: i64, b: bool) {
        if self.window.is_empty() {
            self.lo = j;
            self.window.push(b);
            return;
        }
        while j < self.lo {
            let v = self.bit(self.lo - 1);
            self.window.insert(0, v);
            self.lo -= 1;
        }
        while j >= self.lo + self.window.len() as i64 {
            let v = self.bit(self.lo + self.window.len() as i64);
            self.window.push(v);
        }
        let off = (j - self.lo) as usize;
        self.window[off] = b;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn from(bits: &[u8]) -> LazyBits {
        let b: Vec<bool> = bits.iter().map(|&x| x == 1).collect();
        LazyBits::with_prefix(&b, BitLaw::Fair, 99)
    }

    #[test]
    fn reads_are_stable() {
        let s = LazyBits::new(BitLaw::bernoulli(0.3).unwrap(), 5);
        for k in [0, 1, 63, 64, 1000, 12345] {
            assert_eq!(s.bit(k), s.bit(k));
        }
        let mut t = s.clone();
        t.materialize(3);
        for k in 0..400 {
            assert_eq!(s.bit(k), t.bit(k));
        }
    }

    #[test]
    fn odometer_examples() {
        let mut a = from(&[0, 1, 1]);
        a.increment();
        assert_eq!(a.prefix(3), [true, true, true]);
        let mut b = from(&[1, 0, 1]);
        b.increment();
        assert_eq!(b.prefix(3), [false, true, true]);
        let mut c = from(&[1, 1, 0, 1]);
        c.increment();
        assert_eq!(c.prefix(4), [false, false, true, true]);
    }

    #[test]
    fn first_zero_examples() {
        assert_eq!(from(&[0]).first_zero(), 1);
        assert_eq!(from(&[1, 0]).first_zero(), 2);
        assert_eq!(from(&[1, 1, 1, 0]).first_zero(), 4);
    }

    #[test]
    fn long_runs_cross_words() {
        let mut v = alloc::vec![true; 130];
        v.push(false);
        let mut s = LazyBits::with_prefix(&v, BitLaw::Fair, 1);
        assert_eq!(s.trailing_ones(), 130);
        s.increment();
        assert_eq!(s.trailing_zeros_from(0), 130);
        assert!(s.bit(130));
    }

    #[test]
    fn bernoulli_frequency() {
        let s = LazyBits::new(BitLaw::bernoulli(0.25).unwrap(), 17);
        let ones = s.count_ones_below(64_000) as f64 / 64_000.0;
        assert!((ones - 0.25).abs() < 0.01, "{ones}");
    }

    #[test]
    fn two_sided_window_overrides() {
        let mut y = TwoSidedBits::new(3);
        let before = y.bit(-5);
        y.set(2, true);
        y.set(-1, false);
        assert!(y.bit(2));
        assert!(!y.bit(-1));
        assert_eq!(y.bit(-5), before);
    }
}
