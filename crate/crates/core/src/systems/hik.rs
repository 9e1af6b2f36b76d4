//! The Hajian–Ito–Kakutani skew product `T(ω, n) = (τω, n + φ(ω))` over the
//! binary odometer `τ`, with `φ = ℓ − 2` and `ℓ(ω) = min{n ≥ 1 : ω_n = 0}`.
//!
//! Writing `ω` as the 2-adic integer `X = Σ ω_{k+1} 2^k`, the odometer is
//! `X ↦ X + 1` and one step changes the number of ones by `−φ`. Hence the
//! fiber after `k` steps is `ones(X) − ones(X + k)`, a finite difference even
//! though both counts are infinite. Visits and returns to a fiber level are
//! computed from this identity without stepping.

use alloc::vec::Vec;

use crate::error::{invalid, Error, Result};
use crate::rng::Rng;
use crate::systems::bits::{BitLaw, LazyBits};
use crate::systems::Dynamics;

/// `P(ω_k = 1) = p` under `μ_p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hik {
    law: BitLaw,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HikState {
    pub omega: LazyBits,
    pub fiber: i64,
}

impl Hik {
    pub fn new(p: f64) -> Result<Self> {
        Ok(Self { law: BitLaw::bernoulli(p)? })
    }

    pub fn p(&self) -> f64 {
        self.law.p_one()
    }

    pub fn law(&self) -> BitLaw {
        self.law
    }

    /// `((1−p)/p)^{−n}`, the mass of the fiber level `Ω × {n}` under `m_p`.
    pub fn level_mass(&self, n: i64) -> f64 {
        let p = self.p();
        libm::pow((1.0 - p) / p, -(n as f64))
    }

    /// Point of `Ω × {fiber}` with `ω` drawn from `μ_p`.
    pub fn sample_level(&self, fiber: i64, rng: &mut Rng) -> HikState {
        use rand_core::RngCore;
        HikState { omega: LazyBits::new(self.law, rng.next_u64()), fiber }
    }
}

/// `φ(ω) = ℓ(ω) − 2`.
pub fn cocycle(omega: &LazyBits) -> i64 {
    omega.first_zero() as i64 - 2
}

/// The odometer `τ`.
pub fn adding_machine(omega: &mut LazyBits) {
    omega.increment();
}

impl Dynamics for Hik {
    type State = HikState;

    fn step(&self, s: &mut HikState) -> Result<()> {
        s.fiber += cocycle(&s.omega);
        s.omega.increment();
        Ok(())
    }

    fn sample_reference(&self, rng: &mut Rng) -> HikState {
        self.sample_level(0, rng)
    }
}

fn word_mass(p: f64, word: &[bool]) -> f64 {
    word.iter().fold(1.0, |m, &b| m * if b { p } else { 1.0 - p })
}

/// Image of a cylinder word under the odometer, provided `ℓ` is decided inside the word.
fn odometer_word(word: &[bool]) -> Result<(Vec<bool>, i64)> {
    let t = word.iter().take_while(|&&b| b).count();
    if t == word.len() {
        return Err(invalid("φ is not constant on this cylinder (no zero in the word)"));
    }
    let mut img = word.to_vec();
    for b in img.iter_mut().take(t) {
        *b = false;
    }
    img[t] = true;
    Ok((img, t as i64 - 1))
}

/// Checks `μ_p(τC) = ((1−p)/p)^φ μ_p(C)` on the cylinder `C = [word]`.
pub fn rn_check(p: f64, word: &[bool], tolerance: f64) -> Result<bool> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p must lie in (0,1)"));
    }
    let (img, phi) = odometer_word(word)?;
    let lhs = word_mass(p, &img);
    let rhs = libm::pow((1.0 - p) / p, phi as f64) * word_mass(p, word);
    Ok((lhs - rhs).abs() <= tolerance * rhs.abs().max(f64::MIN_POSITIVE))
}

/// Checks `m_p(T(C × {n})) = m_p(C × {n})` for the cylinder `C = [word]`.
pub fn invariance_check(p: f64, word: &[bool], n: i64, tolerance: f64) -> Result<bool> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("p must lie in (0,1)"));
    }
    let (img, phi) = odometer_word(word)?;
    let r = (1.0 - p) / p;
    let before = word_mass(p, word) * libm::pow(r, -(n as f64));
    let after = word_mass(p, &img) * libm::pow(r, -((n + phi) as f64));
    Ok((before - after).abs() <= tolerance * before)
}

fn binomial_table() -> [[u64; 65]; 65] {
    let mut c = [[0u64; 65]; 65];
    for n in 0..65 {
        c[n][0] = 1;
        for k in 1..=n {
            c[n][k] = c[n - 1][k - 1].saturating_add(c[n - 1][k]);
        }
    }
    c
}

/// `#{v ∈ [0, m) : popcount(v) = c}` for `m ≤ 2^63`.
pub fn count_popcount_below(m: u64, c: u32) -> u64 {
    let table = binomial_table();
    let mut total = 0u64;
    let mut ones = 0u32;
    for i in (0..64).rev() {
        if (m >> i) & 1 == 1 {
            if c >= ones && (c - ones) as usize <= i {
                total += table[i][(c - ones) as usize];
            }
            ones += 1;
        }
    }
    total
}

/// Fiber displacement after `k` steps from `ω`: `ones(X) − ones(X + k)`.
pub fn fiber_after(omega: &LazyBits, k: u64) -> i64 {
    let low = omega.word(0);
    let (sum, carry) = low.overflowing_add(k);
    let mut d = low.count_ones() as i64 - sum.count_ones() as i64;
    if carry {
        let t = omega.trailing_ones_from(64) as i64;
        d -= 1 - t;
    }
    d
}

/// Returns to the starting fiber level during times `1 ≤ k ≤ 2^n − 1`, exactly.
pub fn visits_by_power(omega: &LazyBits, n: u32) -> Result<u64> {
    if n == 0 || n > 62 {
        return Err(invalid("horizon exponent must lie in 1..=62"));
    }
    let x = omega.low_bits(n as usize);
    let c = x.count_ones();
    let t = omega.trailing_ones_from(n as usize) as i64;
    let top = 1u64 << n;
    let upper = count_popcount_below(top, c) - count_popcount_below(x, c);
    let target = c as i64 - 1 + t;
    let lower = if (0..=64).contains(&target) { count_popcount_below(x, target as u32) } else { 0 };
    Ok(upper + lower - 1)
}

/// `#{0 ≤ K < n : Σ_{j<2^K} φ(τ^j ω) = 0}`, the dyadic-time lower bound for the visit count.
pub fn dyadic_visit_bound(omega: &LazyBits, n: u32) -> u64 {
    (0..n as usize).filter(|&k| omega.trailing_ones_from(k) == 1).count() as u64
}

/// First return time to the current fiber level, and the landing point.
///
/// The next `k ≥ 1` with `ones(X + k) = ones(X)` is the next integer with the
/// same number of ones: if the lowest run of ones starts at bit `a` and has
/// length `r`, then `k = 2^a + 2^{r−1} − 1`.
pub fn return_to_level(s: &mut HikState, cap: u64) -> Result<u64> {
    let a = s.omega.trailing_zeros_from(0);
    let r = s.omega.trailing_ones_from(a);
    if a >= 63 || r >= 64 {
        return Err(Error::CapExceeded { cap });
    }
    let k = (1u64 << a) + (1u64 << (r - 1)) - 1;
    if k > cap {
        return Err(Error::CapExceeded { cap });
    }
    s.omega.fill_range(0, r - 1, true);
    s.omega.fill_range(r - 1, a + 1, false);
    s.omega.fill_range(a + r, 1, true);
    Ok(k)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    fn word(bits: &[u8]) -> Vec<bool> {
        bits.iter().map(|&b| b == 1).collect()
    }

    #[test]
    fn step_example() {
        let hik = Hik::new(0.5).unwrap();
        let mut s = HikState { omega: LazyBits::with_prefix(&word(&[1, 1, 0]), BitLaw::Fair, 3), fiber: 0 };
        hik.step(&mut s).unwrap();
        assert_eq!(s.omega.prefix(3), word(&[0, 0, 1]));
        assert_eq!(s.fiber, 1);
    }

    #[test]
    fn cocycle_examples() {
        let f = |b: &[u8]| cocycle(&LazyBits::with_prefix(&word(b), BitLaw::Fair, 0));
        assert_eq!(f(&[0]), -1);
        assert_eq!(f(&[1, 0]), 0);
        assert_eq!(f(&[1, 1, 1, 0]), 2);
    }

    #[test]
    fn rn_examples() {
        assert!(rn_check(0.5, &word(&[1, 1, 0, 1]), 1e-10).unwrap());
        assert!(rn_check(1.0 / 3.0, &word(&[1, 0]), 1e-10).unwrap());
        assert!(rn_check(1.0 / 3.0, &word(&[0]), 1e-10).unwrap());
        assert!(rn_check(0.5, &word(&[1, 1]), 1e-10).is_err());
        assert!(rn_check(0.5, &[], 1e-10).is_err());
    }

    #[test]
    fn popcount_counting_matches_brute_force() {
        for m in 0..300u64 {
            for c in 0..10 {
                let brute = (0..m).filter(|v| v.count_ones() == c).count() as u64;
                assert_eq!(count_popcount_below(m, c), brute);
            }
        }
    }

    #[test]
    fn fiber_identity_matches_stepping() {
        let hik = Hik::new(0.5).unwrap();
        for i in 0..20 {
            let mut g = substream(5, i);
            let s0 = hik.sample_reference(&mut g);
            let mut s = s0.clone();
            for k in 1..=3000u64 {
                hik.step(&mut s).unwrap();
                assert_eq!(s.fiber, fiber_after(&s0.omega, k));
            }
        }
    }

    #[test]
    fn visits_match_stepping() {
        let hik = Hik::new(0.5).unwrap();
        for i in 0..30 {
            let mut g = substream(6, i);
            let s0 = hik.sample_reference(&mut g);
            let mut s = s0.clone();
            let mut visits = 0;
            for _ in 1..(1u64 << 14) {
                hik.step(&mut s).unwrap();
                if s.fiber == 0 {
                    visits += 1;
                }
            }
            assert_eq!(visits, visits_by_power(&s0.omega, 14).unwrap());
            assert!(visits >= dyadic_visit_bound(&s0.omega, 14));
        }
    }

    #[test]
    fn fast_return_matches_stepping() {
        let hik = Hik::new(0.5).unwrap();
        for i in 0..200 {
            let mut g = substream(8, i);
            let mut fast = hik.sample_reference(&mut g);
            let mut slow = fast.clone();
            let k = match return_to_level(&mut fast, 1 << 20) {
                Ok(k) => k,
                Err(_) => continue,
            };
            let mut steps = 0;
            loop {
                hik.step(&mut slow).unwrap();
                steps += 1;
                if slow.fiber == 0 {
                    break;
                }
            }
            assert_eq!(k, steps);
            assert_eq!(fast.omega.prefix(200), slow.omega.prefix(200));
        }
    }

    #[test]
    fn level_mass_convention() {
        let hik = Hik::new(1.0 / 3.0).unwrap();
        assert!((hik.level_mass(1) - 0.5).abs() < 1e-15);
        assert!((hik.level_mass(-2) - 4.0).abs() < 1e-12);
    }
}
