//! Renewal laws and the tower over a Bernoulli base with height `ω_0`.
//!
//! Support points are addressed by index, so laws whose support values do
//! not fit in 64 bits (the doubly exponential family) are still exact: tails,
//! occupation sums and entropies are evaluated piecewise from the sparse
//! description and never by summing over the gaps of the support.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::error::{invalid, Result};
use crate::rng::{self, Rng};
use crate::stats::pairwise_sum;
use crate::systems::Dynamics;

const LN2: f64 = core::f64::consts::LN_2;

/// A probability law on `{1, 2, …}`.
#[derive(Clone, Debug, PartialEq)]
pub enum RenewalLaw {
    /// Finitely many support values, strictly increasing.
    Sparse { values: Vec<u64>, probs: Vec<f64> },
    /// Mass `2^{−n}` at `base^{base^n}` for `n ≥ 1`.
    DoublyExponential { base: u64 },
}

impl RenewalLaw {
    pub fn sparse(values: Vec<u64>, probs: Vec<f64>) -> Result<Self> {
        if values.len() != probs.len() || values.is_empty() {
            return Err(invalid("support and masses must be nonempty and of equal length"));
        }
        if values[0] == 0 || values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("support must be strictly increasing in {1,2,...}"));
        }
        if probs.iter().any(|p| !(*p >= 0.0)) {
            return Err(invalid("masses must be nonnegative"));
        }
        let total = pairwise_sum(&probs);
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("masses must sum to 1 within 1e-12"));
        }
        Ok(RenewalLaw::Sparse { values, probs })
    }

    pub fn point_mass(value: u64) -> Result<Self> {
        Self::sparse(alloc::vec![value], alloc::vec![1.0])
    }

    /// Mass `2^{−n}` at `4^{4^n}`.
    pub fn four_tower() -> Self {
        RenewalLaw::DoublyExponential { base: 4 }
    }

    /// Mass `2^{−n}` at `2^{2^n}`, a simulable rescaling of [`Self::four_tower`].
    pub fn two_tower() -> Self {
        RenewalLaw::DoublyExponential { base: 2 }
    }

    /// The law conditioned on its first `count` support points.
    pub fn truncated(&self, count: usize) -> Result<Self> {
        if count == 0 {
            return Err(invalid("need at least one support point"));
        }
        let mut values = Vec::new();
        let mut probs = Vec::new();
        for i in 0..count {
            match (self.value(i), i < self.support_len().unwrap_or(usize::MAX)) {
                (Some(v), true) => {
                    values.push(v);
                    probs.push(self.prob(i));
                }
                _ => break,
            }
        }
        let total = pairwise_sum(&probs);
        let probs = probs.iter().map(|p| p / total).collect();
        Self::sparse(values, probs)
    }

    /// Number of support points, `None` if infinite.
    pub fn support_len(&self) -> Option<usize> {
        match self {
            RenewalLaw::Sparse { values, .. } => Some(values.len()),
            RenewalLaw::DoublyExponential { .. } => None,
        }
    }

    /// Support value of index `i`, `None` if it exceeds `u64`.
    pub fn value(&self, i: usize) -> Option<u64> {
        match self {
            RenewalLaw::Sparse { values, .. } => values.get(i).copied(),
            RenewalLaw::DoublyExponential { base } => {
                let e = u32::try_from(i + 1).ok().and_then(|n| base.checked_pow(n))?;
                base.checked_pow(u32::try_from(e).ok()?)
            }
        }
    }

    /// `log₂` of the support value of index `i`.
    pub fn value_log2(&self, i: usize) -> f64 {
        match self {
            RenewalLaw::Sparse { values, .. } => libm::log2(values[i] as f64),
            RenewalLaw::DoublyExponential { base } => {
                let lb = libm::log2(*base as f64);
                lb * libm::pow(*base as f64, (i + 1) as f64)
            }
        }
    }

    pub fn prob(&self, i: usize) -> f64 {
        match self {
            RenewalLaw::Sparse { probs, .. } => probs.get(i).copied().unwrap_or(0.0),
            RenewalLaw::DoublyExponential { .. } => libm::ldexp(1.0, -((i + 1) as i32)),
        }
    }

    pub fn sample_index<R: RngCore + ?Sized>(&self, rng: &mut R) -> usize {
        match self {
            RenewalLaw::Sparse { probs, .. } => {
                let u = rng::uniform(rng);
                let mut acc = 0.0;
                for (i, p) in probs.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        return i;
                    }
                }
                probs.len() - 1
            }
            RenewalLaw::DoublyExponential { .. } => {
                let mut n = 0usize;
                loop {
                    let w = rng.next_u64();
                    if w != 0 {
                        return n + w.trailing_zeros() as usize;
                    }
                    n += 64;
                }
            }
        }
    }

    /// Index of the first support value exceeding `k`.
    fn first_above(&self, k: u64) -> usize {
        match self {
            RenewalLaw::Sparse { values, .. } => values.partition_point(|&v| v <= k),
            RenewalLaw::DoublyExponential { .. } => {
                let mut i = 0;
                while matches!(self.value(i), Some(v) if v <= k) {
                    i += 1;
                }
                i
            }
        }
    }

    /// Mass of support indices `≥ i`.
    fn mass_from(&self, i: usize) -> f64 {
        match self {
            RenewalLaw::Sparse { probs, .. } => {
                let mut acc = 0.0;
                for p in probs[i.min(probs.len())..].iter().rev() {
                    acc += p;
                }
                acc
            }
            RenewalLaw::DoublyExponential { .. } => libm::ldexp(1.0, -(i as i32)),
        }
    }

    /// `Σ_{ℓ > k} f_ℓ`.
    pub fn tail(&self, k: u64) -> f64 {
        self.mass_from(self.first_above(k))
    }

    /// `L(n) = Σ_{k=0}^{n} tail(k)`, summed over the constant pieces of the tail.
    pub fn occupation(&self, n: u64) -> f64 {
        let mut terms = Vec::new();
        let mut start = 0u64;
        let mut i = 0usize;
        loop {
            let end = match self.value(i) {
                Some(v) if i < self.support_len().unwrap_or(usize::MAX) => v.min(n.saturating_add(1)),
                _ => n.saturating_add(1),
            };
            if end > start {
                terms.push((end - start) as f64 * self.mass_from(i));
            }
            if end >= n.saturating_add(1) {
                break;
            }
            start = end;
            i += 1;
        }
        pairwise_sum(&terms)
    }

    /// `Σ f_n log(1/f_n)`.
    pub fn entropy(&self) -> f64 {
        match self {
            RenewalLaw::Sparse { probs, .. } => {
                let mut t: Vec<f64> = probs.iter().filter(|p| **p > 0.0).map(|p| -p * libm::log(*p)).collect();
                t.sort_by(f64::total_cmp);
                pairwise_sum(&t)
            }
            RenewalLaw::DoublyExponential { .. } => {
                // Σ_{n≤N} n 2^{-n} plus the remainder Σ_{n>N} n 2^{-n} = (N+2) 2^{-N}.
                const N: i32 = 60;
                let mut terms: Vec<f64> = (1..=N).rev().map(|n| n as f64 * libm::ldexp(1.0, -n)).collect();
                terms.insert(0, (N + 2) as f64 * libm::ldexp(1.0, -N));
                LN2 * terms.iter().sum::<f64>()
            }
        }
    }

    /// Mean `Σ n f_n`, if finite and representable.
    pub fn mean(&self) -> Option<f64> {
        match self {
            RenewalLaw::Sparse { values, probs } => {
                Some(pairwise_sum(&values.iter().zip(probs).map(|(v, p)| *v as f64 * p).collect::<Vec<_>>()))
            }
            RenewalLaw::DoublyExponential { .. } => None,
        }
    }

    /// `u_0 … u_N` with `u_0 = 1`, `u_n = Σ_k f_k u_{n−k}`, and their partial sums.
    pub fn renewal_sequence(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let mut support = Vec::new();
        let mut i = 0;
        while let Some(v) = self.value(i) {
            if i >= self.support_len().unwrap_or(usize::MAX) || v as u128 > n as u128 {
                break;
            }
            support.push((v as usize, self.prob(i)));
            i += 1;
        }
        let mut u = alloc::vec![0.0; n + 1];
        u[0] = 1.0;
        for m in 1..=n {
            let mut acc = 0.0;
            for &(v, p) in &support {
                if v > m {
                    break;
                }
                acc += p * u[m - v];
            }
            u[m] = acc;
        }
        let mut partial = Vec::with_capacity(n + 1);
        let mut s = 0.0;
        for x in &u {
            s += x;
            partial.push(s);
        }
        (u, partial)
    }
}

/// The tower over the i.i.d. base `(Ω, f^ℕ, shift)` with height function `ω_0`.
#[derive(Clone, Debug, PartialEq)]
pub struct RenewalTower {
    pub law: RenewalLaw,
    /// Heights used by the reference law are restricted to `[0, window)`.
    pub window: u64,
}

/// Current base symbol (as a support index), height above the base, and the
/// stream of future base symbols.
#[derive(Clone, Debug)]
pub struct TowerState {
    pub symbol: usize,
    pub height: u64,
    pub stream: Rng,
}

impl RenewalTower {
    pub fn new(law: RenewalLaw) -> Self {
        let window = match law.support_len() {
            Some(n) => law.value(n - 1).unwrap_or(u64::MAX).min(1 << 16),
            None => 1 << 16,
        };
        Self { law, window }
    }

    /// Point on the base with a fresh symbol.
    pub fn sample_base(&self, rng: &mut Rng) -> TowerState {
        let mut stream = Rng::seed_from_u64(rng.next_u64());
        let symbol = self.law.sample_index(&mut stream);
        TowerState { symbol, height: 0, stream }
    }

    /// Height of the column of the current symbol, `None` if beyond `u64`.
    pub fn column(&self, s: &TowerState) -> Option<u64> {
        self.law.value(s.symbol)
    }

    /// Jumps from the base straight to the next base point.
    pub fn next_base(&self, s: &mut TowerState) -> Option<u64> {
        let h = self.law.value(s.symbol)?;
        s.symbol = self.law.sample_index(&mut s.stream);
        s.height = 0;
        Some(h)
    }
}

impl Dynamics for RenewalTower {
    type State = TowerState;

    fn step(&self, s: &mut TowerState) -> Result<()> {
        s.height += 1;
        if self.law.value(s.symbol) == Some(s.height) {
            s.symbol = self.law.sample_index(&mut s.stream);
            s.height = 0;
        }
        Ok(())
    }

    /// Uniform on the part of the tower below `window`, normalized.
    fn sample_reference(&self, rng: &mut Rng) -> TowerState {
        let mut stream = Rng::seed_from_u64(rng.next_u64());
        loop {
            let symbol = self.law.sample_index(&mut stream);
            let col = self.law.value(symbol).unwrap_or(u64::MAX).min(self.window);
            let h = (rng::uniform(&mut stream) * self.window as f64) as u64;
            if h < col {
                return TowerState { symbol, height: h, stream };
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn renewal_examples() {
        let (u, _) = RenewalLaw::point_mass(1).unwrap().renewal_sequence(20);
        assert!(u.iter().all(|x| *x == 1.0));
        let half = RenewalLaw::sparse(alloc::vec![1, 2], alloc::vec![0.5, 0.5]).unwrap();
        let (u, s) = half.renewal_sequence(2);
        assert_eq!(u, [1.0, 0.5, 0.75]);
        assert_eq!(s, [1.0, 1.5, 2.25]);
    }

    #[test]
    fn four_tower_tail_steps() {
        let f = RenewalLaw::four_tower();
        assert_eq!(f.value(0), Some(256));
        assert_eq!(f.value(1), Some(1u64 << 32));
        assert_eq!(f.value(2), None);
        assert_eq!(f.tail(0), 1.0);
        assert_eq!(f.tail(255), 1.0);
        assert_eq!(f.tail(256), 0.5);
        assert_eq!(f.tail((1u64 << 32) - 1), 0.5);
        assert_eq!(f.tail(1u64 << 32), 0.25);
        assert_eq!(f.tail(u64::MAX), 0.25);
    }

    #[test]
    fn four_tower_entropy() {
        let h = RenewalLaw::four_tower().entropy();
        assert!((h - 2.0 * LN2).abs() < 1e-12, "{h}");
    }

    #[test]
    fn occupation_matches_direct_sum() {
        for f in [
            RenewalLaw::two_tower(),
            RenewalLaw::sparse(alloc::vec![2, 5, 9], alloc::vec![0.25, 0.5, 0.25]).unwrap(),
        ] {
            let mut direct = 0.0;
            for n in 0..600u64 {
                direct += f.tail(n);
                assert!((f.occupation(n) - direct).abs() < 1e-9);
            }
        }
        assert_eq!(RenewalLaw::four_tower().occupation(0), 1.0);
    }

    #[test]
    fn truncated_law() {
        let t = RenewalLaw::four_tower().truncated(2).unwrap();
        assert_eq!(t.value(0), Some(256));
        assert!((t.prob(0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn renewal_sequence_against_simulation() {
        let f = RenewalLaw::sparse(alloc::vec![2, 3, 7], alloc::vec![0.5, 0.3, 0.2]).unwrap();
        let n = 40;
        let (u, _) = f.renewal_sequence(n);
        let runs = 100_000;
        let mut hits = alloc::vec![0u32; n + 1];
        let mut g = substream(21, 0);
        for _ in 0..runs {
            let mut t = 0usize;
            while t <= n {
                hits[t] += 1;
                t += f.value(f.sample_index(&mut g)).unwrap() as usize;
            }
        }
        for m in [2, 5, 10, 20, 40] {
            let est = hits[m] as f64 / runs as f64;
            let se = (u[m] * (1.0 - u[m]) / runs as f64).sqrt();
            assert!((est - u[m]).abs() < 4.0 * se + 1e-12, "n={m}: {est} vs {}", u[m]);
        }
    }

    #[test]
    fn tower_steps_through_columns() {
        let tower = RenewalTower::new(RenewalLaw::sparse(alloc::vec![3], alloc::vec![1.0]).unwrap());
        let mut g = substream(2, 0);
        let mut s = tower.sample_base(&mut g);
        for expect in [1, 2, 0, 1, 2, 0] {
            tower.step(&mut s).unwrap();
            assert_eq!(s.height, expect);
        }
    }
}
