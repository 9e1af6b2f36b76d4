//! Probability preserving controls: the one-sided Bernoulli shift and a circle rotation.

use rand_core::RngCore;

use crate::error::Result;
use crate::rng::{self, Rng};
use crate::systems::bits::{BitLaw, LazyBits};
use crate::systems::Dynamics;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BernoulliShift {
    pub law: BitLaw,
}

/// The sequence `bits` read from position `offset` on.
#[derive(Clone, Debug, PartialEq)]
pub struct ShiftState {
    pub bits: LazyBits,
    pub offset: usize,
}

impl ShiftState {
    /// Coordinate `j` of the current point.
    #[inline]
    pub fn symbol(&self, j: usize) -> bool {
        self.bits.bit(self.offset + j)
    }
}

impl BernoulliShift {
    pub fn fair() -> Self {
        Self { law: BitLaw::Fair }
    }

    pub fn new(p_one: f64) -> Result<Self> {
        Ok(Self { law: BitLaw::bernoulli(p_one)? })
    }
}

impl Dynamics for BernoulliShift {
    type State = ShiftState;

    fn step(&self, s: &mut ShiftState) -> Result<()> {
        s.offset += 1;
        Ok(())
    }

    fn sample_reference(&self, rng: &mut Rng) -> ShiftState {
        ShiftState { bits: LazyBits::new(self.law, rng.next_u64()), offset: 0 }
    }

    fn advance(&self, s: &mut ShiftState, n: u64) -> Result<()> {
        s.offset += n as usize;
        Ok(())
    }
}

/// `x ↦ x + angle mod 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation {
    pub angle: f64,
}

impl Rotation {
    /// Rotation by the golden mean conjugate `(√5 − 1)/2`.
    pub fn golden() -> Self {
        Self { angle: (libm::sqrt(5.0) - 1.0) / 2.0 }
    }

    #[inline]
    pub fn map(&self, x: f64) -> f64 {
        let y = x + self.angle;
        y - libm::floor(y)
    }
}

impl Dynamics for Rotation {
    type State = f64;

    fn step(&self, x: &mut f64) -> Result<()> {
        *x = self.map(*x);
        Ok(())
    }

    fn sample_reference(&self, rng: &mut Rng) -> f64 {
        rng::uniform(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::substream;

    #[test]
    fn shift_reads_successive_symbols() {
        let sh = BernoulliShift::fair();
        let mut s = sh.sample_reference(&mut substream(1, 0));
        let first: alloc::vec::Vec<bool> = (0..3).map(|j| s.symbol(j)).collect();
        for b in first {
            assert_eq!(s.symbol(0), b);
            sh.step(&mut s).unwrap();
        }
    }

    #[test]
    fn rotation_stays_in_unit_interval() {
        let r = Rotation::golden();
        let mut x = 0.9;
        for _ in 0..1000 {
            r.step(&mut x).unwrap();
            assert!((0.0..1.0).contains(&x));
        }
    }
}
