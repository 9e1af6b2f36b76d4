//! Boole's transformation `x ↦ x − 1/x` of the real line.

use crate::error::{Error, Result};
use crate::rng::{self, Rng};
use crate::systems::Dynamics;

/// Points closer to the origin than this are treated as the singular point.
pub const SINGULAR_RADIUS: f64 = 1e-300;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Boole;

impl Boole {
    #[inline]
    pub fn map(x: f64) -> Result<f64> {
        if x.abs() < SINGULAR_RADIUS {
            return Err(Error::SingularPoint(x));
        }
        Ok(x - 1.0 / x)
    }

    /// The two solutions `y` of `y − 1/y = x`, larger first.
    pub fn preimages(x: f64) -> [f64; 2] {
        let r = libm::hypot(x, 2.0);
        if x >= 0.0 {
            let hi = 0.5 * (x + r);
            [hi, -1.0 / hi]
        } else {
            let lo = 0.5 * (x - r);
            [-1.0 / lo, lo]
        }
    }

    /// Reciprocal derivative `1/|T'(y)| = 1/(1 + 1/y²)` at a preimage.
    pub fn preimage_weight(y: f64) -> f64 {
        let y2 = y * y;
        y2 / (y2 + 1.0)
    }

    /// Runs `xs.len()` independent orbits for `n` steps, counting visits of
    /// `T^j x` to `[lo, hi]` for `0 ≤ j < n`.
    ///
    /// Orbits are advanced in interleaved lanes so the divisions pipeline.
    /// Returns the counts, or the index of an orbit that hit the singular point.
    pub fn occupation_lanes(xs: &mut [f64], n: u64, lo: f64, hi: f64, counts: &mut [u64]) -> core::result::Result<(), usize> {
        const LANES: usize = 8;
        assert_eq!(xs.len(), counts.len());
        let mut chunks = xs.chunks_exact_mut(LANES).zip(counts.chunks_exact_mut(LANES));
        for (xc, cc) in &mut chunks {
            let mut x = [0.0f64; LANES];
            x.copy_from_slice(xc);
            let mut c = [0u64; LANES];
            for _ in 0..n {
                for l in 0..LANES {
                    c[l] += (x[l] >= lo && x[l] <= hi) as u64;
                    x[l] -= 1.0 / x[l];
                }
            }
            xc.copy_from_slice(&x);
            cc.copy_from_slice(&c);
        }
        let done = xs.len() / LANES * LANES;
        for i in done..xs.len() {
            let mut x = xs[i];
            let mut c = 0u64;
            for _ in 0..n {
                c += (x >= lo && x <= hi) as u64;
                x -= 1.0 / x;
            }
            xs[i] = x;
            counts[i] = c;
        }
        match xs.iter().position(|x| !x.is_finite()) {
            Some(i) => Err(i),
            None => Ok(()),
        }
    }
}

impl Dynamics for Boole {
    type State = f64;

    fn step(&self, x: &mut f64) -> Result<()> {
        *x = Self::map(*x)?;
        Ok(())
    }

    /// Standard Cauchy.
    fn sample_reference(&self, rng: &mut Rng) -> f64 {
        loop {
            let u = rng::uniform_open(rng);
            let x = libm::tan(core::f64::consts::PI * (u - 0.5));
            if x.abs() >= SINGULAR_RADIUS {
                return x;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        assert_eq!(Boole::map(2.0).unwrap(), 1.5);
        let z = Boole::map(1.0).unwrap();
        assert_eq!(z, 0.0);
        assert!(matches!(Boole::map(z), Err(Error::SingularPoint(_))));
    }

    #[test]
    fn lanes_match_scalar() {
        let mut g = crate::rng::substream(4, 0);
        let starts: alloc::vec::Vec<f64> = (0..19).map(|_| Boole.sample_reference(&mut g)).collect();
        let mut xs = starts.clone();
        let mut counts = alloc::vec![0u64; xs.len()];
        Boole::occupation_lanes(&mut xs, 500, -1.0, 1.0, &mut counts).unwrap();
        for (i, &x0) in starts.iter().enumerate() {
            let mut x = x0;
            let mut c = 0;
            for _ in 0..500 {
                if (-1.0..=1.0).contains(&x) {
                    c += 1;
                }
                Boole.step(&mut x).unwrap();
            }
            assert_eq!(c, counts[i]);
            assert_eq!(x.to_bits(), xs[i].to_bits());
        }
    }
}
