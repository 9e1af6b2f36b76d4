//! Simple random walks on ℤ and ℤ² as measure preserving maps of
//! (position, increment sequence) under counting × Bernoulli measure.

use alloc::vec::Vec;

use rand_core::{RngCore, SeedableRng};

use crate::error::Result;
use crate::rng::{BitBuffer, Rng};
use crate::systems::Dynamics;

/// Increment bits: an optional scripted prefix, then a seeded fair stream.
#[derive(Clone, Debug)]
pub struct IncrementStream {
    script: Vec<bool>,
    cursor: usize,
    rng: Rng,
    buf: BitBuffer,
}

impl IncrementStream {
    pub fn new(key: u64) -> Self {
        Self { script: Vec::new(), cursor: 0, rng: Rng::seed_from_u64(key), buf: BitBuffer::new() }
    }

    /// Stream that first yields `script`.
    pub fn scripted(script: Vec<bool>, key: u64) -> Self {
        Self { script, cursor: 0, ..Self::new(key) }
    }

    #[inline]
    pub fn bit(&mut self) -> bool {
        if self.cursor < self.script.len() {
            self.cursor += 1;
            return self.script[self.cursor - 1];
        }
        self.buf.bit(&mut self.rng)
    }

    /// Up to `max` bits, low bit first, in the same order `bit` would return them.
    #[inline]
    pub fn take(&mut self, max: u32) -> (u64, u32) {
        if self.cursor < self.script.len() {
            return (self.bit() as u64, 1);
        }
        self.buf.take(&mut self.rng, max)
    }
}

/// Walk on ℤ; a one bit is a step to the right.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Srw1;

#[derive(Clone, Debug)]
pub struct Srw1State {
    pub pos: i64,
    pub increments: IncrementStream,
}

impl Srw1State {
    pub fn new(pos: i64, key: u64) -> Self {
        Self { pos, increments: IncrementStream::new(key) }
    }

    /// Walk whose first increments are `steps` (each ±1).
    pub fn scripted(pos: i64, steps: &[i8], key: u64) -> Self {
        let script = steps.iter().map(|&s| s > 0).collect();
        Self { pos, increments: IncrementStream::scripted(script, key) }
    }

    /// Moves up to `max` steps at once, returning how many were taken.
    #[inline]
    pub fn jump(&mut self, max: u32) -> u32 {
        let (bits, k) = self.increments.take(max);
        self.pos += 2 * bits.count_ones() as i64 - k as i64;
        k
    }
}

impl Dynamics for Srw1 {
    type State = Srw1State;

    #[inline]
    fn step(&self, s: &mut Srw1State) -> Result<()> {
        s.pos += if s.increments.bit() { 1 } else { -1 };
        Ok(())
    }

    fn sample_reference(&self, rng: &mut Rng) -> Srw1State {
        Srw1State::new(0, rng.next_u64())
    }
}

/// Walk on ℤ²; two bits choose one of the four unit steps.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Srw2;

#[derive(Clone, Debug)]
pub struct Srw2State {
    pub pos: (i64, i64),
    pub increments: IncrementStream,
}

impl Srw2State {
    pub fn new(pos: (i64, i64), key: u64) -> Self {
        Self { pos, increments: IncrementStream::new(key) }
    }
}

impl Dynamics for Srw2 {
    type State = Srw2State;

    fn step(&self, s: &mut Srw2State) -> Result<()> {
        let axis = s.increments.bit();
        let sign = if s.increments.bit() { -1 } else { 1 };
        if axis {
            s.pos.1 += sign;
        } else {
            s.pos.0 += sign;
        }
        Ok(())
    }

    fn sample_reference(&self, rng: &mut Rng) -> Srw2State {
        Srw2State::new((0, 0), rng.next_u64())
    }
}
