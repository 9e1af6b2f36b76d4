//! Concrete transformations, each a deterministic step plus a reference law.
//!
//! Reference laws are the probability measures `P ≪ m` from which
//! distributional experiments start: Boole's map uses the standard Cauchy law,
//! the HIK skew product uses `μ_p × δ_0`, the walks start at the origin, and
//! towers are sampled from the normalized restriction of `m` to a finite
//! window of heights.

pub mod bits;
pub mod boole;
pub mod controls;
pub mod hik;
pub mod rankone;
pub mod renewal;
pub mod srw;

use crate::error::{invalid, Result};
use crate::rng::Rng;

pub use bits::{BitLaw, LazyBits, TwoSidedBits};
pub use boole::Boole;
pub use controls::{BernoulliShift, Rotation, ShiftState};
pub use hik::{Hik, HikState};
pub use rankone::{RankOne, RankOneState, TowerSpec, TowerStage};
pub use renewal::{RenewalLaw, RenewalTower, TowerState};
pub use srw::{IncrementStream, Srw1, Srw1State, Srw2, Srw2State};

/// A measure preserving map given by its action on states.
pub trait Dynamics: Sync {
    type State: Clone + core::fmt::Debug + Send;

    /// Applies the map once.
    fn step(&self, state: &mut Self::State) -> Result<()>;

    /// Draws an initial point from the model's reference probability.
    fn sample_reference(&self, rng: &mut Rng) -> Self::State;

    /// Applies the map `n` times.
    fn advance(&self, state: &mut Self::State, n: u64) -> Result<()> {
        for _ in 0..n {
            self.step(state)?;
        }
        Ok(())
    }
}

/// Tagged catalog of the supported transformations.
#[derive(Clone, Debug)]
pub enum TransformationModel {
    Boole(Boole),
    Hik(Hik),
    Srw1(Srw1),
    Srw2(Srw2),
    RenewalTower(RenewalTower),
    RankOne(RankOne),
    BernoulliShift(BernoulliShift),
    Rotation(Rotation),
}

/// A state matching one [`TransformationModel`] variant.
#[derive(Clone, Debug)]
pub enum OrbitState {
    Boole(f64),
    Hik(HikState),
    Srw1(Srw1State),
    Srw2(Srw2State),
    RenewalTower(TowerState),
    RankOne(RankOneState),
    BernoulliShift(ShiftState),
    Rotation(f64),
}

impl TransformationModel {
    /// One application of the map.
    pub fn step(&self, state: &mut OrbitState) -> Result<()> {
        match (self, state) {
            (Self::Boole(m), OrbitState::Boole(s)) => m.step(s),
            (Self::Hik(m), OrbitState::Hik(s)) => m.step(s),
            (Self::Srw1(m), OrbitState::Srw1(s)) => m.step(s),
            (Self::Srw2(m), OrbitState::Srw2(s)) => m.step(s),
            (Self::RenewalTower(m), OrbitState::RenewalTower(s)) => m.step(s),
            (Self::RankOne(m), OrbitState::RankOne(s)) => m.step(s),
            (Self::BernoulliShift(m), OrbitState::BernoulliShift(s)) => m.step(s),
            (Self::Rotation(m), OrbitState::Rotation(s)) => m.step(s),
            _ => Err(invalid("state does not belong to this model")),
        }
    }

    pub fn sample_reference(&self, rng: &mut Rng) -> OrbitState {
        match self {
            Self::Boole(m) => OrbitState::Boole(m.sample_reference(rng)),
            Self::Hik(m) => OrbitState::Hik(m.sample_reference(rng)),
            Self::Srw1(m) => OrbitState::Srw1(m.sample_reference(rng)),
            Self::Srw2(m) => OrbitState::Srw2(m.sample_reference(rng)),
            Self::RenewalTower(m) => OrbitState::RenewalTower(m.sample_reference(rng)),
            Self::RankOne(m) => OrbitState::RankOne(m.sample_reference(rng)),
            Self::BernoulliShift(m) => OrbitState::BernoulliShift(m.sample_reference(rng)),
            Self::Rotation(m) => OrbitState::Rotation(m.sample_reference(rng)),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Boole(_) => "boole",
            Self::Hik(_) => "hik",
            Self::Srw1(_) => "srw1",
            Self::Srw2(_) => "srw2",
            Self::RenewalTower(_) => "renewal-tower",
            Self::RankOne(_) => "rank-one",
            Self::BernoulliShift(_) => "bernoulli-shift",
            Self::Rotation(_) => "rotation",
        }
    }
}
