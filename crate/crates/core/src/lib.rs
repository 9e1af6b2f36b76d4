//! Simulation kernels and exact combinatorial identities for conservative,
//! ergodic, infinite measure preserving transformations.
//!
//! The crate is `no_std` (with `alloc`). Everything here is a pure function of
//! its inputs and a seed; parallel drivers, file formats and the command line
//! live in the companion `ergodic-lab` crate.
//!
//! Modules:
//! - [`systems`]: the concrete transformations (Boole's map, the
//!   Hajian–Ito–Kakutani skew product, simple random walks, renewal towers,
//!   rank-one cutting-and-stacking towers) and two probability-preserving
//!   controls (Bernoulli shift, circle rotation).
//! - [`induction`]: first returns, induced maps, return statistics, Kac's
//!   identity, log-moment and series criteria.
//! - [`information`]: partitions, names, information and entropy estimators,
//!   Krengel's formula and the normalized-information experiment.
//! - [`skewflow`]: the special flow over the 2-shift, the skew product it
//!   drives, exact name cells and their information.
//! - [`limits`]: Mittag-Leffler, half-normal and Brownian-range laws,
//!   Kolmogorov–Smirnov statistics, Darling–Kac experiments.
//! - [`dimension`]: Hamming covers and entropy-dimension slopes.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod dimension;
pub mod error;
pub mod exec;
pub mod induction;
pub mod information;
pub mod limits;
pub mod rng;
pub mod skewflow;
pub mod stats;
pub mod systems;

pub use error::{Error, Result};
pub use exec::{Executor, Sequential};
