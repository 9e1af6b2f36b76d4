//! Reference limit laws and the distributional experiments that target them.
//!
//! `X_α` denotes the Mittag-Leffler law of order `α` normalized to mean one:
//! `X_1 ≡ 1`, `X_0 ~ Exp(1)`, `X_{1/2} = √(π/2)·|Z|`. `𝓡` is the range of
//! Brownian motion on `[0, 1]`, realized here by the normalized range of a
//! long fair walk.

use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::induction::{Interval, DEFAULT_CAP};
use crate::information::{krengel_entropy, normalized_information_experiment, IntervalCells, KrengelEstimate};
use crate::rng::{self, derive_seed, substream, Rng};
use crate::stats::{self, EmpiricalDistribution};
use crate::systems::boole::Boole;
use crate::systems::renewal::{RenewalLaw, RenewalTower};
use crate::systems::Dynamics;

/// Allowed relative deviation of a sampler's mean from its target.
pub const MEAN_GATE: f64 = 0.01;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LimitLaw {
    /// `X_α`, `α ∈ [0, 1]`.
    MittagLeffler(f64),
    /// `√(π/2)·|Z|`.
    HalfNormalMeanOne,
    /// Normalized range of a fair walk with this many steps.
    BrownianRange { steps: u64 },
    Degenerate(f64),
}

impl LimitLaw {
    pub fn validate(&self) -> Result<()> {
        match *self {
            LimitLaw::MittagLeffler(a) if !(0.0..=1.0).contains(&a) => Err(invalid("Mittag-Leffler order must lie in [0, 1]")),
            LimitLaw::BrownianRange { steps } if steps < 10_000 => Err(invalid("range sampler needs at least 10^4 steps")),
            _ => Ok(()),
        }
    }

    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            LimitLaw::MittagLeffler(a) => mittag_leffler(a, rng),
            LimitLaw::HalfNormalMeanOne => half_normal_mean_one(rng),
            LimitLaw::BrownianRange { steps } => walk_range(steps, rng) as f64 / libm::sqrt(steps as f64),
            LimitLaw::Degenerate(c) => c,
        }
    }

    /// `count` samples, sample `i` drawn from substream `i` of `seed`.
    pub fn samples<E: Executor>(&self, count: usize, seed: u64, exec: &E) -> Result<Vec<f64>> {
        self.validate()?;
        Ok(exec.map(count, |i| self.sample(&mut substream(seed, i as u64))))
    }

    /// Analytic CDF where one is available.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match *self {
            LimitLaw::MittagLeffler(a) if a == 1.0 => Some(if x >= 1.0 { 1.0 } else { 0.0 }),
            LimitLaw::MittagLeffler(a) if a == 0.0 => Some(stats::exp_cdf(x)),
            LimitLaw::MittagLeffler(a) if a == 0.5 => LimitLaw::HalfNormalMeanOne.cdf(x),
            LimitLaw::HalfNormalMeanOne => {
                Some(if x <= 0.0 { 0.0 } else { 2.0 * stats::normal_cdf(x * libm::sqrt(2.0 / core::f64::consts::PI)) - 1.0 })
            }
            LimitLaw::Degenerate(c) => Some(if x >= c { 1.0 } else { 0.0 }),
            _ => None,
        }
    }

    /// The analytic mean: one for the normalized laws; `2√(2/π)` for the range.
    pub fn mean(&self) -> f64 {
        match *self {
            LimitLaw::MittagLeffler(_) | LimitLaw::HalfNormalMeanOne => 1.0,
            LimitLaw::BrownianRange { .. } => 2.0 * libm::sqrt(2.0 / core::f64::consts::PI),
            LimitLaw::Degenerate(c) => c,
        }
    }

    /// Kolmogorov–Smirnov distance of `sample` from this law: against the
    /// analytic CDF when there is one, otherwise against a seeded Monte Carlo
    /// reference of `reference_count` draws.
    pub fn ks<E: Executor>(&self, sample: &EmpiricalDistribution, reference_count: usize, seed: u64, exec: &E) -> Result<f64> {
        if self.cdf(0.0).is_some() {
            return Ok(sample.ks_against(|x| self.cdf(x).unwrap()));
        }
        let reference = EmpiricalDistribution::new(self.samples(reference_count, seed, exec)?)?;
        Ok(sample.ks_between(&reference))
    }
}

/// `√(π/2)·|Z|`.
pub fn half_normal_mean_one(rng: &mut Rng) -> f64 {
    let z: f64 = StandardNormal.sample(rng);
    z.abs() * libm::sqrt(core::f64::consts::FRAC_PI_2)
}

/// `Γ(1 + α)·Y^{−α}` with `Y` positive `α`-stable, `E e^{−tY} = e^{−t^α}`,
/// drawn by Kanter's representation from a uniform angle and an exponential.
pub fn mittag_leffler(alpha: f64, rng: &mut Rng) -> f64 {
    if alpha >= 1.0 {
        return 1.0;
    }
    let e: f64 = Exp1.sample(rng);
    if alpha <= 0.0 {
        return e;
    }
    let u = core::f64::consts::PI * rng::uniform_open(rng);
    let ln_y = libm::log(libm::sin(alpha * u)) - libm::log(libm::sin(u)) / alpha
        + (1.0 - alpha) / alpha * (libm::log(libm::sin((1.0 - alpha) * u)) - libm::log(e));
    libm::tgamma(1.0 + alpha) * libm::exp(-alpha * ln_y)
}

/// Checks the sample mean of `X_α` against one; returns the mean.
pub fn mittag_leffler_gate<E: Executor>(alpha: f64, count: usize, seed: u64, exec: &E) -> Result<f64> {
    let xs = LimitLaw::MittagLeffler(alpha).samples(count, seed, exec)?;
    let mean = stats::pairwise_sum(&xs) / xs.len() as f64;
    if (mean - 1.0).abs() > MEAN_GATE {
        return Err(invalid("Mittag-Leffler normalization failed its mean gate"));
    }
    Ok(mean)
}

/// Per 8-step chunk: displacement, highest and lowest prefix position.
#[derive(Clone, Copy)]
struct Chunk {
    sum: i8,
    max: i8,
    min: i8,
}

const fn chunk_table() -> [Chunk; 256] {
    let mut t = [Chunk { sum: 0, max: 0, min: 0 }; 256];
    let mut w = 0;
    while w < 256 {
        let (mut p, mut hi, mut lo) = (0i8, 0i8, 0i8);
        let mut k = 0;
        while k < 8 {
            p += if (w >> k) & 1 == 1 { 1 } else { -1 };
            if p > hi {
                hi = p;
            }
            if p < lo {
                lo = p;
            }
            k += 1;
        }
        t[w] = Chunk { sum: p, max: hi, min: lo };
        w += 1;
    }
    t
}

static CHUNKS: [Chunk; 256] = chunk_table();

/// `max − min` of the partial sums `0, W_1, …, W_steps` of a fair ±1 walk.
pub fn walk_range(steps: u64, rng: &mut Rng) -> u64 {
    let (mut pos, mut hi, mut lo) = (0i64, 0i64, 0i64);
    let mut left = steps;
    while left >= 64 {
        let w = rng.next_u64();
        for c in 0..8 {
            let k = CHUNKS[((w >> (8 * c)) & 0xff) as usize];
            hi = hi.max(pos + k.max as i64);
            lo = lo.min(pos + k.min as i64);
            pos += k.sum as i64;
        }
        left -= 64;
    }
    let w = if left > 0 { rng.next_u64() } else { 0 };
    for k in 0..left {
        pos += if (w >> k) & 1 == 1 { 1 } else { -1 };
        hi = hi.max(pos);
        lo = lo.min(pos);
    }
    (hi - lo) as u64
}

/// `(max − min)/√steps` of the walk, `count` samples.
pub fn sample_brownian_range<E: Executor>(seed: u64, count: usize, steps: u64, exec: &E) -> Result<Vec<f64>> {
    LimitLaw::BrownianRange { steps }.samples(count, seed, exec)
}

pub fn sample_half_normal_mean_one<E: Executor>(seed: u64, count: usize, exec: &E) -> Vec<f64> {
    exec.map(count, |i| half_normal_mean_one(&mut substream(seed, i as u64)))
}

pub fn sample_mittag_leffler<E: Executor>(alpha: f64, seed: u64, count: usize, exec: &E) -> Result<Vec<f64>> {
    LimitLaw::MittagLeffler(alpha).samples(count, seed, exec)
}

/// `S_n(f)/(a_n ∫f dm)` samples with their distance to the target law.
#[derive(Clone, Debug, PartialEq)]
pub struct DarlingKacReport {
    pub samples: EmpiricalDistribution,
    pub law: LimitLaw,
    pub ks: f64,
    /// Trajectories dropped because the orbit hit a singular point.
    pub censored: usize,
}

/// `√(2n)/π`.
pub fn boole_return_sequence(n: u64) -> f64 {
    libm::sqrt(2.0 * n as f64) / core::f64::consts::PI
}

/// Boole's map from Cauchy starts, `f = 1_{[−c, c]}` with `∫f dm = 2c`.
pub fn darling_kac_boole<E: Executor>(c: f64, n: u64, trajectories: usize, seed: u64, exec: &E) -> Result<DarlingKacReport> {
    const CHUNK: usize = 64;
    let chunks = trajectories.div_ceil(CHUNK);
    let runs = exec.map(chunks, |k| {
        let size = CHUNK.min(trajectories - k * CHUNK);
        let mut xs: Vec<f64> = (0..size).map(|i| Boole.sample_reference(&mut substream(seed, (k * CHUNK + i) as u64))).collect();
        let mut counts = vec![0u64; size];
        let _ = Boole::occupation_lanes(&mut xs, n, -c, c, &mut counts);
        xs.iter().zip(counts).map(|(x, c)| x.is_finite().then_some(c)).collect::<Vec<_>>()
    });
    let scale = boole_return_sequence(n) * 2.0 * c;
    let all: Vec<Option<u64>> = runs.into_iter().flatten().collect();
    let censored = all.iter().filter(|v| v.is_none()).count();
    let samples = EmpiricalDistribution::new(all.into_iter().flatten().map(|v| v as f64 / scale).collect())?;
    let law = LimitLaw::HalfNormalMeanOne;
    let ks = samples.ks_against(|x| law.cdf(x).unwrap());
    Ok(DarlingKacReport { samples, law, ks, censored })
}

/// Renewal tower with a finite-mean return law; `f = 1_base`, `a_n = n/m(X)`.
pub fn darling_kac_tower<E: Executor>(law: &RenewalLaw, n: u64, trajectories: usize, seed: u64, exec: &E) -> Result<DarlingKacReport> {
    let mean = law.mean().ok_or_else(|| invalid("the return law must have finite mean"))?;
    let tower = RenewalTower::new(law.clone());
    let runs = exec.map(trajectories, |i| -> Result<f64> {
        let mut g = substream(seed, i as u64);
        let mut s = tower.sample_reference(&mut g);
        let mut visits = 0u64;
        for _ in 0..n {
            visits += (s.height == 0) as u64;
            tower.step(&mut s)?;
        }
        Ok(visits as f64 * mean / n as f64)
    });
    let samples = EmpiricalDistribution::new(runs.into_iter().collect::<Result<Vec<_>>>()?)?;
    let law = LimitLaw::Degenerate(1.0);
    let ks = samples.ks_against(|x| law.cdf(x).unwrap());
    Ok(DarlingKacReport { samples, law, ks, censored: 0 })
}

/// Local time at the origin `#{0 ≤ j < n : W_j = 0}` of a fair walk from 0.
pub fn walk_local_time(n: u64, rng: &mut Rng) -> u64 {
    let (mut pos, mut visits) = (0i64, 0u64);
    let mut left = n;
    while left > 0 {
        let w = rng.next_u64();
        let take = left.min(64);
        if pos.abs() > 64 && take == 64 {
            pos += 2 * w.count_ones() as i64 - 64;
        } else {
            for k in 0..take {
                visits += (pos == 0) as u64;
                pos += if (w >> k) & 1 == 1 { 1 } else { -1 };
            }
        }
        left -= take;
    }
    visits
}

/// Shape comparison for the walk, whose return-sequence constant is not fixed:
/// samples of `S_n(1_{0})` are divided by their own mean.
#[derive(Clone, Debug, PartialEq)]
pub struct ShapeReport {
    /// KS between the mean-matched samples at `n` and at `4n`.
    pub ks_scaling: f64,
    /// KS of the mean-matched samples at `4n` against `√(π/2)|Z|`.
    pub ks_half_normal: f64,
    pub mean_n: f64,
    pub mean_4n: f64,
}

pub fn darling_kac_walk_shape<E: Executor>(n: u64, trajectories: usize, seed: u64, exec: &E) -> Result<ShapeReport> {
    let run = |n: u64, s: u64| -> Result<(EmpiricalDistribution, f64)> {
        let raw = exec.map(trajectories, |i| walk_local_time(n, &mut substream(s, i as u64)) as f64);
        let mean = stats::pairwise_sum(&raw) / raw.len() as f64;
        if mean <= 0.0 {
            return Err(Error::ZeroMass);
        }
        Ok((EmpiricalDistribution::new(raw.iter().map(|x| x / mean).collect())?, mean))
    };
    let (a, mean_n) = run(n, derive_seed(seed, 1))?;
    let (b, mean_4n) = run(4 * n, derive_seed(seed, 2))?;
    let hn = LimitLaw::HalfNormalMeanOne;
    Ok(ShapeReport { ks_scaling: a.ks_between(&b), ks_half_normal: b.ks_against(|x| hn.cdf(x).unwrap()), mean_n, mean_4n })
}

/// `I(ξ_1^n)/a_n` for Boole's map against `h̲·X_{1/2}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BooleInformationReport {
    pub krengel: KrengelEstimate,
    /// `I/(a_n h̲)` per trajectory.
    pub normalized: EmpiricalDistribution,
    pub ks: f64,
    /// Mean of `I/a_n` over `h̲`.
    pub mean_ratio: f64,
    /// Labels that used the unseen-class floor, summed over trajectories.
    pub floors: usize,
}

/// `ξ` has cells `[−c, 0)`, `[0, c]` and the outside; `h̲` is estimated from
/// the induced map on `[−c, c]` with `model_length` labels per auxiliary orbit.
pub fn boole_information_experiment<E: Executor>(
    c: f64,
    n: u64,
    trajectories: usize,
    model_length: usize,
    seed: u64,
    exec: &E,
) -> Result<BooleInformationReport> {
    let a = Interval::symmetric(c)?;
    let p = IntervalCells::halves(c)?;
    let (krengel, model) = krengel_entropy(&Boole, &a, &p, model_length, DEFAULT_CAP, derive_seed(seed, 1))?;
    let runs = normalized_information_experiment(&Boole, &a, &p, &model, exec, trajectories, n, derive_seed(seed, 2))?;
    let an = boole_return_sequence(n);
    let floors = runs.iter().map(|r| r.floors).sum();
    let ratios: Vec<f64> = runs.iter().map(|r| r.information / an).collect();
    let mean_ratio = stats::pairwise_sum(&ratios) / ratios.len() as f64 / krengel.value;
    let normalized = EmpiricalDistribution::new(ratios.iter().map(|r| r / krengel.value).collect())?;
    let hn = LimitLaw::HalfNormalMeanOne;
    let ks = normalized.ks_against(|x| hn.cdf(x).unwrap());
    Ok(BooleInformationReport { krengel, normalized, ks, mean_ratio, floors })
}
