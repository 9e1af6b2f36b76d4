//! Induced maps, first-return statistics and the diagnostics built on them:
//! return-partition entropy, log-integrability of return times, occupation
//! sums `L(n)`, return sequences, the series criterion and Kac's identity.

use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::information::{block_entropies, BlockEntropy};
use crate::rng::{self, substream, Rng};
use crate::stats::pairwise_sum;
use crate::systems::bits::LazyBits;
use crate::systems::{
    BernoulliShift, Boole, Dynamics, Hik, HikState, RankOne, RankOneState, RenewalTower, Rotation, ShiftState,
    Srw1, Srw1State, Srw2, Srw2State, TowerState,
};

/// Default cap on a single return time.
pub const DEFAULT_CAP: u64 = 100_000_000;

/// A set `A` of finite positive measure with an exact membership test.
pub trait Sweep<D: Dynamics>: Sync {
    fn contains(&self, d: &D, s: &D::State) -> bool;

    /// `m(A)`.
    fn measure(&self) -> f64;

    /// A point drawn from `m_A = m(· ∩ A)/m(A)`.
    fn sample(&self, d: &D, rng: &mut Rng) -> D::State;

    /// Moves `s ∈ A` to `T^{φ_A(s)} s` and returns `φ_A(s)`.
    ///
    /// Implementations may skip stretches of the orbit that provably stay
    /// outside `A`; [`step_until_return`] is the plain reference.
    fn first_return(&self, d: &D, s: &mut D::State, cap: u64) -> Result<u64> {
        step_until_return(d, self, s, cap)
    }
}

/// Applies `T` until the orbit is back in `A`.
pub fn step_until_return<D: Dynamics, A: Sweep<D> + ?Sized>(d: &D, a: &A, s: &mut D::State, cap: u64) -> Result<u64> {
    let mut n = 0u64;
    loop {
        if n == cap {
            return Err(Error::CapExceeded { cap });
        }
        d.step(s)?;
        n += 1;
        if a.contains(d, s) {
            return Ok(n);
        }
    }
}

/// `φ_A(x)` for `x ∈ A`.
pub fn first_return_time<D: Dynamics, A: Sweep<D>>(d: &D, a: &A, x: &D::State, cap: u64) -> Result<u64> {
    let mut s = x.clone();
    induced_step(d, a, &mut s, cap)
}

/// `T_A x = T^{φ_A(x)} x`, in place; returns `φ_A(x)`.
pub fn induced_step<D: Dynamics, A: Sweep<D>>(d: &D, a: &A, x: &mut D::State, cap: u64) -> Result<u64> {
    if !a.contains(d, x) {
        return Err(invalid("the starting point is not in the sweep-out set"));
    }
    a.first_return(d, x, cap)
}

/// A finite set of sites of the walk on ℤ, counting measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteSet {
    sites: Vec<i64>,
}

impl SiteSet {
    pub fn new(mut sites: Vec<i64>) -> Result<Self> {
        sites.sort_unstable();
        sites.dedup();
        if sites.is_empty() {
            return Err(invalid("a site set needs at least one site"));
        }
        Ok(Self { sites })
    }

    pub fn sites(&self) -> &[i64] {
        &self.sites
    }

    pub fn index_of(&self, pos: i64) -> Option<usize> {
        self.sites.binary_search(&pos).ok()
    }

    fn distance(&self, pos: i64) -> u64 {
        let k = self.sites.partition_point(|&s| s < pos);
        let mut d = u64::MAX;
        if k < self.sites.len() {
            d = d.min(self.sites[k].abs_diff(pos));
        }
        if k > 0 {
            d = d.min(self.sites[k - 1].abs_diff(pos));
        }
        d
    }
}

impl Sweep<Srw1> for SiteSet {
    fn contains(&self, _: &Srw1, s: &Srw1State) -> bool {
        self.index_of(s.pos).is_some()
    }

    fn measure(&self) -> f64 {
        self.sites.len() as f64
    }

    fn sample(&self, _: &Srw1, rng: &mut Rng) -> Srw1State {
        let i = (rng::uniform(rng) * self.sites.len() as f64) as usize;
        Srw1State::new(self.sites[i.min(self.sites.len() - 1)], rng.next_u64())
    }

    /// A walk at distance `d` from the set cannot enter it in fewer than `d` steps.
    fn first_return(&self, _: &Srw1, s: &mut Srw1State, cap: u64) -> Result<u64> {
        let mut n = 0u64;
        loop {
            let d = self.distance(s.pos).max(1);
            let room = cap - n;
            if room == 0 {
                return Err(Error::CapExceeded { cap });
            }
            n += s.jump(d.min(64).min(room) as u32) as u64;
            if d <= 64 && self.index_of(s.pos).is_some() {
                return Ok(n);
            }
        }
    }
}

/// A finite set of sites of the planar walk, counting measure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanarSites {
    pub sites: Vec<(i64, i64)>,
}

impl Sweep<Srw2> for PlanarSites {
    fn contains(&self, _: &Srw2, s: &Srw2State) -> bool {
        self.sites.contains(&s.pos)
    }

    fn measure(&self) -> f64 {
        self.sites.len() as f64
    }

    fn sample(&self, _: &Srw2, rng: &mut Rng) -> Srw2State {
        let i = (rng::uniform(rng) * self.sites.len() as f64) as usize;
        Srw2State::new(self.sites[i.min(self.sites.len() - 1)], rng.next_u64())
    }
}

/// A closed interval `[lo, hi]` of the line, Lebesgue measure.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(invalid("interval needs finite lo < hi"));
        }
        Ok(Self { lo, hi })
    }

    /// `[−c, c]`.
    pub fn symmetric(c: f64) -> Result<Self> {
        Self::new(-c, c)
    }

    #[inline]
    pub fn holds(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }
}

impl Sweep<Boole> for Interval {
    fn contains(&self, _: &Boole, x: &f64) -> bool {
        self.holds(*x)
    }

    fn measure(&self) -> f64 {
        self.hi - self.lo
    }

    fn sample(&self, _: &Boole, rng: &mut Rng) -> f64 {
        loop {
            let x = self.lo + (self.hi - self.lo) * rng::uniform(rng);
            if x.abs() >= crate::systems::boole::SINGULAR_RADIUS {
                return x;
            }
        }
    }

    fn first_return(&self, _: &Boole, x: &mut f64, cap: u64) -> Result<u64> {
        let mut y = *x;
        for n in 1..=cap {
            y = Boole::map(y)?;
            if self.holds(y) {
                *x = y;
                return Ok(n);
            }
        }
        *x = y;
        Err(Error::CapExceeded { cap })
    }
}

/// A half-open arc `[lo, hi)` of the circle `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub lo: f64,
    pub hi: f64,
}

impl Sweep<Rotation> for Arc {
    fn contains(&self, _: &Rotation, x: &f64) -> bool {
        *x >= self.lo && *x < self.hi
    }

    fn measure(&self) -> f64 {
        self.hi - self.lo
    }

    fn sample(&self, _: &Rotation, rng: &mut Rng) -> f64 {
        self.lo + (self.hi - self.lo) * rng::uniform(rng)
    }
}

/// The fiber level `Ω × {level}` of the HIK skew product.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HikLevel {
    pub level: i64,
    pub mass: f64,
}

impl HikLevel {
    pub fn new(hik: &Hik, level: i64) -> Self {
        Self { level, mass: hik.level_mass(level) }
    }
}

impl Sweep<Hik> for HikLevel {
    fn contains(&self, _: &Hik, s: &HikState) -> bool {
        s.fiber == self.level
    }

    fn measure(&self) -> f64 {
        self.mass
    }

    fn sample(&self, d: &Hik, rng: &mut Rng) -> HikState {
        d.sample_level(self.level, rng)
    }

    fn first_return(&self, _: &Hik, s: &mut HikState, cap: u64) -> Result<u64> {
        crate::systems::hik::return_to_level(s, cap)
    }
}

/// The base `Ω × {0}` of a renewal tower; the base has mass one.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct TowerBase;

impl Sweep<RenewalTower> for TowerBase {
    fn contains(&self, _: &RenewalTower, s: &TowerState) -> bool {
        s.height == 0
    }

    fn measure(&self) -> f64 {
        1.0
    }

    fn sample(&self, d: &RenewalTower, rng: &mut Rng) -> TowerState {
        d.sample_base(rng)
    }

    /// The return time from the base is the height of the current column.
    fn first_return(&self, d: &RenewalTower, s: &mut TowerState, cap: u64) -> Result<u64> {
        match d.column(s) {
            Some(h) if h <= cap => Ok(d.next_base(s).unwrap_or(h)),
            _ => Err(Error::CapExceeded { cap }),
        }
    }
}

/// The base level `B_0` of a rank-one tower.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RankOneBase;

impl Sweep<RankOne> for RankOneBase {
    fn contains(&self, d: &RankOne, s: &RankOneState) -> bool {
        d.in_base(s.stage, s.level)
    }

    fn measure(&self) -> f64 {
        1.0
    }

    fn sample(&self, d: &RankOne, rng: &mut Rng) -> RankOneState {
        d.sample_reference(rng)
    }
}

/// The cylinder `[word]` of a Bernoulli shift; the empty word is the whole space.
#[derive(Clone, Debug, PartialEq)]
pub struct Cylinder {
    pub word: Vec<bool>,
    mass: f64,
}

impl Cylinder {
    pub fn new(shift: &BernoulliShift, word: Vec<bool>) -> Self {
        let p = shift.law.p_one();
        let mass = word.iter().fold(1.0, |m, &b| m * if b { p } else { 1.0 - p });
        Self { word, mass }
    }
}

impl Sweep<BernoulliShift> for Cylinder {
    fn contains(&self, _: &BernoulliShift, s: &ShiftState) -> bool {
        self.word.iter().enumerate().all(|(j, &b)| s.symbol(j) == b)
    }

    fn measure(&self) -> f64 {
        self.mass
    }

    fn sample(&self, d: &BernoulliShift, rng: &mut Rng) -> ShiftState {
        ShiftState { bits: LazyBits::with_prefix(&self.word, d.law, rng.next_u64()), offset: 0 }
    }
}

/// A mean with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub se: f64,
}

impl Estimate {
    pub fn of(xs: &[f64]) -> Result<Self> {
        let s = crate::stats::summarize(xs)?;
        Ok(Self { value: s.mean, se: s.se })
    }

    pub fn scaled(self, c: f64) -> Self {
        Self { value: self.value * c, se: self.se * c.abs() }
    }
}

/// First-return times sampled under `m_A`, with censoring.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnStatistics {
    /// `m(A)`.
    pub measure: f64,
    pub cap: u64,
    /// Uncensored return times, ascending.
    pub times: Vec<u64>,
    /// Samples whose return exceeded `cap`.
    pub censored: usize,
    prefix: Vec<f64>,
    prefix_sq: Vec<f64>,
}

impl ReturnStatistics {
    pub fn new(measure: f64, cap: u64, mut times: Vec<u64>, censored: usize) -> Result<Self> {
        if times.iter().any(|&t| t == 0) {
            return Err(invalid("return times are at least 1"));
        }
        if times.is_empty() && censored == 0 {
            return Err(Error::Empty);
        }
        times.sort_unstable();
        let mut prefix = Vec::with_capacity(times.len() + 1);
        let mut prefix_sq = Vec::with_capacity(times.len() + 1);
        let (mut a, mut b) = (0.0, 0.0);
        prefix.push(0.0);
        prefix_sq.push(0.0);
        for &t in &times {
            a += t as f64;
            b += (t as f64) * (t as f64);
            prefix.push(a);
            prefix_sq.push(b);
        }
        Ok(Self { measure, cap, times, censored, prefix, prefix_sq })
    }

    pub fn samples(&self) -> usize {
        self.times.len() + self.censored
    }

    pub fn censored_mass(&self) -> f64 {
        self.censored as f64 / self.samples() as f64
    }

    /// `p̂_n` over all samples; the masses sum to one minus the censored mass.
    pub fn probabilities(&self) -> Vec<(u64, f64)> {
        let total = self.samples() as f64;
        let mut out: Vec<(u64, f64)> = Vec::new();
        for &t in &self.times {
            match out.last_mut() {
                Some((v, c)) if *v == t => *c += 1.0,
                _ => out.push((t, 1.0)),
            }
        }
        for (_, c) in out.iter_mut() {
            *c /= total;
        }
        out
    }

    /// Plug-in `Ĥ(ρ_A)` over the uncensored atoms.
    pub fn entropy(&self) -> f64 {
        qf_entropy(&self.probabilities().iter().map(|p| p.1).collect::<Vec<_>>())
    }

    /// `E_{m_A}[log φ_A]`; censored samples contribute `log cap`, so the value is a lower bound.
    pub fn log_moment(&self) -> Estimate {
        let mut xs: Vec<f64> = self.times.iter().map(|&t| libm::log(t as f64)).collect();
        xs.extend(core::iter::repeat(libm::log(self.cap as f64)).take(self.censored));
        Estimate::of(&xs).unwrap_or(Estimate { value: 0.0, se: 0.0 })
    }

    /// `m(A) E_{m_A}[φ_A ∧ n]`, exact in distribution for `n ≤ cap`.
    pub fn truncated_moment(&self, n: u64) -> Estimate {
        let n = n.min(self.cap);
        let k = self.times.partition_point(|&t| t < n);
        let above = (self.samples() - k) as f64;
        let nf = n as f64;
        let total = self.samples() as f64;
        let m1 = (self.prefix[k] + above * nf) / total;
        let m2 = (self.prefix_sq[k] + above * nf * nf) / total;
        let var = (m2 - m1 * m1).max(0.0) * total / (total - 1.0).max(1.0);
        Estimate { value: m1, se: libm::sqrt(var / total) }.scaled(self.measure)
    }

    /// `L̂(n) = m(⋃_{k=0}^{n} T^{−k}A) = m(A) E_{m_A}[φ_A ∧ (n+1)]`.
    pub fn occupation(&self, n: u64) -> Estimate {
        self.truncated_moment(n.saturating_add(1))
    }

    /// `â_n = n / L̂(n)` on a grid.
    pub fn return_sequence(&self, ns: &[u64]) -> Vec<(u64, f64)> {
        return_sequence_estimate(&ns.iter().map(|&n| (n, self.occupation(n).value)).collect::<Vec<_>>())
    }
}

/// Samples `trajectories` return times from `m_A`, one substream each.
pub fn empirical_return_distribution<D, A, E>(
    d: &D,
    a: &A,
    exec: &E,
    trajectories: usize,
    cap: u64,
    seed: u64,
) -> Result<ReturnStatistics>
where
    D: Dynamics,
    A: Sweep<D>,
    E: Executor,
{
    let raw = exec.map(trajectories, |i| {
        let mut g = substream(seed, i as u64);
        let mut s = a.sample(d, &mut g);
        a.first_return(d, &mut s, cap)
    });
    let mut times = Vec::with_capacity(raw.len());
    let mut censored = 0;
    for r in raw {
        match r {
            Ok(t) => times.push(t),
            Err(Error::CapExceeded { .. }) => censored += 1,
            Err(e) => return Err(e),
        }
    }
    ReturnStatistics::new(a.measure(), cap, times, censored)
}

/// `Σ p log(1/p)`.
pub fn qf_entropy(p: &[f64]) -> f64 {
    let mut t: Vec<f64> = p.iter().filter(|&&x| x > 0.0).map(|&x| -x * libm::log(x)).collect();
    t.sort_by(f64::total_cmp);
    pairwise_sum(&t)
}

/// Partial sums on both sides of `Σ p_n log n < ∞ ⟹ Σ p_n log(1/p_n) < ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StarCheck {
    pub log_moment: f64,
    pub entropy: f64,
    /// `Σ b_n` with `p_n log(1/p_n) ≤ b_n := max(2 p_n log n, 2 log n / n²)` for `n ≥ 3`
    /// and `b_n := 1/e` below; it is finite exactly when the log-moment is.
    pub bound: f64,
    /// A term exceeded its bound.
    pub violated: bool,
}

/// Evaluates both sides of the implication on `(n, p_n)` pairs with `n ≥ 1`.
pub fn star_check(p: &[(u64, f64)]) -> StarCheck {
    let mut left = Vec::with_capacity(p.len());
    let mut right = Vec::with_capacity(p.len());
    let mut bound = Vec::with_capacity(p.len());
    let mut violated = false;
    for &(n, pn) in p {
        if pn <= 0.0 {
            continue;
        }
        let ln = libm::log(n as f64);
        let h = -pn * libm::log(pn);
        let b = if n >= 3 { (2.0 * pn * ln).max(2.0 * ln / (n as f64 * n as f64)) } else { 1.0 / core::f64::consts::E };
        violated |= h > b * (1.0 + 1e-12);
        left.push(pn * ln);
        right.push(h);
        bound.push(b);
    }
    StarCheck { log_moment: pairwise_sum(&left), entropy: pairwise_sum(&right), bound: pairwise_sum(&bound), violated }
}

/// `∫_A log φ_A dm = m(A) E_{m_A}[log φ_A]`.
pub fn llb_integral(stats: &ReturnStatistics) -> Estimate {
    stats.log_moment().scaled(stats.measure)
}

/// `â_n = n / L(n)`.
pub fn return_sequence_estimate(occupation: &[(u64, f64)]) -> Vec<(u64, f64)> {
    occupation.iter().map(|&(n, l)| (n, n as f64 / l)).collect()
}

/// Description of a return sequence `a_n`.
#[derive(Clone, Debug, PartialEq)]
pub enum ReturnSequenceForm {
    /// `a_n = scale · n^power · (log n)^log_power`.
    Closed { scale: f64, power: f64, log_power: f64 },
    /// Measured values `(n, a_n)`.
    Curve(Vec<(u64, f64)>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LlbVerdict {
    Llb,
    NotLlb,
    /// Finite data cannot decide convergence.
    Undecided,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesReport {
    pub verdict: LlbVerdict,
    /// `(N, Σ_{n=2}^{N} 1/(n a_n))`.
    pub partial_sums: Vec<(u64, f64)>,
}

/// Decides `Σ 1/(n a_n) < ∞` by comparison with `Σ 1/(n^{1+β} (log n)^γ)`.
pub fn llb_series_criterion(form: &ReturnSequenceForm) -> SeriesReport {
    match form {
        ReturnSequenceForm::Closed { scale, power, log_power } => {
            let verdict = if *power > 0.0 || (*power == 0.0 && *log_power > 1.0) {
                LlbVerdict::Llb
            } else {
                LlbVerdict::NotLlb
            };
            let mut partial_sums = Vec::new();
            let mut acc = 0.0;
            let mut next = 10u64;
            for n in 2..=10_000_000u64 {
                let x = n as f64;
                acc += 1.0 / (x * scale * libm::pow(x, *power) * libm::pow(libm::log(x), *log_power));
                if n == next {
                    partial_sums.push((n, acc));
                    next *= 10;
                }
            }
            SeriesReport { verdict, partial_sums }
        }
        ReturnSequenceForm::Curve(points) => {
            // Σ 1/(n a_n) ≈ ∫ d(log n)/a_n by the trapezoid rule between grid points.
            let mut partial_sums = Vec::new();
            let mut acc = 0.0;
            for w in points.windows(2) {
                let (n0, a0) = w[0];
                let (n1, a1) = w[1];
                acc += 0.5 * (1.0 / a0 + 1.0 / a1) * (libm::log(n1 as f64) - libm::log(n0 as f64));
                partial_sums.push((n1, acc));
            }
            SeriesReport { verdict: LlbVerdict::Undecided, partial_sums }
        }
    }
}

/// Both sides of `∫_B Σ_{k<ψ} f∘T_A^k dm = ∫_A f dm`, estimated independently.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KacCheck {
    pub left: Estimate,
    pub right: Estimate,
    pub relative_error: f64,
    /// Left-side samples dropped because an induced return exceeded the cap.
    pub censored: usize,
}

impl KacCheck {
    /// Agreement within `k` combined standard errors.
    pub fn within(&self, k: f64) -> bool {
        (self.left.value - self.right.value).abs() <= k * libm::hypot(self.left.se, self.right.se)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn kac_identity_check<D, A, B, F, E>(
    d: &D,
    a: &A,
    b: &B,
    f: F,
    exec: &E,
    samples: usize,
    cap: u64,
    seed: u64,
) -> Result<KacCheck>
where
    D: Dynamics,
    A: Sweep<D>,
    B: Sweep<D>,
    F: Fn(&D::State) -> f64 + Sync,
    E: Executor,
{
    let left_seed = rng::derive_seed(seed, 1);
    let right_seed = rng::derive_seed(seed, 2);
    let left = exec.map(samples, |i| -> Result<Option<f64>> {
        let mut g = substream(left_seed, i as u64);
        let mut s = b.sample(d, &mut g);
        let mut acc = 0.0;
        loop {
            acc += f(&s);
            match a.first_return(d, &mut s, cap) {
                Ok(_) => {}
                Err(Error::CapExceeded { .. }) => return Ok(None),
                Err(e) => return Err(e),
            }
            if b.contains(d, &s) {
                return Ok(Some(acc));
            }
        }
    });
    let mut xs = Vec::with_capacity(samples);
    let mut censored = 0;
    for r in left {
        match r? {
            Some(x) => xs.push(x),
            None => censored += 1,
        }
    }
    let left = Estimate::of(&xs)?.scaled(b.measure());
    let ys = exec.map(samples, |i| {
        let mut g = substream(right_seed, i as u64);
        f(&a.sample(d, &mut g))
    });
    let right = Estimate::of(&ys)?.scaled(a.measure());
    let relative_error = (left.value - right.value).abs() / right.value.abs();
    Ok(KacCheck { left, right, relative_error, censored })
}

/// Block entropies of the `ρ_A`-name `φ_A(x), φ_A(T_A x), …` under `T_A`.
#[derive(Clone, Debug, PartialEq)]
pub struct Predictability {
    pub entropy: BlockEntropy,
    /// Return times above the `1 − 10^{−4}` quantile, merged into one tail symbol.
    pub binned: usize,
    /// Returns that exceeded the cap; the name stops there.
    pub censored: usize,
}

/// Plug-in block entropies of return-time names along `orbits` orbits of `length` induced steps.
#[allow(clippy::too_many_arguments)]
pub fn predictability_entropy<D, A, E>(
    d: &D,
    a: &A,
    exec: &E,
    orbits: usize,
    length: usize,
    max_block: usize,
    cap: u64,
    seed: u64,
) -> Result<Predictability>
where
    D: Dynamics,
    A: Sweep<D>,
    E: Executor,
{
    let runs = exec.map(orbits, |i| -> Result<(Vec<u64>, bool)> {
        let mut g = substream(seed, i as u64);
        let mut s = a.sample(d, &mut g);
        let mut name = Vec::with_capacity(length);
        for _ in 0..length {
            match a.first_return(d, &mut s, cap) {
                Ok(t) => name.push(t),
                Err(Error::CapExceeded { .. }) => return Ok((name, true)),
                Err(e) => return Err(e),
            }
        }
        Ok((name, false))
    });
    let mut names = Vec::with_capacity(orbits);
    let mut censored = 0;
    for r in runs {
        let (name, cut) = r?;
        censored += cut as usize;
        names.push(name);
    }
    let mut all: Vec<u64> = names.iter().flatten().copied().collect();
    if all.is_empty() {
        return Err(Error::Empty);
    }
    all.sort_unstable();
    let threshold = all[((all.len() as f64 * (1.0 - 1e-4)) as usize).min(all.len() - 1)];
    let mut binned = 0;
    for name in names.iter_mut() {
        for t in name.iter_mut() {
            if *t > threshold {
                *t = u64::MAX;
                binned += 1;
            }
        }
    }
    Ok(Predictability { entropy: block_entropies(&names, max_block), binned, censored })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use crate::systems::RenewalLaw;

    #[test]
    fn first_return_examples() {
        let a = SiteSet::new(alloc::vec![0]).unwrap();
        let x = Srw1State::scripted(0, &[1, -1], 0);
        assert_eq!(first_return_time(&Srw1, &a, &x, 100).unwrap(), 2);

        let i = Interval::symmetric(1.0).unwrap();
        let mut y = 0.5;
        assert_eq!(induced_step(&Boole, &i, &mut y, 100).unwrap(), 2);
        assert!((y - (-1.5 + 1.0 / 1.5)).abs() < 1e-15);

        let tower = RenewalTower::new(RenewalLaw::sparse(alloc::vec![3, 7], alloc::vec![0.5, 0.5]).unwrap());
        let mut s = tower.sample_base(&mut substream(1, 0));
        let k = tower.column(&s).unwrap();
        assert_eq!(induced_step(&tower, &TowerBase, &mut s, 100).unwrap(), k);
        assert_eq!(s.height, 0);
    }

    #[test]
    fn start_outside_is_rejected() {
        let a = SiteSet::new(alloc::vec![0]).unwrap();
        assert!(first_return_time(&Srw1, &a, &Srw1State::new(3, 0), 10).is_err());
    }

    #[test]
    fn cap_is_reported() {
        let a = SiteSet::new(alloc::vec![0]).unwrap();
        let x = Srw1State::scripted(0, &[1, 1, 1, 1], 0);
        assert_eq!(first_return_time(&Srw1, &a, &x, 3), Err(Error::CapExceeded { cap: 3 }));
    }

    #[test]
    fn fast_paths_match_stepping() {
        let a = SiteSet::new(alloc::vec![-3, 0, 4]).unwrap();
        for i in 0..300 {
            let mut g = substream(11, i);
            let s = a.sample(&Srw1, &mut g);
            let mut fast = s.clone();
            let mut slow = s.clone();
            let tf = a.first_return(&Srw1, &mut fast, 1 << 20);
            let ts = step_until_return(&Srw1, &a, &mut slow, 1 << 20);
            assert_eq!(tf, ts);
            if tf.is_ok() {
                assert_eq!(fast.pos, slow.pos);
            }
        }
        let hik = Hik::new(0.5).unwrap();
        let lvl = HikLevel::new(&hik, 0);
        for i in 0..300 {
            let mut g = substream(12, i);
            let s = lvl.sample(&hik, &mut g);
            let mut fast = s.clone();
            let mut slow = s.clone();
            let tf = lvl.first_return(&hik, &mut fast, 1 << 20);
            let ts = step_until_return(&hik, &lvl, &mut slow, 1 << 20);
            assert_eq!(tf, ts);
            if tf.is_ok() {
                assert_eq!(fast.omega.prefix(80), slow.omega.prefix(80));
            }
        }
    }

    #[test]
    fn srw_two_step_return_probability() {
        let a = SiteSet::new(alloc::vec![0]).unwrap();
        let st = empirical_return_distribution(&Srw1, &a, &Sequential, 100_000, 1 << 20, 3).unwrap();
        let p2 = st.probabilities()[0];
        assert_eq!(p2.0, 2);
        let se = (0.25f64 / 100_000.0).sqrt();
        assert!((p2.1 - 0.5).abs() < 3.0 * se, "{}", p2.1);
    }

    #[test]
    fn tower_return_law_is_the_height_law() {
        let law = RenewalLaw::sparse(alloc::vec![2, 5, 9], alloc::vec![0.25, 0.5, 0.25]).unwrap();
        let tower = RenewalTower::new(law.clone());
        let st = empirical_return_distribution(&tower, &TowerBase, &Sequential, 40_000, 100, 5).unwrap();
        for ((v, p), i) in st.probabilities().into_iter().zip(0..) {
            assert_eq!(Some(v), law.value(i));
            assert!((p - law.prob(i)).abs() < 4.0 * (law.prob(i) * (1.0 - law.prob(i)) / 40_000.0).sqrt());
        }
        // Both routes to L(n).
        for n in [0u64, 1, 3, 8, 20] {
            let e = st.occupation(n);
            assert!((e.value - law.occupation(n)).abs() < 4.0 * e.se + 1e-12, "n={n}");
        }
    }

    #[test]
    fn occupation_at_zero_is_the_measure() {
        let st = ReturnStatistics::new(2.5, 100, alloc::vec![1, 4, 9], 1).unwrap();
        assert_eq!(st.occupation(0).value, 2.5);
        assert_eq!(st.censored_mass(), 0.25);
    }

    #[test]
    fn hik_returns_are_censored() {
        let hik = Hik::new(0.5).unwrap();
        let st = empirical_return_distribution(&hik, &HikLevel::new(&hik, 0), &Sequential, 20_000, 1 << 12, 8).unwrap();
        assert!(st.censored > 0);
        let mass: f64 = st.probabilities().iter().map(|p| p.1).sum();
        assert!((mass + st.censored_mass() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(qf_entropy(&[1.0]), 0.0);
        let h = RenewalLaw::four_tower().entropy();
        assert!((h - 2.0 * core::f64::consts::LN_2).abs() < 1e-12);
    }

    #[test]
    fn star_examples() {
        let geo: Vec<(u64, f64)> = (1..200).map(|n| (n, libm::ldexp(1.0, -(n as i32)))).collect();
        let s = star_check(&geo);
        assert!(!s.violated && s.log_moment.is_finite() && s.entropy.is_finite());
        assert!((s.entropy - 2.0 * core::f64::consts::LN_2).abs() < 1e-9);
        // p_n ∝ 1/(n log² n): the log-moment partial sums keep growing.
        let c = |m: u64| -> StarCheck {
            let raw: Vec<(u64, f64)> = (3..m).map(|n| (n, 1.0 / (n as f64 * libm::log(n as f64).powi(2)))).collect();
            star_check(&raw)
        };
        assert!(c(1_000_000).log_moment > c(1_000).log_moment + 0.5);
    }

    #[test]
    fn series_verdicts() {
        let v = |power, log_power| {
            llb_series_criterion(&ReturnSequenceForm::Closed { scale: 1.0, power, log_power }).verdict
        };
        assert_eq!(v(0.5, 0.0), LlbVerdict::Llb);
        assert_eq!(v(0.0, 1.0), LlbVerdict::NotLlb);
        assert_eq!(v(0.0, 0.5), LlbVerdict::NotLlb);
        let curve = ReturnSequenceForm::Curve(alloc::vec![(10, 3.0), (100, 10.0), (1000, 31.0)]);
        assert_eq!(llb_series_criterion(&curve).verdict, LlbVerdict::Undecided);
        assert_eq!(return_sequence_estimate(&[(100, 10.0)]), [(100, 10.0)]);
    }

    #[test]
    fn kac_trivial_and_shift() {
        let a = SiteSet::new(alloc::vec![0, 1]).unwrap();
        let same = kac_identity_check(&Srw1, &a, &a, |_| 1.0, &Sequential, 1000, 1 << 20, 1).unwrap();
        assert_eq!(same.left.value, 2.0);
        assert_eq!(same.relative_error, 0.0);
        let sh = BernoulliShift::fair();
        let whole = Cylinder::new(&sh, alloc::vec![]);
        let zero = Cylinder::new(&sh, alloc::vec![false]);
        let k = kac_identity_check(&sh, &whole, &zero, |_| 1.0, &Sequential, 100_000, 1000, 2).unwrap();
        assert!(k.relative_error < 0.02, "{k:?}");
        assert!(k.within(4.0));
    }

    #[test]
    fn constant_tower_is_predictable() {
        let tower = RenewalTower::new(RenewalLaw::point_mass(1).unwrap());
        let p = predictability_entropy(&tower, &TowerBase, &Sequential, 4, 2000, 6, 10, 0).unwrap();
        assert!(p.entropy.estimate.abs() < 1e-12);
    }
}
