//! Partitions, names, information and entropy estimators.
//!
//! Cylinder masses in infinite measure are never estimated directly. A point's
//! name over a time window is rewritten as its return-time label followed by
//! the labels `(ξ-cell, return time)` of the induced orbit, and masses of
//! those induced blocks are estimated on the finite system `(A, m_A, T_A)`,
//! then scaled by `m(A)`.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::ops::Range;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::induction::{Estimate, SiteSet, Sweep};
use crate::rng::{mix64, substream};
use crate::stats::pairwise_sum;
use crate::systems::bits::LazyBits;
use crate::systems::{BernoulliShift, Dynamics, HikState, ShiftState, Srw1State, TowerState};

/// A finite labeled partition; cells are numbered `0 … cells() − 1`.
pub trait Partition<S>: Sync {
    fn cells(&self) -> usize;

    fn cell(&self, s: &S) -> usize;

    /// The label of the infinite cell `A^c` if the partition is cofinite.
    fn atom(&self) -> Option<usize> {
        None
    }
}

/// The single-cell partition.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Trivial;

impl<S> Partition<S> for Trivial {
    fn cells(&self) -> usize {
        1
    }

    fn cell(&self, _: &S) -> usize {
        0
    }
}

/// Cells `[b_0, b_1), …, [b_{k−2}, b_{k−1}]` of the line, with the outside as the atom.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalCells {
    breaks: Vec<f64>,
}

impl IntervalCells {
    pub fn new(breaks: Vec<f64>) -> Result<Self> {
        if breaks.len() < 2 || breaks.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(invalid("need at least two strictly increasing breakpoints"));
        }
        Ok(Self { breaks })
    }

    /// `[−c, 0)`, `[0, c]` and the outside.
    pub fn halves(c: f64) -> Result<Self> {
        Self::new(alloc::vec![-c, 0.0, c])
    }
}

impl Partition<f64> for IntervalCells {
    fn cells(&self) -> usize {
        self.breaks.len()
    }

    fn cell(&self, x: &f64) -> usize {
        let k = self.breaks.len();
        if *x < self.breaks[0] || *x > self.breaks[k - 1] {
            return k - 1;
        }
        (self.breaks.partition_point(|b| b <= x) - 1).min(k - 2)
    }

    fn atom(&self) -> Option<usize> {
        Some(self.breaks.len() - 1)
    }
}

/// One cell per site of a [`SiteSet`], the rest of ℤ as the atom.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteCells(pub SiteSet);

impl Partition<Srw1State> for SiteCells {
    fn cells(&self) -> usize {
        self.0.sites().len() + 1
    }

    fn cell(&self, s: &Srw1State) -> usize {
        self.0.index_of(s.pos).unwrap_or(self.0.sites().len())
    }

    fn atom(&self) -> Option<usize> {
        Some(self.0.sites().len())
    }
}

/// `Ω × {level}` split by the first `bits` coordinates of `ω`; the other levels form the atom.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelCells {
    pub level: i64,
    pub bits: usize,
}

impl Partition<HikState> for LevelCells {
    fn cells(&self) -> usize {
        (1 << self.bits) + 1
    }

    fn cell(&self, s: &HikState) -> usize {
        if s.fiber == self.level {
            s.omega.low_bits(self.bits) as usize
        } else {
            1 << self.bits
        }
    }

    fn atom(&self) -> Option<usize> {
        Some(1 << self.bits)
    }
}

/// The base of a renewal tower against everything above it.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BaseCells;

impl Partition<TowerState> for BaseCells {
    fn cells(&self) -> usize {
        2
    }

    fn cell(&self, s: &TowerState) -> usize {
        (s.height != 0) as usize
    }

    fn atom(&self) -> Option<usize> {
        Some(1)
    }
}

/// The time-zero coordinate of a shift.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Coordinate;

impl Partition<ShiftState> for Coordinate {
    fn cells(&self) -> usize {
        2
    }

    fn cell(&self, s: &ShiftState) -> usize {
        s.symbol(0) as usize
    }
}

/// Labels of `T^j x` for `j` in a window.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NameSequence {
    pub start: u64,
    pub labels: Vec<usize>,
}

/// The `(ξ, T)`-name of `x` over `window`.
pub fn name<D: Dynamics, P: Partition<D::State>>(d: &D, p: &P, x: &D::State, window: Range<u64>) -> Result<NameSequence> {
    let mut s = x.clone();
    d.advance(&mut s, window.start)?;
    let mut labels = Vec::with_capacity((window.end - window.start) as usize);
    for j in window.clone() {
        labels.push(p.cell(&s));
        if j + 1 < window.end {
            d.step(&mut s)?;
        }
    }
    Ok(NameSequence { start: window.start, labels })
}

/// `I(α)(x) = log(1/P(α(x)))` from the mass of the cell containing `x`.
pub fn information(mass: f64) -> Result<f64> {
    if !(mass > 0.0) {
        return Err(Error::ZeroMass);
    }
    Ok(-libm::log(mass))
}

/// Plug-in block entropies `H_ℓ` of stationary names, pooled over sliding windows.
#[derive(Clone, Debug, PartialEq)]
pub struct BlockEntropy {
    /// `H_1, …, H_L`.
    pub block: Vec<f64>,
    /// `H_ℓ/ℓ`.
    pub rate: Vec<f64>,
    /// `H_1, H_2 − H_1, …, H_L − H_{L−1}`.
    pub increments: Vec<f64>,
    /// The last increment.
    pub estimate: f64,
    pub alphabet: usize,
    /// Some block length had fewer windows than ten times `alphabet^ℓ`.
    pub undersampled: bool,
}

/// Block identity by a chained 64-bit hash of the symbols.
#[inline]
fn chain(h: u64, symbol: u64) -> u64 {
    mix64(h ^ 0x243f_6a88_85a3_08d3, symbol)
}

fn entropy_of_sorted_keys(keys: &mut [u64]) -> f64 {
    keys.sort_unstable();
    let total = keys.len() as f64;
    let mut terms = Vec::new();
    let mut i = 0;
    while i < keys.len() {
        let mut j = i;
        while j < keys.len() && keys[j] == keys[i] {
            j += 1;
        }
        let p = (j - i) as f64 / total;
        terms.push(-p * libm::log(p));
        i = j;
    }
    terms.sort_by(f64::total_cmp);
    pairwise_sum(&terms)
}

pub fn block_entropies(names: &[Vec<u64>], max_block: usize) -> BlockEntropy {
    let mut keys: Vec<Vec<u64>> = (0..max_block).map(|_| Vec::new()).collect();
    let mut symbols: Vec<u64> = Vec::new();
    for name in names {
        symbols.extend_from_slice(name);
        for i in 0..name.len() {
            let mut h = 0u64;
            for l in 0..max_block.min(name.len() - i) {
                h = chain(h, name[i + l]);
                keys[l].push(h);
            }
        }
    }
    symbols.sort_unstable();
    symbols.dedup();
    let alphabet = symbols.len();
    let mut block = Vec::with_capacity(max_block);
    let mut undersampled = false;
    for (l, k) in keys.iter_mut().enumerate() {
        if k.is_empty() {
            break;
        }
        undersampled |= (k.len() as f64) < 10.0 * libm::pow(alphabet as f64, (l + 1) as f64);
        block.push(entropy_of_sorted_keys(k));
    }
    let rate = block.iter().enumerate().map(|(l, h)| h / (l + 1) as f64).collect();
    let increments: Vec<f64> = block.iter().enumerate().map(|(l, h)| if l == 0 { *h } else { h - block[l - 1] }).collect();
    let estimate = increments.last().copied().unwrap_or(0.0);
    BlockEntropy { block, rate, increments, estimate, alphabet, undersampled }
}

/// Hash of the `ξ`-name of `x` over `[0, φ_A(x))`, which is the induced label
/// `(ξ ∩ A) ∨ ρ_A` refined by the full name of the excursion.
fn excursion_label<D: Dynamics, A: Sweep<D>, P: Partition<D::State>>(
    d: &D,
    a: &A,
    p: &P,
    s: &mut D::State,
    cap: u64,
) -> Result<u64> {
    let mut h = chain(0, p.cell(s) as u64);
    for n in 1..=cap {
        d.step(s)?;
        if a.contains(d, s) {
            return Ok(chain(h, u64::MAX - n));
        }
        h = chain(h, p.cell(s) as u64);
    }
    Err(Error::CapExceeded { cap })
}

/// Both sides of Abramov's formula `h(S_A) P(A) = h(S)` on a Bernoulli shift.
#[derive(Clone, Debug, PartialEq)]
pub struct AbramovCheck {
    pub base: BlockEntropy,
    pub induced: BlockEntropy,
    /// `ĥ(S_A) · P(A)`.
    pub scaled_induced: f64,
    pub relative_error: f64,
}

/// `ĥ(S)` from the coordinate names of one orbit of `length` steps, and
/// `ĥ(S_A)` from the excursion labels of one induced orbit of `length` returns.
pub fn abramov_check<A: Sweep<BernoulliShift>>(
    shift: &BernoulliShift,
    a: &A,
    length: usize,
    max_block: usize,
    seed: u64,
) -> Result<AbramovCheck> {
    let mut g = substream(seed, 0);
    let x = shift.sample_reference(&mut g);
    let base_name: Vec<u64> = (0..length).map(|j| x.symbol(j) as u64).collect();
    let base = block_entropies(&[base_name], max_block);
    let mut g = substream(seed, 0);
    let mut s = a.sample(shift, &mut g);
    let mut labels = Vec::with_capacity(length);
    for _ in 0..length {
        labels.push(excursion_label(shift, a, &Coordinate, &mut s, 1 << 20)?);
    }
    let induced = block_entropies(&[labels], max_block);
    let scaled_induced = induced.estimate * a.measure();
    let relative_error = (scaled_induced - base.estimate).abs() / base.estimate;
    Ok(AbramovCheck { base, induced, scaled_induced, relative_error })
}

/// A label of the induced partition `ς = (ξ ∩ A) ∨ ρ_A`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Label {
    pub cell: u32,
    pub time: u64,
}

/// `count` consecutive `ς`-labels along the induced orbit of `x ∈ A`.
/// Stops early (second value `true`) if a return exceeds `cap`.
pub fn induced_labels<D: Dynamics, A: Sweep<D>, P: Partition<D::State>>(
    d: &D,
    a: &A,
    p: &P,
    x: &mut D::State,
    count: usize,
    cap: u64,
) -> Result<(Vec<Label>, bool)> {
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let cell = p.cell(x) as u32;
        match a.first_return(d, x, cap) {
            Ok(time) => out.push(Label { cell, time }),
            Err(Error::CapExceeded { .. }) => return Ok((out, true)),
            Err(e) => return Err(e),
        }
    }
    Ok((out, false))
}

/// Induced-label sequences from one long orbit under `m_A`; a censored return
/// ends the current sequence and the orbit restarts from a fresh `m_A` point.
pub fn auxiliary_orbit<D: Dynamics, A: Sweep<D>, P: Partition<D::State>>(
    d: &D,
    a: &A,
    p: &P,
    length: usize,
    cap: u64,
    seed: u64,
) -> Result<Vec<Vec<Label>>> {
    let mut out = Vec::new();
    let mut have = 0;
    let mut restart = 0u64;
    while have < length {
        let mut g = substream(seed, restart);
        restart += 1;
        let mut s = a.sample(d, &mut g);
        let (labels, _) = induced_labels(d, a, p, &mut s, length - have, cap)?;
        have += labels.len();
        if !labels.is_empty() {
            out.push(labels);
        }
        if restart > 16 * length as u64 + 16 {
            return Err(Error::CapExceeded { cap });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum TimeClass {
    Exact(u64),
    /// `[2^j, 2^{j+1})` minus the exact values inside it.
    Bin(u32),
}

/// Order-one frequency model of `ς`-labels on `(A, m_A, T_A)`.
///
/// Return times seen at least [`FrequencyModel::EXACT_MIN`] times form their
/// own class; rarer times share a dyadic bin whose mass is spread evenly over
/// the lattice points (multiples of the gcd of all observed times) in the bin.
/// Conditional probabilities interpolate the context counts with the marginal
/// using a prior weight of [`FrequencyModel::PRIOR_WEIGHT`] observations.
#[derive(Clone, Debug, PartialEq)]
pub struct FrequencyModel {
    classes: BTreeMap<(u32, TimeClass), usize>,
    exact: BTreeMap<u64, ()>,
    spread: BTreeMap<u32, f64>,
    unigram: Vec<f64>,
    total: f64,
    pairs: BTreeMap<(usize, usize), f64>,
    context: Vec<f64>,
    lattice: u64,
}

impl FrequencyModel {
    pub const EXACT_MIN: u64 = 16;
    pub const PRIOR_WEIGHT: f64 = 32.0;

    pub fn fit(sequences: &[Vec<Label>]) -> Result<Self> {
        let mut time_counts: BTreeMap<u64, u64> = BTreeMap::new();
        let mut lattice = 0u64;
        for l in sequences.iter().flatten() {
            *time_counts.entry(l.time).or_insert(0) += 1;
            lattice = gcd(lattice, l.time);
        }
        if time_counts.is_empty() {
            return Err(Error::Empty);
        }
        let exact: BTreeMap<u64, ()> = time_counts.iter().filter(|(_, &c)| c >= Self::EXACT_MIN).map(|(&t, _)| (t, ())).collect();
        let mut model = Self {
            classes: BTreeMap::new(),
            exact,
            spread: BTreeMap::new(),
            unigram: Vec::new(),
            total: 0.0,
            pairs: BTreeMap::new(),
            context: Vec::new(),
            lattice,
        };
        for seq in sequences {
            let mut prev: Option<usize> = None;
            for l in seq {
                let key = (l.cell, model.class_of(l.time));
                let next = model.classes.len();
                let k = *model.classes.entry(key).or_insert(next);
                if k == model.unigram.len() {
                    model.unigram.push(0.0);
                    model.context.push(0.0);
                }
                model.unigram[k] += 1.0;
                model.total += 1.0;
                if let Some(c) = prev {
                    *model.pairs.entry((c, k)).or_insert(0.0) += 1.0;
                    model.context[c] += 1.0;
                }
                prev = Some(k);
            }
        }
        let bins: Vec<u32> = model.classes.keys().filter_map(|(_, c)| if let TimeClass::Bin(j) = c { Some(*j) } else { None }).collect();
        for j in bins {
            let lo = 1u64 << j;
            let hi = lo.saturating_mul(2);
            let lattice_points = (hi - 1) / lattice - (lo - 1) / lattice;
            let exact_inside = model.exact.range(lo..hi).count() as u64;
            model.spread.insert(j, (lattice_points.saturating_sub(exact_inside)).max(1) as f64);
        }
        Ok(model)
    }

    fn class_of(&self, time: u64) -> TimeClass {
        if self.exact.contains_key(&time) {
            TimeClass::Exact(time)
        } else {
            TimeClass::Bin(63 - time.leading_zeros())
        }
    }

    pub fn classes(&self) -> usize {
        self.unigram.len()
    }

    /// `ln P(label | previous)` and whether the unseen-class floor was used.
    pub fn log_prob(&self, previous: Option<&Label>, label: &Label) -> (f64, bool) {
        let class = self.class_of(label.time);
        let spread = match class {
            TimeClass::Exact(_) => 0.0,
            TimeClass::Bin(j) => {
                let s = self.spread.get(&j).copied().unwrap_or_else(|| {
                    let lo = 1u64 << j;
                    (lo / self.lattice.max(1)).max(1) as f64
                });
                -libm::log(s)
            }
        };
        let off_lattice = label.time % self.lattice.max(1) != 0;
        let k = match self.classes.get(&(label.cell, class)) {
            Some(&k) => k,
            None => return (libm::log(0.5 / self.total) + spread, true),
        };
        let marginal = self.unigram[k] / self.total;
        let p = match previous.and_then(|p| self.classes.get(&(p.cell, self.class_of(p.time)))) {
            Some(&c) => {
                let pair = self.pairs.get(&(c, k)).copied().unwrap_or(0.0);
                (pair + Self::PRIOR_WEIGHT * marginal) / (self.context[c] + Self::PRIOR_WEIGHT)
            }
            None => marginal,
        };
        (libm::log(p) + spread, off_lattice)
    }

    /// `−ln m_A` of the induced block, and the number of floored labels.
    pub fn block_information(&self, labels: &[Label]) -> (f64, usize) {
        let mut terms = Vec::with_capacity(labels.len());
        let mut floors = 0;
        for (i, l) in labels.iter().enumerate() {
            let (lp, floor) = self.log_prob(if i == 0 { None } else { Some(&labels[i - 1]) }, l);
            terms.push(-lp);
            floors += floor as usize;
        }
        (pairwise_sum(&terms), floors)
    }

    /// Per-label cross-entropy on held-out sequences: the estimate of `h(T_A, ς)`.
    pub fn cross_entropy(&self, sequences: &[Vec<Label>]) -> Result<Estimate> {
        let mut xs = Vec::new();
        for seq in sequences {
            for i in 1..seq.len() {
                xs.push(-self.log_prob(Some(&seq[i - 1]), &seq[i]).0);
            }
        }
        Estimate::of(&xs)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// `h̲(T, ξ) ≈ m(A) ĥ(T_A, ς)` with `ĥ` the held-out cross-entropy of a
/// frequency model trained on an independent auxiliary orbit.
#[derive(Clone, Debug, PartialEq)]
pub struct KrengelEstimate {
    pub measure: f64,
    pub induced_rate: Estimate,
    pub value: f64,
    pub classes: usize,
}

pub fn krengel_entropy<D: Dynamics, A: Sweep<D>, P: Partition<D::State>>(
    d: &D,
    a: &A,
    p: &P,
    length: usize,
    cap: u64,
    seed: u64,
) -> Result<(KrengelEstimate, FrequencyModel)> {
    let train = auxiliary_orbit(d, a, p, length, cap, crate::rng::derive_seed(seed, 1))?;
    let test = auxiliary_orbit(d, a, p, length, cap, crate::rng::derive_seed(seed, 2))?;
    let model = FrequencyModel::fit(&train)?;
    let induced_rate = model.cross_entropy(&test)?;
    let value = a.measure() * induced_rate.value;
    Ok((KrengelEstimate { measure: a.measure(), induced_rate, value, classes: model.classes() }, model))
}

/// Outcome of reconstructing a `T`-name from induced data.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KrengelCheck {
    /// Every compared position agreed.
    pub matched: bool,
    /// Positions `1 … compared` of the `T`-name were compared.
    pub compared: u64,
    /// `φ_n(x)`, if all `n` induced returns stayed within the caps.
    pub total: Option<u64>,
}

/// Checks `ξ_1^{φ_n(x)}(T)(x) = (ρ_A ∨ ς_1^n(T_A))(x)` for a cofinite `ξ` with core `A`.
///
/// The right side is produced by the induced map (using any fast return
/// path), the left side by stepping `T` one step at a time; positions up to
/// `horizon` are compared.
pub fn krengel_formula_check<D: Dynamics, A: Sweep<D>, P: Partition<D::State>>(
    d: &D,
    a: &A,
    p: &P,
    x: &D::State,
    n: usize,
    horizon: u64,
) -> Result<KrengelCheck> {
    let atom = p.atom().ok_or_else(|| invalid("the partition must be cofinite"))?;
    if !a.contains(d, x) {
        return Err(invalid("the starting point is not in the core"));
    }
    // Right side: ρ_A(x), then (cell, return time) of T_A x, …, T_A^n x.
    let mut s = x.clone();
    let mut visits: Vec<(u64, usize)> = Vec::with_capacity(n);
    let mut clock = 0u64;
    let mut total = None;
    for k in 0..=n {
        if k > 0 {
            visits.push((clock, p.cell(&s)));
            if k == n {
                total = Some(clock);
                break;
            }
        }
        match a.first_return(d, &mut s, horizon.saturating_sub(clock).max(1)) {
            Ok(t) => clock += t,
            Err(Error::CapExceeded { .. }) => break,
            Err(e) => return Err(e),
        }
    }
    let end = total.unwrap_or(horizon).min(horizon);
    // Left side: the T-name by direct stepping, against the reconstruction.
    let mut s = x.clone();
    let mut next = 0usize;
    for t in 1..=end {
        d.step(&mut s)?;
        let expect = match visits.get(next) {
            Some(&(time, cell)) if time == t => {
                next += 1;
                cell
            }
            _ => atom,
        };
        if p.cell(&s) != expect {
            return Ok(KrengelCheck { matched: false, compared: t, total });
        }
    }
    Ok(KrengelCheck { matched: true, compared: end, total })
}

/// One trajectory of the normalized information experiment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InformationSample {
    /// `I(ξ_1^n(T))(x)` through the induced block mass.
    pub information: f64,
    /// `S_n(1_A)(x)`: visits to `A` at times `1 … n`.
    pub visits: u64,
    /// Labels that used the unseen-class floor.
    pub floors: usize,
}

impl InformationSample {
    /// `I / S_n(p)` with `p = 1_A / m(A)`.
    pub fn ratio(&self, measure: f64) -> Option<f64> {
        (self.visits > 0).then(|| self.information * measure / self.visits as f64)
    }
}

/// `I(ξ_1^n(T))(x)` for `trajectories` reference points: `−log m(A)` plus the
/// model information of the completed induced labels inside `[1, n]`.
#[allow(clippy::too_many_arguments)]
pub fn normalized_information_experiment<D, A, P, E>(
    d: &D,
    a: &A,
    p: &P,
    model: &FrequencyModel,
    exec: &E,
    trajectories: usize,
    n: u64,
    seed: u64,
) -> Result<Vec<InformationSample>>
where
    D: Dynamics,
    A: Sweep<D>,
    P: Partition<D::State>,
    E: Executor,
{
    let runs = exec.map(trajectories, |i| -> Result<InformationSample> {
        let mut g = substream(seed, i as u64);
        let mut s = d.sample_reference(&mut g);
        let mut t = 0u64;
        while t < n {
            d.step(&mut s)?;
            t += 1;
            if a.contains(d, &s) {
                break;
            }
        }
        if !a.contains(d, &s) {
            return Ok(InformationSample { information: 0.0, visits: 0, floors: 0 });
        }
        let mut labels = Vec::new();
        let mut visits = 1u64;
        loop {
            let cell = p.cell(&s) as u32;
            match a.first_return(d, &mut s, n - t + 1) {
                Ok(r) if t + r <= n => {
                    labels.push(Label { cell, time: r });
                    t += r;
                    visits += 1;
                }
                Ok(_) | Err(Error::CapExceeded { .. }) => break,
                Err(e) => return Err(e),
            }
        }
        let (info, floors) = model.block_information(&labels);
        Ok(InformationSample { information: info - libm::log(a.measure()), visits, floors })
    });
    runs.into_iter().collect()
}

/// Highest bit of `ω` that the odometer changes during `n` steps.
fn highest_touched_bit(omega: &LazyBits, n: u64) -> usize {
    let low = omega.word(0);
    match low.checked_add(n) {
        Some(sum) => 63 - (low ^ sum).leading_zeros() as usize,
        None => 64 + omega.trailing_ones_from(64),
    }
}

/// Upper bound on `I(ξ_1^n(T))(x)` for `ξ = {Ω × {0}, rest}` on the HIK skew product
/// at a point of level zero.
///
/// The name over `1 … n` depends only on the coordinates the odometer changes,
/// so the cell contains the cylinder fixing bits `0 … M` and has mass at least
/// its `μ_p`-mass.
pub fn hik_information_bound(omega: &LazyBits, n: u64) -> f64 {
    let p = omega.law().p_one();
    let m = highest_touched_bit(omega, n);
    let mut terms = Vec::with_capacity(m + 1);
    for k in 0..=m {
        terms.push(-libm::log(if omega.bit(k) { p } else { 1.0 - p }));
    }
    pairwise_sum(&terms)
}
