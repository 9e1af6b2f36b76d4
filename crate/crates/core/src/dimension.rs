//! Hamming covers of name batches and entropy-dimension slopes.
//!
//! A name is a finite label sequence packed into 64-bit words, first label in
//! the most significant bit, so the natural order of packed words is the
//! lexicographic order of names. Covering numbers are estimated two ways:
//! greedily on a sampled batch, and from the exact mass of one Hamming ball
//! (`ln(1 − ε) − ln ν(B)`), which is available in closed form for the three
//! name sources used here.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec;
use alloc::vec::Vec;

use rand_core::RngCore;

use crate::error::{invalid, Error, Result};
use crate::exec::Executor;
use crate::limits::sample_brownian_range;
use crate::rng::{self, derive_seed, mix64, substream};
use crate::skewflow::{fiber_cell, CocycleTracker, DrivingSpec, FlowPoint, RhoTable, RoofSpec};
use crate::stats::linear_fit;
use crate::systems::bits::TwoSidedBits;
use crate::systems::controls::Rotation;

const LN2: f64 = core::f64::consts::LN_2;

/// Largest residual of the log-log fit tolerated before the smallest `n` is dropped.
pub const CURVATURE: f64 = 0.15;

/// Normalized mismatch count of two equal-length sequences.
pub fn hamming<T: PartialEq>(a: &[T], b: &[T]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Ok(0.0);
    }
    let d = a.iter().zip(b).filter(|(x, y)| x != y).count();
    Ok(d as f64 / a.len() as f64)
}

/// Largest mismatch count `c` with `c/n < ε`.
pub fn radius(n: usize, eps: f64) -> i64 {
    libm::ceil(eps * n as f64) as i64 - 1
}

fn pack(bits: &[bool]) -> Vec<u64> {
    let mut words = vec![0u64; bits.len().div_ceil(64)];
    for (k, &b) in bits.iter().enumerate() {
        if b {
            words[k / 64] |= 1u64 << (63 - k % 64);
        }
    }
    words
}

/// Mismatch count, or `None` once it exceeds `limit`.
fn distance_within(a: &[u64], b: &[u64], limit: i64) -> Option<u32> {
    let mut d = 0u32;
    for (x, y) in a.iter().zip(b) {
        d += (x ^ y).count_ones();
        if d as i64 > limit {
            return None;
        }
    }
    Some(d)
}

/// Distinct binary names of a common length with sample multiplicities.
#[derive(Clone, Debug, PartialEq)]
pub struct NameBatch {
    len: usize,
    names: Vec<Vec<u64>>,
    counts: Vec<u64>,
    total: u64,
}

impl NameBatch {
    pub fn new<I: IntoIterator<Item = Vec<bool>>>(len: usize, names: I) -> Result<Self> {
        Self::weighted(len, names.into_iter().map(|a| (a, 1)))
    }

    pub fn weighted<I: IntoIterator<Item = (Vec<bool>, u64)>>(len: usize, names: I) -> Result<Self> {
        let mut map: BTreeMap<Vec<u64>, u64> = BTreeMap::new();
        for (a, c) in names {
            if a.len() != len {
                return Err(Error::LengthMismatch(len, a.len()));
            }
            if c == 0 {
                return Err(invalid("multiplicities must be positive"));
            }
            *map.entry(pack(&a)).or_default() += c;
        }
        if map.is_empty() {
            return Err(Error::Empty);
        }
        let total = map.values().sum();
        let (names, counts) = map.into_iter().unzip();
        Ok(Self { len, names, counts, total })
    }

    /// Name length `n`.
    pub fn name_len(&self) -> usize {
        self.len
    }

    pub fn distinct(&self) -> usize {
        self.names.len()
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn count(&self, i: usize) -> u64 {
        self.counts[i]
    }

    pub fn name(&self, i: usize) -> Vec<bool> {
        (0..self.len).map(|k| (self.names[i][k / 64] >> (63 - k % 64)) & 1 == 1).collect()
    }

    /// Neighbour lists `(j, distance)` within `limit` mismatches, self included.
    fn neighbours(&self, limit: i64) -> Vec<Vec<(u32, u32)>> {
        let d = self.distinct();
        let mut adj: Vec<Vec<(u32, u32)>> = (0..d).map(|i| vec![(i as u32, 0)]).collect();
        for i in 0..d {
            for j in i + 1..d {
                if let Some(dist) = distance_within(&self.names[i], &self.names[j], limit) {
                    adj[i].push((j as u32, dist));
                    adj[j].push((i as u32, dist));
                }
            }
        }
        adj
    }
}

/// Centers chosen by a cover and the sample mass they cover.
#[derive(Clone, Debug, PartialEq)]
pub struct Cover {
    pub centers: Vec<usize>,
    pub covered: u64,
}

impl Cover {
    pub fn size(&self) -> usize {
        self.centers.len()
    }
}

fn greedy_from(batch: &NameBatch, adj: &[Vec<(u32, u32)>], limit: i64, eps: f64) -> Cover {
    let d = batch.distinct();
    let target = (1.0 - eps) * batch.total as f64;
    let mut gain: Vec<u64> = (0..d)
        .map(|i| adj[i].iter().filter(|&&(_, dist)| dist as i64 <= limit).map(|&(j, _)| batch.counts[j as usize]).sum())
        .collect();
    let mut covered_flag = vec![false; d];
    let mut covered = 0u64;
    let mut centers = Vec::new();
    while covered as f64 <= target {
        let mut best = 0;
        for i in 1..d {
            if gain[i] > gain[best] {
                best = i;
            }
        }
        centers.push(best);
        for &(u, du) in &adj[best] {
            let u = u as usize;
            if du as i64 > limit || covered_flag[u] {
                continue;
            }
            covered_flag[u] = true;
            covered += batch.counts[u];
            for &(v, dv) in &adj[u] {
                if dv as i64 <= limit {
                    gain[v as usize] -= batch.counts[u];
                }
            }
        }
    }
    Cover { centers, covered }
}

/// Greedy cover by `ε`-Hamming balls around batch names, largest uncovered
/// mass first, ties to the lexicographically smallest name, until the covered
/// sample mass exceeds `1 − ε`.
pub fn greedy_cover(batch: &NameBatch, eps: f64) -> Result<Cover> {
    check_eps(eps)?;
    let limit = radius(batch.len, eps);
    Ok(greedy_from(batch, &batch.neighbours(limit), limit, eps))
}

fn check_eps(eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(invalid("ε must lie in (0, 1)"));
    }
    Ok(())
}

/// Minimum number of centers from `candidates` whose `ε`-balls cover sample
/// mass above `1 − ε`, by subset enumeration. `None` if no subset does.
pub fn exact_cover(batch: &NameBatch, eps: f64, candidates: &[Vec<bool>]) -> Result<Option<usize>> {
    check_eps(eps)?;
    if candidates.len() > 24 || batch.distinct() > 64 {
        return Err(invalid("brute force is limited to 24 candidates and 64 names"));
    }
    let limit = radius(batch.len, eps);
    let mut balls = Vec::with_capacity(candidates.len());
    for c in candidates {
        if c.len() != batch.len {
            return Err(Error::LengthMismatch(batch.len, c.len()));
        }
        let p = pack(c);
        let mut mask = 0u64;
        for (j, name) in batch.names.iter().enumerate() {
            if distance_within(&p, name, limit).is_some() {
                mask |= 1 << j;
            }
        }
        balls.push(mask);
    }
    let target = (1.0 - eps) * batch.total as f64;
    let mass = |mask: u64| -> u64 { (0..batch.distinct()).filter(|j| mask >> j & 1 == 1).map(|j| batch.counts[j]).sum() };
    let mut best: Option<usize> = None;
    for subset in 1u32..(1u32 << candidates.len()) {
        let size = subset.count_ones() as usize;
        if best.is_some_and(|b| size >= b) {
            continue;
        }
        let mask = (0..candidates.len()).filter(|i| subset >> i & 1 == 1).fold(0u64, |m, i| m | balls[i]);
        if mass(mask) as f64 > target {
            best = Some(size);
        }
    }
    Ok(best)
}

/// Every binary word of length `n` (for brute-force oracles).
pub fn all_words(n: usize) -> Vec<Vec<bool>> {
    (0..1u64 << n).map(|w| (0..n).map(|k| w >> (n - 1 - k) & 1 == 1).collect()).collect()
}

/// Where a batch of names comes from.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum NameSource {
    /// Fair coin flips.
    Iid,
    /// `1[x + kα ∈ [0, ½)]` for the golden rotation, `x` uniform.
    Rotation,
    /// Scenery read along one fixed walk path, scenery resampled per name.
    Rwrs,
}

impl NameSource {
    pub fn label(&self) -> &'static str {
        match self {
            NameSource::Iid => "iid",
            NameSource::Rotation => "rotation",
            NameSource::Rwrs => "rwrs",
        }
    }

    pub fn names<E: Executor>(&self, n: usize, trajectories: usize, seed: u64, exec: &E) -> Result<NameBatch> {
        match self {
            NameSource::Iid => NameBatch::new(
                n,
                exec.map(trajectories, |i| {
                    let mut g = substream(seed, i as u64);
                    let mut words = Vec::new();
                    (0..n)
                        .map(|k| {
                            if k % 64 == 0 {
                                words.push(g.next_u64());
                            }
                            words[k / 64] >> (k % 64) & 1 == 1
                        })
                        .collect()
                }),
            ),
            NameSource::Rotation => {
                let r = Rotation::golden();
                NameBatch::new(
                    n,
                    exec.map(trajectories, |i| {
                        let mut x = rng::uniform(&mut substream(seed, i as u64));
                        (0..n)
                            .map(|_| {
                                let b = x < 0.5;
                                x = r.map(x);
                                b
                            })
                            .collect()
                    }),
                )
            }
            NameSource::Rwrs => rwrs_names(n, trajectories, seed, exec),
        }
    }

    /// `ln(1 − ε) − ln ν(B)` for the ball around a typical name, median over
    /// `centers` centers (iid balls do not depend on the center).
    pub fn log_volume<E: Executor>(&self, n: usize, eps: f64, centers: usize, seed: u64, exec: &E) -> Result<f64> {
        check_eps(eps)?;
        let r = radius(n, eps);
        let logs: Vec<f64> = match self {
            NameSource::Iid => vec![log_binomial_ball(n, r)],
            NameSource::Rotation => {
                let angle = Rotation::golden().angle;
                exec.map(centers, |i| libm::log(rotation_ball_mass(angle, n, rng::uniform(&mut substream(seed, i as u64)), r)))
            }
            NameSource::Rwrs => exec.map(centers, |i| {
                let path = walk_path(n, derive_seed(seed, i as u64));
                log_scenery_ball(&local_times(&path), r)
            }),
        };
        if logs.is_empty() {
            return Err(Error::Empty);
        }
        Ok(libm::log(1.0 - eps) - median(logs))
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let m = xs.len() / 2;
    if xs.len() % 2 == 1 {
        xs[m]
    } else {
        0.5 * (xs[m - 1] + xs[m])
    }
}

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + libm::log(xs.iter().map(|x| libm::exp(x - m)).sum::<f64>())
}

/// `ln P(Bin(n, ½) ≤ r)`.
pub fn log_binomial_ball(n: usize, r: i64) -> f64 {
    if r < 0 {
        return f64::NEG_INFINITY;
    }
    let nf = n as f64;
    let terms: Vec<f64> = (0..=(r as usize).min(n))
        .map(|k| libm::lgamma(nf + 1.0) - libm::lgamma(k as f64 + 1.0) - libm::lgamma(nf - k as f64 + 1.0) - nf * LN2)
        .collect();
    log_sum_exp(&terms)
}

/// Mass of the `x'` whose rotation names differ from the name of `x` in at most `r` places.
///
/// Each of the `2n` points `−kα`, `½ − kα` flips exactly label `k`, so the
/// mismatch count is piecewise constant and changes by one at each point.
pub fn rotation_ball_mass(angle: f64, n: usize, x: f64, r: i64) -> f64 {
    let frac = |v: f64| v - libm::floor(v);
    // A point sitting exactly on `x` is crossed last: labels are constant on half-open cells.
    let ahead = |p: f64| {
        let u = frac(p - x);
        if u == 0.0 {
            1.0
        } else {
            u
        }
    };
    let mut pts: Vec<(f64, usize)> = Vec::with_capacity(2 * n);
    for k in 0..n {
        let base = -(k as f64) * angle;
        pts.push((ahead(frac(base)), k));
        pts.push((ahead(frac(base + 0.5)), k));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut flipped = vec![false; n];
    let (mut d, mut prev, mut mass) = (0i64, 0.0f64, 0.0f64);
    for &(u, k) in &pts {
        if d <= r {
            mass += u - prev;
        }
        flipped[k] = !flipped[k];
        d += if flipped[k] { 1 } else { -1 };
        prev = u;
    }
    if d <= r {
        mass += 1.0 - prev;
    }
    mass
}

/// Positions `0 = S_0, S_1, …, S_{n−1}` of a fair ±1 walk.
pub fn walk_path(n: usize, seed: u64) -> Vec<i64> {
    let mut g = substream(seed, 0);
    let mut pos = 0i64;
    let mut word = 0u64;
    (0..n)
        .map(|k| {
            let here = pos;
            if k % 64 == 0 {
                word = g.next_u64();
            }
            pos += if word >> (k % 64) & 1 == 1 { 1 } else { -1 };
            here
        })
        .collect()
}

/// Visit counts per site along a path.
pub fn local_times(path: &[i64]) -> Vec<u64> {
    let mut m: BTreeMap<i64, u64> = BTreeMap::new();
    for &x in path {
        *m.entry(x).or_default() += 1;
    }
    m.into_values().collect()
}

/// `ln P(Σ_x ℓ_x B_x ≤ r)` with `B_x` fair bits.
pub fn log_scenery_ball(local: &[u64], r: i64) -> f64 {
    if r < 0 {
        return f64::NEG_INFINITY;
    }
    let r = r as usize;
    let mut dp = vec![0.0f64; r + 1];
    dp[0] = 1.0;
    let mut log_scale = 0.0f64;
    for &l in local {
        let l = l as usize;
        for s in (0..=r).rev() {
            let hit = if s >= l { dp[s - l] } else { 0.0 };
            dp[s] = 0.5 * (dp[s] + hit);
        }
        let top = dp.iter().copied().fold(0.0, f64::max);
        if top < 1e-200 {
            for v in &mut dp {
                *v /= top;
            }
            log_scale += libm::log(top);
        }
    }
    log_scale + libm::log(dp.iter().sum::<f64>())
}

/// Scenery names along one walk path: `a_k = scenery(S_k)` for `k < n`. The
/// path is fixed by `seed`; each trajectory draws a fresh fair scenery.
pub fn rwrs_names<E: Executor>(n: usize, trajectories: usize, seed: u64, exec: &E) -> Result<NameBatch> {
    let path = walk_path(n, derive_seed(seed, 0x5041_5448));
    let names = exec.map(trajectories, |i| {
        let scenery = TwoSidedBits::new(mix64(seed, i as u64));
        path.iter().map(|&x| scenery.bit(x)).collect::<Vec<bool>>()
    });
    NameBatch::new(n, names)
}

/// Number of sites the scenery names of [`rwrs_names`] depend on.
pub fn rwrs_range(n: usize, seed: u64) -> usize {
    local_times(&walk_path(n, derive_seed(seed, 0x5041_5448))).len()
}

/// Covering estimates at one `(n, ε)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoverPoint {
    pub n: usize,
    pub eps: f64,
    pub greedy: usize,
    pub distinct: usize,
    /// `ln K̃` from the exact ball mass.
    pub log_volume: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Estimator {
    Greedy,
    Volume,
}

/// Least-squares slope of `ln ln K` against `ln n` at one `ε`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeFit {
    pub eps: f64,
    pub slope: f64,
    pub intercept: f64,
    pub used: Vec<usize>,
    pub residuals: Vec<f64>,
    /// Every `K` was below 2; reported as dimension 0.
    pub degenerate: bool,
    /// The smallest `n` was dropped after the curvature check.
    pub trimmed: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverReport {
    pub points: Vec<CoverPoint>,
}

impl CoverReport {
    pub fn eps_grid(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.points.iter().map(|p| p.eps).collect();
        e.sort_by(f64::total_cmp);
        e.dedup();
        e
    }
}

fn fit_points(eps: f64, pts: &[(usize, f64)]) -> Result<SlopeFit> {
    let usable: Vec<(usize, f64)> = pts.iter().copied().filter(|&(_, lk)| lk >= LN2).collect();
    if usable.is_empty() {
        return Ok(SlopeFit { eps, slope: 0.0, intercept: 0.0, used: vec![], residuals: vec![], degenerate: true, trimmed: false });
    }
    if usable.len() < 3 {
        return Err(Error::TooFewPoints(usable.len()));
    }
    let fit = |u: &[(usize, f64)]| {
        let xs: Vec<f64> = u.iter().map(|&(n, _)| libm::log(n as f64)).collect();
        let ys: Vec<f64> = u.iter().map(|&(_, lk)| libm::log(lk)).collect();
        linear_fit(&xs, &ys)
    };
    let mut f = fit(&usable)?;
    let mut used = usable;
    let mut trimmed = false;
    let worst = f.residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    if used.len() >= 4 && worst > CURVATURE {
        used.remove(0);
        f = fit(&used)?;
        trimmed = true;
    }
    Ok(SlopeFit {
        eps,
        slope: f.slope,
        intercept: f.intercept,
        used: used.iter().map(|&(n, _)| n).collect(),
        residuals: f.residuals,
        degenerate: false,
        trimmed,
    })
}

/// Per-`ε` slope of `ln ln K` against `ln n`; points with `K < 2` are dropped.
pub fn dimension_slope(report: &CoverReport, estimator: Estimator) -> Result<Vec<SlopeFit>> {
    report
        .eps_grid()
        .into_iter()
        .map(|eps| {
            let mut pts: Vec<(usize, f64)> = report
                .points
                .iter()
                .filter(|p| p.eps == eps)
                .map(|p| {
                    let lk = match estimator {
                        Estimator::Greedy => libm::log(p.greedy as f64),
                        Estimator::Volume => p.log_volume,
                    };
                    (p.n, lk)
                })
                .collect();
            pts.sort_by_key(|p| p.0);
            fit_points(eps, &pts)
        })
        .collect()
}

/// Parameters of a covering experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionSpec {
    pub source: NameSource,
    pub n_grid: Vec<usize>,
    pub eps_grid: Vec<f64>,
    pub trajectories: usize,
    /// Centers for the ball-mass median.
    pub centers: usize,
}

/// Covering numbers over an `(n, ε)` grid with both estimators' slopes.
#[derive(Clone, Debug, PartialEq)]
pub struct DimensionOutcome {
    pub report: CoverReport,
    pub greedy: Vec<SlopeFit>,
    pub volume: Vec<SlopeFit>,
}

impl DimensionOutcome {
    /// Volume slope at the smallest `ε`.
    pub fn headline(&self) -> f64 {
        self.volume.first().map_or(0.0, |f| f.slope)
    }

    /// Greedy slope at the smallest `ε`, if enough points were usable.
    pub fn greedy_headline(&self) -> Option<f64> {
        self.greedy.first().map(|f| f.slope)
    }
}

pub fn relative_dimension_experiment<E: Executor>(spec: &DimensionSpec, seed: u64, exec: &E) -> Result<DimensionOutcome> {
    let mut eps_grid = spec.eps_grid.clone();
    eps_grid.sort_by(f64::total_cmp);
    eps_grid.dedup();
    for &e in &eps_grid {
        check_eps(e)?;
    }
    let eps_max = *eps_grid.last().ok_or(Error::Empty)?;
    let mut points = Vec::new();
    for &n in &spec.n_grid {
        let batch_seed = derive_seed(seed, n as u64);
        let batch = spec.source.names(n, spec.trajectories, batch_seed, exec)?;
        let adj = batch.neighbours(radius(n, eps_max));
        // A cover at a smaller ε is also a cover at a larger one.
        let mut best = usize::MAX;
        for &eps in &eps_grid {
            best = best.min(greedy_from(&batch, &adj, radius(n, eps), eps).size());
            let log_volume = spec.source.log_volume(n, eps, spec.centers, derive_seed(batch_seed, 1), exec)?;
            points.push(CoverPoint { n, eps, greedy: best, distinct: batch.distinct(), log_volume });
        }
    }
    let report = CoverReport { points };
    let greedy = match dimension_slope(&report, Estimator::Greedy) {
        Ok(g) => g,
        Err(Error::TooFewPoints(_)) => Vec::new(),
        Err(e) => return Err(e),
    };
    let volume = dimension_slope(&report, Estimator::Volume)?;
    Ok(DimensionOutcome { report, greedy, volume })
}

/// Distinct sampled cells in an information bin against the predicted count.
#[derive(Clone, Debug, PartialEq)]
pub struct XiCount {
    pub count: usize,
    pub distinct: usize,
    pub log_reference: f64,
    /// `L_n` and `R_n` of the fixed base path.
    pub left: i64,
    pub right: i64,
}

impl XiCount {
    /// `|ln count − ln reference|/√n`; infinite when nothing was counted.
    pub fn gap(&self, n: usize) -> f64 {
        if self.count == 0 {
            return f64::INFINITY;
        }
        (libm::log(self.count as f64) - self.log_reference).abs() / libm::sqrt(n as f64)
    }
}

/// Counts distinct scenery cells of `ξ_0^{n−1}` (base path fixed, iid ±1
/// driving) whose information over `√n` lies in `h·J`, `h = log 2`, and
/// compares with `E(1_J(𝓡) e^{h𝓡√n})` for the Brownian range `𝓡`.
pub fn xi_count_experiment<E: Executor>(
    roof: &RoofSpec,
    n: usize,
    j: (f64, f64),
    trajectories: usize,
    reference_count: usize,
    seed: u64,
    exec: &E,
) -> Result<XiCount> {
    if !(j.0 <= j.1) {
        return Err(invalid("J must be an interval"));
    }
    let root = sqrt_n(n);
    let base = DrivingSpec::Iid.sample_base(&mut substream(derive_seed(seed, 0x4241_5345), 0));
    let t = CocycleTracker::run(&DrivingSpec::Iid, &base, n as u64);
    let cells = exec.map(trajectories, |i| {
        let fiber = FlowPoint::sample(roof, &mut substream(seed, i as u64));
        let table = RhoTable::covering(roof, &fiber.y, t.left as f64 + 1.0, t.right as f64 + roof.alpha1 + 1.0);
        let c = fiber_cell(&table, &fiber, t.left, t.right);
        let info = c.block_len() as f64 * LN2 - libm::log(c.eta_len());
        let key = (c.j_lo, c.j_hi, pack(&c.symbols), libm::round(c.eta.0 * 1e9) as i64, libm::round(c.eta.1 * 1e9) as i64);
        (key, info / root)
    });
    let mut distinct = BTreeSet::new();
    let mut in_bin = BTreeSet::new();
    for (key, x) in cells {
        if x >= LN2 * j.0 && x <= LN2 * j.1 {
            in_bin.insert(key.clone());
        }
        distinct.insert(key);
    }
    let ranges = sample_brownian_range(derive_seed(seed, 0x5241_4e47), reference_count, 10_000, exec)?;
    let terms: Vec<f64> = ranges.iter().filter(|&&r| r >= j.0 && r <= j.1).map(|&r| LN2 * r * root).collect();
    if terms.is_empty() {
        return Err(invalid("no reference sample falls in J"));
    }
    let log_reference = log_sum_exp(&terms) - libm::log(ranges.len() as f64);
    Ok(XiCount { count: in_bin.len(), distinct: distinct.len(), log_reference, left: t.left, right: t.right })
}

fn sqrt_n(n: usize) -> f64 {
    libm::sqrt(n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Sequential;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest};

    fn words(v: &[&str]) -> Vec<Vec<bool>> {
        v.iter().map(|s| s.chars().map(|c| c == '1').collect()).collect()
    }

    #[test]
    fn hamming_examples() {
        assert_eq!(hamming(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap(), 0.0);
        assert_eq!(hamming(&[true, false, true], &[false, true, false]).unwrap(), 1.0);
        assert_eq!(hamming(&[0, 1, 1, 0], &[0, 1, 0, 0]).unwrap(), 0.25);
        assert_eq!(hamming(&[0, 1], &[0]), Err(Error::LengthMismatch(2, 1)));
    }

    #[test]
    fn packing_round_trips_and_orders_lexicographically() {
        let ws = words(&["0110", "1000", "0001", "0111"]);
        let b = NameBatch::new(4, ws.clone()).unwrap();
        let got: Vec<Vec<bool>> = (0..b.distinct()).map(|i| b.name(i)).collect();
        let mut want = ws;
        want.sort();
        assert_eq!(got, want);
        let long: Vec<bool> = (0..130).map(|k| k % 3 == 0).collect();
        assert_eq!(NameBatch::new(130, [long.clone()]).unwrap().name(0), long);
    }

    #[test]
    fn batch_rejects_ragged_names() {
        assert!(NameBatch::new(3, words(&["010", "01"])).is_err());
        assert!(NameBatch::weighted(2, [(vec![true, false], 0)]).is_err());
        assert_eq!(NameBatch::new(2, Vec::<Vec<bool>>::new()), Err(Error::Empty));
    }

    #[test]
    fn greedy_examples() {
        let one = NameBatch::new(6, vec![words(&["010011"])[0].clone(); 5]).unwrap();
        assert_eq!(greedy_cover(&one, 0.1).unwrap().size(), 1);
        let two = NameBatch::new(8, words(&["00000000", "11110000"])).unwrap();
        assert_eq!(greedy_cover(&two, 0.2).unwrap().size(), 2);
        assert!(greedy_cover(&two, 1.0).is_err());
    }

    #[test]
    fn greedy_prefers_mass_then_lexicographic_order() {
        let b = NameBatch::weighted(4, [(vec![true; 4], 1), (vec![false, false, false, true], 3), (vec![false; 4], 3)]).unwrap();
        let c = greedy_cover(&b, 0.3).unwrap();
        assert_eq!(b.name(c.centers[0]), vec![false; 4]);
        assert_eq!(c.size(), 1);
        assert_eq!(c.covered, 6);
    }

    #[test]
    fn exact_cover_by_hand() {
        // Radius one and all four names needed; the first two are both within one of 0…0.
        let b = NameBatch::new(10, words(&["1000000000", "0100000000", "1111111111", "0111111111"])).unwrap();
        let own: Vec<Vec<bool>> = (0..4).map(|i| b.name(i)).collect();
        let mut more = own.clone();
        more.push(vec![false; 10]);
        assert_eq!(exact_cover(&b, 0.15, &more).unwrap(), Some(2));
        assert_eq!(exact_cover(&b, 0.15, &own).unwrap(), Some(3));
        assert_eq!(greedy_cover(&b, 0.15).unwrap().size(), 3);
        assert_eq!(exact_cover(&b, 0.15, &own[..1]).unwrap(), None);
    }

    #[test]
    fn greedy_dominates_brute_force_on_tiny_batches() {
        for seed in 0..200u64 {
            let mut g = substream(seed, 0);
            let n = 3 + (g.next_u64() % 4) as usize;
            let m = 2 + (g.next_u64() % 10) as usize;
            let names: Vec<(Vec<bool>, u64)> = (0..m).map(|_| ((0..n).map(|_| g.next_u64() & 1 == 1).collect(), 1 + g.next_u64() % 4)).collect();
            let b = NameBatch::weighted(n, names).unwrap();
            let eps = [0.2, 0.3, 0.45][(seed % 3) as usize];
            let greedy = greedy_cover(&b, eps).unwrap().size();
            let own: Vec<Vec<bool>> = (0..b.distinct()).map(|i| b.name(i)).collect();
            let exact_own = exact_cover(&b, eps, &own).unwrap().unwrap();
            let exact_all = if n <= 4 { exact_cover(&b, eps, &all_words(n)).unwrap().unwrap() } else { exact_own };
            assert!(exact_all <= exact_own && exact_own <= greedy, "seed {seed}: {exact_all} {exact_own} {greedy}");
        }
    }

    #[test]
    fn binomial_ball_matches_enumeration() {
        for n in 1..=12usize {
            for &eps in &[0.1, 0.25, 0.4, 0.5] {
                let r = radius(n, eps);
                let count = (0u64..1 << n).filter(|w| (w.count_ones() as f64) < eps * n as f64).count();
                let want = count as f64 / (1u64 << n) as f64;
                let got = libm::exp(log_binomial_ball(n, r));
                assert!((got - want).abs() < 1e-12, "n {n} eps {eps}: {got} vs {want}");
            }
        }
    }

    fn rotation_name(angle: f64, n: usize, x: f64) -> Vec<bool> {
        let r = Rotation { angle };
        let mut x = x;
        (0..n)
            .map(|_| {
                let b = x < 0.5;
                x = r.map(x);
                b
            })
            .collect()
    }

    #[test]
    fn rotation_ball_matches_grid_scan() {
        let angle = Rotation::golden().angle;
        let grid = 200_000;
        for &(n, x, eps) in &[(8usize, 0.13, 0.3), (20, 0.71, 0.2), (33, 0.5, 0.1)] {
            let center = rotation_name(angle, n, x);
            let hits = (0..grid)
                .filter(|i| {
                    let u = (*i as f64 + 0.5) / grid as f64;
                    hamming(&center, &rotation_name(angle, n, u)).unwrap() < eps
                })
                .count();
            let want = hits as f64 / grid as f64;
            let got = rotation_ball_mass(angle, n, x, radius(n, eps));
            assert!((got - want).abs() < 2.0 * n as f64 / grid as f64, "n {n}: {got} vs {want}");
        }
    }

    #[test]
    fn scenery_ball_matches_enumeration() {
        for seed in 0..20u64 {
            let path = walk_path(12, seed);
            let local = local_times(&path);
            let sites = local.len();
            for r in 0..8i64 {
                let hits = (0u64..1 << sites)
                    .filter(|m| (0..sites).filter(|x| m >> x & 1 == 1).map(|x| local[x]).sum::<u64>() as i64 <= r)
                    .count();
                let want = hits as f64 / (1u64 << sites) as f64;
                let got = libm::exp(log_scenery_ball(&local, r));
                assert!((got - want).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn scenery_ball_survives_underflow() {
        let local = vec![1u64; 3000];
        let got = log_scenery_ball(&local, 0);
        assert!((got + 3000.0 * LN2).abs() < 1e-6, "{got}");
    }

    #[test]
    fn rwrs_examples() {
        let b = rwrs_names(1, 2000, 3, &Sequential).unwrap();
        assert_eq!(b.distinct(), 2);
        let heads = b.count(0) as f64 / b.total() as f64;
        assert!((heads - 0.5).abs() < 0.05);
        for seed in 0..5 {
            let n = 16;
            let b = rwrs_names(n, 20_000, seed, &Sequential).unwrap();
            let range = rwrs_range(n, seed);
            assert!(b.distinct() <= 1 << range);
            let ratio = libm::log(b.distinct() as f64) / (range as f64 * LN2);
            assert!(ratio > 0.97, "seed {seed}: {ratio}");
        }
    }

    #[test]
    fn rwrs_walk_is_shared_across_the_batch() {
        let b = rwrs_names(40, 300, 9, &Sequential).unwrap();
        let path = walk_path(40, derive_seed(9, 0x5041_5448));
        for i in 0..b.distinct() {
            let a = b.name(i);
            for k in 0..40 {
                for l in 0..40 {
                    if path[k] == path[l] {
                        assert_eq!(a[k], a[l]);
                    }
                }
            }
        }
    }

    fn synthetic(ks: &[(usize, f64)], eps: f64) -> CoverReport {
        CoverReport {
            points: ks.iter().map(|&(n, lk)| CoverPoint { n, eps, greedy: libm::exp(lk).round() as usize, distinct: 0, log_volume: lk }).collect(),
        }
    }

    #[test]
    fn slope_recovers_power_growth() {
        let pts: Vec<(usize, f64)> = [64usize, 128, 256, 512, 1024].iter().map(|&n| (n, 3.0 * libm::pow(n as f64, 0.5))).collect();
        let fits = dimension_slope(&synthetic(&pts, 0.1), Estimator::Volume).unwrap();
        assert!((fits[0].slope - 0.5).abs() < 1e-9);
        assert!(!fits[0].trimmed && !fits[0].degenerate);
    }

    #[test]
    fn slope_of_constant_names_is_zero() {
        let mut points = Vec::new();
        for &n in &[8usize, 16, 32, 64] {
            let b = NameBatch::new(n, vec![vec![true; n]; 10]).unwrap();
            let k = greedy_cover(&b, 0.1).unwrap().size();
            points.push(CoverPoint { n, eps: 0.1, greedy: k, distinct: 1, log_volume: 0.0 });
        }
        let fits = dimension_slope(&CoverReport { points }, Estimator::Greedy).unwrap();
        assert!(fits[0].degenerate);
        assert_eq!(fits[0].slope, 0.0);
    }

    #[test]
    fn slope_needs_three_points() {
        let pts = [(64usize, 0.1), (128, 5.0), (256, 9.0)];
        assert_eq!(dimension_slope(&synthetic(&pts, 0.1), Estimator::Volume), Err(Error::TooFewPoints(2)));
    }

    #[test]
    fn slope_drops_a_curved_head() {
        let mut pts: Vec<(usize, f64)> = [128usize, 256, 512, 1024, 2048].iter().map(|&n| (n, libm::pow(n as f64, 0.5))).collect();
        pts.insert(0, (64, 400.0));
        let fits = dimension_slope(&synthetic(&pts, 0.1), Estimator::Volume).unwrap();
        assert!(fits[0].trimmed);
        assert!((fits[0].slope - 0.5).abs() < 1e-9);
    }

    #[test]
    fn control_slopes_are_ordered() {
        let run = |source| {
            let spec = DimensionSpec { source, n_grid: vec![64, 128, 256, 512, 1024, 2048, 4096], eps_grid: vec![0.05], trajectories: 200, centers: 101 };
            relative_dimension_experiment(&spec, 17, &Sequential).unwrap().headline()
        };
        let (iid, rwrs, rot) = (run(NameSource::Iid), run(NameSource::Rwrs), run(NameSource::Rotation));
        assert!(iid > 0.8, "iid {iid}");
        assert!((0.35..=0.65).contains(&rwrs), "rwrs {rwrs}");
        assert!(rot < 0.2, "rotation {rot}");
        assert!(rot < rwrs && rwrs < iid);
    }

    #[test]
    fn xi_count_edge_bins() {
        let roof = RoofSpec::default();
        let all = xi_count_experiment(&roof, 100, (0.0, 1e6), 500, 2000, 5, &Sequential).unwrap();
        assert_eq!(all.count, all.distinct);
        let none = xi_count_experiment(&roof, 100, (-2.0, -1.0), 500, 2000, 5, &Sequential);
        assert!(none.is_err());
        // Every cell carries at least (L + R + 1) log 2 − log √2 of information.
        let floor = (all.left + all.right) as f64 / 10.0;
        let below = xi_count_experiment(&roof, 100, (0.0, floor), 500, 2000, 5, &Sequential).unwrap();
        assert_eq!(below.count, 0);
        assert!(below.distinct > 0);
    }

    #[test]
    fn xi_count_stays_below_reference() {
        let roof = RoofSpec::default();
        let c = xi_count_experiment(&roof, 400, (1.0, 2.0), 2000, 5000, 8, &Sequential).unwrap();
        assert!(c.count <= 2000);
        assert!(libm::log(c.count.max(1) as f64) <= c.log_reference);
    }

    proptest! {
        #[test]
        fn greedy_is_monotone_in_eps(seed in any::<u64>(), n in 4usize..40, m in 1usize..60) {
            let mut g = substream(seed, 0);
            let base: Vec<bool> = (0..n).map(|_| g.next_u64() & 1 == 1).collect();
            let names: Vec<Vec<bool>> = (0..m).map(|_| base.iter().map(|&b| b ^ (g.next_u64() % 5 == 0)).collect()).collect();
            let b = NameBatch::new(n, names).unwrap();
            let mut prev = usize::MAX;
            for &eps in &[0.05, 0.1, 0.2, 0.3, 0.5, 0.8] {
                let k = greedy_cover(&b, eps).unwrap().size();
                prop_assert!(k >= 1 && k <= b.distinct());
                prop_assert!(k <= prev);
                prev = k;
            }
        }

        #[test]
        fn hamming_is_a_metric(seed in any::<u64>(), n in 1usize..50) {
            let mut g = substream(seed, 1);
            let mut w = || (0..n).map(|_| g.next_u64() & 1 == 1).collect::<Vec<bool>>();
            let (a, b, c) = (w(), w(), w());
            let (ab, bc, ac) = (hamming(&a, &b).unwrap(), hamming(&b, &c).unwrap(), hamming(&a, &c).unwrap());
            prop_assert_eq!(ab, hamming(&b, &a).unwrap());
            prop_assert!(ac <= ab + bc + 1e-12);
            let (pa, pb) = (pack(&a), pack(&b));
            prop_assert_eq!(distance_within(&pa, &pb, n as i64).unwrap() as f64 / n as f64, ab);
        }
    }
}
