//! One driver per catalog entry. Drivers only compute; thresholds are applied
//! by the envelope.

use std::f64::consts::{LN_2, PI};

use ergodic_core::dimension::{relative_dimension_experiment, xi_count_experiment, DimensionSpec, NameSource};
use ergodic_core::induction::{
    empirical_return_distribution, kac_identity_check, llb_series_criterion, predictability_entropy, Arc, Cylinder, Interval,
    LlbVerdict, ReturnSequenceForm, SiteSet, Sweep, DEFAULT_CAP,
};
use ergodic_core::information::{
    hik_information_bound, krengel_entropy, krengel_formula_check, normalized_information_experiment, IntervalCells, SiteCells,
};
use ergodic_core::limits::{
    boole_information_experiment, darling_kac_boole, darling_kac_walk_shape, sample_brownian_range, sample_mittag_leffler, LimitLaw,
};
use ergodic_core::rng::{derive_seed, substream, uniform};
use ergodic_core::skewflow::{
    finite_entropy_check, interval_union_identity, neptune_experiment, xi_join_direct, xi_join_formula, DrivingSpec, FlowPoint, RoofSpec,
    StepCocycle,
};
use ergodic_core::stats::{exp_cdf, ks_null_quantile, ks_two_sample, linear_fit, pairwise_sum, EmpiricalDistribution};
use ergodic_core::systems::hik::{dyadic_visit_bound, invariance_check, rn_check, visits_by_power};
use ergodic_core::systems::rankone::{return_histogram, tower_build, validate_growth};
use ergodic_core::systems::{BernoulliShift, Boole, Hik, RenewalLaw, Rotation, Srw1, TowerSpec};
use ergodic_core::{Error, Executor};
use rand_core::RngCore;
use rand_distr::{Distribution, StandardNormal};

use crate::config::Run;
use crate::envelope::{Outcome, Table};
use crate::error::LabResult;
use crate::exec::Parallel;

fn mean(xs: &[f64]) -> f64 {
    pairwise_sum(xs) / xs.len() as f64
}

/// About `count` log-spaced integers in `[lo, hi]`, deduplicated.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<u64> {
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<u64> = (0..count)
        .map(|i| {
            let t = if count == 1 { 0.0 } else { i as f64 / (count - 1) as f64 };
            (a + t * (b - a)).exp().round() as u64
        })
        .collect();
    out.dedup();
    out
}

fn roof(run: &Run) -> LabResult<RoofSpec> {
    let a0 = run.param("alpha0");
    Ok(RoofSpec::new(a0, 2.0 - a0)?)
}

fn drivings() -> [(&'static str, DrivingSpec); 2] {
    [("iid", DrivingSpec::Iid), ("rotation", DrivingSpec::Rotation(StepCocycle::half_circles()))]
}

/// `|a/b − 1|`.
fn relative(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

/// Brute-force check that the segments between consecutive partial sums cover
/// `[min, max]`: every gap between adjacent distinct endpoints must contain a
/// covered midpoint.
pub fn segments_cover_hull(a: &[f64]) -> bool {
    let mut partial = vec![0.0];
    for &x in a {
        partial.push(partial.last().unwrap() + x);
    }
    let mut points = partial.clone();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points.windows(2).all(|w| {
        let mid = 0.5 * (w[0] + w[1]);
        partial.windows(2).any(|s| s[0].min(s[1]) <= mid && mid <= s[0].max(s[1]))
    })
}

pub fn interval_union(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let max_len = run.param("max_len") as usize;
    let rows = exec.map(run.trajectories(), |i| {
        let mut g = substream(run.seed, i as u64);
        let len = 1 + (uniform(&mut g) * max_len as f64) as usize;
        let integer = i % 2 == 1;
        let a: Vec<f64> =
            (0..len).map(|_| if integer { (g.next_u64() % 11) as f64 - 5.0 } else { 2.0 * uniform(&mut g) - 1.0 }).collect();
        (len.min(max_len), interval_union_identity(&a), segments_cover_hull(&a))
    });
    let mut by_len = vec![(0u64, 0u64); max_len + 1];
    let (mut failures, mut disagree) = (0u64, 0u64);
    for &(len, holds, oracle) in &rows {
        by_len[len].0 += 1;
        if !holds {
            by_len[len].1 += 1;
            failures += 1;
        }
        disagree += (holds != oracle) as u64;
    }
    let mut out = Outcome::default();
    out.metric("sequences", rows.len() as f64);
    out.metric("failures", failures as f64);
    out.metric("oracle_disagreements", disagree as f64);
    let mut t = Table::new("by_length", &["length", "sequences", "failures"]);
    for (len, (count, fail)) in by_len.iter().enumerate().skip(1) {
        t.push([len as u64, *count, *fail]);
    }
    out.tables.push(t);
    Ok(out)
}

pub fn name_formula(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let roof = roof(run)?;
    let max_n = run.n();
    let mut out = Outcome::default();
    let mut t = Table::new("points", &["driving", "index", "n", "nu_minus", "nu_plus", "agrees"]);
    for (k, (label, driving)) in drivings().into_iter().enumerate() {
        if !run.wants(label) {
            continue;
        }
        let seed = derive_seed(run.seed, k as u64);
        let rows = exec.map(run.trajectories(), |i| {
            let mut g = substream(seed, i as u64);
            let n = 1 + (uniform(&mut g) * max_n as f64) as usize;
            let n = n.min(max_n as usize);
            let base = driving.sample_base(&mut g);
            let fiber = FlowPoint::sample(&roof, &mut g);
            let direct = xi_join_direct(&roof, &driving, n, &base, &fiber);
            let formula = xi_join_formula(&roof, &driving, n, &base, &fiber);
            (n, direct.nu_minus(), direct.nu_plus(), direct.agrees(&formula))
        });
        let mismatches = rows.iter().filter(|r| !r.3).count();
        out.metric(format!("{label}_mismatches"), mismatches as f64);
        for (i, (n, lo, hi, ok)) in rows.into_iter().enumerate() {
            t.push([label.to_string(), i.to_string(), n.to_string(), lo.to_string(), hi.to_string(), ok.to_string()]);
        }
    }
    out.tables.push(t);
    Ok(out)
}

pub fn krengel_formula(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let n = run.n() as usize;
    let horizon = run.param("horizon") as u64;
    let mut out = Outcome::default();
    let mut t = Table::new("orbits", &["model", "index", "matched", "compared", "complete"]);
    let mut record = |label: &str, rows: Vec<(bool, u64, bool)>, out: &mut Outcome| {
        out.metric(format!("{label}_mismatches"), rows.iter().filter(|r| !r.0).count() as f64);
        out.metric(format!("{label}_compared_mean"), mean(&rows.iter().map(|r| r.1 as f64).collect::<Vec<_>>()));
        out.metric(format!("{label}_complete_fraction"), rows.iter().filter(|r| r.2).count() as f64 / rows.len() as f64);
        for (i, r) in rows.into_iter().enumerate() {
            t.push([label.to_string(), i.to_string(), r.0.to_string(), r.1.to_string(), r.2.to_string()]);
        }
    };
    if run.wants("srw1") {
        let a = SiteSet::new(vec![0])?;
        let xi = SiteCells(a.clone());
        let seed = derive_seed(run.seed, 1);
        let rows = exec.map(run.trajectories(), |i| {
            let x = a.sample(&Srw1, &mut substream(seed, i as u64));
            krengel_formula_check(&Srw1, &a, &xi, &x, n, horizon).map(|c| (c.matched, c.compared, c.total.is_some()))
        });
        record("srw1", rows.into_iter().collect::<Result<_, _>>()?, &mut out);
    }
    if run.wants("boole") {
        let a = Interval::symmetric(1.0)?;
        let xi = IntervalCells::halves(1.0)?;
        let seed = derive_seed(run.seed, 2);
        let rows = exec.map(run.trajectories(), |i| {
            let x = a.sample(&Boole, &mut substream(seed, i as u64));
            krengel_formula_check(&Boole, &a, &xi, &x, n, horizon).map(|c| (c.matched, c.compared, c.total.is_some()))
        });
        record("boole", rows.into_iter().collect::<Result<_, _>>()?, &mut out);
    }
    out.tables.push(t);
    Ok(out)
}

pub fn kac(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let samples = run.trajectories();
    let cap = run.param("cap") as u64;
    let mut out = Outcome::default();
    let mut t = Table::new("sides", &["case", "left", "left_se", "right", "right_se", "relative_error", "censored"]);
    let mut checks = Vec::new();
    if run.wants("srw1") {
        let a = SiteSet::new(vec![0, 1])?;
        let b = SiteSet::new(vec![0])?;
        let c = kac_identity_check(&Srw1, &a, &b, |s| (s.pos == 1) as u8 as f64, exec, samples, cap, derive_seed(run.seed, 1))?;
        checks.push(("srw1", c));
    }
    if run.wants("shift") {
        let shift = BernoulliShift::fair();
        let a = Cylinder::new(&shift, vec![]);
        let b = Cylinder::new(&shift, vec![false]);
        let c = kac_identity_check(&shift, &a, &b, |s| s.symbol(0) as u8 as f64, exec, samples, cap, derive_seed(run.seed, 2))?;
        checks.push(("shift", c));
    }
    for (label, c) in checks {
        out.metric(format!("{label}_relative_error"), c.relative_error);
        out.metric(format!("{label}_censored"), c.censored as f64);
        t.push([
            label.to_string(),
            c.left.value.to_string(),
            c.left.se.to_string(),
            c.right.value.to_string(),
            c.right.se.to_string(),
            c.relative_error.to_string(),
            c.censored.to_string(),
        ]);
    }
    out.tables.push(t);
    Ok(out)
}

fn log4(x: f64) -> f64 {
    x.ln() / 4f64.ln()
}

pub fn renewal_analytics(run: &Run, _: &Parallel) -> LabResult<Outcome> {
    let law = RenewalLaw::four_tower();
    let mut out = Outcome::default();
    out.metric("entropy", law.entropy());
    out.metric("entropy_error", (law.entropy() - 2.0 * LN_2).abs());

    let (k_min, k_max) = (run.param("k_min"), run.param("k_max"));
    let mut ks = log_grid(k_min, k_max, 400);
    // Both sides of every jump of the tail inside the window.
    let mut i = 0;
    while let Some(v) = law.value(i) {
        if (v as f64) > k_max {
            break;
        }
        for k in [v.saturating_sub(1), v] {
            if (k as f64) >= k_min {
                ks.push(k);
            }
        }
        i += 1;
    }
    ks.sort_unstable();
    ks.dedup();
    let tail: Vec<f64> = ks.iter().map(|&k| law.tail(k) * log4(k as f64).sqrt()).collect();
    out.metric("tail_band_min", tail.iter().copied().fold(f64::INFINITY, f64::min));
    out.metric("tail_band_max", tail.iter().copied().fold(f64::NEG_INFINITY, f64::max));

    // Exact route: a_n = n / L(n) from the sparse occupation sum.
    let exact_grid = log_grid(1e3, k_max.max(1e3), 200);
    let exact: Vec<f64> = exact_grid.iter().map(|&n| n as f64 / law.occupation(n) / log4(n as f64).sqrt()).collect();
    out.metric("exact_band_min", exact.iter().copied().fold(f64::INFINITY, f64::min));
    out.metric("exact_band_max", exact.iter().copied().fold(f64::NEG_INFINITY, f64::max));

    // Renewal route: partial sums of the renewal sequence.
    let top = run.n() as usize;
    let (_, partial) = law.renewal_sequence(top);
    let ren_grid = log_grid(1e3, top as f64, 100);
    let ren: Vec<f64> = ren_grid.iter().map(|&n| partial[n as usize] / log4(n as f64).sqrt()).collect();
    out.metric("renewal_band_min", ren.iter().copied().fold(f64::INFINITY, f64::min));
    out.metric("renewal_band_max", ren.iter().copied().fold(f64::NEG_INFINITY, f64::max));

    let mut table = Table::new("return_sequence", &["route", "n", "a_n", "a_n_over_sqrt_log4_n"]);
    for (&n, r) in exact_grid.iter().zip(&exact) {
        table.push(["exact".to_string(), n.to_string(), (r * log4(n as f64).sqrt()).to_string(), r.to_string()]);
    }
    for (&n, r) in ren_grid.iter().zip(&ren) {
        table.push(["renewal".to_string(), n.to_string(), (r * log4(n as f64).sqrt()).to_string(), r.to_string()]);
    }
    out.tables.push(table);
    let mut tails = Table::new("tail", &["k", "tail", "tail_times_sqrt_log4_k"]);
    for (&k, v) in ks.iter().zip(&tail) {
        tails.push([k.to_string(), law.tail(k).to_string(), v.to_string()]);
    }
    out.tables.push(tails);

    let forms = [("sqrt_n_llb", 0.5, 0.0), ("log_n_llb", 0.0, 1.0), ("sqrt_log_n_llb", 0.0, 0.5)];
    let mut series = Table::new("series", &["form", "verdict", "partial_sum_at_1e7"]);
    for (name, power, log_power) in forms {
        let r = llb_series_criterion(&ReturnSequenceForm::Closed { scale: 1.0, power, log_power });
        out.flag(name, r.verdict == LlbVerdict::Llb);
        let last = r.partial_sums.last().map_or(f64::NAN, |p| p.1);
        series.push([name.to_string(), format!("{:?}", r.verdict), last.to_string()]);
    }
    out.tables.push(series);
    Ok(out)
}

pub fn boole_return_exponent(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let n = run.n();
    let c = run.param("c");
    let a = Interval::symmetric(c)?;
    let cap = 2 * n + 2;
    let stats = empirical_return_distribution(&Boole, &a, exec, run.trajectories(), cap, run.seed)?;
    let grid = log_grid(run.param("n_min"), n as f64, 13);
    let seq = stats.return_sequence(&grid);
    let xs: Vec<f64> = seq.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = seq.iter().map(|p| p.1.ln()).collect();
    let fit = linear_fit(&xs, &ys)?;
    let mut out = Outcome::default();
    out.metric("exponent", fit.slope);
    out.metric("censored", stats.censored as f64);
    let mut t = Table::new("return_sequence", &["n", "occupation", "occupation_se", "a_hat", "sqrt_2n_over_pi"]);
    for &(k, ak) in &seq {
        let l = stats.occupation(k);
        t.push([k as f64, l.value, l.se, ak, (2.0 * k as f64).sqrt() / PI]);
    }
    out.tables.push(t);
    let last = seq.last().unwrap();
    out.metric("a_hat_over_reference_at_n", last.1 / ((2.0 * last.0 as f64).sqrt() / PI));
    Ok(out)
}

pub fn darling_kac(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let n = run.n();
    let traj = run.trajectories();
    let mut out = Outcome::default();
    if run.model == "boole" {
        let r = darling_kac_boole(run.param("c"), n, traj, run.seed, exec)?;
        out.metric("ks", r.ks);
        out.metric("censored", r.censored as f64);
        out.metric("mean", r.samples.mean());
        let mut t = Table::new("samples", &["normalized_occupation", "empirical_cdf", "half_normal_cdf"]);
        for (&x, &f) in r.samples.values().iter().zip(r.samples.cumulative()) {
            t.push([x, f, r.law.cdf(x).unwrap()]);
        }
        out.tables.push(t);
    } else {
        let r = darling_kac_walk_shape(n, traj, run.seed, exec)?;
        out.metric("ks", r.ks_half_normal);
        out.metric("ks_scaling", r.ks_scaling);
        out.metric("mean_n", r.mean_n);
        out.metric("mean_4n", r.mean_4n);
        out.note("the walk's return-sequence constant is not fixed, so its samples are divided by their own mean");
    }
    let null = ks_null_quantile(traj, run.param("null_replicates") as usize, 0.95, derive_seed(run.seed, 0x4e55_4c4c));
    out.metric("ks_null_q95", null);
    Ok(out)
}

/// `ζ(1/2)/√(2π)` with the sign flipped: the shift of a Gaussian walk's
/// maximum toward the continuous one.
const MAX_SHIFT: f64 = 0.582_597_157_939_010_6;

/// Mean of `(max − min)/√steps` over Gaussian-increment walks, each extreme
/// shifted outward by `MAX_SHIFT` to correct for discrete monitoring.
pub fn gaussian_range_mean(samples: usize, steps: u64, seed: u64, exec: &Parallel) -> f64 {
    let xs = exec.map(samples, |i| {
        let mut g = substream(seed, i as u64);
        let (mut pos, mut hi, mut lo) = (0.0f64, 0.0f64, 0.0f64);
        for _ in 0..steps {
            let z: f64 = StandardNormal.sample(&mut g);
            pos += z;
            hi = hi.max(pos);
            lo = lo.min(pos);
        }
        (hi - lo + 2.0 * MAX_SHIFT) / (steps as f64).sqrt()
    });
    mean(&xs)
}

pub fn limit_laws(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let count = run.trajectories();
    let mut out = Outcome::default();
    let mut t = Table::new("laws", &["law", "mean", "target_mean", "ks"]);
    for (k, (label, alpha)) in [("03", 0.3), ("05", 0.5), ("07", 0.7)].into_iter().enumerate() {
        let xs = sample_mittag_leffler(alpha, derive_seed(run.seed, k as u64), count, exec)?;
        let m = mean(&xs);
        out.metric(format!("mean_error_{label}"), (m - 1.0).abs());
        t.push([format!("mittag-leffler {alpha}"), m.to_string(), "1".into(), String::new()]);
    }
    let ones = sample_mittag_leffler(1.0, derive_seed(run.seed, 10), count, exec)?;
    out.metric("order_one_spread", ones.iter().map(|x| (x - 1.0).abs()).fold(0.0, f64::max));

    let zero = EmpiricalDistribution::new(sample_mittag_leffler(0.0, derive_seed(run.seed, 11), count, exec)?)?;
    let ks0 = zero.ks_against(exp_cdf);
    out.metric("ks_order_zero", ks0);
    t.push(["mittag-leffler 0".into(), zero.mean().to_string(), "1".into(), ks0.to_string()]);

    let half = EmpiricalDistribution::new(sample_mittag_leffler(0.5, derive_seed(run.seed, 12), count, exec)?)?;
    let hn = LimitLaw::HalfNormalMeanOne;
    let ks_half = half.ks_against(|x| hn.cdf(x).unwrap());
    out.metric("ks_order_half", ks_half);
    t.push(["mittag-leffler 0.5 vs half-normal".into(), half.mean().to_string(), "1".into(), ks_half.to_string()]);

    let steps = run.param("range_steps") as u64;
    let ranges = sample_brownian_range(derive_seed(run.seed, 13), run.param("range_samples") as usize, steps, exec)?;
    let walk = mean(&ranges);
    let oracle = gaussian_range_mean(run.param("oracle_samples") as usize, run.param("oracle_steps") as u64, derive_seed(run.seed, 14), exec);
    let closed = LimitLaw::BrownianRange { steps }.mean();
    out.metric("range_mean", walk);
    out.metric("oracle_mean", oracle);
    out.metric("range_vs_oracle", relative(walk, oracle));
    out.metric("oracle_vs_closed_form", relative(oracle, closed));
    t.push(["walk range".into(), walk.to_string(), closed.to_string(), String::new()]);
    t.push(["gaussian walk range, corrected".into(), oracle.to_string(), closed.to_string(), String::new()]);
    out.tables.push(t);
    Ok(out)
}

pub fn neptune(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let roof = roof(run)?;
    let n = run.n();
    let sample = neptune_experiment(&roof, n, run.trajectories(), run.seed, exec);
    let reference: Vec<f64> =
        sample_brownian_range(derive_seed(run.seed, 0x5245_46), run.param("reference_samples") as usize, run.param("reference_steps") as u64, exec)?
            .into_iter()
            .map(|r| LN_2 * r)
            .collect();
    let cond = sample.conditional();
    let correction: Vec<f64> = sample.correction().into_iter().map(f64::abs).collect();
    let mut out = Outcome::default();
    out.metric("ks", ks_two_sample(&cond, &reference)?);
    out.metric("ks_range_term", ks_two_sample(&sample.range_term(), &reference)?);
    out.metric("correction_p95", EmpiricalDistribution::new(correction.clone())?.quantile(0.95));
    out.metric("conditional_mean", mean(&cond));
    out.metric("reference_mean", mean(&reference));
    let mut t = Table::new("trajectories", &["left", "right", "block_len", "eta_len", "conditional_over_sqrt_n", "correction_over_sqrt_n"]);
    for ((row, c), k) in sample.rows.iter().zip(&cond).zip(&correction) {
        t.push([row.left.to_string(), row.right.to_string(), row.block_len.to_string(), row.eta_len.to_string(), c.to_string(), k.to_string()]);
    }
    out.tables.push(t);

    // The rounding addend is a sum of roof fluctuations over about `L + R` symbols,
    // so its share of √n shrinks like n^(-1/4); longer horizons show the decay.
    let mut scaling = Table::new("correction_scaling", &["n", "trajectories", "correction_p95"]);
    let few = run.param("scaling_trajectories") as usize;
    for (k, factor) in [1u64, 10, 100].into_iter().enumerate() {
        let m = n * factor;
        let s = neptune_experiment(&roof, m, few, derive_seed(run.seed, 0x5343 + k as u64), exec);
        let p95 = EmpiricalDistribution::new(s.correction().into_iter().map(f64::abs).collect())?.quantile(0.95);
        out.metric(format!("correction_p95_{factor}n"), p95);
        scaling.push([m as f64, few as f64, p95]);
    }
    out.tables.push(scaling);
    Ok(out)
}

fn sigmas(gap: f64, se: f64) -> f64 {
    if se > 0.0 {
        gap / se
    } else if gap <= 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

pub fn entropy_finiteness(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let roof = roof(run)?;
    let mut out = Outcome::default();
    let mut t = Table::new("entropies", &["driving", "joint", "joint_se", "conditional", "conditional_se", "partition", "partition_exact", "bound", "z_mass"]);
    for (k, (label, driving)) in drivings().into_iter().enumerate() {
        if !run.wants(label) {
            continue;
        }
        let c = finite_entropy_check(&roof, &driving, run.trajectories(), derive_seed(run.seed, k as u64), exec)?;
        out.metric(format!("{label}_joint_excess_sigma"), sigmas(c.joint.value - c.bound, c.joint.se));
        let gap = (c.joint.value - c.conditional.value - c.partition_exact).abs();
        out.metric(format!("{label}_chain_gap_sigma"), sigmas(gap, c.partition.se));
        out.metric(format!("{label}_joint"), c.joint.value);
        out.metric(format!("{label}_bound"), c.bound);
        t.push([
            label.to_string(),
            c.joint.value.to_string(),
            c.joint.se.to_string(),
            c.conditional.value.to_string(),
            c.conditional.se.to_string(),
            c.partition.value.to_string(),
            c.partition_exact.to_string(),
            c.bound.to_string(),
            c.z_mass.to_string(),
        ]);
    }
    out.tables.push(t);
    Ok(out)
}

pub fn entropy_dimension(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let mut grid = Vec::new();
    let mut m = run.param("n_min") as usize;
    while m <= run.n() as usize {
        grid.push(m);
        m *= 2;
    }
    let eps = run.param("eps");
    let mut out = Outcome::default();
    let mut points = Table::new("covers", &["source", "n", "eps", "greedy", "distinct", "log_volume"]);
    let mut slopes = std::collections::BTreeMap::new();
    for (k, source) in [NameSource::Rotation, NameSource::Rwrs, NameSource::Iid].into_iter().enumerate() {
        let label = source.label();
        if !run.wants(label) {
            continue;
        }
        let spec = DimensionSpec {
            source,
            n_grid: grid.clone(),
            eps_grid: vec![eps],
            trajectories: run.trajectories(),
            centers: run.param("centers") as usize,
        };
        let r = relative_dimension_experiment(&spec, derive_seed(run.seed, k as u64), exec)?;
        out.metric(format!("{label}_slope"), r.headline());
        if let Some(g) = r.greedy_headline() {
            out.metric(format!("{label}_greedy_slope"), g);
        }
        slopes.insert(label, r.headline());
        for p in &r.report.points {
            points.push([label.to_string(), p.n.to_string(), p.eps.to_string(), p.greedy.to_string(), p.distinct.to_string(), p.log_volume.to_string()]);
        }
    }
    out.tables.push(points);
    if slopes.len() == 3 {
        out.flag("ordered", slopes["rotation"] < slopes["rwrs"] && slopes["rwrs"] < slopes["iid"]);
    }
    let xi_n = run.param("xi_n") as usize;
    if run.model == "all" && xi_n > 0 {
        let x = xi_count_experiment(&RoofSpec::default(), xi_n, (1.0, 2.0), run.param("xi_trajectories") as usize, 10_000, derive_seed(run.seed, 9), exec)?;
        out.metric("xi_count", x.count as f64);
        out.metric("xi_log_reference", x.log_reference);
        out.metric("xi_gap", x.gap(xi_n));
        out.note("the cylinder-count diagnostic cannot close its gap at desk scale: the log of the count is at most the log of the number of sampled points, far below the reference");
    }
    Ok(out)
}

pub fn hik_returns(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let n = run.n() as u32;
    let p = run.param("p");
    let hik = Hik::new(p)?;
    let rows = exec.map(run.trajectories(), |i| -> Result<(u64, u64), Error> {
        let s = hik.sample_level(0, &mut substream(run.seed, i as u64));
        Ok((visits_by_power(&s.omega, n)?, dyadic_visit_bound(&s.omega, n)))
    });
    let rows: Vec<(u64, u64)> = rows.into_iter().collect::<Result<_, _>>()?;
    let need = run.param("factor") * n as f64;
    let mut out = Outcome::default();
    let frac = |f: &dyn Fn(&(u64, u64)) -> u64| rows.iter().filter(|r| f(r) as f64 >= need).count() as f64 / rows.len() as f64;
    out.metric("fraction", frac(&|r| r.0));
    out.metric("dyadic_fraction", frac(&|r| r.1));
    out.metric("dyadic_mean_per_doubling", mean(&rows.iter().map(|r| r.1 as f64).collect::<Vec<_>>()) / n as f64);
    out.metric("visits_median", {
        let mut v: Vec<u64> = rows.iter().map(|r| r.0).collect();
        v.sort_unstable();
        v[v.len() / 2] as f64
    });
    let mut t = Table::new("orbits", &["index", "visits", "dyadic_bound"]);
    for (i, r) in rows.iter().enumerate() {
        t.push([i as u64, r.0, r.1]);
    }
    out.tables.push(t);

    let mut ps = vec![p, 0.3, 0.7, 0.9];
    ps.sort_by(f64::total_cmp);
    ps.dedup();
    let max_len = run.param("word_len") as usize;
    let (mut checked, mut failures, mut undefined) = (0u64, 0u64, 0u64);
    let mut tally = |r: Result<bool, Error>| match r {
        Ok(true) => checked += 1,
        Ok(false) => {
            checked += 1;
            failures += 1;
        }
        Err(_) => undefined += 1,
    };
    for &q in &ps {
        for len in 1..=max_len {
            for w in 0u32..(1 << len) {
                let word: Vec<bool> = (0..len).map(|k| (w >> k) & 1 == 1).collect();
                tally(rn_check(q, &word, 1e-10));
                for level in -2..=2 {
                    tally(invariance_check(q, &word, level, 1e-10));
                }
            }
        }
    }
    out.metric("cylinder_checks", checked as f64);
    out.metric("cylinder_failures", failures as f64);
    out.metric("cylinder_undefined", undefined as f64);
    out.note("words whose odometer image is not decided inside the word are skipped and counted as undefined");
    Ok(out)
}

pub fn zero_entropy(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let mut out = Outcome::default();
    if run.wants("rotation") {
        let block = run.param("block") as usize;
        let max_block = (run.param("max_block") as usize).max(block);
        let arc = Arc { lo: 0.0, hi: run.param("arc") };
        let pr = predictability_entropy(
            &Rotation::golden(),
            &arc,
            exec,
            run.param("rotation_orbits") as usize,
            run.param("rotation_length") as usize,
            max_block,
            DEFAULT_CAP,
            derive_seed(run.seed, 1),
        )?;
        let e = &pr.entropy;
        out.metric("rotation_predictability", e.increments[block - 1]);
        out.metric("rotation_increment_at_max_block", e.increments[max_block - 1]);
        out.metric("rotation_alphabet", e.alphabet as f64);
        let mut t = Table::new("rotation_blocks", &["block", "entropy", "increment", "rate"]);
        for l in 0..max_block {
            t.push([(l + 1) as f64, e.block[l], e.increments[l], e.rate[l]]);
        }
        out.tables.push(t);
    }
    if run.wants("hik") {
        let hik = Hik::new(run.param("p"))?;
        let mass = hik.level_mass(0);
        let top = run.n() as u32;
        let levels: Vec<u32> = [top.saturating_sub(12), top.saturating_sub(8), top.saturating_sub(4), top].into_iter().filter(|&k| k >= 4).collect();
        let seed = derive_seed(run.seed, 2);
        let rows = exec.map(run.trajectories(), |i| -> Result<Vec<Option<f64>>, Error> {
            let s = hik.sample_level(0, &mut substream(seed, i as u64));
            levels
                .iter()
                .map(|&k| {
                    let visits = visits_by_power(&s.omega, k)?;
                    let bound = hik_information_bound(&s.omega, (1u64 << k) - 1);
                    Ok((visits > 0).then(|| bound * mass / visits as f64))
                })
                .collect()
        });
        let rows: Vec<Vec<Option<f64>>> = rows.into_iter().collect::<Result<_, _>>()?;
        let mut t = Table::new("hik_plateau", &["log2_n", "mean_ratio", "orbits_without_visits"]);
        for (j, &k) in levels.iter().enumerate() {
            let xs: Vec<f64> = rows.iter().filter_map(|r| r[j]).collect();
            let m = if xs.is_empty() { f64::INFINITY } else { mean(&xs) };
            t.push([k as f64, m, (rows.len() - xs.len()) as f64]);
            if k == top {
                out.metric("hik_plateau", m);
                out.metric("hik_orbits_without_visits", (rows.len() - xs.len()) as f64);
            }
        }
        out.tables.push(t);
    }
    Ok(out)
}

/// Explicit level listing of every stage: `true` marks levels inside `B_0`.
pub fn explicit_levels(cuts: &[u64], spacers: &[Vec<u64>]) -> Vec<(Vec<bool>, Vec<u64>)> {
    let mut stages = vec![(vec![true], vec![0])];
    for (c, l) in cuts.iter().zip(spacers) {
        let prev = stages.last().unwrap().0.clone();
        let mut next = Vec::new();
        let mut offsets = Vec::new();
        for &gap in &l[..*c as usize] {
            offsets.push(next.len() as u64);
            next.extend_from_slice(&prev);
            next.extend(std::iter::repeat_n(false, gap as usize));
        }
        stages.push((next, offsets));
    }
    stages
}

/// Gap histogram between consecutive `B_0` levels of an explicit listing.
pub fn explicit_gaps(levels: &[bool]) -> (Vec<(u64, f64)>, f64) {
    let base: Vec<usize> = levels.iter().enumerate().filter(|p| *p.1).map(|p| p.0).collect();
    let mut counts = std::collections::BTreeMap::new();
    for w in base.windows(2) {
        *counts.entry((w[1] - w[0]) as u64).or_insert(0u64) += 1;
    }
    let total = (base.len() - 1) as f64;
    (counts.into_iter().map(|(g, c)| (g, c as f64 / total)).collect(), 1.0 / base.len() as f64)
}

pub fn tower_combinatorics(_: &Run, _: &Parallel) -> LabResult<Outcome> {
    let mut t = Table::new("checks", &["spec", "check", "expected", "got", "ok"]);
    let mut check = |spec: &str, name: String, expected: String, got: String| {
        let ok = expected == got;
        t.push([spec.to_string(), name, expected, got, ok.to_string()]);
        ok
    };
    let mut bad = 0u64;
    let specs: [(&str, Vec<u64>, Vec<Vec<u64>>); 3] = [
        ("toy", vec![2, 2], vec![vec![0, 1], vec![0, 2]]),
        ("fast-cuts", vec![2, 8], vec![vec![0, 2], vec![0; 8]]),
        ("mixed", vec![3, 2, 4], vec![vec![1, 0, 2], vec![0, 5], vec![1, 1, 0, 3]]),
    ];
    for (label, cuts, spacers) in &specs {
        let spec = TowerSpec::new(cuts.clone(), spacers.clone())?;
        let built = tower_build(&spec, cuts.len())?;
        let listed = explicit_levels(cuts, spacers);
        let mut product = 1u64;
        for (stage, (levels, offsets)) in built.iter().zip(&listed) {
            let k = stage.index;
            if k > 0 {
                product *= cuts[k - 1];
            }
            let base: Vec<u64> = levels.iter().enumerate().filter(|p| *p.1).map(|p| p.0 as u64).collect();
            let mut ok = check(label, format!("height {k}"), levels.len().to_string(), stage.height.to_string());
            ok &= check(label, format!("base levels {k}"), format!("{base:?}"), format!("{:?}", stage.base_levels));
            ok &= check(label, format!("offsets {k}"), format!("{offsets:?}"), format!("{:?}", stage.offsets));
            ok &= check(label, format!("base mass {k}"), (1.0 / product as f64).to_string(), stage.base_mass.to_string());
            if k > 0 {
                let (gaps, censored) = explicit_gaps(levels);
                let h = return_histogram(stage);
                ok &= check(label, format!("gaps {k}"), format!("{gaps:?} {censored}"), format!("{:?} {}", h.gaps, h.censored));
            }
            bad += !ok as u64;
        }
    }
    // Hand-computed values.
    let toy = TowerSpec::new(vec![2, 2], vec![vec![0, 1], vec![0, 2]])?;
    let b = tower_build(&toy, 2)?;
    let heights: Vec<u64> = b.iter().map(|s| s.height).collect();
    bad += !check("toy", "hand heights".into(), "[1, 3, 8]".into(), format!("{heights:?}")) as u64;
    bad += !check("toy", "hand base levels 2".into(), "[0, 1, 3, 4]".into(), format!("{:?}", b[2].base_levels)) as u64;
    bad += !check("toy", "hand offsets 2".into(), "[0, 3]".into(), format!("{:?}", b[2].offsets)) as u64;
    let h2 = return_histogram(&b[2]);
    bad += !check("toy", "hand gaps 2".into(), format!("{:?} 0.25", [(1u64, 2.0 / 3.0), (2, 1.0 / 3.0)]), format!("{:?} {}", h2.gaps, h2.censored)) as u64;
    let h1 = return_histogram(&b[1]);
    bad += !check("toy", "hand gaps 1".into(), format!("{:?} 0.5", [(1u64, 1.0)]), format!("{:?} {}", h1.gaps, h1.censored)) as u64;
    let verdicts = |s: &TowerSpec| format!("{:?}", validate_growth(s).iter().map(|v| (v.stage, v.cuts, v.spacers)).collect::<Vec<_>>());
    bad += !check("toy", "hand growth".into(), "[(1, true, false), (2, false, false)]".into(), verdicts(&toy)) as u64;
    let fast = TowerSpec::new(vec![2, 8], vec![vec![0, 2], vec![0; 8]])?;
    bad += !check("fast-cuts", "hand growth".into(), "[(1, true, true), (2, true, false)]".into(), verdicts(&fast)) as u64;
    let mut out = Outcome::default();
    out.metric("mismatches", bad as f64);
    out.tables.push(t);
    Ok(out)
}

pub fn information_ratio(run: &Run, exec: &Parallel) -> LabResult<Outcome> {
    let n = run.n();
    let model_length = run.param("model_length") as usize;
    let mut out = Outcome::default();
    if run.wants("srw1") {
        let a = SiteSet::new(vec![0])?;
        let xi = SiteCells(a.clone());
        let (k, model) = krengel_entropy(&Srw1, &a, &xi, model_length, DEFAULT_CAP, derive_seed(run.seed, 1))?;
        out.metric("srw1_krengel", k.value);
        out.metric("srw1_krengel_se", k.induced_rate.se * k.measure);
        let mut t = Table::new("srw1_plateau", &["n", "mean_ratio", "trajectories_with_visits", "floors"]);
        let horizons: Vec<u64> = [n / 100, n / 10, n].into_iter().filter(|&h| h >= 10).collect();
        for (j, &h) in horizons.iter().enumerate() {
            let runs = normalized_information_experiment(&Srw1, &a, &xi, &model, exec, run.trajectories(), h, derive_seed(run.seed, 10 + j as u64))?;
            let ratios: Vec<f64> = runs.iter().filter_map(|r| r.ratio(k.measure)).collect();
            let m = mean(&ratios);
            t.push([h as f64, m, ratios.len() as f64, runs.iter().map(|r| r.floors).sum::<usize>() as f64]);
            if h == n {
                out.metric("srw1_plateau", m);
                out.metric("srw1_relative_gap", relative(m, k.value));
            }
        }
        out.tables.push(t);
    }
    if run.wants("boole") {
        let r = boole_information_experiment(run.param("c"), n, run.trajectories(), model_length, derive_seed(run.seed, 2), exec)?;
        out.metric("boole_ks", r.ks);
        out.metric("boole_krengel", r.krengel.value);
        out.metric("boole_mean_ratio", r.mean_ratio);
        out.metric("boole_floors", r.floors as f64);
        let mut t = Table::new("boole_normalized", &["normalized_information", "empirical_cdf", "half_normal_cdf"]);
        let law = LimitLaw::HalfNormalMeanOne;
        for (&x, &f) in r.normalized.values().iter().zip(r.normalized.cumulative()) {
            t.push([x, f, law.cdf(x).unwrap()]);
        }
        out.tables.push(t);
    }
    Ok(out)
}
