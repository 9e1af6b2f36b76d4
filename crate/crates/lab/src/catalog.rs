//! The experiment catalog: one entry per acceptance criterion.

use serde::Serialize;

use crate::config::Run;
use crate::envelope::Outcome;
use crate::error::LabResult;
use crate::exec::Parallel;
use crate::experiments as x;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Op {
    #[serde(rename = "<")]
    Lt,
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = ">")]
    Gt,
    #[serde(rename = ">=")]
    Ge,
}

impl Op {
    /// NaN never passes.
    pub fn holds(self, value: f64, limit: f64) -> bool {
        match self {
            Op::Lt => value < limit,
            Op::Le => value <= limit,
            Op::Gt => value > limit,
            Op::Ge => value >= limit,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Op::Lt => "<",
            Op::Le => "<=",
            Op::Gt => ">",
            Op::Ge => ">=",
        }
    }
}

/// Default and admissible range of a whole-number setting.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Range {
    pub default: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Param {
    pub name: &'static str,
    pub default: f64,
    pub min: f64,
    pub max: f64,
    pub doc: &'static str,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Threshold {
    /// Override key in the configuration.
    pub key: &'static str,
    pub metric: &'static str,
    pub op: Op,
    pub default: f64,
    /// Only in effect for this model selection; `None` means always.
    pub model: Option<&'static str>,
}

pub type Driver = fn(&Run, &Parallel) -> LabResult<Outcome>;

pub struct Entry {
    pub id: &'static str,
    pub criterion: u8,
    /// The claim under test, named in words.
    pub claim: &'static str,
    pub summary: &'static str,
    /// The first model is the default; `all` runs every model of the entry.
    pub models: &'static [&'static str],
    pub n: Option<Range>,
    pub trajectories: Option<Range>,
    pub params: &'static [Param],
    pub thresholds: &'static [Threshold],
    pub run: Driver,
}

impl core::fmt::Debug for Entry {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("Entry").field("id", &self.id).field("criterion", &self.criterion).finish()
    }
}

impl Entry {
    pub fn thresholds_for<'a>(&'a self, model: &'a str) -> impl Iterator<Item = &'a Threshold> + 'a {
        self.thresholds.iter().filter(move |t| match t.model {
            None => true,
            Some("all") => model == "all",
            Some(m) => model == "all" || model == m,
        })
    }
}

const fn range(default: f64, min: f64, max: f64) -> Option<Range> {
    Some(Range { default, min, max })
}

const fn param(name: &'static str, default: f64, min: f64, max: f64, doc: &'static str) -> Param {
    Param { name, default, min, max, doc }
}

const fn th(key: &'static str, metric: &'static str, op: Op, default: f64) -> Threshold {
    Threshold { key, metric, op, default, model: None }
}

const fn th_for(model: &'static str, key: &'static str, metric: &'static str, op: Op, default: f64) -> Threshold {
    Threshold { key, metric, op, default, model: Some(model) }
}

/// `2 − √2`, the short roof height.
const ROOF: f64 = 0.585_786_437_626_905;

static CATALOG: [Entry; 15] = [
    Entry {
        id: "interval-union",
        criterion: 1,
        claim: "interval-union lemma: consecutive partial-sum segments cover exactly [min, max] of the partial sums",
        summary: "random real and integer sequences; segment union against the extreme partial sums",
        models: &["mixed"],
        n: None,
        trajectories: range(1e5, 1.0, 1e8),
        params: &[param("max_len", 50.0, 1.0, 1e4, "longest sequence")],
        thresholds: &[th("failures_max", "failures", Op::Le, 0.0), th("oracle_disagreements_max", "oracle_disagreements", Op::Le, 0.0)],
        run: x::interval_union,
    },
    Entry {
        id: "name-formula",
        criterion: 2,
        claim: "name formulas for the skew-product partition: cells from the range of the driving walk equal cells from the pulled-back orbit",
        summary: "direct join against the range formula at random points, horizons up to n",
        models: &["all", "iid", "rotation"],
        n: range(512.0, 1.0, 4096.0),
        trajectories: range(1e3, 1.0, 1e6),
        params: &[param("alpha0", ROOF, 1e-3, 0.999, "short roof height; the long one is 2 − alpha0")],
        thresholds: &[
            th_for("iid", "iid_mismatches_max", "iid_mismatches", Op::Le, 0.0),
            th_for("rotation", "rotation_mismatches_max", "rotation_mismatches", Op::Le, 0.0),
        ],
        run: x::name_formula,
    },
    Entry {
        id: "krengel-formula",
        criterion: 3,
        claim: "Krengel's formula: the T-name of a cofinite partition is the return-time name joined with the induced name",
        summary: "T-names by direct stepping against reconstruction from n induced returns",
        models: &["all", "srw1", "boole"],
        n: range(1e3, 1.0, 1e6),
        trajectories: range(1e3, 1.0, 1e6),
        params: &[param("horizon", 4e6, 1.0, 1e10, "last compared position of the T-name")],
        thresholds: &[
            th_for("srw1", "srw1_mismatches_max", "srw1_mismatches", Op::Le, 0.0),
            th_for("boole", "boole_mismatches_max", "boole_mismatches", Op::Le, 0.0),
        ],
        run: x::krengel_formula,
    },
    Entry {
        id: "kac",
        criterion: 4,
        claim: "Kac's formula for an induced map: the sum of f along induced excursions from B integrates to the integral of f over A",
        summary: "walk with A = {0, 1}, B = {0}, f = 1 at site 1; fair shift with A everything, B = [0], f = first symbol",
        models: &["all", "srw1", "shift"],
        n: None,
        trajectories: range(1e6, 100.0, 1e9),
        params: &[param("cap", 1e7, 1e3, 1e12, "cap on a single induced return")],
        thresholds: &[
            th_for("srw1", "srw1_relative_error_max", "srw1_relative_error", Op::Lt, 0.01),
            th_for("shift", "shift_relative_error_max", "shift_relative_error", Op::Lt, 0.01),
        ],
        run: x::kac,
    },
    Entry {
        id: "renewal-analytics",
        criterion: 5,
        claim: "doubly exponential renewal tower: return-time entropy 2 log 2, tail of order 1/sqrt(log k), return sequence of order sqrt(log n), and the log-lower-bound series test",
        summary: "exact sparse sums for the law with mass 2^-k at 4^(4^k); renewal sequence up to n",
        models: &["four-tower"],
        n: range(1e6, 1e3, 1e8),
        trajectories: None,
        params: &[param("k_min", 1e3, 1.0, 1e18, "tail band start"), param("k_max", 1e9, 1.0, 1e18, "tail band end")],
        thresholds: &[
            th("entropy_error_max", "entropy_error", Op::Le, 1e-9),
            th("tail_band_low", "tail_band_min", Op::Ge, 0.5),
            th("tail_band_high", "tail_band_max", Op::Le, 2.0),
            th("exact_band_low", "exact_band_min", Op::Ge, 0.5),
            th("exact_band_high", "exact_band_max", Op::Le, 2.0),
            th("renewal_band_low", "renewal_band_min", Op::Ge, 0.5),
            th("renewal_band_high", "renewal_band_max", Op::Le, 2.0),
            th("sqrt_n_llb_min", "sqrt_n_llb", Op::Ge, 1.0),
            th("log_n_llb_max", "log_n_llb", Op::Le, 0.0),
            th("sqrt_log_n_llb_max", "sqrt_log_n_llb", Op::Le, 0.0),
        ],
        run: x::renewal_analytics,
    },
    Entry {
        id: "boole-return-exponent",
        criterion: 6,
        claim: "return sequence of Boole's map grows like sqrt(2n)/pi",
        summary: "fitted log-log slope of n / L(n) from sampled return times to [-c, c]",
        models: &["boole"],
        n: range(1e6, 1e4, 1e8),
        trajectories: range(1e6, 1e3, 1e9),
        params: &[param("n_min", 1e3, 10.0, 1e7, "start of the fit window"), param("c", 1.0, 1e-3, 1e3, "half-width of the reference set")],
        thresholds: &[th("exponent_low", "exponent", Op::Ge, 0.47), th("exponent_high", "exponent", Op::Le, 0.53)],
        run: x::boole_return_exponent,
    },
    Entry {
        id: "darling-kac",
        criterion: 7,
        claim: "Darling-Kac theorem: occupation times over the return sequence converge to the Mittag-Leffler law of order 1/2",
        summary: "Boole from Cauchy starts against the half-normal; the walk by mean-matched shape",
        models: &["boole", "srw1"],
        n: range(1e6, 1e3, 1e9),
        trajectories: range(1e4, 100.0, 1e7),
        params: &[param("c", 1.0, 1e-3, 1e3, "half-width of the counted set"), param("null_replicates", 200.0, 10.0, 1e5, "replicates for the KS null quantile")],
        thresholds: &[th("ks_max", "ks", Op::Lt, 0.05)],
        run: x::darling_kac,
    },
    Entry {
        id: "limit-laws",
        criterion: 8,
        claim: "Mittag-Leffler family normalized to mean one, and the range of Brownian motion",
        summary: "sampler moments and KS distances; walk-range mean against a Gaussian-walk oracle",
        models: &["all"],
        n: None,
        trajectories: range(1e6, 1e3, 1e9),
        params: &[
            param("range_samples", 1e5, 100.0, 1e8, "walk ranges drawn"),
            param("range_steps", 1e5, 1e4, 1e9, "steps per walk range"),
            param("oracle_samples", 2e4, 100.0, 1e8, "Gaussian-walk ranges drawn"),
            param("oracle_steps", 1e4, 100.0, 1e8, "steps per Gaussian walk"),
        ],
        thresholds: &[
            th("mean_error_03_max", "mean_error_03", Op::Le, 0.01),
            th("mean_error_05_max", "mean_error_05", Op::Le, 0.01),
            th("mean_error_07_max", "mean_error_07", Op::Le, 0.01),
            th("order_one_spread_max", "order_one_spread", Op::Le, 0.0),
            th("ks_order_zero_max", "ks_order_zero", Op::Lt, 0.01),
            th("ks_order_half_max", "ks_order_half", Op::Lt, 0.01),
            th("range_vs_oracle_max", "range_vs_oracle", Op::Lt, 0.01),
            th("oracle_vs_closed_form_max", "oracle_vs_closed_form", Op::Lt, 0.01),
        ],
        run: x::limit_laws,
    },
    Entry {
        id: "neptune",
        criterion: 9,
        claim: "conditional information of the skew-product names over sqrt(n) converges to log 2 times the Brownian range",
        summary: "exact scenery cells along iid-driven orbits; the block addend carries the limit, the height and rounding addends vanish",
        models: &["iid"],
        n: range(1e4, 16.0, 1e8),
        trajectories: range(1e4, 100.0, 1e7),
        params: &[
            param("alpha0", ROOF, 1e-3, 0.999, "short roof height"),
            param("reference_samples", 2e4, 100.0, 1e8, "Brownian range reference draws"),
            param("reference_steps", 1e5, 1e4, 1e9, "steps per reference walk"),
            param("scaling_trajectories", 1e3, 10.0, 1e7, "trajectories for the correction at n, 10n and 100n"),
        ],
        thresholds: &[th("ks_max", "ks", Op::Lt, 0.05), th("correction_p95_max", "correction_p95", Op::Lt, 0.05)],
        run: x::neptune,
    },
    Entry {
        id: "entropy-finiteness",
        criterion: 10,
        claim: "the generating partition of the skew product has finite entropy, with the chain rule through the range partition",
        summary: "Monte Carlo joint and conditional entropies against the closed-form bound and the exact range-partition entropy",
        models: &["all", "iid", "rotation"],
        n: None,
        trajectories: range(1e5, 100.0, 1e8),
        params: &[param("alpha0", ROOF, 1e-3, 0.999, "short roof height")],
        thresholds: &[
            th_for("iid", "iid_joint_excess_max", "iid_joint_excess_sigma", Op::Le, 3.0),
            th_for("iid", "iid_chain_gap_max", "iid_chain_gap_sigma", Op::Le, 3.0),
            th_for("rotation", "rotation_joint_excess_max", "rotation_joint_excess_sigma", Op::Le, 3.0),
            th_for("rotation", "rotation_chain_gap_max", "rotation_chain_gap_sigma", Op::Le, 3.0),
        ],
        run: x::entropy_finiteness,
    },
    Entry {
        id: "entropy-dimension",
        criterion: 11,
        claim: "relative entropy dimension of random walk in random scenery is one half, between the rotation and iid controls",
        summary: "slopes of log log covering numbers against log n from exact Hamming-ball masses; greedy covers reported",
        models: &["all", "iid", "rotation", "rwrs"],
        n: range(4096.0, 64.0, 65536.0),
        trajectories: range(1e4, 10.0, 1e6),
        params: &[
            param("n_min", 64.0, 8.0, 65536.0, "smallest name length; the grid doubles up to n"),
            param("eps", 0.05, 1e-3, 0.5, "Hamming radius"),
            param("centers", 101.0, 1.0, 1e5, "names whose ball mass enters the median"),
            param("xi_n", 400.0, 0.0, 1e5, "horizon of the cylinder-count diagnostic; 0 disables it"),
            param("xi_trajectories", 2e4, 10.0, 1e7, "points for the cylinder-count diagnostic"),
        ],
        thresholds: &[
            th_for("rotation", "rotation_slope_max", "rotation_slope", Op::Lt, 0.2),
            th_for("iid", "iid_slope_min", "iid_slope", Op::Gt, 0.8),
            th_for("rwrs", "rwrs_slope_low", "rwrs_slope", Op::Ge, 0.35),
            th_for("rwrs", "rwrs_slope_high", "rwrs_slope", Op::Le, 0.65),
            th_for("all", "ordering_min", "ordered", Op::Ge, 1.0),
        ],
        run: x::entropy_dimension,
    },
    Entry {
        id: "hik-returns",
        criterion: 12,
        claim: "Hajian-Ito-Kakutani skew product: returns to the zero level by time 2^n grow linearly in n, and the odometer has the stated Radon-Nikodym derivative",
        summary: "exact return counts by popcount, the dyadic-time lower bound, cylinder checks of the derivative and of invariance",
        models: &["hik"],
        n: range(24.0, 1.0, 62.0),
        trajectories: range(1e3, 1.0, 1e7),
        params: &[
            param("p", 0.5, 1e-3, 0.999, "P(bit = 1)"),
            param("factor", 0.4, 0.0, 1e6, "required returns per doubling"),
            param("word_len", 12.0, 1.0, 16.0, "longest cylinder word checked"),
        ],
        thresholds: &[th("fraction_min", "fraction", Op::Ge, 0.9), th("cylinder_failures_max", "cylinder_failures", Op::Le, 0.0)],
        run: x::hik_returns,
    },
    Entry {
        id: "zero-entropy",
        criterion: 13,
        claim: "zero Krengel entropy: a rotation's return-time names are predictable, and the HIK information per visit vanishes",
        summary: "plug-in block-entropy increment of rotation return names; exact cylinder bound on HIK information over visits",
        models: &["all", "rotation", "hik"],
        n: range(24.0, 4.0, 62.0),
        trajectories: range(1e3, 10.0, 1e7),
        params: &[
            param("p", 0.5, 1e-3, 0.999, "HIK P(bit = 1)"),
            param("arc", 0.5, 1e-3, 0.999, "length of the rotation's reference arc [0, arc)"),
            param("rotation_orbits", 100.0, 1.0, 1e5, "rotation orbits"),
            param("rotation_length", 1e5, 100.0, 1e8, "induced steps per rotation orbit"),
            param("block", 12.0, 1.0, 64.0, "gated block length"),
            param("max_block", 48.0, 1.0, 64.0, "longest block reported"),
        ],
        thresholds: &[
            th_for("rotation", "rotation_predictability_max", "rotation_predictability", Op::Lt, 0.02),
            th_for("hik", "hik_plateau_max", "hik_plateau", Op::Lt, 0.05),
        ],
        run: x::zero_entropy,
    },
    Entry {
        id: "tower-combinatorics",
        criterion: 14,
        claim: "cutting-and-stacking recursions: heights, base masses, copy offsets, growth conditions and return gaps",
        summary: "built stages against explicit level listings and hand-computed values on toy towers",
        models: &["toy"],
        n: None,
        trajectories: None,
        params: &[],
        thresholds: &[th("mismatches_max", "mismatches", Op::Le, 0.0)],
        run: x::tower_combinatorics,
    },
    Entry {
        id: "information-ratio",
        criterion: 15,
        claim: "normalized information converges to Krengel entropy: walk plateau against m(A) times the induced rate, Boole against the half-normal law",
        summary: "information of T-names over visits for the walk; information over the return sequence for Boole, both with self-estimated entropy",
        models: &["all", "srw1", "boole"],
        n: range(1e6, 1e3, 1e9),
        trajectories: range(2e3, 100.0, 1e7),
        params: &[
            param("model_length", 2e5, 1e3, 1e8, "induced labels per auxiliary orbit"),
            param("c", 1.0, 1e-3, 1e3, "half-width of Boole's reference set"),
        ],
        thresholds: &[
            th_for("srw1", "srw1_relative_gap_max", "srw1_relative_gap", Op::Lt, 0.1),
            th_for("boole", "boole_ks_max", "boole_ks", Op::Lt, 0.1),
        ],
        run: x::information_ratio,
    },
];

pub fn catalog() -> &'static [Entry] {
    &CATALOG
}

pub fn find(id: &str) -> Option<&'static Entry> {
    CATALOG.iter().find(|e| e.id == id)
}

/// Human-readable description with the thresholds in effect for `model`.
pub fn describe(entry: &Entry, model: Option<&str>) -> String {
    let model = model.unwrap_or(entry.models[0]);
    let mut s = format!("{} (criterion {})\n  claim: {}\n  {}\n  models: {}\n", entry.id, entry.criterion, entry.claim, entry.summary, entry.models.join(", "));
    if let Some(r) = entry.n {
        s += &format!("  n: {} in [{}, {}]\n", r.default, r.min, r.max);
    }
    if let Some(r) = entry.trajectories {
        s += &format!("  trajectories: {} in [{}, {}]\n", r.default, r.min, r.max);
    }
    for p in entry.params {
        s += &format!("  param {} = {} in [{}, {}]: {}\n", p.name, p.default, p.min, p.max, p.doc);
    }
    for t in entry.thresholds_for(model) {
        s += &format!("  threshold {}: {} {} {}\n", t.key, t.metric, t.op.symbol(), t.default);
    }
    s
}
