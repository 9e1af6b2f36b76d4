//! Rank-one towers `B_n = ⊕_{k=1}^{N_n} B_{n−1} 0^{L_{n,k}}` built from cutting
//! numbers and spacer arrays.
//!
//! Levels of stage `n` are numbered `0 … h_n − 1` from the bottom; `B_0` is the
//! single level of stage 0 and has mass one. A point is a stage, a level of
//! that stage, and a coordinate `u ∈ [0, 1)` that selects which copy of the
//! current column it lies in at every later stage.

use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::error::{invalid, Error, Result};
use crate::rng::{self, Rng};
use crate::systems::Dynamics;

/// Heights above this are never built.
pub const MAX_HEIGHT: u64 = 1 << 62;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TowerSpec {
    /// `N_1, N_2, …`.
    pub cuts: Vec<u64>,
    /// `spacers[n−1][k−1] = L_{n,k}`.
    pub spacers: Vec<Vec<u64>>,
}

impl TowerSpec {
    pub fn new(cuts: Vec<u64>, spacers: Vec<Vec<u64>>) -> Result<Self> {
        if cuts.len() != spacers.len() {
            return Err(Error::LengthMismatch(cuts.len(), spacers.len()));
        }
        for (n, (c, l)) in cuts.iter().zip(&spacers).enumerate() {
            if *c == 0 {
                return Err(invalid("cutting numbers must be at least 1"));
            }
            if l.len() as u64 != *c {
                return Err(invalid(alloc::format!("stage {} needs {} spacer counts", n + 1, c)));
            }
        }
        Ok(Self { cuts, spacers })
    }

    pub fn stages(&self) -> usize {
        self.cuts.len()
    }
}

/// One built stage with its derived quantities.
#[derive(Clone, Debug, PartialEq)]
pub struct TowerStage {
    pub index: usize,
    pub height: u64,
    /// `m(b_n) = 1/(N_1⋯N_n)`.
    pub base_mass: f64,
    /// `N_n`; 1 for stage 0.
    pub cuts: u64,
    /// Bottom level of copy `k` of `B_{n−1}` inside `B_n` (`κ(n, k)`, 0-based in `k`).
    pub offsets: Vec<u64>,
    /// Levels of `B_n` lying in `B_0`, ascending.
    pub base_levels: Vec<u64>,
}

/// Builds stages `0 … stages` (stage 0 is `B_0`).
pub fn tower_build(spec: &TowerSpec, stages: usize) -> Result<Vec<TowerStage>> {
    if stages > spec.stages() {
        return Err(invalid("more stages requested than specified"));
    }
    let mut out = Vec::with_capacity(stages + 1);
    out.push(TowerStage {
        index: 0,
        height: 1,
        base_mass: 1.0,
        cuts: 1,
        offsets: alloc::vec![0],
        base_levels: alloc::vec![0],
    });
    for n in 1..=stages {
        let prev = &out[n - 1];
        let cuts = spec.cuts[n - 1];
        let spacers = &spec.spacers[n - 1];
        let overflow = Error::Overflow { stage: n };
        let mut offsets = Vec::with_capacity(cuts as usize);
        let mut pos = 0u64;
        for l in spacers {
            offsets.push(pos);
            pos = pos.checked_add(prev.height).and_then(|p| p.checked_add(*l)).ok_or(overflow.clone())?;
            if pos > MAX_HEIGHT {
                return Err(overflow);
            }
        }
        let count = prev.base_levels.len().checked_mul(cuts as usize).ok_or(overflow.clone())?;
        if count > 1 << 26 {
            return Err(overflow);
        }
        let mut base_levels = Vec::with_capacity(count);
        for &k in &offsets {
            base_levels.extend(prev.base_levels.iter().map(|&b| k + b));
        }
        out.push(TowerStage {
            index: n,
            height: pos,
            base_mass: prev.base_mass / cuts as f64,
            cuts,
            offsets,
            base_levels,
        });
    }
    Ok(out)
}

/// Verdicts on the two growth conditions for one stage.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GrowthVerdict {
    pub stage: usize,
    /// `N_n ≥ exp((n−1) N_1⋯N_{n−1})`; vacuous for `n = 1`.
    pub cuts: bool,
    /// `L_{n,k+1} > Σ_{j≤k} L_{n,j} + k h_{n−1}` for `1 ≤ k < N_n`.
    pub spacers: bool,
}

impl GrowthVerdict {
    pub fn passes(&self) -> bool {
        self.cuts && self.spacers
    }
}

/// Evaluates the growth conditions on exact integers, for every specified stage.
pub fn validate_growth(spec: &TowerSpec) -> Vec<GrowthVerdict> {
    let mut out = Vec::with_capacity(spec.stages());
    let mut height = BigUint::from(1u32);
    let mut log_product = 0.0f64;
    for n in 1..=spec.stages() {
        let cuts_n = spec.cuts[n - 1];
        let spacers = &spec.spacers[n - 1];
        let cuts_ok = if n == 1 {
            true
        } else {
            let exponent = (n - 1) as f64 * libm::exp(log_product);
            libm::log(cuts_n as f64) >= exponent
        };
        let mut spacers_ok = true;
        let mut running = BigUint::from(0u32);
        for k in 1..spacers.len() {
            running += spacers[k - 1];
            let rhs = &running + &height * BigUint::from(k);
            if BigUint::from(spacers[k]) <= rhs {
                spacers_ok = false;
            }
        }
        out.push(GrowthVerdict { stage: n, cuts: cuts_ok, spacers: spacers_ok });
        let total: BigUint = spacers.iter().map(|&l| BigUint::from(l)).sum();
        height = height * BigUint::from(cuts_n) + total;
        log_product += libm::log(cuts_n as f64);
    }
    out
}

/// Gaps between consecutive base levels of a stage.
#[derive(Clone, Debug, PartialEq)]
pub struct ReturnHistogram {
    /// `(gap, mass)` with masses normalized over the uncensored gaps.
    pub gaps: Vec<(u64, f64)>,
    /// Share of base levels whose return leaves the stage.
    pub censored: f64,
}

pub fn return_histogram(stage: &TowerStage) -> ReturnHistogram {
    let levels = &stage.base_levels;
    let mut gaps: Vec<u64> = levels.windows(2).map(|w| w[1] - w[0]).collect();
    gaps.sort_unstable();
    let total = gaps.len() as f64;
    let mut out: Vec<(u64, f64)> = Vec::new();
    for g in gaps {
        match out.last_mut() {
            Some((v, m)) if *v == g => *m += 1.0,
            _ => out.push((g, 1.0)),
        }
    }
    for (_, m) in out.iter_mut() {
        *m /= total;
    }
    ReturnHistogram { gaps: out, censored: 1.0 / levels.len() as f64 }
}

/// The rank-one map on the union of the built stages.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne {
    pub stages: Vec<TowerStage>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RankOneState {
    pub stage: usize,
    pub level: u64,
    pub u: f64,
}

impl RankOne {
    pub fn new(spec: &TowerSpec, stages: usize) -> Result<Self> {
        Ok(Self { stages: tower_build(spec, stages)? })
    }

    /// Whether level `level` of stage `stage` lies in `B_0`.
    pub fn in_base(&self, stage: usize, level: u64) -> bool {
        let mut n = stage;
        let mut l = level;
        while n > 0 {
            let st = &self.stages[n];
            let k = st.offsets.partition_point(|&o| o <= l) - 1;
            l -= st.offsets[k];
            if l >= self.stages[n - 1].height {
                return false;
            }
            n -= 1;
        }
        l == 0
    }

    /// Re-expresses a point at the top of stage `n` in stage `n + 1`.
    fn escalate(&self, s: &mut RankOneState) -> Result<()> {
        let next = self.stages.get(s.stage + 1).ok_or(Error::Truncation)?;
        let x = s.u * next.cuts as f64;
        let k = (x as usize).min(next.cuts as usize - 1);
        s.u = x - k as f64;
        s.level += next.offsets[k];
        s.stage += 1;
        Ok(())
    }
}

impl Dynamics for RankOne {
    type State = RankOneState;

    fn step(&self, s: &mut RankOneState) -> Result<()> {
        while s.level + 1 >= self.stages[s.stage].height {
            self.escalate(s)?;
        }
        s.level += 1;
        Ok(())
    }

    /// Uniform on `B_0`.
    fn sample_reference(&self, rng: &mut Rng) -> RankOneState {
        RankOneState { stage: 0, level: 0, u: rng::uniform(rng) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> TowerSpec {
        TowerSpec::new(alloc::vec![2, 2], alloc::vec![alloc::vec![0, 1], alloc::vec![0, 2]]).unwrap()
    }

    #[test]
    fn toy_stages_by_hand() {
        let st = tower_build(&toy(), 2).unwrap();
        assert_eq!(st[1].height, 3);
        assert_eq!(st[1].base_levels, [0, 1]);
        assert_eq!(st[2].height, 8);
        assert_eq!(st[2].base_levels, [0, 1, 3, 4]);
        assert_eq!(st[2].offsets, [0, 3]);
        assert_eq!(st[2].base_mass, 0.25);
    }

    #[test]
    fn toy_histograms() {
        let st = tower_build(&toy(), 2).unwrap();
        let h1 = return_histogram(&st[1]);
        assert_eq!(h1.gaps, [(1, 1.0)]);
        assert_eq!(h1.censored, 0.5);
        let h2 = return_histogram(&st[2]);
        assert_eq!(h2.gaps.len(), 2);
        assert_eq!(h2.gaps[0].0, 1);
        assert!((h2.gaps[0].1 - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(h2.gaps[1].0, 2);
        assert_eq!(h2.censored, 0.25);
    }

    #[test]
    fn growth_examples() {
        let ok = TowerSpec::new(alloc::vec![2], alloc::vec![alloc::vec![0, 2]]).unwrap();
        assert!(validate_growth(&ok)[0].spacers);
        let bad = TowerSpec::new(alloc::vec![2], alloc::vec![alloc::vec![1, 1]]).unwrap();
        assert!(!validate_growth(&bad)[0].spacers);
        let fast = TowerSpec::new(alloc::vec![2, 8], alloc::vec![alloc::vec![0, 2], alloc::vec![0; 8]]).unwrap();
        assert!(validate_growth(&fast)[1].cuts);
        let v = validate_growth(&toy());
        assert!(v[0].cuts && !v[0].spacers);
        assert!(!v[1].cuts && !v[1].spacers);
    }

    #[test]
    fn overflow_is_reported() {
        let spec = TowerSpec::new(alloc::vec![1], alloc::vec![alloc::vec![u64::MAX - 1]]).unwrap();
        assert_eq!(tower_build(&spec, 1), Err(Error::Overflow { stage: 1 }));
    }

    #[test]
    fn orbit_walks_levels_and_truncates() {
        let t = RankOne::new(&toy(), 2).unwrap();
        // u in the first copy at both stages: the orbit visits levels of B_2 in order.
        let mut s = RankOneState { stage: 0, level: 0, u: 0.1 };
        let mut seen = Vec::new();
        for _ in 0..7 {
            t.step(&mut s).unwrap();
            seen.push((s.stage, s.level, t.in_base(s.stage, s.level)));
        }
        assert_eq!(seen[0], (1, 1, true));
        assert_eq!(seen[1], (1, 2, false));
        assert_eq!(seen[2], (2, 3, true));
        assert_eq!(seen[6], (2, 7, false));
        assert_eq!(t.step(&mut s), Err(Error::Truncation));
    }
}
