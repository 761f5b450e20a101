//! Regularity of the block weights, needed for the lower complexity bound
//! over the tracking cone.
//!
//! * decay: `α^{-1} β^r Λ_j ≤ Λ_{j+r} ≤ α γ^r Λ_j`
//! * spread: `λ_{k_{n_{j−1}+1}} / λ_{k_{n_j}} ≤ S_1`
//! * proportion: removing any `n_j` wavenumbers leaves some block
//!   `K_l`, `l ≤ j+1`, with at least the fraction `S_2` of its members.
//!
//! These are conditions on infinitely many blocks. Here they are measured
//! over a finite window `j ≤ j_max`.

use serde::{Deserialize, Serialize};

use super::tracking::TrackingConeSpec;
use super::OrderedWeights;
use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularityConstants {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub s1: f64,
    pub s2: f64,
}

impl RegularityConstants {
    pub fn new(alpha: f64, beta: f64, gamma: f64, s1: f64, s2: f64) -> Result<Self> {
        let c = RegularityConstants { alpha, beta, gamma, s1, s2 };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha >= 1.0 && self.alpha.is_finite()) {
            return Err(invalid(format!("alpha must be finite and at least 1, got {}", self.alpha)));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) || !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("beta and gamma must lie in (0, 1)"));
        }
        if !(self.s1 >= 1.0 && self.s1.is_finite()) {
            return Err(invalid(format!("S1 must be finite and at least 1, got {}", self.s1)));
        }
        if !(self.s2 > 0.0 && self.s2 <= 1.0) {
            return Err(invalid(format!("S2 must lie in (0, 1], got {}", self.s2)));
        }
        Ok(())
    }
}

/// Window measurements against a set of claimed constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub window: usize,
    /// `Λ_0, …, Λ_{j_max+1}`
    pub block_lambdas: Vec<f64>,
    /// Smallest `α` for which the decay condition holds with the claimed
    /// `β`, `γ` on the window.
    pub alpha_required: f64,
    pub s1: f64,
    pub s2: f64,
    pub decay_ok: bool,
    pub s1_ok: bool,
    pub s2_ok: bool,
}

impl RegularityReport {
    pub fn ok(&self) -> bool {
        self.decay_ok && self.s1_ok && self.s2_ok
    }
}

/// `Λ_0, …, Λ_{last}`.
pub fn block_lambdas(weights: &mut OrderedWeights, spec: &TrackingConeSpec, last: usize) -> Result<Vec<f64>> {
    (0..=last)
        .map(|j| super::tracking::block_lambda(weights, spec, j))
        .collect()
}

/// Smallest `α ≥ 1` with `α^{-1} β^r Λ_j ≤ Λ_{j+r} ≤ α γ^r Λ_j` over the
/// given blocks. Block 0 takes part only when `K_0` is nonempty.
pub fn decay_alpha(lambdas: &[f64], beta: f64, gamma: f64, include_first: bool) -> f64 {
    let start = if include_first { 0 } else { 1 };
    let mut alpha = 1.0f64;
    for j in start..lambdas.len() {
        for r in 1..lambdas.len() - j {
            let (lo, hi) = (lambdas[j], lambdas[j + r]);
            if lo == 0.0 && hi == 0.0 {
                continue;
            }
            if lo == 0.0 || hi == 0.0 {
                return f64::INFINITY;
            }
            alpha = alpha.max(hi / (gamma.powi(r as i32) * lo));
            alpha = alpha.max(beta.powi(r as i32) * lo / hi);
        }
    }
    alpha
}

/// `max_{1≤j≤j_max} λ_{k_{n_{j−1}+1}} / λ_{k_{n_j}}`.
pub fn measured_s1(weights: &mut OrderedWeights, spec: &TrackingConeSpec, jmax: usize) -> Result<f64> {
    let mut s1 = 1.0f64;
    for j in 1..=jmax {
        let (lo, hi) = block(spec, j)?;
        let first = weights.lambda(lo);
        let last = weights.lambda(hi - 1);
        if first == 0.0 {
            continue;
        }
        if last == 0.0 {
            return Ok(f64::INFINITY);
        }
        s1 = s1.max(first / last);
    }
    Ok(s1)
}

/// `min_{1≤j≤j_max} min_{|J|≤n_j} max_{0≤l≤j+1} |K_l \ J| / |K_l|`, exact.
///
/// The inner min-max is the smallest `t` such that cutting every block
/// down to `⌊t |K_l|⌋` members removes at most `n_j` wavenumbers. It is
/// attained at some `t = m / |K_l|`, which is found by bisection on `m`
/// for each block.
pub fn measured_s2(spec: &TrackingConeSpec, jmax: usize) -> Result<f64> {
    let mut s2 = 1.0f64;
    for j in 1..=jmax {
        let mut sizes = Vec::with_capacity(j + 2);
        for l in 0..=j + 1 {
            let (lo, hi) = block(spec, l)?;
            if hi > lo {
                sizes.push((hi - lo) as u128);
            }
        }
        let budget = block(spec, j)?.1 as u128;
        let removed = |m: u128, c: u128| -> u128 { sizes.iter().map(|&cl| cl - m * cl / c).sum() };
        let mut best = 1.0f64;
        for &c in &sizes {
            let (mut lo, mut hi) = (0u128, c);
            while lo < hi {
                let mid = (lo + hi) / 2;
                if removed(mid, c) <= budget {
                    hi = mid;
                } else {
                    lo = mid + 1;
                }
            }
            best = best.min(lo as f64 / c as f64);
        }
        s2 = s2.min(best);
    }
    Ok(s2)
}

/// Measures `α` (for the given `β`, `γ`), `S_1` and `S_2` on blocks up to
/// `j_max` (the decay condition uses `Λ` up to `j_max + 1`).
pub fn measure(
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    beta: f64,
    gamma: f64,
    jmax: usize,
) -> Result<RegularityReport> {
    spec.validate()?;
    if jmax == 0 {
        return Err(invalid("window must contain at least one block"));
    }
    let lambdas = block_lambdas(weights, spec, jmax + 1)?;
    let include_first = block(spec, 0)?.1 > 0;
    let alpha = decay_alpha(&lambdas, beta, gamma, include_first);
    Ok(RegularityReport {
        window: jmax,
        block_lambdas: lambdas,
        alpha_required: alpha,
        s1: measured_s1(weights, spec, jmax)?,
        s2: measured_s2(spec, jmax)?,
        decay_ok: true,
        s1_ok: true,
        s2_ok: true,
    })
}

/// Checks claimed constants on the window `1 ≤ j ≤ j_max`.
pub fn verify(
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    reg: &RegularityConstants,
    jmax: usize,
) -> Result<RegularityReport> {
    reg.validate()?;
    let mut rep = measure(weights, spec, reg.beta, reg.gamma, jmax)?;
    rep.decay_ok = rep.alpha_required <= reg.alpha;
    rep.s1_ok = rep.s1 <= reg.s1;
    rep.s2_ok = rep.s2 >= reg.s2;
    Ok(rep)
}

fn block(spec: &TrackingConeSpec, j: usize) -> Result<(usize, usize)> {
    spec.n_seq
        .block(j)
        .ok_or_else(|| invalid(format!("block {j} overflows the position range")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::approximation::tracking::NSequence;
    use crate::spaces::SpaceConfig;
    use crate::weights::{Smoothness, WeightModel};
    use proptest::prelude::*;

    fn spec(seq: NSequence) -> TrackingConeSpec {
        TrackingConeSpec::new(seq, 2.0, 0.5).unwrap()
    }

    /// Exhaustive version of the proportion constant for one `j`: try every
    /// way of distributing `n_j` removals over the blocks.
    fn brute_s2_j(sizes: &[usize], budget: usize) -> f64 {
        fn rec(sizes: &[usize], left: usize, cur: f64) -> f64 {
            match sizes.split_first() {
                None => cur,
                Some((&c, rest)) => {
                    let mut best = f64::INFINITY;
                    for take in 0..=c.min(left) {
                        let frac = (c - take) as f64 / c as f64;
                        best = best.min(rec(rest, left - take, cur.max(frac)));
                    }
                    best
                }
            }
        }
        let nonempty: Vec<usize> = sizes.iter().copied().filter(|&c| c > 0).collect();
        rec(&nonempty, budget, 0.0)
    }

    fn brute_s2(s: &TrackingConeSpec, jmax: usize) -> f64 {
        let mut want = 1.0f64;
        for j in 1..=jmax {
            let sizes: Vec<usize> = (0..=j + 1)
                .map(|l| {
                    let (lo, hi) = s.n_seq.block(l).unwrap();
                    hi - lo
                })
                .collect();
            want = want.min(brute_s2_j(&sizes, s.n_seq.n(j).unwrap()));
        }
        want
    }

    #[test]
    fn s2_geometric_doubling() {
        // blocks 1, 1, 2, 4: four removals can leave at most 3/4 of every
        // block, and the singleton blocks go first
        let s = spec(NSequence::Geometric { n0: 1 });
        assert_eq!(measured_s2(&s, 1).unwrap(), 1.0);
        assert_eq!(measured_s2(&s, 2).unwrap(), 0.75);
        let deep = measured_s2(&s, 12).unwrap();
        assert!(deep > 0.5 && deep < 0.75);
    }

    #[test]
    fn s2_matches_exhaustive_search() {
        for seq in [
            NSequence::Geometric { n0: 1 },
            NSequence::Geometric { n0: 3 },
            NSequence::Arithmetic { n0: 0, step: 3 },
            NSequence::Arithmetic { n0: 5, step: 2 },
        ] {
            let s = spec(seq);
            for j in 1..=3 {
                assert_eq!(measured_s2(&s, j).unwrap(), brute_s2(&s, j), "{seq:?} {j}");
            }
        }
    }

    #[test]
    fn decay_alpha_examples() {
        let lam = [1.0, 0.5, 0.25, 0.125];
        assert_eq!(decay_alpha(&lam, 0.5, 0.5, true), 1.0);
        // with γ = 0.25 the upper condition needs α = 2^r at r = 3
        assert_eq!(decay_alpha(&lam, 0.5, 0.25, true), 8.0);
        assert_eq!(decay_alpha(&[0.0, 1.0, 0.5], 0.5, 0.5, false), 1.0);
        assert_eq!(decay_alpha(&[1.0, 0.0], 0.5, 0.5, true), f64::INFINITY);
    }

    #[test]
    fn one_dimensional_algebraic_is_regular() {
        let cfg = SpaceConfig::new(f64::INFINITY, 1.0).unwrap();
        let m = WeightModel::product(vec![1.0], Smoothness::algebraic(2.0)).unwrap();
        let mut w = OrderedWeights::new(&m, cfg).unwrap();
        let s = spec(NSequence::Geometric { n0: 1 });
        // ρ′ = 1, Λ_j ≈ c 2^{-j}; blocks of λ = k^{-2} have spread ≤ 4
        let rep = measure(&mut w, &s, 0.4, 0.6, 10).unwrap();
        assert!(rep.alpha_required < 3.0, "{}", rep.alpha_required);
        assert!(rep.s1 <= 4.0);
        let reg = RegularityConstants::new(3.0, 0.4, 0.6, 4.0, 0.5).unwrap();
        let rep = verify(&mut w, &s, &reg, 10).unwrap();
        assert!(rep.ok(), "{rep:?}");
        let bad = RegularityConstants::new(1.0, 0.4, 0.3, 4.0, 0.5).unwrap();
        assert!(!verify(&mut w, &s, &bad, 10).unwrap().decay_ok);
    }

    proptest! {
        #[test]
        fn s2_bisection_equals_exhaustive(n0 in 0usize..5, step in 1usize..5, j in 1usize..4) {
            let s = spec(NSequence::Arithmetic { n0, step });
            prop_assert_eq!(measured_s2(&s, j).unwrap(), brute_s2(&s, j));
        }
    }
}
