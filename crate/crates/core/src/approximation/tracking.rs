//! Cone of inputs whose blockwise coefficient norms decay steadily.
//!
//! Positions are grouped into blocks `K_j = {n_{j−1}+1, …, n_j}` (with
//! `n_{−1} = 0`). Writing `σ_j` for the `ρ`-norm of `f̂/λ` over `K_j` and
//! `Λ_j` for the `ρ′`-norm of `λ` over `K_j`, cone members satisfy
//! `σ_{j+r} ≤ a b^r σ_j` for `j, r ≥ 1`, so that
//!
//! ```text
//! ‖SOL(f) − APP(f, n_j)‖ ≤ a σ_j ‖(b^r Λ_{j+r})_{r≥1}‖_τ = ERR_j.
//! ```
//!
//! The infinite norm on the right is evaluated exactly over a lookahead
//! window and bounded above past it, so the computed `ERR_j` never
//! understates the true one.

use serde::{Deserialize, Serialize};

use super::pilot::CLAMP_ULPS;
use super::regularity::RegularityConstants;
use super::{app_terms, check_radius, check_tolerance, ratio, ApproxOutcome, OrderedWeights, StopReason, Term};
use crate::error::{invalid, Error, Result};
use crate::spaces::{seq_norm, CoefficientOracle};

/// Largest position the lookahead in `ERR_j` will enumerate to.
pub const LOOKAHEAD_CAP: usize = 4_000_000;

/// Block end points `(n_j)_{j≥0}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum NSequence {
    /// `n_j = n_0 2^j`
    Geometric { n0: usize },
    /// `n_j = n_0 + j s`
    Arithmetic { n0: usize, step: usize },
}

impl NSequence {
    pub fn validate(&self) -> Result<()> {
        match *self {
            NSequence::Geometric { n0: 0 } => Err(invalid("geometric sequence needs n0 ≥ 1")),
            NSequence::Arithmetic { step: 0, .. } => Err(invalid("arithmetic step must be positive")),
            _ => Ok(()),
        }
    }

    /// `n_j`, or `None` on overflow.
    pub fn n(&self, j: usize) -> Option<usize> {
        match *self {
            NSequence::Geometric { n0 } => {
                let shift = u32::try_from(j).ok()?;
                n0.checked_mul(1usize.checked_shl(shift)?)
            }
            NSequence::Arithmetic { n0, step } => step.checked_mul(j)?.checked_add(n0),
        }
    }

    /// 0-based position range of `K_j`.
    pub fn block(&self, j: usize) -> Option<(usize, usize)> {
        let lo = if j == 0 { 0 } else { self.n(j - 1)? };
        Some((lo, self.n(j)?))
    }
}

/// Parameters `(n_j)`, `a > 1`, `0 < b < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingConeSpec {
    pub n_seq: NSequence,
    pub a: f64,
    pub b: f64,
}

impl TrackingConeSpec {
    pub fn new(n_seq: NSequence, a: f64, b: f64) -> Result<Self> {
        let s = TrackingConeSpec { n_seq, a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.n_seq.validate()?;
        if !(self.a > 1.0 && self.a.is_finite()) {
            return Err(invalid(format!("inflation factor a must exceed 1, got {}", self.a)));
        }
        if !(self.b > 0.0 && self.b < 1.0) {
            return Err(invalid(format!("decay rate b must lie in (0, 1), got {}", self.b)));
        }
        Ok(())
    }

    fn block(&self, j: usize) -> Result<(usize, usize)> {
        self.n_seq
            .block(j)
            .ok_or_else(|| invalid(format!("block {j} overflows the position range")))
    }
}

/// `(1 − x^p)^{1/p}`, which is 1 for `p = ∞`.
pub(crate) fn one_minus_pow_root(x: f64, p: f64) -> f64 {
    if p.is_infinite() {
        1.0
    } else {
        (1.0 - x.powf(p)).powf(1.0 / p)
    }
}

/// `[1 + (1/S_2 − 1) S_1^ρ]^{1/ρ}` and its limit as `ρ → ∞`.
pub(crate) fn proportion_factor(rho: f64, s1: f64, s2: f64) -> f64 {
    if rho.is_infinite() {
        if s2 < 1.0 {
            s1
        } else {
            1.0
        }
    } else {
        (1.0 + (1.0 / s2 - 1.0) * s1.powf(rho)).powf(1.0 / rho)
    }
}

/// `Λ_j`.
pub fn block_lambda(weights: &mut OrderedWeights, spec: &TrackingConeSpec, j: usize) -> Result<f64> {
    let (lo, hi) = spec.block(j)?;
    Ok(weights.block_norm(lo, hi))
}

/// `σ_j`, sampling the block through the oracle.
pub fn block_sigma(
    oracle: &mut CoefficientOracle<'_>,
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    j: usize,
) -> Result<f64> {
    let (lo, hi) = spec.block(j)?;
    let terms = app_terms(oracle, weights, lo, hi)?;
    Ok(sigma_of(weights, lo, &terms))
}

fn sigma_of(weights: &OrderedWeights, lo: usize, terms: &[Term]) -> f64 {
    let lams = weights.lambdas();
    let r: Vec<f64> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| ratio(t.coef, lams[lo + i]))
        .collect();
    seq_norm(&r, weights.cfg().rho())
}

/// Upper bound on `‖(b^r Λ_{j+r})_{r≥1}‖_τ`, exact through the blocks
/// that end within the lookahead window.
pub fn lookahead_norm(weights: &mut OrderedWeights, spec: &TrackingConeSpec, j: usize) -> Result<f64> {
    let tau = weights.cfg().tau();
    let b = spec.b;
    let next = spec.block(j + 1)?.1;
    let limit = next.saturating_mul(16).max(next.saturating_add(4096)).min(LOOKAHEAD_CAP);
    let mut parts = Vec::new();
    let mut end = spec.block(j)?.1;
    let mut r = 1usize;
    loop {
        let (lo, hi) = match spec.n_seq.block(j + r) {
            Some(x) if x.1 <= limit => x,
            _ => break,
        };
        parts.push(b.powi(r as i32) * weights.block_norm(lo, hi));
        end = hi;
        r += 1;
    }
    let tail = weights.tail(end);
    if tail > 0.0 {
        let rest = tail * b.powi(r as i32) / one_minus_pow_root(b, tau);
        parts.push(rest);
    }
    Ok(seq_norm(&parts, tau))
}

/// `ERR_j = a σ_j ‖(b^r Λ_{j+r})_{r≥1}‖_τ`.
pub fn tracking_err_bound(
    sigma_j: f64,
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    j: usize,
) -> Result<f64> {
    spec.validate()?;
    if !(sigma_j >= 0.0) {
        return Err(invalid("σ_j must be non-negative"));
    }
    if sigma_j == 0.0 {
        return Ok(0.0);
    }
    let err = spec.a * sigma_j * lookahead_norm(weights, spec, j)?;
    if err.is_nan() {
        return Err(Error::Certificate(format!("error bound for block {j} is undefined")));
    }
    Ok(err)
}

/// Adaptive algorithm for the tracking cone: for `j = 1, 2, …` sample
/// `K_j` and stop once `ERR_j ≤ ε`; the answer is `APP(f, n_j)`.
///
/// `cone_violated` is set when the observed `σ_j` break
/// `σ_{j} ≤ a b^{j−i} σ_i` for some earlier `i ≥ 1`.
pub fn alg_tracking(
    oracle: &mut CoefficientOracle<'_>,
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    eps: f64,
    budget: usize,
) -> Result<ApproxOutcome> {
    spec.validate()?;
    check_tolerance(eps)?;
    let (_, n0) = spec.block(0)?;
    if n0 > budget {
        return Ok(ApproxOutcome {
            terms: Vec::new(),
            n_used: oracle.cost(),
            final_error_bound: f64::INFINITY,
            stopped_by: StopReason::BudgetExhausted,
            cone_violated: false,
        });
    }
    let mut terms = app_terms(oracle, weights, 0, n0)?;
    let mut sigmas: Vec<f64> = Vec::new();
    let mut violated = false;
    let mut last_err = f64::INFINITY;
    let mut j = 1;
    loop {
        let (lo, hi) = spec.block(j)?;
        if hi > budget {
            return Ok(ApproxOutcome {
                terms,
                n_used: oracle.cost(),
                final_error_bound: last_err,
                stopped_by: StopReason::BudgetExhausted,
                cone_violated: violated,
            });
        }
        let block = app_terms(oracle, weights, lo, hi)?;
        let sigma = sigma_of(weights, lo, &block);
        terms.extend(block);
        for (i, &s) in sigmas.iter().enumerate() {
            let allowed = spec.a * spec.b.powi((j - 1 - i) as i32) * s;
            if sigma > allowed * (1.0 + CLAMP_ULPS) {
                violated = true;
            }
        }
        sigmas.push(sigma);
        last_err = tracking_err_bound(sigma, weights, spec, j)?;
        if last_err <= eps {
            return Ok(ApproxOutcome {
                terms,
                n_used: oracle.cost(),
                final_error_bound: last_err,
                stopped_by: StopReason::ToleranceMet,
                cone_violated: violated,
            });
        }
        j += 1;
    }
}

/// Index `j†` and cost bound `n_{j†}` over the cone within `B_R`, with
/// `j† = min{j ≥ 1 : b^j N_j ≤ (bε/(R a²)) ((1 − b^{jρ})/(1 − b^ρ))^{1/ρ}}`
/// and `N_j` the same lookahead norm the algorithm uses.
pub fn tracking_cost_bound(
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    eps: f64,
    radius: f64,
    cap: usize,
) -> Result<(usize, usize)> {
    spec.validate()?;
    check_tolerance(eps)?;
    check_radius(radius)?;
    let rho = weights.cfg().rho();
    let (a, b) = (spec.a, spec.b);
    let scale = b * eps / (radius * a * a);
    let mut j = 1;
    loop {
        let (_, hi) = spec.block(j)?;
        if hi > cap {
            return Err(Error::BudgetExhausted { budget: cap });
        }
        let growth = if rho.is_infinite() {
            1.0
        } else {
            ((1.0 - b.powf(j as f64 * rho)) / (1.0 - b.powf(rho))).powf(1.0 / rho)
        };
        let lhs = b.powi(j as i32) * lookahead_norm(weights, spec, j)?;
        if lhs <= scale * growth {
            return Ok((j, hi));
        }
        j += 1;
    }
}

/// Complexity lower bound index `j‡` and `n_{j‡}` (the complexity exceeds
/// `n_{j‡}`), or `None` when no `j ≥ 1` qualifies.
///
/// `j‡ = max{j ≥ 1 : b^{j+1} Λ_{j+1} > 2aαε [1 + (1/S_2 − 1)S_1^ρ]^{1/ρ} / (R(a−1)(1 − b^ρ)^{1/ρ})}`.
/// The scan stops once `α b^{j+1} Λ_{j+1}` falls to the threshold, past
/// which the decay condition rules out further members.
pub fn tracking_complexity_lower(
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    reg: &RegularityConstants,
    eps: f64,
    radius: f64,
    cap: usize,
) -> Result<Option<(usize, usize)>> {
    spec.validate()?;
    reg.validate()?;
    check_tolerance(eps)?;
    check_radius(radius)?;
    let rho = weights.cfg().rho();
    let (a, b) = (spec.a, spec.b);
    let thr = 2.0 * a * reg.alpha * eps * proportion_factor(rho, reg.s1, reg.s2)
        / (radius * (a - 1.0) * one_minus_pow_root(b, rho));
    let mut best = None;
    let mut j = 1;
    loop {
        let (_, hi) = spec.block(j + 1)?;
        if hi > cap {
            return Err(Error::BudgetExhausted { budget: cap });
        }
        let v = b.powi(j as i32 + 1) * block_lambda(weights, spec, j + 1)?;
        if v > thr {
            best = Some((j, spec.block(j)?.1));
        }
        if reg.alpha * v <= thr {
            return Ok(best);
        }
        j += 1;
    }
}

/// `ω = (a−1) b³ β² (1−b^ρ)^{1/ρ} [1−(γb)^τ]^{1/τ} / (2 a³ α⁴) · [1 + (1/S_2 − 1) S_1^ρ]^{−1/ρ}`.
pub fn tracking_omega(spec: &TrackingConeSpec, reg: &RegularityConstants, rho: f64, tau: f64) -> f64 {
    let (a, b) = (spec.a, spec.b);
    (a - 1.0) * b.powi(3) * reg.beta.powi(2) * one_minus_pow_root(b, rho) * one_minus_pow_root(reg.gamma * b, tau)
        / (2.0 * a.powi(3) * reg.alpha.powi(4))
        / proportion_factor(rho, reg.s1, reg.s2)
}
