//! Cone of inputs whose norm is controlled by a pilot sample.
//!
//! Inputs satisfy `‖f‖_F ≤ A ‖(f̂(k)/λ_k)_{k∈K_1}‖_ρ` with `K_1` the first
//! `n_1` wavenumbers. For `n ≥ n_1` this gives the data-based bound
//!
//! ```text
//! ERR(f, n) = [A^ρ P^ρ − S_n^ρ]^{1/ρ} · ‖(λ_{k_i})_{i>n}‖_{ρ′}
//! ```
//!
//! with `P` the pilot norm and `S_n` the norm of the first `n` ratios. For
//! `ρ = ∞` the bracket is taken as its limit `A·P`, valid while
//! `S_n ≤ A·P`.

use serde::{Deserialize, Serialize};

use super::{app_terms, check_radius, check_tolerance, ratio, ApproxOutcome, OrderedWeights, StopReason, Term};
use crate::error::{invalid, Error, Result};
use crate::spaces::{seq_norm, CoefficientOracle, SpaceConfig};

/// Round-off allowance for bracket subtractions, relative to the
/// magnitude of the larger operand.
pub(crate) const CLAMP_ULPS: f64 = 1e3 * f64::EPSILON;

/// Pilot size `n_1` and inflation factor `A > 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PilotConeSpec {
    pub n1: usize,
    #[serde(alias = "A")]
    pub inflation: f64,
}

impl PilotConeSpec {
    pub fn new(n1: usize, inflation: f64) -> Result<Self> {
        let s = PilotConeSpec { n1, inflation };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n1 == 0 {
            return Err(invalid("pilot size must be positive"));
        }
        if !(self.inflation > 1.0 && self.inflation.is_finite()) {
            return Err(invalid(format!("inflation factor must exceed 1, got {}", self.inflation)));
        }
        Ok(())
    }
}

/// `(A^ρ − 1)^{1/ρ}`, or `A` when `ρ = ∞`.
pub fn pilot_factor(rho: f64, inflation: f64) -> f64 {
    if rho.is_infinite() {
        inflation
    } else {
        (inflation.powf(rho) - 1.0).powf(1.0 / rho)
    }
}

/// `ω = (1 − 1/A) / (2 (A^ρ − 1)^{1/ρ})`.
pub fn pilot_omega(rho: f64, inflation: f64) -> f64 {
    (1.0 - 1.0 / inflation) / (2.0 * pilot_factor(rho, inflation))
}

/// `[A^ρ q − q_n]^{1/ρ}` in units of the pilot norm, where `q = S^ρ/P^ρ`.
/// Returns `None` when the bracket is negative beyond round-off.
fn bracket_root(rho: f64, inflation: f64, q: f64) -> Option<f64> {
    let big = inflation.powf(rho);
    let inner = big - q;
    if inner >= 0.0 {
        Some(inner.powf(1.0 / rho))
    } else if -inner <= CLAMP_ULPS * big {
        Some(0.0)
    } else {
        None
    }
}

fn times_tail(x: f64, tail: f64) -> f64 {
    if tail == 0.0 || x == 0.0 {
        0.0
    } else {
        x * tail
    }
}

/// `ERR(f, n)` from the pilot norm `P`, the partial norm `S_n ≥ P`, and the
/// tail weight norm. Fails when `S_n` exceeds `A·P` beyond round-off, which
/// means the input is outside the cone.
pub fn pilot_err_bound(
    cfg: &SpaceConfig,
    pilot_norm: f64,
    partial_norm: f64,
    tail: f64,
    inflation: f64,
) -> Result<f64> {
    if !(pilot_norm >= 0.0 && partial_norm >= 0.0 && tail >= 0.0) {
        return Err(invalid("norms must be non-negative"));
    }
    if !(inflation > 1.0) {
        return Err(invalid("inflation factor must exceed 1"));
    }
    let rho = cfg.rho();
    let outside = || Error::Precondition(format!(
        "partial norm {partial_norm} exceeds A times the pilot norm {pilot_norm}"
    ));
    if pilot_norm == 0.0 {
        return if partial_norm == 0.0 { Ok(0.0) } else { Err(outside()) };
    }
    if rho.is_infinite() {
        if partial_norm > inflation * pilot_norm * (1.0 + CLAMP_ULPS) {
            return Err(outside());
        }
        return Ok(times_tail(pilot_norm * inflation, tail));
    }
    let q = (partial_norm / pilot_norm).powf(rho);
    let root = bracket_root(rho, inflation, q).ok_or_else(outside)?;
    Ok(times_tail(pilot_norm * root, tail))
}

/// `‖(ratios_i)_{i≤n}‖_ρ ≤ A ‖(ratios_i)_{i≤n_1}‖_ρ`, the condition every
/// cone member satisfies at every `n ≥ n_1`.
pub fn pilot_necessary_check(ratios: &[f64], n1: usize, rho: f64, inflation: f64) -> bool {
    let n1 = n1.min(ratios.len());
    let p = seq_norm(&ratios[..n1], rho);
    let s = seq_norm(ratios, rho);
    s <= inflation * p * (1.0 + CLAMP_ULPS)
}

/// Running pilot and partial norms.
struct PilotState {
    rho: f64,
    inflation: f64,
    pilot_norm: f64,
    // for finite ρ: Σ (r/scale)^ρ over the pilot and over all samples
    scale: f64,
    pilot_pow: f64,
    partial_pow: f64,
    // for ρ = ∞
    partial_sup: f64,
}

impl PilotState {
    fn new(rho: f64, inflation: f64, pilot: &[f64]) -> Self {
        let pilot_norm = seq_norm(pilot, rho);
        let scale = pilot.iter().fold(0.0f64, |m, r| m.max(*r));
        let pilot_pow = if rho.is_finite() && scale > 0.0 && scale.is_finite() {
            pilot.iter().map(|r| (r / scale).powf(rho)).sum()
        } else {
            0.0
        };
        PilotState {
            rho,
            inflation,
            pilot_norm,
            scale,
            pilot_pow,
            partial_pow: pilot_pow,
            partial_sup: scale,
        }
    }

    fn add(&mut self, r: f64) {
        self.partial_sup = self.partial_sup.max(r);
        if self.rho.is_finite() && r != 0.0 {
            self.partial_pow += if self.scale > 0.0 { (r / self.scale).powf(self.rho) } else { f64::INFINITY };
        }
    }

    /// (ERR, outside the cone)
    fn err(&self, tail: f64) -> (f64, bool) {
        if self.pilot_norm == 0.0 {
            let outside = self.partial_sup > 0.0;
            return (0.0, outside);
        }
        if !self.pilot_norm.is_finite() {
            return (f64::INFINITY, false);
        }
        if self.rho.is_infinite() {
            let outside = self.partial_sup > self.inflation * self.pilot_norm * (1.0 + CLAMP_ULPS);
            return (times_tail(self.pilot_norm * self.inflation, tail), outside);
        }
        let q = self.partial_pow / self.pilot_pow;
        match bracket_root(self.rho, self.inflation, q) {
            Some(root) => (times_tail(self.pilot_norm * root, tail), false),
            None => (0.0, true),
        }
    }
}

/// Adaptive algorithm for the pilot cone: sample the pilot, then add one
/// coefficient at a time until `ERR(f, n) ≤ ε`.
///
/// A failed cone check is recorded in `cone_violated` and the loop goes
/// on; the bound is then no longer certified.
pub fn alg_pilot(
    oracle: &mut CoefficientOracle<'_>,
    weights: &mut OrderedWeights,
    spec: &PilotConeSpec,
    eps: f64,
    budget: usize,
) -> Result<ApproxOutcome> {
    spec.validate()?;
    check_tolerance(eps)?;
    let rho = weights.cfg().rho();
    let n1 = weights.ensure(spec.n1);
    let mut terms: Vec<Term> = app_terms(oracle, weights, 0, n1)?;
    let pilot: Vec<f64> = terms
        .iter()
        .enumerate()
        .map(|(i, t)| ratio(t.coef, weights.lambdas()[i]))
        .collect();
    let mut state = PilotState::new(rho, spec.inflation, &pilot);
    let mut violated = false;
    let mut n = n1;
    loop {
        let (err, outside) = state.err(weights.tail(n));
        violated |= outside;
        if err <= eps {
            return Ok(finish(oracle, terms, err, StopReason::ToleranceMet, violated));
        }
        if n >= budget || weights.ensure(n + 1) <= n {
            return Ok(finish(oracle, terms, err, StopReason::BudgetExhausted, violated));
        }
        let mut next = app_terms(oracle, weights, n, n + 1)?;
        let t = next.pop().expect("one term");
        state.add(ratio(t.coef, weights.lambdas()[n]));
        terms.push(t);
        n += 1;
    }
}

fn finish(
    oracle: &CoefficientOracle<'_>,
    terms: Vec<Term>,
    err: f64,
    stopped_by: StopReason,
    cone_violated: bool,
) -> ApproxOutcome {
    ApproxOutcome {
        terms,
        n_used: oracle.cost(),
        final_error_bound: err,
        stopped_by,
        cone_violated,
    }
}

/// Worst-case cost over the cone within `B_R`:
/// `min{n ≥ n_1 : (A^ρ − 1)^{1/ρ} R · tail(n) ≤ ε}`.
pub fn pilot_cost_bound(
    weights: &mut OrderedWeights,
    spec: &PilotConeSpec,
    eps: f64,
    radius: f64,
    cap: usize,
) -> Result<usize> {
    spec.validate()?;
    check_tolerance(eps)?;
    check_radius(radius)?;
    let factor = radius * pilot_factor(weights.cfg().rho(), spec.inflation);
    scan(weights, spec.n1, cap, |tail| times_tail(factor, tail) <= eps)
}

/// Complexity lower bound:
/// `min{n ≥ n_1 : tail(n) ≤ 2ε / ((1 − 1/A) R)}`.
pub fn pilot_complexity_lower(
    weights: &mut OrderedWeights,
    spec: &PilotConeSpec,
    eps: f64,
    radius: f64,
    cap: usize,
) -> Result<usize> {
    spec.validate()?;
    check_tolerance(eps)?;
    check_radius(radius)?;
    let factor = (1.0 - 1.0 / spec.inflation) * radius / 2.0;
    scan(weights, spec.n1, cap, |tail| times_tail(factor, tail) <= eps)
}

fn scan(weights: &mut OrderedWeights, start: usize, cap: usize, done: impl Fn(f64) -> bool) -> Result<usize> {
    let start = weights.ensure(start);
    let mut n = start;
    loop {
        if done(weights.tail(n)) {
            return Ok(n);
        }
        if n >= cap {
            return Err(Error::BudgetExhausted { budget: cap });
        }
        n += 1;
    }
}
