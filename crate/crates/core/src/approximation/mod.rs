//! Approximation from the largest-weight coefficients and the adaptive
//! algorithms built on it.
//!
//! `APP(f, n)` keeps the coefficients of the first `n` wavenumbers of the
//! weight order. Its error in the output norm is the `τ`-norm of the
//! discarded coefficients, and for `‖f‖_F ≤ R` it is at most
//! `R ‖(λ_{k_i})_{i>n}‖_{ρ′}`. That tail factor is what [`OrderedWeights`]
//! provides.

pub mod cones;
pub mod pilot;
pub mod regularity;
pub mod tracking;

use serde::{Deserialize, Serialize};

use crate::enumeration::WavenumberStream;
use crate::error::{Error, Result};
use crate::spaces::{seq_norm, CoefficientOracle, CoefficientSource, SpaceConfig};
use crate::weights::WeightModel;

pub use pilot::{
    alg_pilot, pilot_complexity_lower, pilot_cost_bound, pilot_err_bound, pilot_necessary_check,
    pilot_omega, PilotConeSpec,
};
pub use regularity::{RegularityConstants, RegularityReport};
pub use tracking::{
    alg_tracking, tracking_complexity_lower, tracking_cost_bound, tracking_err_bound,
    tracking_omega, NSequence, TrackingConeSpec,
};

/// Default cap on the number of coefficients an algorithm may use.
pub const DEFAULT_BUDGET: usize = 1_000_000;

/// The weight order of one model together with its `ρ′` tail norms.
#[derive(Debug, Clone)]
pub struct OrderedWeights {
    stream: WavenumberStream,
    cfg: SpaceConfig,
    // Σ_k λ_k^{ρ′}, unused when ρ′ = ∞
    total: f64,
    // prefix[i] = Σ_{m<i} λ_{k_{m+1}}^{ρ′}, compensated
    prefix: Vec<f64>,
    sum: f64,
    carry: f64,
}

impl OrderedWeights {
    pub fn new(model: &WeightModel, cfg: SpaceConfig) -> Result<Self> {
        let rp = cfg.rho_prime();
        let total = if rp.is_finite() {
            let t = model.power_sum(rp);
            if t.is_infinite() {
                return Err(Error::DivergentNorm { exponent: rp });
            }
            t
        } else {
            f64::INFINITY
        };
        Ok(OrderedWeights {
            stream: WavenumberStream::new(model)?,
            cfg,
            total,
            prefix: vec![0.0],
            sum: 0.0,
            carry: 0.0,
        })
    }

    pub fn cfg(&self) -> &SpaceConfig {
        &self.cfg
    }

    pub fn model(&self) -> &WeightModel {
        self.stream.model()
    }

    pub fn dim(&self) -> usize {
        self.stream.dim()
    }

    /// Generates the first `n` positions; returns how many exist.
    pub fn ensure(&mut self, n: usize) -> usize {
        let m = self.stream.ensure(n);
        if self.cfg.rho_prime().is_finite() {
            let rp = self.cfg.rho_prime();
            let lams = self.stream.lambdas();
            for &lam in &lams[self.prefix.len() - 1..] {
                // Neumaier summation
                let x = lam.powf(rp);
                let t = self.sum + x;
                if self.sum.abs() >= x.abs() {
                    self.carry += (self.sum - t) + x;
                } else {
                    self.carry += (x - t) + self.sum;
                }
                self.sum = t;
                self.prefix.push(self.sum + self.carry);
            }
        }
        m
    }

    /// `λ_{k_{i+1}}` (0-based position `i`), 0 past a finite stream's end.
    pub fn lambda(&mut self, i: usize) -> f64 {
        self.stream.lambda_or_zero(i)
    }

    /// Wavenumber at a generated position.
    pub fn wavenumber(&self, i: usize) -> &[u32] {
        self.stream.wavenumber(i)
    }

    /// Wavenumber at position `i`, generating it if needed.
    pub fn wavenumber_owned(&mut self, i: usize) -> Vec<u32> {
        self.ensure(i + 1);
        self.stream.wavenumber(i).to_vec()
    }

    pub fn lambdas(&self) -> &[f64] {
        self.stream.lambdas()
    }

    /// `‖(λ_{k_i})_{i=n+1}^∞‖_{ρ′}`.
    pub fn tail(&mut self, n: usize) -> f64 {
        let rp = self.cfg.rho_prime();
        let next = self.stream.lambda_or_zero(n);
        if rp.is_infinite() || next == 0.0 {
            return next;
        }
        self.ensure(n + 1);
        let rest = (self.total - self.prefix[n]).max(0.0);
        // the tail is never below its own first term
        rest.powf(1.0 / rp).max(next)
    }

    /// `‖(λ_{k_i})_{lo < i ≤ hi}‖_{ρ′}`, i.e. the norm over 0-based
    /// positions `lo..hi`.
    pub fn block_norm(&mut self, lo: usize, hi: usize) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let m = self.ensure(hi);
        if m <= lo {
            return 0.0;
        }
        seq_norm(&self.stream.lambdas()[lo..m], self.cfg.rho_prime())
    }

    /// `min{n ≥ start : tail(n) ≤ threshold}`, scanning at most to `cap`.
    pub fn first_tail_at_most(&mut self, threshold: f64, start: usize, cap: usize) -> Result<usize> {
        let mut n = start;
        loop {
            if self.tail(n) <= threshold {
                return Ok(n);
            }
            if n >= cap {
                return Err(Error::BudgetExhausted { budget: cap });
            }
            n += 1;
        }
    }
}

/// One retained term of an approximation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub k: Vec<u32>,
    pub coef: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StopReason {
    ToleranceMet,
    BudgetExhausted,
}

/// Result of an approximation algorithm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApproxOutcome {
    /// Coefficients of `APP(f, n)`, in sample order.
    pub terms: Vec<Term>,
    /// Distinct coefficients sampled, including any that were not kept.
    pub n_used: usize,
    pub final_error_bound: f64,
    pub stopped_by: StopReason,
    pub cone_violated: bool,
}

impl ApproxOutcome {
    pub fn tolerance_met(&self) -> bool {
        self.stopped_by == StopReason::ToleranceMet
    }

    /// `‖SOL(f) − APP‖_G` for a finitely supported source, computed from
    /// the discarded coefficients.
    pub fn residual_norm(&self, source: &crate::spaces::CoefficientTable, tau: f64) -> f64 {
        let kept: std::collections::HashMap<&[u32], f64> =
            self.terms.iter().map(|t| (t.k.as_slice(), t.coef)).collect();
        let rest: Vec<f64> = source
            .entries()
            .map(|(k, c)| c - kept.get(k).copied().unwrap_or(0.0))
            .collect();
        seq_norm(&rest, tau)
    }
}

/// `APP(f, n)`: the coefficients of the first `n` wavenumbers (fewer when
/// the weight order runs out of positive weights).
pub fn app(oracle: &mut CoefficientOracle<'_>, weights: &mut OrderedWeights, n: usize) -> Result<Vec<Term>> {
    app_terms(oracle, weights, 0, n)
}

/// Samples positions `lo..hi` of the weight order.
pub(crate) fn app_terms(
    oracle: &mut CoefficientOracle<'_>,
    weights: &mut OrderedWeights,
    lo: usize,
    hi: usize,
) -> Result<Vec<Term>> {
    let m = weights.ensure(hi);
    (lo.min(m)..m)
        .map(|i| {
            let k = weights.wavenumber(i).to_vec();
            let coef = oracle.query(&k)?;
            Ok(Term { k, coef })
        })
        .collect()
}

/// Non-adaptive cost for the ball `B_R`: `min{n : tail(n) ≤ ε/R}`.
pub fn ball_cost(weights: &mut OrderedWeights, radius: f64, eps: f64, cap: usize) -> Result<usize> {
    check_tolerance(eps)?;
    check_radius(radius)?;
    weights.first_tail_at_most(eps / radius, 0, cap)
}

/// Non-adaptive algorithm for inputs in `B_R`: choose `n*` from the
/// weights alone, then return `APP(f, n*)`.
pub fn alg_ball(
    oracle: &mut CoefficientOracle<'_>,
    weights: &mut OrderedWeights,
    radius: f64,
    eps: f64,
    budget: usize,
) -> Result<ApproxOutcome> {
    let (n, stopped_by) = match ball_cost(weights, radius, eps, budget) {
        Ok(n) => (n, StopReason::ToleranceMet),
        Err(Error::BudgetExhausted { .. }) => (budget, StopReason::BudgetExhausted),
        Err(e) => return Err(e),
    };
    let terms = app(oracle, weights, n)?;
    Ok(ApproxOutcome {
        terms,
        n_used: oracle.cost(),
        final_error_bound: radius * weights.tail(n),
        stopped_by,
        cone_violated: false,
    })
}

pub(crate) fn check_tolerance(eps: f64) -> Result<()> {
    if eps > 0.0 && !eps.is_nan() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("tolerance must be positive, got {eps}")))
    }
}

pub(crate) fn check_radius(radius: f64) -> Result<()> {
    if radius > 0.0 && radius.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("radius must be positive, got {radius}")))
    }
}

/// `f̂(k)/λ_k` with `0/0 = 0` and `x/0 = ∞`.
pub(crate) fn ratio(coef: f64, lambda: f64) -> f64 {
    if coef == 0.0 {
        0.0
    } else if lambda == 0.0 {
        f64::INFINITY
    } else {
        (coef / lambda).abs()
    }
}

/// Convenience: a fresh oracle over any source.
pub fn oracle_for(source: &dyn CoefficientSource) -> CoefficientOracle<'_> {
    CoefficientOracle::new(source)
}
