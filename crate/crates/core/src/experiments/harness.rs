//! Runs the inferred-weight algorithm on seeded random functions and
//! records sample sizes and errors.

use std::collections::HashSet;
use std::io::Write;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::grid::{EvaluationGrid, GridConfig};
use super::random_function::RandomPosdFunction;
use crate::approximation::{ApproxOutcome, OrderedWeights};
use crate::error::{invalid, Result};
use crate::exec::{self, Execution};
use crate::inference::{alg_inferred, CandidateSets, InferredSpec};
use crate::spaces::{CoefficientOracle, CoefficientSource, SpaceConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    /// Row `i` of every `(d, ε)` uses seed `seed + i`.
    pub seed: u64,
    pub replications: usize,
    #[serde(alias = "A")]
    pub inflation: f64,
    pub n1: Option<usize>,
    pub candidates: CandidateSets,
    pub space: SpaceConfig,
    pub budget: usize,
    /// The true function is truncated where the remaining `Σ λ^tr` drops
    /// to this multiple of `ε`.
    pub truncation_factor: f64,
    /// Most terms the truncated true function may have.
    pub truncation_cap: usize,
    /// Beyond the point where the remaining `Σ λ^tr` drops to this
    /// multiple of `ε`, point grids bound terms by their absolute values
    /// instead of evaluating them.
    pub split_factor: f64,
    pub grid: GridConfig,
    pub record_wall_time: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dims: vec![4],
            eps: vec![1e-1, 1e-2, 1e-3],
            seed: 0,
            replications: 20,
            inflation: 1.1,
            n1: None,
            candidates: CandidateSets::default(),
            space: SpaceConfig::new(f64::INFINITY, 1.0).expect("valid exponents"),
            budget: crate::approximation::DEFAULT_BUDGET,
            truncation_factor: 1e-3,
            truncation_cap: 1 << 23,
            split_factor: 0.05,
            grid: GridConfig::default(),
            record_wall_time: false,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.contains(&0) {
            return Err(invalid("dims must list positive dimensions"));
        }
        if self.eps.is_empty() || self.eps.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(invalid("eps must list positive tolerances"));
        }
        if self.replications == 0 {
            return Err(invalid("replications must be positive"));
        }
        if !(self.inflation > 1.0) {
            return Err(invalid("inflation factor must exceed 1"));
        }
        if !(self.truncation_factor > 0.0 && self.split_factor >= self.truncation_factor) {
            return Err(invalid("need 0 < truncation_factor ≤ split_factor"));
        }
        if self.space.tau() != 1.0 {
            return Err(invalid("the error estimates assume τ = 1"));
        }
        self.candidates.validate()
    }

    /// `(d, ε, seed)` in output order.
    pub fn row_keys(&self) -> Vec<(usize, f64, u64)> {
        let mut keys = Vec::new();
        for &d in &self.dims {
            for &e in &self.eps {
                for i in 0..self.replications {
                    keys.push((d, e, self.seed.wrapping_add(i as u64)));
                }
            }
        }
        keys
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub d: usize,
    pub eps: f64,
    pub seed: u64,
    pub n_used: Option<usize>,
    pub sup_error: Option<f64>,
    pub ratio: Option<f64>,
    pub g_norm_error: Option<f64>,
    pub inferred_r: Option<f64>,
    pub status: String,
    pub wall_ms: Option<u64>,
}

impl ExperimentRow {
    pub fn completed(&self) -> bool {
        self.status == "ok"
    }
}

/// Upper estimates of `‖f − ALG(f, ε)‖` in the sup norm and the output
/// norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorEstimate {
    /// Grid maximum of the residual over the evaluated terms, plus the
    /// absolute sum of the rest and the truncation remainder.
    pub sup_error: f64,
    /// `Σ |f̂(k)|` over discarded `k` up to truncation, plus the remainder.
    pub g_norm_error: f64,
    pub truncated_terms: usize,
    pub remainder: f64,
}

/// Compares an approximation of `f` with `f` truncated along the true
/// weight order. The truncation remainder `Σ_{i>N} λ^tr_{k_i}` bounds the
/// absolute sum of every coefficient left out.
pub fn estimate_errors(
    f: &RandomPosdFunction,
    outcome: &ApproxOutcome,
    eps: f64,
    cfg: &ExperimentConfig,
    exec: Execution,
) -> Result<ErrorEstimate> {
    let l1 = SpaceConfig::new(f64::INFINITY, 1.0)?;
    let mut truth = OrderedWeights::new(f.truth(), l1)?;
    let cap = cfg.truncation_cap;
    let n_trunc = truth
        .first_tail_at_most(cfg.truncation_factor * eps, 0, cap)
        .map_err(|_| crate::Error::Certificate(format!("truncation of the true function exceeds {cap} terms")))?;
    let remainder = truth.tail(n_trunc);
    let n_split = truth.first_tail_at_most(cfg.split_factor * eps, 0, n_trunc)?;

    let kept: HashSet<&[u32]> = outcome.terms.iter().map(|t| t.k.as_slice()).collect();
    let mut head: Vec<(&[u32], f64)> = Vec::new();
    let mut rest_abs = 0.0;
    let mut g_norm = 0.0;
    let grid = cfg.grid.grid(f.dim());
    let tensor = matches!(grid, EvaluationGrid::Tensor { .. });
    for i in 0..n_trunc {
        let k = truth.wavenumber(i);
        if kept.contains(k) {
            continue;
        }
        let c = f.coefficient(k);
        g_norm += c.abs();
        if tensor || i < n_split {
            head.push((k, c));
        } else {
            rest_abs += c.abs();
        }
    }
    let sup = grid.max_abs(&head, exec) + rest_abs + remainder;
    Ok(ErrorEstimate {
        sup_error: sup,
        g_norm_error: g_norm + remainder,
        truncated_terms: n_trunc,
        remainder,
    })
}

/// One experiment row. Failures become rows with an error status.
pub fn run_row(cfg: &ExperimentConfig, d: usize, eps: f64, seed: u64, exec: Execution) -> ExperimentRow {
    let start = Instant::now();
    let mut row = ExperimentRow {
        d,
        eps,
        seed,
        n_used: None,
        sup_error: None,
        ratio: None,
        g_norm_error: None,
        inferred_r: None,
        status: String::new(),
        wall_ms: None,
    };
    let result = (|| -> Result<()> {
        let f = RandomPosdFunction::new(seed, d)?;
        let mut oracle = CoefficientOracle::new(&f);
        let spec = InferredSpec { inflation: cfg.inflation, n1: cfg.n1 };
        let gamma = vec![1.0; d + 1];
        let (outcome, inferred) =
            alg_inferred(&mut oracle, &cfg.space, &cfg.candidates, &gamma, &spec, eps, cfg.budget, exec)?;
        row.n_used = Some(outcome.n_used);
        row.inferred_r = Some(inferred.r_bar);
        let est = estimate_errors(&f, &outcome, eps, cfg, exec)?;
        row.sup_error = Some(est.sup_error);
        row.ratio = Some(est.sup_error / eps);
        row.g_norm_error = Some(est.g_norm_error);
        row.status = if outcome.tolerance_met() { "ok" } else { "budget_exhausted" }.to_string();
        Ok(())
    })();
    if let Err(e) = result {
        row.status = format!("error: {e}");
    }
    if cfg.record_wall_time {
        row.wall_ms = Some(start.elapsed().as_millis() as u64);
    }
    log::info!("d={d} eps={eps} seed={seed} status={} n={:?}", row.status, row.n_used);
    row
}

/// All rows of a configuration, in [`ExperimentConfig::row_keys`] order.
pub fn run_experiment(cfg: &ExperimentConfig, exec: Execution) -> Result<Vec<ExperimentRow>> {
    cfg.validate()?;
    let keys = cfg.row_keys();
    Ok(exec::map(exec, &keys, |&(d, e, s)| run_row(cfg, d, e, s, Execution::Sequential)))
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| invalid(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| invalid(format!("csv: {e}")))?;
    Ok(())
}

pub fn write_jsonl<W: Write>(rows: &[ExperimentRow], mut out: W) -> Result<()> {
    for r in rows {
        let line = serde_json::to_string(r).map_err(|e| invalid(format!("json: {e}")))?;
        writeln!(out, "{line}").map_err(|e| invalid(format!("write: {e}")))?;
    }
    Ok(())
}
