//! Weights inferred from a small initial sample.
//!
//! The initial sample consists of the origin and the first `k_max`
//! wavenumbers along each axis. Coordinate weights `w` and a smoothness
//! exponent `r` (with `s_k = k^{-r}`) are chosen on finite grids to make
//! `‖(f̂(k)/λ_k(w, s, Γ))_{k∈K̄}‖_ρ` as small as possible. Among minimizers
//! the smallest weights are preferred: lexicographically smallest `w`, then
//! the smallest `s`, i.e. the largest `r`.
//!
//! For fixed `r` the objective separates over coordinates, because `w_ℓ`
//! only enters the axis-`ℓ` wavenumbers. The exact grid optimum therefore
//! comes from scanning `r` and minimizing each `w_ℓ` on its own. The
//! alternating descent over `w` and `r` is run as well and its trace
//! reported.

use serde::{Deserialize, Serialize};

use crate::approximation::{alg_pilot, ApproxOutcome, OrderedWeights, PilotConeSpec};
use crate::error::{invalid, Result};
use crate::exec::{self, Execution};
use crate::spaces::{seq_norm, CoefficientOracle, SpaceConfig};
use crate::weights::{Smoothness, WeightModel};

/// Relative window within which two objective values count as equal.
pub const TIE_WINDOW: f64 = 1e-12;

/// Finite candidate grids for `w_ℓ` (shared by all coordinates) and `r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSets {
    pub w_grid: Vec<f64>,
    pub r_grid: Vec<f64>,
    pub k_max: u32,
}

impl Default for CandidateSets {
    fn default() -> Self {
        CandidateSets::new(1.0, 0.8, 30, 0.5, 6.0, 0.25, 4).expect("default grids are valid")
    }
}

impl CandidateSets {
    /// `w ∈ {0} ∪ {w* θ^m : m = 0..=w_levels}` and
    /// `r ∈ {r_min, r_min + r_step, …} ∩ [r_min, r_max]`.
    pub fn new(w_max: f64, w_ratio: f64, w_levels: u32, r_min: f64, r_max: f64, r_step: f64, k_max: u32) -> Result<Self> {
        if !(w_max > 0.0 && w_max.is_finite()) {
            return Err(invalid(format!("w* must be positive, got {w_max}")));
        }
        if !(w_ratio > 0.0 && w_ratio < 1.0) {
            return Err(invalid(format!("w grid ratio must lie in (0, 1), got {w_ratio}")));
        }
        if !(r_min > 0.0 && r_max >= r_min && r_step > 0.0 && r_max.is_finite()) {
            return Err(invalid("r grid needs 0 < r_min ≤ r_max and a positive step"));
        }
        let mut w_grid = vec![0.0];
        w_grid.extend((0..=w_levels).rev().map(|m| w_max * w_ratio.powi(m as i32)));
        let steps = ((r_max - r_min) / r_step + 1e-9).floor() as usize;
        let r_grid = (0..=steps).map(|i| r_min + i as f64 * r_step).collect();
        let c = CandidateSets { w_grid, r_grid, k_max };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        let sorted = |g: &[f64]| g.windows(2).all(|p| p[0] < p[1]);
        if self.w_grid.is_empty() || !sorted(&self.w_grid) || self.w_grid[0] < 0.0 {
            return Err(invalid("w grid must be non-empty, non-negative and strictly increasing"));
        }
        if self.w_grid.iter().any(|w| !w.is_finite()) || *self.w_grid.last().unwrap() <= 0.0 {
            return Err(invalid("w grid needs a positive finite maximum"));
        }
        if self.r_grid.is_empty() || !sorted(&self.r_grid) || self.r_grid[0] <= 0.0 {
            return Err(invalid("r grid must be non-empty, positive and strictly increasing"));
        }
        if self.r_grid.iter().any(|r| !r.is_finite()) {
            return Err(invalid("r grid must be finite"));
        }
        if self.k_max == 0 {
            return Err(invalid("k_max must be at least 1"));
        }
        Ok(())
    }

    /// Drops exponents `r ≤ 1/ρ′`, for which `‖λ‖_{ρ′}` diverges.
    pub fn convergent_for(&self, rho_prime: f64) -> Result<Self> {
        let mut c = self.clone();
        if rho_prime.is_finite() {
            c.r_grid.retain(|&r| r * rho_prime > 1.0);
        }
        if c.r_grid.is_empty() {
            return Err(invalid(format!("no r in the grid exceeds 1/ρ′ = {}", 1.0 / rho_prime)));
        }
        Ok(c)
    }
}

/// `{(0,…,0,k,0,…,0) : k = 0..=k_max}` over every axis, origin first, then
/// axis by axis.
pub fn initial_wavenumbers(d: usize, k_max: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; d]];
    for l in 0..d {
        for k in 1..=k_max {
            let mut v = vec![0; d];
            v[l] = k;
            out.push(v);
        }
    }
    out
}

/// Coefficients on the initial wavenumbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialSample {
    pub origin: f64,
    /// `axis[ℓ][k−1] = f̂(k e_ℓ)`
    pub axis: Vec<Vec<f64>>,
}

impl InitialSample {
    pub fn from_oracle(oracle: &mut CoefficientOracle<'_>, k_max: u32) -> Result<Self> {
        let d = oracle.dim();
        let ks = initial_wavenumbers(d, k_max);
        let origin = oracle.query(&ks[0])?;
        let mut axis = vec![Vec::with_capacity(k_max as usize); d];
        for k in &ks[1..] {
            let l = k.iter().position(|&x| x > 0).expect("axis wavenumber");
            axis[l].push(oracle.query(k)?);
        }
        Ok(InitialSample { origin, axis })
    }

    pub fn dim(&self) -> usize {
        self.axis.len()
    }

    pub fn k_max(&self) -> usize {
        self.axis.first().map_or(0, Vec::len)
    }

    pub fn scaled(&self, c: f64) -> Self {
        InitialSample {
            origin: c * self.origin,
            axis: self.axis.iter().map(|a| a.iter().map(|x| c * x).collect()).collect(),
        }
    }
}

/// `‖(f̂(k)/λ_k)_{k∈K̄}‖_ρ` for an arbitrary model; `0/0` counts as 0 and
/// `x/0` as `+∞`.
pub fn objective(sample: &InitialSample, model: &WeightModel, rho: f64) -> Result<f64> {
    if model.dim() != sample.dim() {
        return Err(crate::Error::DimensionMismatch { expected: sample.dim(), got: model.dim() });
    }
    let d = sample.dim();
    let mut r = vec![ratio(sample.origin, model.lambda(&vec![0; d])?)];
    let mut k = vec![0u32; d];
    for (l, coefs) in sample.axis.iter().enumerate() {
        for (i, &c) in coefs.iter().enumerate() {
            k[l] = i as u32 + 1;
            r.push(ratio(c, model.lambda(&k)?));
        }
        k[l] = 0;
    }
    Ok(seq_norm(&r, rho))
}

fn ratio(c: f64, lam: f64) -> f64 {
    if c == 0.0 {
        0.0
    } else if lam == 0.0 {
        f64::INFINITY
    } else {
        (c / lam).abs()
    }
}

/// Inference result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InferredWeights {
    pub w_bar: Vec<f64>,
    pub r_bar: f64,
    pub objective_value: f64,
    /// Rounds of the alternating descent.
    pub iterations: usize,
    /// Objective after every half step of the descent, starting point first.
    pub descent_trace: Vec<f64>,
}

impl InferredWeights {
    pub fn s_bar(&self) -> Smoothness {
        Smoothness::algebraic(self.r_bar)
    }

    pub fn model(&self, gamma: &[f64]) -> Result<WeightModel> {
        WeightModel::new(self.w_bar.clone(), self.s_bar(), gamma.to_vec())
    }
}

/// Objective pieces for grid points.
struct Evaluator<'a> {
    sample: &'a InitialSample,
    gamma1: f64,
    rho: f64,
    origin: f64,
}

impl<'a> Evaluator<'a> {
    fn new(sample: &'a InitialSample, gamma: &[f64], rho: f64) -> Result<Self> {
        let d = sample.dim();
        if gamma.len() != d + 1 {
            return Err(crate::Error::DimensionMismatch { expected: d + 1, got: gamma.len() });
        }
        Ok(Evaluator {
            sample,
            gamma1: gamma[1],
            rho,
            origin: ratio(sample.origin, gamma[0]),
        })
    }

    /// ρ-norm of the axis-`ℓ` ratios.
    fn axis(&self, l: usize, w: f64, r: f64) -> f64 {
        let s = Smoothness::algebraic(r);
        let ratios: Vec<f64> = self.sample.axis[l]
            .iter()
            .enumerate()
            .map(|(i, &c)| ratio(c, self.gamma1 * (w * s.value(i as u32 + 1))))
            .collect();
        seq_norm(&ratios, self.rho)
    }

    fn combine(&self, parts: &[f64]) -> f64 {
        let mut all = Vec::with_capacity(parts.len() + 1);
        all.push(self.origin);
        all.extend_from_slice(parts);
        seq_norm(&all, self.rho)
    }

    /// Per-axis values of every `w` on the grid at exponent `r`.
    fn table(&self, grid: &[f64], r: f64) -> Vec<Vec<f64>> {
        (0..self.sample.dim())
            .map(|l| grid.iter().map(|&w| self.axis(l, w, r)).collect())
            .collect()
    }
}

fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

fn within(v: f64, best: f64) -> bool {
    v <= best + TIE_WINDOW * best.abs()
}

/// Profile at one `r`: minimal objective and the lexicographically
/// smallest `w` reaching `threshold` (if any).
fn profile_min(ev: &Evaluator<'_>, grid: &[f64], r: f64) -> (f64, Vec<Vec<f64>>) {
    let table = ev.table(grid, r);
    let best: Vec<f64> = table.iter().map(|row| row[argmin(row)]).collect();
    (ev.combine(&best), table)
}

fn lex_smallest(ev: &Evaluator<'_>, table: &[Vec<f64>], threshold: f64) -> Option<Vec<usize>> {
    let d = table.len();
    let mut parts: Vec<f64> = table.iter().map(|row| row[argmin(row)]).collect();
    if !within(ev.combine(&parts), threshold) {
        return None;
    }
    let mut choice = Vec::with_capacity(d);
    for l in 0..d {
        let mut picked = argmin(&table[l]);
        for (i, &v) in table[l].iter().enumerate() {
            let mut trial = parts.clone();
            trial[l] = v;
            if within(ev.combine(&trial), threshold) {
                picked = i;
                break;
            }
        }
        parts[l] = table[l][picked];
        choice.push(picked);
    }
    Some(choice)
}

/// Solves the inference problem on the candidate grids.
pub fn infer_weights(sample: &InitialSample, cand: &CandidateSets, gamma: &[f64], rho: f64) -> Result<InferredWeights> {
    infer_weights_with(Execution::default(), sample, cand, gamma, rho)
}

pub fn infer_weights_with(
    exec: Execution,
    sample: &InitialSample,
    cand: &CandidateSets,
    gamma: &[f64],
    rho: f64,
) -> Result<InferredWeights> {
    cand.validate()?;
    if sample.k_max() != cand.k_max as usize || sample.axis.iter().any(|a| a.len() != cand.k_max as usize) {
        return Err(invalid("initial sample does not match k_max"));
    }
    if !(rho >= 1.0) {
        return Err(invalid(format!("ρ must be at least 1, got {rho}")));
    }
    let ev = Evaluator::new(sample, gamma, rho)?;
    let d = sample.dim();
    let grid = &cand.w_grid;

    // alternating descent from the largest weights and the smallest r
    let mut wi = vec![grid.len() - 1; d];
    let mut ri = 0usize;
    let eval = |wi: &[usize], r: f64| {
        let parts: Vec<f64> = (0..d).map(|l| ev.axis(l, grid[wi[l]], r)).collect();
        ev.combine(&parts)
    };
    let mut current = eval(&wi, cand.r_grid[ri]);
    let mut trace = vec![current];
    let mut iterations = 0;
    loop {
        iterations += 1;
        let r = cand.r_grid[ri];
        for (l, slot) in wi.iter_mut().enumerate() {
            let row: Vec<f64> = grid.iter().map(|&w| ev.axis(l, w, r)).collect();
            let i = argmin(&row);
            if row[i] < row[*slot] {
                *slot = i;
            }
        }
        let after_w = eval(&wi, r);
        trace.push(after_w);
        let scores = exec::map(exec, &cand.r_grid, |&r| eval(&wi, r));
        let i = argmin(&scores);
        if scores[i] < scores[ri] {
            ri = i;
        }
        let after_r = scores[ri];
        trace.push(after_r);
        if !(after_r < current) || iterations >= 10_000 {
            break;
        }
        current = after_r;
    }

    // exact optimum over the grid, then the smallest minimizer: least
    // Σ_k λ̄_k, then lexicographically smallest w, then largest r
    let mass = |w: &[usize], ri: usize| -> Result<f64> {
        let model = WeightModel::new(
            w.iter().map(|&i| grid[i]).collect(),
            Smoothness::algebraic(cand.r_grid[ri]),
            gamma.to_vec(),
        )?;
        Ok(model.power_sum(1.0))
    };
    let profiles = exec::map(exec, &cand.r_grid, |&r| profile_min(&ev, grid, r));
    let best = profiles.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let mut chosen: Option<(Vec<usize>, usize, f64)> = None;
    for (ri, (value, table)) in profiles.iter().enumerate() {
        if !within(*value, best) {
            continue;
        }
        let Some(w) = lex_smallest(&ev, table, best) else { continue };
        let m = mass(&w, ri)?;
        // later r wins exact ties, so only a strictly smaller w replaces it
        let better = match &chosen {
            None => true,
            Some((cw, _, cm)) => within(m, *cm) && (!within(*cm, m) || w <= *cw),
        };
        if better {
            chosen = Some((w, ri, m));
        }
    }
    let (w_idx, r_idx, _) = chosen.expect("some grid point attains the minimum");
    let w_bar: Vec<f64> = w_idx.iter().map(|&i| grid[i]).collect();
    let r_bar = cand.r_grid[r_idx];
    let objective_value = eval(&w_idx, r_bar);
    Ok(InferredWeights {
        w_bar,
        r_bar,
        objective_value,
        iterations,
        descent_trace: trace,
    })
}

/// Options for the inferred-weight algorithm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InferredSpec {
    #[serde(alias = "A")]
    pub inflation: f64,
    /// Pilot size for the pilot-cone stage; `None` uses `|K̄|`.
    pub n1: Option<usize>,
}

/// Samples the initial wavenumbers, infers weights, then runs the pilot
/// algorithm over the inferred weight order. Coefficients already sampled
/// are not paid for twice.
#[allow(clippy::too_many_arguments)]
pub fn alg_inferred(
    oracle: &mut CoefficientOracle<'_>,
    cfg: &SpaceConfig,
    cand: &CandidateSets,
    gamma: &[f64],
    spec: &InferredSpec,
    eps: f64,
    budget: usize,
    exec: Execution,
) -> Result<(ApproxOutcome, InferredWeights)> {
    let cand = cand.convergent_for(cfg.rho_prime())?;
    let sample = InitialSample::from_oracle(oracle, cand.k_max)?;
    let inferred = infer_weights_with(exec, &sample, &cand, gamma, cfg.rho())?;
    let model = inferred.model(gamma)?;
    let mut weights = OrderedWeights::new(&model, *cfg)?;
    let n1 = spec.n1.unwrap_or(1 + sample.dim() * cand.k_max as usize);
    let pilot = PilotConeSpec::new(n1, spec.inflation)?;
    let outcome = alg_pilot(oracle, &mut weights, &pilot, eps, budget)?;
    Ok((outcome, inferred))
}
