//! Generators of inputs that lie in the pilot or tracking cone by
//! construction. Coefficients are stored as ratios `f̂(k)/λ_k` times `λ_k`
//! on positions of the weight order.

use rand::Rng;

use super::pilot::{pilot_factor, PilotConeSpec};
use super::tracking::TrackingConeSpec;
use super::OrderedWeights;
use crate::error::{invalid, Result};
use crate::spaces::{seq_norm, tight_function, CoefficientTable};

fn random_ratios<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| {
            // keep away from zero so that scaling is well defined
            let m: f64 = rng.random_range(0.05..1.0);
            if rng.random_bool(0.5) {
                m
            } else {
                -m
            }
        })
        .collect()
}

fn insert_ratios(
    table: &mut CoefficientTable,
    weights: &mut OrderedWeights,
    start: usize,
    ratios: &[f64],
) -> Result<()> {
    for (i, &r) in ratios.iter().enumerate() {
        let pos = start + i;
        let lam = weights.lambda(pos);
        if lam == 0.0 {
            break;
        }
        let k = weights.wavenumber_owned(pos);
        table.insert(k, r * lam)?;
    }
    Ok(())
}

/// The worst case for the pilot cone inside `B_R`: the function of norm
/// `R` on the pilot wavenumbers whose solution is largest.
pub fn tight_pilot_member(weights: &mut OrderedWeights, spec: &PilotConeSpec, radius: f64) -> Result<CoefficientTable> {
    spec.validate()?;
    let n = weights.ensure(spec.n1);
    let support: Vec<Vec<u32>> = (0..n).map(|i| weights.wavenumber(i).to_vec()).collect();
    let cfg = *weights.cfg();
    let model = weights.model().clone();
    tight_function(&cfg, &model, &support, radius)
}

/// A random pilot-cone member: random ratios on the pilot, then `extra`
/// further positions whose ratios have norm `fill · (A^ρ − 1)^{1/ρ} P`
/// (`fill · A P` for `ρ = ∞`), where `P` is the pilot norm.
///
/// `fill` must lie in `[0, 1)`; values close to 1 put the input near the
/// boundary of the cone.
pub fn random_pilot_member<R: Rng + ?Sized>(
    weights: &mut OrderedWeights,
    spec: &PilotConeSpec,
    rng: &mut R,
    extra: usize,
    fill: f64,
) -> Result<CoefficientTable> {
    spec.validate()?;
    if !(0.0..1.0).contains(&fill) {
        return Err(invalid(format!("fill must lie in [0, 1), got {fill}")));
    }
    let rho = weights.cfg().rho();
    let n1 = weights.ensure(spec.n1);
    let mut table = CoefficientTable::new(weights.dim());
    let pilot = random_ratios(rng, n1);
    insert_ratios(&mut table, weights, 0, &pilot)?;
    let avail = weights.ensure(n1 + extra) - n1;
    if avail > 0 && fill > 0.0 {
        let mut more = random_ratios(rng, avail);
        let target = fill * pilot_factor(rho, spec.inflation) * seq_norm(&pilot, rho);
        let scale = target / seq_norm(&more, rho);
        more.iter_mut().for_each(|r| *r *= scale);
        insert_ratios(&mut table, weights, n1, &more)?;
    }
    Ok(table)
}

/// A tracking-cone member with `σ_j = c · decay^j` for `1 ≤ j ≤ blocks`
/// and zero beyond. `K_0` gets random ratios of norm `c`. With
/// `decay ≤ b` the member satisfies `σ_{j+r} ≤ b^r σ_j`.
pub fn geometric_tracking_member<R: Rng + ?Sized>(
    weights: &mut OrderedWeights,
    spec: &TrackingConeSpec,
    rng: &mut R,
    c: f64,
    decay: f64,
    blocks: usize,
) -> Result<CoefficientTable> {
    spec.validate()?;
    if !(decay > 0.0 && decay <= spec.b) {
        return Err(invalid(format!("decay must lie in (0, b], got {decay}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(invalid("scale must be positive"));
    }
    let rho = weights.cfg().rho();
    let mut table = CoefficientTable::new(weights.dim());
    for j in 0..=blocks {
        let (lo, hi) = spec
            .n_seq
            .block(j)
            .ok_or_else(|| invalid("block overflows the position range"))?;
        let avail = weights.ensure(hi).saturating_sub(lo);
        if avail == 0 {
            if j == 0 {
                continue;
            }
            break;
        }
        let mut r = random_ratios(rng, avail);
        let target = c * decay.powi(j as i32);
        let scale = target / seq_norm(&r, rho);
        r.iter_mut().for_each(|x| *x *= scale);
        insert_ratios(&mut table, weights, lo, &r)?;
    }
    Ok(table)
}
