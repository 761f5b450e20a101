//! Dimension-independent complexity for product weights
//! `λ_{d,k} = ∏_{k_ℓ>0} w_ℓ s_{k_ℓ}` over infinite families of coordinate
//! weights.
//!
//! Strong polynomial tractability holds exactly when some `η > 0` makes
//! both `Σ_k s_k^η` and `Σ_ℓ w_ℓ^η` finite. Both families here have closed
//! forms, so the check is analytic.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::weights::{zeta, Smoothness, WeightModel};

/// Coordinate weights `w_1, w_2, …` for every dimension at once.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum CoordinateFamily {
    /// `w_ℓ = c`
    Constant { c: f64 },
    /// `w_ℓ = c ℓ^{-q}`
    Algebraic { c: f64, q: f64 },
    /// `w_ℓ = c θ^{ℓ−1}`
    Geometric { c: f64, ratio: f64 },
    /// listed values, zero past the end
    Finite { values: Vec<f64> },
}

impl CoordinateFamily {
    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            CoordinateFamily::Constant { c } => *c >= 0.0 && c.is_finite(),
            CoordinateFamily::Algebraic { c, q } => *c >= 0.0 && c.is_finite() && *q > 0.0 && q.is_finite(),
            CoordinateFamily::Geometric { c, ratio } => *c >= 0.0 && c.is_finite() && (0.0..1.0).contains(ratio),
            CoordinateFamily::Finite { values } => values.iter().all(|v| *v >= 0.0 && v.is_finite()),
        };
        if ok {
            Ok(())
        } else {
            Err(invalid(format!("invalid coordinate weight family {self:?}")))
        }
    }

    /// `w_ℓ` for `ℓ ≥ 1`.
    pub fn value(&self, l: usize) -> f64 {
        debug_assert!(l >= 1);
        match self {
            CoordinateFamily::Constant { c } => *c,
            CoordinateFamily::Algebraic { c, q } => c * (l as f64).powf(-q),
            CoordinateFamily::Geometric { c, ratio } => c * ratio.powi(l as i32 - 1),
            CoordinateFamily::Finite { values } => values.get(l - 1).copied().unwrap_or(0.0),
        }
    }

    /// The first `d` weights.
    pub fn take(&self, d: usize) -> Vec<f64> {
        (1..=d).map(|l| self.value(l)).collect()
    }

    /// `Σ_{ℓ≥1} w_ℓ^η`, `+∞` on divergence.
    pub fn power_sum(&self, eta: f64) -> f64 {
        match self {
            CoordinateFamily::Constant { c } => {
                if *c == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            CoordinateFamily::Algebraic { c, q } => {
                if *c == 0.0 {
                    0.0
                } else if q * eta <= 1.0 {
                    f64::INFINITY
                } else {
                    c.powf(eta) * zeta(q * eta).expect("argument exceeds 1")
                }
            }
            CoordinateFamily::Geometric { c, ratio } => c.powf(eta) / (1.0 - ratio.powf(eta)),
            CoordinateFamily::Finite { values } => values.iter().map(|v| v.powf(eta)).sum(),
        }
    }

    /// `inf{η > 0 : Σ w_ℓ^η < ∞}`, `+∞` when no `η` works.
    pub fn convergence_threshold(&self) -> f64 {
        match self {
            CoordinateFamily::Constant { c } if *c > 0.0 => f64::INFINITY,
            CoordinateFamily::Algebraic { c, q } if *c > 0.0 => 1.0 / q,
            _ => 0.0,
        }
    }

    /// Whether the weights stay bounded away from zero, so that `w_ℓ s_1`
    /// never decays.
    fn non_decaying(&self) -> Option<f64> {
        match self {
            CoordinateFamily::Constant { c } if *c > 0.0 => Some(*c),
            _ => None,
        }
    }
}

/// `inf{η > 0 : Σ s_k^η < ∞}`.
pub fn smoothness_threshold(s: &Smoothness) -> f64 {
    match s {
        Smoothness::Algebraic { r } => 1.0 / r,
        Smoothness::Table { .. } => 0.0,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TractabilityVerdict {
    pub strongly_tractable: bool,
    /// Some `η` at which both power sums are finite.
    pub witness_eta: Option<f64>,
    /// `Σ_k s_k^η · Σ_ℓ w_ℓ^η` at the witness.
    pub witness_mass: Option<f64>,
    /// Exponent of strong tractability `max(η_s, η_w)` of the thresholds.
    pub exponent: Option<f64>,
    pub note: String,
}

/// Decides strong polynomial tractability.
pub fn strong_tractability(w: &CoordinateFamily, s: &Smoothness) -> Result<TractabilityVerdict> {
    w.validate()?;
    let ts = smoothness_threshold(s);
    let tw = w.convergence_threshold();
    let exponent = ts.max(tw);
    if exponent.is_infinite() {
        let mut note = String::from("coordinate weights do not decay, so Σ w_ℓ^η diverges for every η > 0");
        let s1 = s.value(1);
        if let Some(c) = w.non_decaying() {
            if c * s1 >= 1.0 {
                note.push_str(
                    "; every k ∈ {0,1}^d has λ_k ≥ 1, so 2^d wavenumbers carry weight at least 1 and \
                     the complexity is at least 2^d for ε < R",
                );
            }
        }
        return Ok(TractabilityVerdict {
            strongly_tractable: false,
            witness_eta: None,
            witness_mass: None,
            exponent: None,
            note,
        });
    }
    // thresholds are open, step strictly past them
    let eta = if exponent == 0.0 { 1.0 } else { exponent * 1.25 };
    let mass = s.power_sum(eta) * w.power_sum(eta);
    debug_assert!(mass.is_finite());
    Ok(TractabilityVerdict {
        strongly_tractable: true,
        witness_eta: Some(eta),
        witness_mass: Some(mass),
        exponent: Some(exponent),
        note: format!("Σ s_k^η and Σ w_ℓ^η are both finite at η = {eta}"),
    })
}

/// First `η` of a grid at which both power sums are finite.
pub fn witness_on_grid(w: &CoordinateFamily, s: &Smoothness, etas: &[f64]) -> Option<f64> {
    etas.iter()
        .copied()
        .filter(|&e| e > 0.0)
        .find(|&e| s.power_sum(e).is_finite() && w.power_sum(e).is_finite())
}

/// `⌈(R/ε)^p Σ_k λ_k^p⌉ − 1`, an upper bound on `min{n : λ_{k_{n+1}} ≤ ε/R}`
/// for one model.
pub fn power_sum_complexity_bound(model: &WeightModel, p: f64, eps: f64, radius: f64) -> Result<f64> {
    if !(p > 0.0 && eps > 0.0 && radius > 0.0) {
        return Err(invalid("p, ε and R must be positive"));
    }
    let mass = model.power_sum(p);
    Ok(((radius / eps).powf(p) * mass).ceil() - 1.0)
}

/// `⌈(R/ε)^p exp(Σ_k s_k^p Σ_ℓ w_ℓ^p)⌉ − 1`, valid for every dimension.
pub fn uniform_complexity_bound(w: &CoordinateFamily, s: &Smoothness, p: f64, eps: f64, radius: f64) -> Result<f64> {
    w.validate()?;
    if !(p > 0.0 && eps > 0.0 && radius > 0.0) {
        return Err(invalid("p, ε and R must be positive"));
    }
    let mass = s.power_sum(p) * w.power_sum(p);
    Ok(((radius / eps).powf(p) * mass.exp()).ceil() - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumeration::WavenumberStream;

    #[test]
    fn algebraic_family_is_tractable() {
        let w = CoordinateFamily::Algebraic { c: 1.0, q: 2.0 };
        let s = Smoothness::algebraic(4.0);
        let v = strong_tractability(&w, &s).unwrap();
        assert!(v.strongly_tractable);
        let eta = v.witness_eta.unwrap();
        // independent test: ηq > 1 and ηr > 1
        assert!(eta * 2.0 > 1.0 && eta * 4.0 > 1.0);
        assert_eq!(v.exponent, Some(0.5));
        assert!(v.witness_mass.unwrap().is_finite());
    }

    #[test]
    fn unit_weights_are_not_tractable() {
        let w = CoordinateFamily::Constant { c: 1.0 };
        let s = Smoothness::algebraic(2.0);
        let v = strong_tractability(&w, &s).unwrap();
        assert!(!v.strongly_tractable);
        assert!(v.witness_eta.is_none());
        assert!(v.note.contains("2^d"));
        // the obstruction: 2^d wavenumbers with λ = 1
        for d in 1..=5 {
            let m = WeightModel::product(w.take(d), s.clone()).unwrap();
            let mut st = WavenumberStream::new(&m).unwrap();
            let ones = st.by_ref().take_while(|e| e.1 == 1.0).count();
            assert_eq!(ones, 1 << d);
        }
    }

    #[test]
    fn small_constant_weights_are_still_not_tractable() {
        let v = strong_tractability(&CoordinateFamily::Constant { c: 0.5 }, &Smoothness::algebraic(2.0)).unwrap();
        assert!(!v.strongly_tractable);
        assert!(!v.note.contains("2^d"));
    }

    #[test]
    fn grid_witness() {
        let w = CoordinateFamily::Algebraic { c: 1.0, q: 2.0 };
        let s = Smoothness::algebraic(4.0);
        assert_eq!(witness_on_grid(&w, &s, &[0.25, 0.5, 0.75, 1.0]), Some(0.75));
        assert_eq!(witness_on_grid(&CoordinateFamily::Constant { c: 1.0 }, &s, &[0.5, 1.0, 2.0]), None);
        let g = CoordinateFamily::Geometric { c: 1.0, ratio: 0.5 };
        assert_eq!(witness_on_grid(&g, &s, &[0.1, 0.3]), Some(0.3));
    }

    #[test]
    fn power_sums_match_partial_sums() {
        let w = CoordinateFamily::Algebraic { c: 1.0, q: 2.0 };
        let direct: f64 = (1..200_000).map(|l| (l as f64).powf(-3.0)).sum();
        assert!((w.power_sum(1.5) - direct).abs() < 1e-9);
        let g = CoordinateFamily::Geometric { c: 0.8, ratio: 0.5 };
        let direct: f64 = (1..200).map(|l| g.value(l).powf(2.0)).sum();
        assert!((g.power_sum(2.0) - direct).abs() < 1e-14);
    }

    #[test]
    fn complexity_bounds_dominate_the_ball_cost() {
        let w = CoordinateFamily::Algebraic { c: 1.0, q: 2.0 };
        let s = Smoothness::algebraic(2.0);
        for d in [1, 3, 6] {
            let m = WeightModel::product(w.take(d), s.clone()).unwrap();
            let mut st = WavenumberStream::new(&m).unwrap();
            for eps in [1e-1, 1e-2] {
                let n = {
                    let mut n = 0;
                    while st.lambda_or_zero(n) > eps {
                        n += 1;
                    }
                    n as f64
                };
                let p = 0.75;
                let b1 = power_sum_complexity_bound(&m, p, eps, 1.0).unwrap();
                let b2 = uniform_complexity_bound(&w, &s, p, eps, 1.0).unwrap();
                assert!(n <= b1 && b1 <= b2, "{d} {eps}: {n} {b1} {b2}");
            }
        }
    }
}
