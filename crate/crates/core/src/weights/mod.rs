//! Product, order and smoothness dependent (POSD) weights.
//!
//! A weight model assigns every wavenumber `k ∈ ℕ₀^d` the importance
//!
//! ```text
//! λ_k = Γ_{‖k‖₀} · ∏_{ℓ : k_ℓ > 0} w_ℓ · s_{k_ℓ}
//! ```
//!
//! with coordinate weights `w`, smoothness weights `s` and order weights `Γ`.
//! The classical Chebyshev example `λ_k = ∏ w_ℓ / k_ℓ^r` is the special case
//! `Γ ≡ 1`, `s_k = k^{-r}`.

mod zeta;

pub use zeta::zeta;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Smoothness weights `s_1, s_2, ...`, always with an analytic tail so that
/// infinite power sums close exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Smoothness {
    /// `s_k = k^{-r}`.
    Algebraic { r: f64 },
    /// `s_k = values[k-1]` for `k ≤ values.len()`, then geometric decay
    /// `s_k = values.last() · tail_ratio^{k - len}`.
    Table { values: Vec<f64>, tail_ratio: f64 },
}

impl Smoothness {
    pub fn algebraic(r: f64) -> Self {
        Smoothness::Algebraic { r }
    }

    fn validate(&self) -> Result<()> {
        match self {
            Smoothness::Algebraic { r } => {
                if !(r.is_finite() && *r > 0.0) {
                    return Err(invalid(format!("smoothness exponent must be positive, got {r}")));
                }
            }
            Smoothness::Table { values, tail_ratio } => {
                if values.is_empty() {
                    return Err(invalid("smoothness table is empty"));
                }
                if values.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
                    return Err(invalid("smoothness table entries must be finite and non-negative"));
                }
                if values.windows(2).any(|p| p[1] > p[0]) {
                    return Err(invalid("smoothness table must be non-increasing"));
                }
                if !(0.0..1.0).contains(tail_ratio) {
                    return Err(invalid(format!("tail ratio must lie in [0, 1), got {tail_ratio}")));
                }
            }
        }
        Ok(())
    }

    /// `s_k` for `k ≥ 1`.
    pub fn value(&self, k: u32) -> f64 {
        debug_assert!(k >= 1);
        match self {
            Smoothness::Algebraic { r } => f64::from(k).powf(-r),
            Smoothness::Table { values, tail_ratio } => {
                let len = values.len();
                let k = k as usize;
                if k <= len {
                    values[k - 1]
                } else {
                    values[len - 1] * tail_ratio.powf((k - len) as f64)
                }
            }
        }
    }

    /// `Σ_{k≥1} s_k^p`, or `+∞` when the series diverges.
    pub fn power_sum(&self, p: f64) -> f64 {
        match self {
            Smoothness::Algebraic { r } => {
                let x = p * r;
                if x <= 1.0 {
                    f64::INFINITY
                } else {
                    zeta(x).expect("argument checked above")
                }
            }
            Smoothness::Table { values, tail_ratio } => {
                let head: f64 = values.iter().rev().map(|v| v.powf(p)).sum();
                let last = values[values.len() - 1].powf(p);
                let q = tail_ratio.powf(p);
                head + last * q / (1.0 - q)
            }
        }
    }
}

#[derive(Deserialize)]
struct RawWeightModel {
    d: usize,
    w: Vec<f64>,
    s: Smoothness,
    gamma: Option<Vec<f64>>,
}

/// POSD weight model. Immutable once built.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawWeightModel")]
pub struct WeightModel {
    d: usize,
    w: Vec<f64>,
    s: Smoothness,
    gamma: Vec<f64>,
}

impl TryFrom<RawWeightModel> for WeightModel {
    type Error = Error;

    fn try_from(raw: RawWeightModel) -> Result<Self> {
        let gamma = raw.gamma.unwrap_or_else(|| vec![1.0; raw.d + 1]);
        WeightModel::new(raw.w, raw.s, gamma).and_then(|m| {
            if m.d == raw.d {
                Ok(m)
            } else {
                Err(Error::DimensionMismatch { expected: raw.d, got: m.d })
            }
        })
    }
}

impl WeightModel {
    /// Builds a model; `d` is taken from `w.len()` and `gamma` must hold
    /// `Γ_0..Γ_d` with `Γ_0 = 1`.
    pub fn new(w: Vec<f64>, s: Smoothness, gamma: Vec<f64>) -> Result<Self> {
        let d = w.len();
        if d == 0 {
            return Err(invalid("dimension must be positive"));
        }
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(invalid("coordinate weights must be finite and non-negative"));
        }
        s.validate()?;
        if gamma.len() != d + 1 {
            return Err(invalid(format!(
                "expected {} order weights Γ_0..Γ_d, got {}",
                d + 1,
                gamma.len()
            )));
        }
        if gamma[0] != 1.0 {
            return Err(invalid("Γ_0 must equal 1"));
        }
        if gamma.iter().any(|g| !(g.is_finite() && *g > 0.0)) {
            return Err(invalid("order weights must be finite and positive"));
        }
        if gamma.windows(2).any(|p| p[1] > p[0]) {
            return Err(invalid("order weights must be non-increasing"));
        }
        Ok(WeightModel { d, w, s, gamma })
    }

    /// Product weights with `Γ ≡ 1`.
    pub fn product(w: Vec<f64>, s: Smoothness) -> Result<Self> {
        let gamma = vec![1.0; w.len() + 1];
        Self::new(w, s, gamma)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn coordinate_weights(&self) -> &[f64] {
        &self.w
    }

    pub fn smoothness(&self) -> &Smoothness {
        &self.s
    }

    pub fn order_weights(&self) -> &[f64] {
        &self.gamma
    }

    pub fn has_unit_order_weights(&self) -> bool {
        self.gamma.iter().all(|&g| g == 1.0)
    }

    /// Factor contributed by coordinate `l` at degree `k ≥ 1`.
    #[inline]
    pub(crate) fn factor(&self, l: usize, k: u32) -> f64 {
        self.w[l] * self.s.value(k)
    }

    #[inline]
    pub(crate) fn order_weight(&self, m: usize) -> f64 {
        self.gamma[m]
    }

    /// `λ_k`, multiplying factors in ascending coordinate order and applying
    /// `Γ_{‖k‖₀}` last. Every caller goes through here so equal weights are
    /// bitwise equal.
    pub fn lambda(&self, k: &[u32]) -> Result<f64> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: k.len() });
        }
        Ok(self.lambda_unchecked(k))
    }

    #[inline]
    pub(crate) fn lambda_unchecked(&self, k: &[u32]) -> f64 {
        let mut acc = 1.0;
        let mut order = 0;
        for (l, &kl) in k.iter().enumerate() {
            if kl > 0 {
                acc *= self.factor(l, kl);
                order += 1;
            }
        }
        self.gamma[order] * acc
    }

    /// `Σ_{k ∈ ℕ₀^d} λ_k^p`, or `+∞` if it diverges.
    ///
    /// With `x_ℓ = w_ℓ^p Σ_j s_j^p` the sum equals `Σ_m Γ_m^p e_m(x)` where
    /// `e_m` is the elementary symmetric polynomial of degree `m`; for
    /// `Γ ≡ 1` this collapses to `∏_ℓ (1 + x_ℓ)`.
    pub fn power_sum(&self, p: f64) -> f64 {
        assert!(p > 0.0, "power sum exponent must be positive");
        let s_sum = self.s.power_sum(p);
        let mut elementary = vec![0.0; self.d + 1];
        elementary[0] = 1.0;
        for &w in &self.w {
            if w == 0.0 {
                continue;
            }
            let x = w.powf(p) * s_sum;
            if !x.is_finite() {
                return f64::INFINITY;
            }
            for m in (1..=self.d).rev() {
                elementary[m] += elementary[m - 1] * x;
            }
        }
        if self.has_unit_order_weights() {
            return elementary.iter().rev().sum();
        }
        elementary
            .iter()
            .zip(&self.gamma)
            .rev()
            .map(|(e, g)| g.powf(p) * e)
            .sum()
    }
}
