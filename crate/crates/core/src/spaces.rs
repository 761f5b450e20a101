//! Input/output space exponents, sequence norms and coefficient access.
//!
//! The input norm is `‖f‖_F = ‖(f̂(k)/λ_k)_k‖_ρ` and the output norm is
//! `‖g‖_G = ‖(ĝ(k))_k‖_τ`. Hölder's inequality with `1/ρ + 1/ρ′ = 1/τ`
//! gives `‖SOL(f)‖_G ≤ ‖f‖_F ‖λ‖_{ρ′}`, and [`tight_function`] builds an
//! input attaining equality on any finite set of wavenumbers.

use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::enumeration::WavenumberStream;
use crate::error::{invalid, Error, Result};
use crate::weights::WeightModel;

/// Serde helpers for exponents in `[1, ∞]`; infinity is written `"inf"`.
pub mod exponent {
    use super::*;

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Num(f64),
        Text(String),
    }

    pub fn parse(text: &str) -> Option<f64> {
        match text.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "∞" => Some(f64::INFINITY),
            other => other.parse().ok(),
        }
    }

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
        if x.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*x)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<f64, D::Error> {
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Text(t) => {
                parse(&t).ok_or_else(|| serde::de::Error::custom(format!("bad exponent {t:?}")))
            }
        }
    }
}

#[derive(Deserialize)]
struct RawSpaceConfig {
    #[serde(with = "exponent")]
    rho: f64,
    #[serde(with = "exponent")]
    tau: f64,
}

/// Exponents `ρ` (input), `τ` (output) and the derived `ρ′`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpaceConfig")]
pub struct SpaceConfig {
    #[serde(with = "exponent")]
    rho: f64,
    #[serde(with = "exponent")]
    tau: f64,
    #[serde(with = "exponent")]
    rho_prime: f64,
}

impl TryFrom<RawSpaceConfig> for SpaceConfig {
    type Error = Error;

    fn try_from(raw: RawSpaceConfig) -> Result<Self> {
        SpaceConfig::new(raw.rho, raw.tau)
    }
}

impl SpaceConfig {
    /// Requires `1 ≤ τ ≤ ρ ≤ ∞`.
    pub fn new(rho: f64, tau: f64) -> Result<Self> {
        if rho.is_nan() || tau.is_nan() || !(tau >= 1.0) || !(rho >= tau) {
            return Err(invalid(format!("need 1 ≤ τ ≤ ρ ≤ ∞, got ρ = {rho}, τ = {tau}")));
        }
        let rho_prime = if rho == tau {
            f64::INFINITY
        } else if rho.is_infinite() {
            tau
        } else {
            rho * tau / (rho - tau)
        };
        Ok(SpaceConfig { rho, tau, rho_prime })
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn rho_prime(&self) -> f64 {
        self.rho_prime
    }
}

/// `ℓ^p` norm of a finite sequence, `p ∈ (0, ∞]`.
pub fn seq_norm(values: &[f64], p: f64) -> f64 {
    let big = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if p.is_infinite() || big == 0.0 || big.is_infinite() {
        return big;
    }
    if p == 1.0 {
        return values.iter().map(|v| v.abs()).sum();
    }
    // scale by the largest entry to keep the powers in range
    let s: f64 = values.iter().map(|v| (v.abs() / big).powf(p)).sum();
    big * s.powf(1.0 / p)
}

/// `ℓ^p` norm of `head` followed by the geometric tail
/// `first, first·ratio, first·ratio², ...`.
pub fn seq_norm_geometric(head: &[f64], first: f64, ratio: f64, p: f64) -> Result<f64> {
    let ratio = ratio.abs();
    if first != 0.0 && ratio >= 1.0 {
        return Err(Error::DivergentNorm { exponent: p });
    }
    if p.is_infinite() {
        return Ok(seq_norm(head, p).max(first.abs()));
    }
    let tail = first.abs().powf(p) / (1.0 - ratio.powf(p));
    let h = seq_norm(head, p);
    Ok((h.powf(p) + tail).powf(1.0 / p))
}

/// Combines two norms of disjoint pieces: `‖(a, b)‖_p`.
pub fn join_norms(a: f64, b: f64, p: f64) -> f64 {
    seq_norm(&[a, b], p)
}

/// `‖f‖_F · Λ`, the bounding side of the Hölder inequality.
pub fn holder_bound(f_norm: f64, lambda_norm: f64) -> f64 {
    debug_assert!(f_norm >= 0.0 && lambda_norm >= 0.0);
    f_norm * lambda_norm
}

/// Radius of the input ball `B_R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BallSpec {
    pub radius: f64,
}

impl BallSpec {
    pub fn new(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(invalid(format!("radius must be positive, got {radius}")));
        }
        Ok(BallSpec { radius })
    }
}

/// Anything that can report series coefficients.
pub trait CoefficientSource {
    fn dim(&self) -> usize;
    fn coefficient(&self, k: &[u32]) -> f64;
}

impl<S: CoefficientSource + ?Sized> CoefficientSource for &S {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn coefficient(&self, k: &[u32]) -> f64 {
        (**self).coefficient(k)
    }
}

/// `c · f` for a wrapped source `f`.
#[derive(Debug, Clone)]
pub struct Scaled<S> {
    pub inner: S,
    pub factor: f64,
}

impl<S: CoefficientSource> CoefficientSource for Scaled<S> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn coefficient(&self, k: &[u32]) -> f64 {
        self.factor * self.inner.coefficient(k)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    pub k: Vec<u32>,
    pub coef: f64,
}

#[derive(Deserialize)]
struct RawTable {
    d: usize,
    #[serde(default)]
    terms: Vec<TableEntry>,
}

/// Finitely supported coefficients; every wavenumber not listed is zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawTable", into = "RawTableOut")]
pub struct CoefficientTable {
    d: usize,
    // insertion order is kept for output
    order: Vec<Vec<u32>>,
    values: HashMap<Vec<u32>, f64>,
}

#[derive(Serialize)]
struct RawTableOut {
    d: usize,
    terms: Vec<TableEntry>,
}

impl From<CoefficientTable> for RawTableOut {
    fn from(t: CoefficientTable) -> Self {
        let terms = t.entries().map(|(k, coef)| TableEntry { k: k.to_vec(), coef }).collect();
        RawTableOut { d: t.d, terms }
    }
}

impl TryFrom<RawTable> for CoefficientTable {
    type Error = Error;

    fn try_from(raw: RawTable) -> Result<Self> {
        let mut t = CoefficientTable::new(raw.d);
        for e in raw.terms {
            t.insert(e.k, e.coef)?;
        }
        Ok(t)
    }
}

impl CoefficientTable {
    pub fn new(d: usize) -> Self {
        CoefficientTable { d, order: Vec::new(), values: HashMap::new() }
    }

    /// Sets `f̂(k)`; a repeated `k` overwrites the earlier value.
    pub fn insert(&mut self, k: Vec<u32>, coef: f64) -> Result<()> {
        if k.len() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: k.len() });
        }
        if !coef.is_finite() {
            return Err(invalid("coefficients must be finite"));
        }
        if self.values.insert(k.clone(), coef).is_none() {
            self.order.push(k);
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.order.iter().map(move |k| (k.as_slice(), self.values[k]))
    }

    /// `‖(f̂(k)/λ_k)‖_ρ` over the support; `+∞` if a nonzero coefficient
    /// sits on a zero weight.
    pub fn input_norm(&self, model: &WeightModel, rho: f64) -> f64 {
        let ratios: Vec<f64> = self
            .entries()
            .map(|(k, c)| {
                let lam = model.lambda_unchecked(k);
                if c == 0.0 {
                    0.0
                } else if lam == 0.0 {
                    f64::INFINITY
                } else {
                    c / lam
                }
            })
            .collect();
        seq_norm(&ratios, rho)
    }

    /// `‖(f̂(k))‖_τ`, the output norm of `SOL(f)`.
    pub fn output_norm(&self, tau: f64) -> f64 {
        let v: Vec<f64> = self.entries().map(|(_, c)| c).collect();
        seq_norm(&v, tau)
    }
}

impl CoefficientSource for CoefficientTable {
    fn dim(&self) -> usize {
        self.d
    }

    fn coefficient(&self, k: &[u32]) -> f64 {
        self.values.get(k).copied().unwrap_or(0.0)
    }
}

/// Black-box access to `f̂` that counts distinct wavenumbers queried.
pub struct CoefficientOracle<'a> {
    source: &'a dyn CoefficientSource,
    seen: HashMap<Vec<u32>, f64>,
}

impl<'a> CoefficientOracle<'a> {
    pub fn new(source: &'a dyn CoefficientSource) -> Self {
        CoefficientOracle { source, seen: HashMap::new() }
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    /// `f̂(k)`; only the first query of each `k` adds to the cost.
    pub fn query(&mut self, k: &[u32]) -> Result<f64> {
        if k.len() != self.source.dim() {
            return Err(Error::DimensionMismatch { expected: self.source.dim(), got: k.len() });
        }
        if let Some(&v) = self.seen.get(k) {
            return Ok(v);
        }
        let v = self.source.coefficient(k);
        self.seen.insert(k.to_vec(), v);
        Ok(v)
    }

    /// Number of distinct coefficients sampled so far.
    pub fn cost(&self) -> usize {
        self.seen.len()
    }
}

/// Coefficients on `K` that make the Hölder inequality an equality:
/// `‖f‖_F = R` and `‖SOL(f)‖_G = R ‖(λ_k)_{k∈K}‖_{ρ′}`.
///
/// For `ρ′ < ∞` this is `f̂(k) = R λ_k^{ρ′/ρ+1} / Λ^{ρ′/ρ}`; for `ρ′ = ∞` a
/// single spike `R Λ` at the lexicographically smallest maximizer of `λ`.
pub fn tight_function(
    cfg: &SpaceConfig,
    model: &WeightModel,
    support: &[Vec<u32>],
    radius: f64,
) -> Result<CoefficientTable> {
    if support.is_empty() {
        return Err(invalid("support set is empty"));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(invalid(format!("radius must be positive, got {radius}")));
    }
    let lams = support
        .iter()
        .map(|k| model.lambda(k))
        .collect::<Result<Vec<f64>>>()?;
    if lams.contains(&0.0) {
        return Err(invalid("support contains a zero weight"));
    }
    let mut table = CoefficientTable::new(model.dim());
    let rp = cfg.rho_prime();
    if rp.is_infinite() {
        let mut best = 0;
        for i in 1..support.len() {
            if lams[i] > lams[best] || (lams[i] == lams[best] && support[i] < support[best]) {
                best = i;
            }
        }
        for (i, k) in support.iter().enumerate() {
            let c = if i == best { radius * lams[best] } else { 0.0 };
            table.insert(k.clone(), c)?;
        }
        return Ok(table);
    }
    let big = seq_norm(&lams, rp);
    let q = rp / cfg.rho();
    for (k, &lam) in support.iter().zip(&lams) {
        table.insert(k.clone(), radius * lam * (lam / big).powf(q))?;
    }
    Ok(table)
}

/// `‖SOL‖ = ‖λ‖_{ρ′}` over the whole lattice.
pub fn sol_operator_norm(cfg: &SpaceConfig, model: &WeightModel) -> Result<f64> {
    let rp = cfg.rho_prime();
    if rp.is_infinite() {
        let mut stream = WavenumberStream::new(model)?;
        return Ok(stream.get(0)?.1);
    }
    let total = model.power_sum(rp);
    if total.is_infinite() {
        return Err(Error::DivergentNorm { exponent: rp });
    }
    Ok(total.powf(1.0 / rp))
}
