//! Chebyshev polynomials `T_k(x) = cos(k arccos x)` and their tensor
//! products on `[−1, 1]^d`.

use crate::approximation::Term;
use crate::error::{invalid, Result};

/// `T_0(x), …, T_n(x)` by the three-term recurrence.
pub fn chebyshev_table(x: f64, n: usize) -> Vec<f64> {
    let mut t = Vec::with_capacity(n + 1);
    t.push(1.0);
    if n >= 1 {
        t.push(x);
    }
    for k in 2..=n {
        let v = 2.0 * x * t[k - 1] - t[k - 2];
        t.push(v);
    }
    t
}

/// `T_k(x)`.
pub fn chebyshev_t(k: u32, x: f64) -> f64 {
    match k {
        0 => 1.0,
        1 => x,
        _ => (f64::from(k) * x.clamp(-1.0, 1.0).acos()).cos(),
    }
}

fn check_point(x: &[f64]) -> Result<()> {
    if x.iter().all(|v| (-1.0..=1.0).contains(v)) {
        Ok(())
    } else {
        Err(invalid(format!("point {x:?} lies outside [-1, 1]^d")))
    }
}

/// `Σ coef ∏_ℓ T_{k_ℓ}(x_ℓ)`.
pub fn chebyshev_eval(terms: &[Term], x: &[f64]) -> Result<f64> {
    check_point(x)?;
    let mut sum = 0.0;
    for t in terms {
        if t.k.len() != x.len() {
            return Err(crate::Error::DimensionMismatch { expected: x.len(), got: t.k.len() });
        }
        let mut p = t.coef;
        for (&k, &xl) in t.k.iter().zip(x) {
            if k > 0 {
                p *= chebyshev_t(k, xl);
            }
        }
        sum += p;
    }
    Ok(sum)
}

/// Chebyshev extrema `cos(jπ/(n−1))`, `j = 0..n`, from `1` down to `−1`.
pub fn chebyshev_extrema(n: usize) -> Vec<f64> {
    assert!(n >= 2, "need at least two extrema");
    let m = (n - 1) as f64;
    (0..n)
        .map(|j| {
            // exact values at the ends and the middle
            if 2 * j == n - 1 {
                0.0
            } else {
                (std::f64::consts::PI * j as f64 / m).cos()
            }
        })
        .collect()
}
