//! Point sets for estimating `max_x |g(x)|` of a Chebyshev series on
//! `[−1, 1]^d`.

use serde::{Deserialize, Serialize};

use super::chebyshev::{chebyshev_extrema, chebyshev_table};
use crate::exec::{self, Execution};

/// A tensor grid of Chebyshev extrema, or an explicit list of points.
#[derive(Debug, Clone, PartialEq)]
pub enum EvaluationGrid {
    Tensor { d: usize, per_axis: usize },
    Points { d: usize, points: Vec<Vec<f64>> },
}

/// How to pick the grid for a dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub tensor_points: usize,
    pub tensor_max_dim: usize,
    pub halton_points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            tensor_points: 33,
            tensor_max_dim: 4,
            halton_points: 1 << 14,
        }
    }
}

impl GridConfig {
    pub fn grid(&self, d: usize) -> EvaluationGrid {
        if d <= self.tensor_max_dim {
            EvaluationGrid::Tensor { d, per_axis: self.tensor_points }
        } else {
            EvaluationGrid::Points { d, points: halton_with_corners(self.halton_points, d) }
        }
    }
}

const PRIMES: [u32; 32] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109,
    113, 127, 131,
];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while i > 0 {
        x += (i % base) as f64 * f;
        i /= base;
        f *= inv;
    }
    x
}

/// The first `n` Halton points (skipping the origin) mapped to `[−1, 1]^d`.
pub fn halton(n: usize, d: usize) -> Vec<Vec<f64>> {
    assert!(d <= PRIMES.len(), "Halton points are tabulated up to dimension {}", PRIMES.len());
    (1..=n as u64)
        .map(|i| {
            PRIMES[..d]
                .iter()
                .map(|&p| 2.0 * radical_inverse(i, u64::from(p)) - 1.0)
                .collect()
        })
        .collect()
}

/// Halton points plus the `2^d` corners, where Chebyshev series often
/// peak.
pub fn halton_with_corners(n: usize, d: usize) -> Vec<Vec<f64>> {
    let mut pts = halton(n, d);
    for mask in 0..1u64 << d {
        pts.push((0..d).map(|l| if mask >> l & 1 == 1 { -1.0 } else { 1.0 }).collect());
    }
    pts
}

impl EvaluationGrid {
    pub fn dim(&self) -> usize {
        match self {
            EvaluationGrid::Tensor { d, .. } | EvaluationGrid::Points { d, .. } => *d,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            EvaluationGrid::Tensor { d, per_axis } => per_axis.pow(*d as u32),
            EvaluationGrid::Points { points, .. } => points.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `max |Σ c_k T_k(x)|` over the grid.
    pub fn max_abs(&self, terms: &[(&[u32], f64)], exec: Execution) -> f64 {
        match self {
            EvaluationGrid::Tensor { d, per_axis } => tensor_max_abs(terms, *d, *per_axis),
            EvaluationGrid::Points { points, .. } => points_max_abs(terms, points, exec),
        }
    }
}

/// Sum factorization on the extrema grid `x_j = cos(jπ/N)`: there
/// `T_k(x_j) = cos(kjπ/N)` depends on `k` only through its reflection
/// into `0..=N`, so the coefficients fold into an `(N+1)^d` tensor which
/// is then transformed one axis at a time.
fn tensor_max_abs(terms: &[(&[u32], f64)], d: usize, n_pts: usize) -> f64 {
    assert!(n_pts >= 2);
    let n = n_pts - 1;
    let size = n_pts.pow(d as u32);
    let mut c = vec![0.0; size];
    for (k, coef) in terms {
        let mut idx = 0;
        for &kl in k.iter() {
            let m = kl as usize % (2 * n);
            let m = if m > n { 2 * n - m } else { m };
            idx = idx * n_pts + m;
        }
        c[idx] += coef;
    }
    // cos(mjπ/N) with exact argument reduction
    let mat: Vec<f64> = (0..n_pts)
        .flat_map(|j| {
            (0..n_pts).map(move |m| {
                let r = (m * j) % (2 * n);
                (std::f64::consts::PI * r as f64 / n as f64).cos()
            })
        })
        .collect();
    let mut buf = vec![0.0; size];
    let mut line = vec![0.0; n_pts];
    for axis in 0..d {
        let stride = n_pts.pow((d - 1 - axis) as u32);
        let block = stride * n_pts;
        for base in (0..size).step_by(block) {
            for off in 0..stride {
                for (m, slot) in line.iter_mut().enumerate() {
                    *slot = c[base + off + m * stride];
                }
                for j in 0..n_pts {
                    let row = &mat[j * n_pts..(j + 1) * n_pts];
                    buf[base + off + j * stride] = row.iter().zip(&line).map(|(a, b)| a * b).sum();
                }
            }
        }
        std::mem::swap(&mut c, &mut buf);
    }
    c.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn points_max_abs(terms: &[(&[u32], f64)], points: &[Vec<f64>], exec: Execution) -> f64 {
    let kmax = terms.iter().flat_map(|(k, _)| k.iter()).copied().max().unwrap_or(0) as usize;
    let values = exec::map(exec, points, |x| {
        let tables: Vec<Vec<f64>> = x.iter().map(|&xl| chebyshev_table(xl, kmax)).collect();
        let mut sum = 0.0;
        for (k, coef) in terms {
            let mut p = *coef;
            for (l, &kl) in k.iter().enumerate() {
                if kl > 0 {
                    p *= tables[l][kl as usize];
                }
            }
            sum += p;
        }
        sum.abs()
    });
    values.into_iter().fold(0.0, f64::max)
}

/// The points of a tensor grid, in the same order as the transform.
pub fn tensor_points(d: usize, per_axis: usize) -> Vec<Vec<f64>> {
    let x = chebyshev_extrema(per_axis);
    let total = per_axis.pow(d as u32);
    (0..total)
        .map(|mut code| {
            let mut p = vec![0.0; d];
            for slot in p.iter_mut().rev() {
                *slot = x[code % per_axis];
                code /= per_axis;
            }
            p
        })
        .collect()
}
