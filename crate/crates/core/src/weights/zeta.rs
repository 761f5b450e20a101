use crate::error::{invalid, Result};

/// Terms summed directly before the Euler–Maclaurin remainder kicks in.
const DIRECT_TERMS: u32 = 10;

/// B_2, B_4, ..., B_20.
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

/// Riemann zeta function for real `x > 1`.
///
/// Sums `n^-x` for `n < N` with `N = 10`, then closes the tail with the
/// Euler–Maclaurin formula carried to ten Bernoulli corrections. The
/// truncation error is below `1e-16` relative on the whole half-line.
pub fn zeta(x: f64) -> Result<f64> {
    if !(x > 1.0) || x.is_nan() {
        return Err(invalid(format!("zeta requires x > 1, got {x}")));
    }
    if x.is_infinite() {
        return Ok(1.0);
    }
    let n = f64::from(DIRECT_TERMS);
    // small terms first
    let mut head = 0.0;
    for k in (1..DIRECT_TERMS).rev() {
        head += f64::from(k).powf(-x);
    }
    let n_pow = n.powf(-x);
    let mut tail = n * n_pow / (x - 1.0) + 0.5 * n_pow;

    // B_{2j}/(2j)! * x(x+1)...(x+2j-2) * N^{-x-2j+1}
    let mut rising = x; // x(x+1)...(x+2j-2)
    let mut factorial = 2.0; // (2j)!
    let mut n_power = n_pow / n; // N^{-x-2j+1}
    for (j, b) in BERNOULLI_EVEN.iter().enumerate() {
        if j > 0 {
            let m = 2.0 * j as f64;
            rising *= (x + m - 1.0) * (x + m);
            factorial *= (m + 1.0) * (m + 2.0);
            n_power /= n * n;
        }
        tail += b / factorial * rising * n_power;
    }
    Ok(head + tail)
}
