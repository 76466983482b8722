//! Clamp-then-normalize repair onto the probability simplex.

use crate::rule::SIMPLEX_TOL;

/// Clamps every component into `[0, 1]` and divides by the sum.
///
/// The flag reports whether the input violated the bounds or the unit sum
/// (beyond `1e-9`). An all-zero vector after clamping becomes the uniform
/// vector and is flagged.
pub fn repair(v: &[f64]) -> (Vec<f64>, bool) {
    let mut out: Vec<f64> = v.iter().map(|&x| x.clamp(0.0, 1.0)).collect();
    let clamped = out.iter().zip(v).any(|(a, b)| a != b);
    let raw_sum: f64 = v.iter().sum();
    let infeasible = clamped || (raw_sum - 1.0).abs() > SIMPLEX_TOL;

    let sum: f64 = out.iter().sum();
    if sum <= 0.0 {
        let k = v.len();
        return (vec![1.0 / k as f64; k], true);
    }
    for x in &mut out {
        *x /= sum;
    }
    (out, infeasible)
}
