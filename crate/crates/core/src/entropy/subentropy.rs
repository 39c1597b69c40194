//! Numerically stable subentropy evaluation.
//!
//! For weights `z` summing to one, the defining divided difference of
//! `f(x) = x^n ln x` can be rewritten with `ln x = ∫ (1/(1+t) - 1/(x+t)) dt`:
//!
//! ```text
//! Q(z) = ∫_0^∞ ( t/(1+t) - Π_i t/(t+z_i) ) dt
//! ```
//!
//! The integrand is a difference of two numbers in `[0, 1]` and never
//! divides by eigenvalue gaps, so coincident and zero eigenvalues need no
//! special treatment. Substituting `t = e^s`, the integrand decays
//! exponentially in both directions and is analytic in the strip
//! `|Im s| < π`, so the trapezoidal rule converges geometrically. The
//! difference is formed as `-(t/(1+t)) expm1(-D)` with
//! `D = Σ ln(1 + z_i/t) - ln(1 + 1/t) ≥ 0`, which keeps absolute accuracy
//! where both terms approach one.

use std::sync::OnceLock;

const STEP: f64 = 0.2;
const LOG_T_MIN: f64 = -40.0;
const LOG_T_MAX: f64 = 45.0;

struct Node {
    inv_t: f64,
    /// `ln(1 + 1/t)`
    log_ratio: f64,
    /// `t · t/(1+t)`, the measure `dt = t ds` times `e^{-ln(1+1/t)}`.
    weight: f64,
    /// `t/(1+t)`
    damp: f64,
}

fn grid() -> &'static [Node] {
    static GRID: OnceLock<Vec<Node>> = OnceLock::new();
    GRID.get_or_init(|| {
        let count = ((LOG_T_MAX - LOG_T_MIN) / STEP).round() as usize;
        (0..=count)
            .map(|k| {
                let s = LOG_T_MIN + k as f64 * STEP;
                let t = s.exp();
                let damp = t / (1.0 + t);
                Node {
                    inv_t: 1.0 / t,
                    log_ratio: (1.0 / t).ln_1p(),
                    weight: t * damp,
                    damp,
                }
            })
            .collect()
    })
}

fn normalized(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    weights
        .iter()
        .filter(|&&w| w > 0.0)
        .map(|w| w / total)
        .collect()
}

/// Subentropy of non-negative weights; the weights are rescaled to sum to one.
pub(crate) fn subentropy_integral(weights: &[f64]) -> f64 {
    let z = normalized(weights);
    if z.len() <= 1 {
        return 0.0;
    }
    let sum: f64 = grid()
        .iter()
        .map(|node| {
            let d: f64 =
                z.iter().map(|&zi| (zi * node.inv_t).ln_1p()).sum::<f64>() - node.log_ratio;
            -node.weight * (-d.max(0.0)).exp_m1()
        })
        .sum();
    sum * STEP
}

/// Partial derivatives of `F` (the natural extension of the subentropy
/// formula off the simplex) at weights summing to one.
///
/// `∂F/∂z_k = ∫ (t/(1+t)) expm1(-D - ln(1 + z_k/t)) ds` in the same
/// substitution as [`subentropy_integral`]; this equals minus the divided
/// difference of `x^n ln x` with `z_k` repeated.
pub(crate) fn subentropy_gradient_integral(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    let z: Vec<f64> = weights.iter().map(|w| w / total).collect();
    let mut grad = vec![0.0; z.len()];
    for node in grid() {
        let logs: Vec<f64> = z.iter().map(|&zi| (zi * node.inv_t).ln_1p()).collect();
        let d = logs.iter().sum::<f64>() - node.log_ratio;
        for (g, l) in grad.iter_mut().zip(&logs) {
            *g += node.damp * (-d - l).exp_m1();
        }
    }
    grad.iter_mut().for_each(|g| *g *= STEP);
    grad
}

#[cfg(test)]
mod tests {
    use super::*;

    fn closed_form_uniform(n: usize) -> f64 {
        (n as f64).ln() - (2..=n).map(|k| 1.0 / k as f64).sum::<f64>()
    }

    #[test]
    fn uniform_matches_closed_form() {
        for n in 1..=64 {
            let q = subentropy_integral(&vec![1.0 / n as f64; n]);
            assert!((q - closed_form_uniform(n)).abs() < 1e-13, "n = {n}: {q}");
        }
    }

    #[test]
    fn pure_is_zero() {
        assert_eq!(subentropy_integral(&[1.0, 0.0, 0.0]), 0.0);
    }

    #[test]
    fn two_level_closed_form() {
        // F(a, b) = -(a² ln a - b² ln b)/(a - b)
        let (a, b): (f64, f64) = (0.75, 0.25);
        let expected = -(a * a * a.ln() - b * b * b.ln()) / (a - b);
        assert!((subentropy_integral(&[a, b]) - expected).abs() < 1e-14);
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let z = [0.5, 0.3, 0.15, 0.05];
        let g = subentropy_gradient_integral(&z);
        // Directional derivative along e_i - e_j stays on the simplex.
        let h = 1e-5;
        for (i, j) in [(0, 1), (1, 3), (2, 0)] {
            let mut zp = z;
            let mut zm = z;
            zp[i] += h;
            zp[j] -= h;
            zm[i] -= h;
            zm[j] += h;
            let fd = (subentropy_integral(&zp) - subentropy_integral(&zm)) / (2.0 * h);
            assert!((fd - (g[i] - g[j])).abs() < 1e-8, "{fd} vs {}", g[i] - g[j]);
        }
    }
}
