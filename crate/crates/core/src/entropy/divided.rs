//! Subentropy as a Newton divided difference of `f(x) = x^n ln x`.
//!
//! Eigenvalues closer than a relative threshold are merged into clusters and
//! repeated nodes use the analytic Taylor coefficients `f^(k)(x)/k!`, so the
//! table is exact at coincident and zero eigenvalues. The table itself
//! divides by node gaps and loses accuracy as the dimension grows (roughly
//! 1e-9 absolute at n = 8); [`super::subentropy_of_spectrum`] uses the
//! integral form instead and this module serves as an independent route.

use super::dd::Dd;

/// Default relative gap below which eigenvalues are merged.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;
/// Eigenvalues at most this large are treated as exact zeros.
pub const ZERO_CLUSTER_TOL: f64 = 1e-12;

/// Taylor coefficients `f^(k)(x)/k!` of `x^power ln x`, for `k < power`,
/// kept as `x^(power-k) (a_k ln x + c_k)` with `a_k = C(power, k)` and `c_k`
/// from the product-rule recurrence.
struct TaylorTable {
    power: usize,
    log_coeff: Vec<f64>,
    poly_coeff: Vec<f64>,
}

impl TaylorTable {
    fn new(power: usize, max_order: usize) -> Self {
        let mut log_coeff = Vec::with_capacity(max_order + 1);
        let mut poly_coeff = Vec::with_capacity(max_order + 1);
        let (mut a, mut c) = (1.0f64, 0.0f64);
        for k in 0..=max_order {
            log_coeff.push(a);
            poly_coeff.push(c);
            let m = (power - k) as f64;
            let next_a = a * m / (k + 1) as f64;
            let next_c = (a + c * m) / (k + 1) as f64;
            a = next_a;
            c = next_c;
        }
        Self {
            power,
            log_coeff,
            poly_coeff,
        }
    }

    fn coefficient(&self, k: usize, x: f64) -> f64 {
        if x == 0.0 {
            // x^(power-k) ln x -> 0 for k < power
            return 0.0;
        }
        let m = (self.power - k) as i32;
        x.powi(m) * (self.log_coeff[k] * x.ln() + self.poly_coeff[k])
    }
}

/// Sorts descending and replaces each cluster of nearby values by its mean;
/// clusters at (numerical) zero become exact zeros.
pub(crate) fn cluster_nodes(values: &[f64], rel_tol: f64) -> Vec<f64> {
    let mut v: Vec<f64> = values.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    let mut out = Vec::with_capacity(v.len());
    let mut start = 0;
    for i in 1..=v.len() {
        let split = i == v.len() || {
            let (a, b) = (v[i - 1], v[i]);
            let gap = (a - b).abs();
            gap > (rel_tol * a.abs().max(b.abs())).max(ZERO_CLUSTER_TOL)
        };
        if split {
            let members = &v[start..i];
            let mean = members.iter().sum::<f64>() / members.len() as f64;
            let rep = if mean <= ZERO_CLUSTER_TOL { 0.0 } else { mean };
            out.extend(std::iter::repeat_n(rep, members.len()));
            start = i;
        }
    }
    out
}

/// Divided difference `f[z_1, ..., z_m]` of `f(x) = x^power ln x` over the
/// clustered nodes. Requires `m <= power`.
pub fn confluent_divided_difference(nodes: &[f64], power: usize, rel_tol: f64) -> f64 {
    let z = cluster_nodes(nodes, rel_tol);
    let m = z.len();
    assert!(m >= 1 && m <= power, "need 1 <= nodes <= power");
    let taylor = TaylorTable::new(power, m - 1);
    let mut table: Vec<f64> = z.iter().map(|&x| taylor.coefficient(0, x)).collect();
    for j in 1..m {
        for i in 0..(m - j) {
            table[i] = if z[i] == z[i + j] {
                taylor.coefficient(j, z[i])
            } else {
                (table[i + 1] - table[i]) / (z[i + j] - z[i])
            };
        }
    }
    table[0]
}

/// Subentropy via the clustered divided-difference table.
pub fn subentropy_divided_difference(values: &[f64], rel_tol: f64) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    -confluent_divided_difference(values, n, rel_tol)
}

/// The defining sum `-Σ_i λ_i^n ln λ_i / Π_{j≠i}(λ_i - λ_j)`, valid only for
/// pairwise distinct values. Returns `None` when two values coincide.
pub fn subentropy_generic(values: &[f64]) -> Option<f64> {
    // Terms grow like 1 / prod(gaps) and cancel, so accumulate in double-double.
    let n = values.len();
    let mut total = Dd::from_f64(0.0);
    for (i, &li) in values.iter().enumerate() {
        let mut denom = Dd::from_f64(1.0);
        for (j, &lj) in values.iter().enumerate() {
            if i != j {
                if li == lj {
                    return None;
                }
                denom = denom * (Dd::from_f64(li) - Dd::from_f64(lj));
            }
        }
        if li > 0.0 {
            total = total + Dd::from_f64(li).powi(n as u32) * Dd::ln(li) / denom;
        }
    }
    Some(-total.to_f64())
}
