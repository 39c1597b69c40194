//! Classical subentropy: cyclic-permutation stochastic maps, KL divergence,
//! mutual information, the averaged-information identities and the capacity
//! of the channel that applies a uniformly random cyclic map.

use serde::Serialize;

use crate::entropy::{
    shannon_unchecked, subentropy_gradient_integral, subentropy_integral, ProbVector,
};
use crate::error::{Error, Result};
use crate::montecarlo::{estimate_mean, EstimatorResult};
use crate::spectra::{random_simplex_with, RngSeed};

const JOINT_TOL: f64 = 1e-10;
const VALUE_NOISE: f64 = 1e-13;
/// Iteration cap for [`channel_capacity`].
pub const CAPACITY_MAX_ITERATIONS: usize = 10_000;

/// `Λ = Σ_α t_α P_α` over the `n` cyclic shifts; entry `(j, i)` is
/// `t[(j - i) mod n]`, so `t_0` weights the identity.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CyclicChannel {
    t: ProbVector,
}

impl CyclicChannel {
    pub fn new(t: ProbVector) -> Self {
        Self { t }
    }

    pub fn identity(n: usize) -> Self {
        Self::new(ProbVector::delta(n, 0))
    }

    pub fn weights(&self) -> &[f64] {
        self.t.probs()
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// `t_ji`
    #[inline]
    pub fn entry(&self, j: usize, i: usize) -> f64 {
        let n = self.len();
        self.t.probs()[(j + n - i) % n]
    }

    /// Row-major `n x n` matrix `[t_ji]`.
    pub fn matrix(&self) -> Vec<Vec<f64>> {
        let n = self.len();
        (0..n)
            .map(|j| (0..n).map(|i| self.entry(j, i)).collect())
            .collect()
    }
}

/// `(Λp)_j = Σ_i t_ji p_i`
pub fn apply_channel(chan: &CyclicChannel, p: &ProbVector) -> Result<ProbVector> {
    check_len(chan.len(), p.len())?;
    ProbVector::new(apply_raw(chan.weights(), p.probs()))
}

fn apply_raw(t: &[f64], p: &[f64]) -> Vec<f64> {
    let n = t.len();
    (0..n)
        .map(|j| (0..n).map(|i| t[(j + n - i) % n] * p[i]).sum())
        .collect()
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Non-negative table summing to one; rows index `X`, columns `Y`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JointDistribution {
    table: Vec<Vec<f64>>,
}

impl JointDistribution {
    pub fn new(table: Vec<Vec<f64>>) -> Result<Self> {
        let cols = table.first().map_or(0, |r| r.len());
        if table.is_empty() || cols == 0 {
            return Err(Error::InvalidDimension("empty joint distribution".into()));
        }
        let mut table = table;
        let mut sum = 0.0;
        for (row, r) in table.iter_mut().enumerate() {
            if r.len() != cols {
                return Err(Error::RaggedRow {
                    row,
                    expected: cols,
                    found: r.len(),
                });
            }
            for (col, v) in r.iter_mut().enumerate() {
                if v.is_nan() || *v < -1e-12 {
                    return Err(Error::EntryOutOfRange {
                        index: row * cols + col,
                        value: *v,
                    });
                }
                *v = v.max(0.0);
                sum += *v;
            }
        }
        if (sum - 1.0).abs() > JOINT_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { table })
    }

    /// `{t_ji p_i}`: the joint law of `X ~ p` and `Λ(X)`.
    pub fn from_channel(chan: &CyclicChannel, p: &ProbVector) -> Result<Self> {
        check_len(chan.len(), p.len())?;
        Ok(Self {
            table: joint_raw(chan.weights(), p.probs()),
        })
    }

    pub fn table(&self) -> &[Vec<f64>] {
        &self.table
    }

    pub fn row_marginal(&self) -> Vec<f64> {
        self.table.iter().map(|r| r.iter().sum()).collect()
    }

    pub fn column_marginal(&self) -> Vec<f64> {
        let mut c = vec![0.0; self.table[0].len()];
        for r in &self.table {
            for (cj, v) in c.iter_mut().zip(r) {
                *cj += v;
            }
        }
        c
    }
}

fn joint_raw(t: &[f64], p: &[f64]) -> Vec<Vec<f64>> {
    let n = t.len();
    (0..n)
        .map(|i| (0..n).map(|j| t[(j + n - i) % n] * p[i]).collect())
        .collect()
}

fn kl_raw(gamma: &[f64], mu: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&g, &m) in gamma.iter().zip(mu) {
        if g > 0.0 {
            if m <= 0.0 {
                return f64::INFINITY;
            }
            d += g * (g / m).ln();
        }
    }
    d.max(0.0)
}

/// `Σ γ_i ln(γ_i/μ_i)`, `f64::INFINITY` if some `γ_i > 0 = μ_i`.
pub fn kl_divergence(gamma: &ProbVector, mu: &ProbVector) -> Result<f64> {
    check_len(gamma.len(), mu.len())?;
    Ok(kl_raw(gamma.probs(), mu.probs()))
}

fn mi_raw(table: &[Vec<f64>]) -> f64 {
    let r: Vec<f64> = table.iter().map(|row| row.iter().sum()).collect();
    let mut c = vec![0.0; table[0].len()];
    for row in table {
        for (cj, v) in c.iter_mut().zip(row) {
            *cj += v;
        }
    }
    let mut i = 0.0;
    for (row, ri) in table.iter().zip(&r) {
        for (v, cj) in row.iter().zip(&c) {
            if *v > 0.0 {
                i += v * (v / (ri * cj)).ln();
            }
        }
    }
    i.max(0.0)
}

/// `I(X:Y) = Σ J_ij ln(J_ij / (r_i c_j))`
pub fn mutual_information(joint: &JointDistribution) -> f64 {
    mi_raw(&joint.table)
}

/// `Q(X) = F(p)`
pub fn classical_subentropy(p: &ProbVector) -> f64 {
    subentropy_integral(p.probs())
}

/// `⟨I(X : Λ(X))⟩` over `t` uniform on the simplex.
pub fn estimate_q_classical_mi(
    p: &ProbVector,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = p.len();
    let probs = p.probs();
    estimate_mean(samples, seed, |rng| {
        let t = random_simplex_with(n, rng);
        mi_raw(&joint_raw(&t, probs))
    })
}

/// `Σ_i p_i ⟨D(Λ(δ_i) ‖ Λ(p))⟩` over `t` uniform on the simplex.
pub fn estimate_q_classical_kl(
    p: &ProbVector,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = p.len();
    let probs = p.probs();
    estimate_mean(samples, seed, |rng| {
        let t = random_simplex_with(n, rng);
        let out = apply_raw(&t, probs);
        let mut total = 0.0;
        for (i, &pi) in probs.iter().enumerate() {
            if pi > 0.0 {
                let column: Vec<f64> = (0..n).map(|j| t[(j + n - i) % n]).collect();
                total += pi * kl_raw(&column, &out);
            }
        }
        total
    })
}

/// `I(X : (T, Λ_T(X)))` for the channel that draws `T` uniformly and outputs
/// `(T, Λ_T(X))`, estimated through `H(X) - H(X | Λ_T(X), T = t)` per sample.
pub fn estimate_q_channel_w(
    p: &ProbVector,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = p.len();
    let probs = p.probs();
    let h_x = shannon_unchecked(probs);
    estimate_mean(samples, seed, |rng| {
        let t = random_simplex_with(n, rng);
        let joint = joint_raw(&t, probs);
        let mut h_cond = 0.0;
        for j in 0..n {
            let cj: f64 = joint.iter().map(|row| row[j]).sum();
            if cj > 0.0 {
                let posterior: Vec<f64> = joint.iter().map(|row| row[j] / cj).collect();
                h_cond += cj * shannon_unchecked(&posterior);
            }
        }
        h_x - h_cond
    })
}

/// Euclidean projection onto the probability simplex.
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumulative += uk;
        let candidate = (cumulative - 1.0) / (k + 1) as f64;
        if uk - candidate > 0.0 {
            theta = candidate;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct CapacityResult {
    pub capacity: f64,
    pub argmax: ProbVector,
    pub iterations: usize,
    /// Norm of the final gradient mapping `(proj(p + s∇F) - p)/s`.
    pub gradient_mapping: f64,
    pub converged: bool,
}

/// `max_p Q(X)` by projected gradient ascent with backtracking (step halved
/// from 0.5). Starts from the asymmetric point `p_i ∝ i + 1` and stops once
/// the gradient mapping norm is at most `tol`.
pub fn channel_capacity(n: usize, tol: f64) -> Result<CapacityResult> {
    if n < 2 {
        return Err(Error::InvalidDimension(format!(
            "capacity needs n >= 2, got {n}"
        )));
    }
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "tol",
            value: tol,
        });
    }
    let norm = (n * (n + 1) / 2) as f64;
    let mut p: Vec<f64> = (0..n).map(|i| (i + 1) as f64 / norm).collect();
    let mut value = subentropy_integral(&p);
    let mut mapping = f64::INFINITY;
    let mut iterations = 0;
    while iterations < CAPACITY_MAX_ITERATIONS {
        iterations += 1;
        let grad = subentropy_gradient_integral(&p);
        let mut step = 0.5;
        let mut accepted = None;
        while step > 1e-12 {
            let trial: Vec<f64> = p.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
            let next = project_to_simplex(&trial);
            if step == 0.5 {
                let moved = next
                    .iter()
                    .zip(&p)
                    .map(|(a, b)| (a - b).powi(2))
                    .sum::<f64>()
                    .sqrt();
                mapping = moved / step;
                if mapping <= tol {
                    break;
                }
            }
            // Values this close to the maximum differ only at roundoff level.
            let v = subentropy_integral(&next);
            if v >= value - VALUE_NOISE {
                accepted = Some((next, v));
                break;
            }
            step *= 0.5;
        }
        if mapping <= tol {
            break;
        }
        match accepted {
            Some((next, v)) => {
                p = next;
                value = value.max(v);
            }
            None => break,
        }
    }
    Ok(CapacityResult {
        capacity: value,
        argmax: ProbVector::new(p)?,
        iterations,
        gradient_mapping: mapping,
        converged: mapping <= tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::harmonic_tail;

    const Q34: f64 = 0.150_355_536_368_267_2;

    fn pv(v: &[f64]) -> ProbVector {
        ProbVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn channel_layout_and_stochasticity() {
        let chan = CyclicChannel::new(pv(&[0.5, 0.3, 0.2]));
        let m = chan.matrix();
        assert_eq!(m[1][0], 0.3);
        assert_eq!(m[0][1], 0.2);
        for k in 0..3 {
            let row: f64 = m[k].iter().sum();
            let col: f64 = m.iter().map(|r| r[k]).sum();
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn apply_channel_examples() {
        let p = pv(&[0.2, 0.5, 0.3]);
        assert_eq!(apply_channel(&CyclicChannel::identity(3), &p).unwrap(), p);
        let chan = CyclicChannel::new(pv(&[0.1, 0.6, 0.3]));
        let u = apply_channel(&chan, &ProbVector::uniform(3).unwrap()).unwrap();
        assert!(u.probs().iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
        let out = apply_channel(&CyclicChannel::new(pv(&[0.7, 0.3])), &pv(&[1.0, 0.0])).unwrap();
        assert_eq!(out.probs(), &[0.7, 0.3]);
        assert!(apply_channel(&chan, &pv(&[0.5, 0.5])).is_err());
    }

    #[test]
    fn kl_examples() {
        let p = pv(&[0.3, 0.7]);
        assert_eq!(kl_divergence(&p, &p).unwrap(), 0.0);
        let d = kl_divergence(&pv(&[1.0, 0.0]), &pv(&[0.5, 0.5])).unwrap();
        assert!((d - 2f64.ln()).abs() < 1e-15);
        assert_eq!(
            kl_divergence(&pv(&[0.5, 0.5]), &pv(&[1.0, 0.0])).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn mutual_information_examples() {
        let product = JointDistribution::new(vec![vec![0.12, 0.28], vec![0.18, 0.42]]).unwrap();
        assert!(mutual_information(&product).abs() < 1e-15);
        let diag = JointDistribution::new(vec![vec![0.5, 0.0], vec![0.0, 0.5]]).unwrap();
        assert!((mutual_information(&diag) - 2f64.ln()).abs() < 1e-15);
        let j = JointDistribution::new(vec![vec![0.4, 0.1], vec![0.1, 0.4]]).unwrap();
        let expected = 0.8 * (1.6f64).ln() + 0.2 * (0.4f64).ln();
        assert!((mutual_information(&j) - expected).abs() < 1e-15);
        assert!((expected - 0.192_745).abs() < 1e-6);
        assert!(JointDistribution::new(vec![vec![0.5, 0.4]]).is_err());
        assert!(JointDistribution::new(vec![vec![0.5, 0.5], vec![0.0]]).is_err());
    }

    #[test]
    fn joint_from_channel_marginals() {
        let chan = CyclicChannel::new(pv(&[0.2, 0.5, 0.3]));
        let p = pv(&[0.6, 0.1, 0.3]);
        let j = JointDistribution::from_channel(&chan, &p).unwrap();
        let out = apply_channel(&chan, &p).unwrap();
        for (a, b) in j.row_marginal().iter().zip(p.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
        for (a, b) in j.column_marginal().iter().zip(out.probs()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn classical_subentropy_examples() {
        assert_eq!(classical_subentropy(&pv(&[1.0, 0.0, 0.0])), 0.0);
        for n in 2..7 {
            let q = classical_subentropy(&ProbVector::uniform(n).unwrap());
            assert!((q - ((n as f64).ln() - harmonic_tail(n).unwrap())).abs() < 1e-13);
        }
        assert!((classical_subentropy(&pv(&[0.75, 0.25])) - Q34).abs() < 1e-9);
        assert!((classical_subentropy(&pv(&[0.25, 0.75])) - Q34).abs() < 1e-9);
    }

    #[test]
    fn estimator_examples() {
        let seed = RngSeed(42);
        let det = pv(&[1.0, 0.0]);
        assert!(
            estimate_q_classical_mi(&det, 1000, seed)
                .unwrap()
                .estimate
                .abs()
                < 1e-15
        );
        assert!(
            estimate_q_classical_kl(&det, 1000, seed)
                .unwrap()
                .estimate
                .abs()
                < 1e-15
        );
        let half = ProbVector::uniform(2).unwrap();
        assert!(estimate_q_classical_mi(&half, 100_000, seed)
            .unwrap()
            .within_sigma(2f64.ln() - 0.5, 3.0));
        let three = ProbVector::uniform(3).unwrap();
        assert!(estimate_q_classical_kl(&three, 100_000, seed)
            .unwrap()
            .within_sigma(3f64.ln() - 5.0 / 6.0, 3.0));
        let p = pv(&[0.75, 0.25]);
        assert!(estimate_q_classical_mi(&p, 100_000, seed)
            .unwrap()
            .within_sigma(Q34, 3.0));
    }

    #[test]
    fn estimators_agree_samplewise() {
        let p = pv(&[0.5, 0.2, 0.3]);
        let a = estimate_q_classical_mi(&p, 5000, RngSeed(1)).unwrap();
        let b = estimate_q_classical_kl(&p, 5000, RngSeed(1)).unwrap();
        let c = estimate_q_channel_w(&p, 5000, RngSeed(1)).unwrap();
        assert!((a.estimate - b.estimate).abs() < 1e-12);
        assert!((a.estimate - c.estimate).abs() < 1e-12);
    }

    #[test]
    fn simplex_projection() {
        assert_eq!(project_to_simplex(&[0.2, 0.8]), vec![0.2, 0.8]);
        let p = project_to_simplex(&[2.0, 0.0, -1.0]);
        assert_eq!(p, vec![1.0, 0.0, 0.0]);
        let p = project_to_simplex(&[0.5, 0.5, 0.5]);
        assert!(p.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-15));
    }

    #[test]
    fn capacity_examples() {
        let mut previous = 0.0;
        for n in 2..=8 {
            let c = channel_capacity(n, 1e-9).unwrap();
            let expected = (n as f64).ln() - harmonic_tail(n).unwrap();
            assert!(c.converged, "n = {n}: {c:?}");
            assert!((c.capacity - expected).abs() < 1e-6, "n = {n}");
            assert!(c
                .argmax
                .probs()
                .iter()
                .all(|x| (x - 1.0 / n as f64).abs() < 1e-5));
            assert!(c.capacity > previous && c.capacity < 1.0 - 0.577_215_664_901_532_9);
            previous = c.capacity;
        }
        assert!(channel_capacity(1, 1e-6).is_err());
        assert!(channel_capacity(3, 0.0).is_err());
    }
}
