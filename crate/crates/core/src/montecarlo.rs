//! Seeded Monte Carlo estimators for the averaged representations of
//! subentropy: Haar-random measurements, the simplex integral, and averaged
//! relative entropies over a pure-state decomposition.
//!
//! Samples are split into fixed-size batches. Batch `b` draws from substream
//! `b` of the seed and batches are merged in order, so an estimate depends
//! only on `(seed, samples)` and not on the number of worker threads.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::{eta_unchecked, harmonic_tail_unchecked, shannon_unchecked};
use crate::error::{Error, Result};
use crate::spectra::{
    haar_unitary_with, random_pure_vector_with, random_simplex_with, CMatrix, DensityMatrix,
    RngSeed, Spectrum, C64,
};

const ROUNDOFF: f64 = 1e-12;

/// Samples per batch (and per substream).
pub const BATCH_SIZE: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EstimatorResult {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub seed: RngSeed,
}

impl EstimatorResult {
    /// `(estimate - target) / std_error`. Deviations at roundoff level
    /// (`1e-12`) count as zero, which matters for zero-variance samplers such
    /// as a maximally mixed input.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = self.estimate - target;
        if d.abs() <= ROUNDOFF {
            0.0
        } else if self.std_error > 0.0 {
            d / self.std_error
        } else {
            d.signum() * f64::INFINITY
        }
    }

    pub fn within_sigma(&self, target: f64, k: f64) -> bool {
        self.z_score(target).abs() <= k
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    count: usize,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / count as f64;
        Moments {
            count,
            mean: self.mean + d * w,
            m2: self.m2 + other.m2 + d * d * self.count as f64 * w,
        }
    }
}

/// Runs `sample` `samples` times over deterministic substreams and returns
/// the sample mean and its standard error.
pub fn estimate_mean<F>(samples: usize, seed: RngSeed, sample: F) -> Result<EstimatorResult>
where
    F: Fn(&mut ChaCha8Rng) -> f64 + Sync,
{
    if samples < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least 2 samples, got {samples}"
        )));
    }
    let batches = samples.div_ceil(BATCH_SIZE);
    let parts: Vec<Moments> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed.stream(b as u64);
            let len = BATCH_SIZE.min(samples - b * BATCH_SIZE);
            let mut m = Moments::default();
            for _ in 0..len {
                m.push(sample(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(EstimatorResult {
        estimate: total.mean,
        std_error: (variance.max(0.0) / total.count as f64).sqrt(),
        samples,
        seed,
    })
}

/// Outcome distribution of measuring `rho` in the basis given by the columns
/// of `u`.
pub(crate) fn basis_outcomes(rho: &CMatrix, u: &CMatrix) -> Vec<f64> {
    (0..u.dim())
        .map(|j| rho.expectation(&u.column(j)).re.max(0.0))
        .collect()
}

/// Haar average of the measurement entropy minus `C_n`, drawing a full Haar
/// unitary per sample and measuring in its column basis.
pub fn estimate_q_via_haar(
    rho: &DensityMatrix,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = rho.dim();
    let c_n = harmonic_tail_unchecked(n);
    let m = rho.matrix();
    let mut r = estimate_mean(samples, seed, |rng| {
        let u = haar_unitary_with(n, rng);
        shannon_unchecked(&basis_outcomes(m, &u))
    })?;
    r.estimate -= c_n;
    Ok(r)
}

/// Same quantity using one Haar-random vector per sample: every outcome of a
/// Haar basis has the same law, so `n η(<ψ|ρ|ψ>)` is an unbiased term.
pub fn estimate_q_via_haar_vector(
    rho: &DensityMatrix,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = rho.dim();
    let c_n = harmonic_tail_unchecked(n);
    let nf = n as f64;
    let mut r = estimate_mean(samples, seed, |rng| {
        let psi = random_pure_vector_with(n, rng);
        nf * eta_unchecked(rho.outcome_probability(&psi))
    })?;
    r.estimate -= c_n;
    Ok(r)
}

/// `n ⟨η(λ·x)⟩ - C_n` with `x` uniform on the simplex.
pub fn estimate_q_via_simplex(
    lambda: &Spectrum,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = lambda.len();
    if n == 0 {
        return Err(Error::InvalidDimension("empty spectrum".into()));
    }
    let c_n = harmonic_tail_unchecked(n);
    let nf = n as f64;
    let values = lambda.values();
    let mut r = estimate_mean(samples, seed, |rng| {
        let x = random_simplex_with(n, rng);
        let dot: f64 = values.iter().zip(&x).map(|(a, b)| a * b).sum();
        nf * eta_unchecked(dot.clamp(0.0, 1.0))
    })?;
    r.estimate -= c_n;
    Ok(r)
}

/// Tolerance for `Σ p_j P_j = ρ` and for purity of each `P_j`.
pub const DECOMPOSITION_TOL: f64 = 1e-8;

/// Unit vector of a pure state (its top eigenvector), or `None` if the state
/// is not pure within [`DECOMPOSITION_TOL`].
fn pure_vector(p: &DensityMatrix) -> Option<Vec<C64>> {
    if (p.spectrum().max() - 1.0).abs() > DECOMPOSITION_TOL {
        return None;
    }
    Some(p.eigen().vectors[0].clone())
}

/// The eigen-decomposition of `ρ` as weighted pure states, dropping zero
/// weights.
pub fn eigen_decomposition(rho: &DensityMatrix) -> Result<Vec<(f64, DensityMatrix)>> {
    let eig = rho.eigen();
    rho.spectrum()
        .values()
        .iter()
        .zip(&eig.vectors)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, v)| Ok((*w, DensityMatrix::pure(v)?)))
        .collect()
}

/// `Σ_j p_j ⟨D(M(P_j) ‖ M(ρ))⟩` over Haar-random basis measurements `M`,
/// for a pure-state decomposition `ρ = Σ_j p_j P_j`.
pub fn estimate_q_via_relent(
    rho: &DensityMatrix,
    decomposition: &[(f64, DensityMatrix)],
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    let n = rho.dim();
    if decomposition.is_empty() {
        return Err(Error::InvalidArgument("empty decomposition".into()));
    }
    let mut acc = CMatrix::zeros(n);
    let mut vectors = Vec::with_capacity(decomposition.len());
    for (index, (w, p)) in decomposition.iter().enumerate() {
        if p.dim() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: p.dim(),
            });
        }
        if *w < 0.0 {
            return Err(Error::EntryOutOfRange { index, value: *w });
        }
        let v = pure_vector(p).ok_or(Error::NotPure { index })?;
        acc = &acc + &p.matrix().scale(*w);
        vectors.push((*w, v));
    }
    let deviation = acc.max_abs_diff(rho.matrix());
    if deviation > DECOMPOSITION_TOL {
        return Err(Error::DecompositionMismatch { deviation });
    }
    let m = rho.matrix();
    estimate_mean(samples, seed, |rng| {
        let u = haar_unitary_with(n, rng);
        let cols: Vec<Vec<C64>> = (0..n).map(|j| u.column(j)).collect();
        let r: Vec<f64> = cols.iter().map(|c| m.expectation(c).re.max(0.0)).collect();
        let mut total = 0.0;
        for (w, psi) in &vectors {
            if *w == 0.0 {
                continue;
            }
            let mut d = 0.0;
            for (c, &ri) in cols.iter().zip(&r) {
                let amp: C64 = c.iter().zip(psi).map(|(a, b)| a.conj() * b).sum();
                let q = amp.norm_sqr();
                if q > 0.0 {
                    d += q * (q / ri).ln();
                }
            }
            total += w * d;
        }
        total
    })
}

/// Estimates `-n ⟨x_1 ln x_1⟩` over the uniform simplex, whose exact value
/// is `C_n`.
pub fn verify_integral_identity(
    n: usize,
    samples: usize,
    seed: RngSeed,
) -> Result<EstimatorResult> {
    if n == 0 {
        return Err(Error::InvalidDimension("n = 0".into()));
    }
    let nf = n as f64;
    estimate_mean(samples, seed, |rng| {
        let x = random_simplex_with(n, rng);
        nf * eta_unchecked(x[0])
    })
}
