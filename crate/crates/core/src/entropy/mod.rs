//! Entropic functionals: subentropy, Shannon, von Neumann, min-entropy,
//! relative and max-relative entropies, conditional subentropy, and the two
//! subentropy continuity bounds. All logarithms are natural.

mod dd;
pub mod divided;
mod subentropy;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::spectra::{partial_trace, CMatrix, DensityMatrix, HermitianMatrix, Spectrum, Subsystem};

pub(crate) use subentropy::{subentropy_gradient_integral, subentropy_integral};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `1 - γ`, the supremum of subentropy over all dimensions.
pub const UNIVERSAL_BOUND: f64 = 1.0 - EULER_GAMMA;

/// Eigenvalues of a PSD operator at or below this are outside its support.
pub const SUPPORT_TOL: f64 = 1e-10;

const NORMALIZATION_TOL: f64 = 1e-10;

/// A probability vector: non-negative entries summing to one (within 1e-10).
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDimension("empty probability vector".into()));
        }
        let mut probs = probs;
        for (index, p) in probs.iter_mut().enumerate() {
            if p.is_nan() || *p < -1e-12 || *p > 1.0 + 1e-12 {
                return Err(Error::EntryOutOfRange { index, value: *p });
            }
            *p = p.clamp(0.0, 1.0);
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self(probs))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![1.0 / n as f64; n])
    }

    /// Point mass on `index`.
    pub fn delta(n: usize, index: usize) -> Self {
        let mut v = vec![0.0; n];
        v[index] = 1.0;
        Self(v)
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sorted_spectrum(&self) -> Spectrum {
        Spectrum::from_unsorted(self.0.clone()).expect("probabilities lie in [0, 1]")
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// Constants attached to dimension `n`: `C_n = 1/2 + ... + 1/n`, Euler's
/// constant, and the universal subentropy bound `1 - γ`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EntropyConstants {
    pub n: usize,
    pub c_n: f64,
    pub euler_gamma: f64,
    pub universal_bound: f64,
}

impl EntropyConstants {
    pub fn new(n: usize) -> Result<Self> {
        Ok(Self {
            n,
            c_n: harmonic_tail(n)?,
            euler_gamma: EULER_GAMMA,
            universal_bound: UNIVERSAL_BOUND,
        })
    }

    /// `ln n - C_n`, the subentropy of `I/n`.
    pub fn max_subentropy(&self) -> f64 {
        (self.n as f64).ln() - self.c_n
    }
}

/// `η(y) = -y ln y` with `η(0) = 0`.
pub fn eta(y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::OutOfDomain {
            name: "y",
            value: y,
        });
    }
    Ok(eta_unchecked(y))
}

#[inline]
pub(crate) fn eta_unchecked(y: f64) -> f64 {
    if y <= 0.0 {
        0.0
    } else {
        -y * y.ln()
    }
}

/// `C_n = Σ_{k=2}^{n} 1/k`, with `C_1 = 0`.
pub fn harmonic_tail(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidDimension("C_n needs n >= 1".into()));
    }
    Ok((2..=n).map(|k| 1.0 / k as f64).sum())
}

pub(crate) fn harmonic_tail_unchecked(n: usize) -> f64 {
    (2..=n).map(|k| 1.0 / k as f64).sum()
}

/// Subentropy of a spectrum summing to one (within 1e-10).
pub fn subentropy_of_spectrum(lambda: &Spectrum) -> Result<f64> {
    let sum = lambda.sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::NotNormalized { sum });
    }
    Ok(subentropy_integral(lambda.values()))
}

/// Subentropy of an unordered probability vector; `F` is symmetric so no
/// sorting is needed.
pub fn subentropy_of_probs(p: &ProbVector) -> f64 {
    subentropy_integral(p.probs())
}

/// Gradient of the subentropy formula with respect to the probabilities.
/// Only differences between components are meaningful on the simplex.
pub fn subentropy_gradient(p: &ProbVector) -> Vec<f64> {
    subentropy_gradient_integral(p.probs())
}

pub fn subentropy(rho: &DensityMatrix) -> f64 {
    subentropy_integral(rho.spectrum().values())
}

pub fn shannon_entropy(p: &ProbVector) -> f64 {
    p.probs().iter().map(|&x| eta_unchecked(x)).sum()
}

pub(crate) fn shannon_unchecked(p: &[f64]) -> f64 {
    p.iter().map(|&x| eta_unchecked(x)).sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    shannon_unchecked(rho.spectrum().values())
}

/// `-ln λ_max(ρ)`
pub fn min_entropy(rho: &DensityMatrix) -> f64 {
    let h = -rho.spectrum().max().ln();
    h.max(0.0)
}

/// Binary entropy `h(T)` with `h(0) = h(1) = 0`.
pub fn binary_entropy(t: f64) -> f64 {
    eta_unchecked(t) + eta_unchecked(1.0 - t)
}

struct SupportSplit {
    /// (eigenvalue, <v|ρ|v>) on the support of σ
    inside: Vec<(f64, f64, Vec<crate::spectra::C64>)>,
    outside_weight: f64,
}

fn split_support(rho: &DensityMatrix, sigma: &HermitianMatrix) -> Result<SupportSplit> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let eig = sigma.eigen();
    if eig.min_value() < -SUPPORT_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: eig.min_value(),
        });
    }
    let mut inside = Vec::new();
    let mut outside_weight = 0.0;
    for (s, v) in eig.values.into_iter().zip(eig.vectors) {
        let w = rho.outcome_probability(&v);
        if s > SUPPORT_TOL {
            inside.push((s, w, v));
        } else {
            outside_weight += w;
        }
    }
    Ok(SupportSplit {
        inside,
        outside_weight,
    })
}

/// `D(ρ‖σ) = tr(ρ ln ρ - ρ ln σ)`, or `f64::INFINITY` when the support of `ρ`
/// is not contained in that of `σ`.
pub fn quantum_relative_entropy(rho: &DensityMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let split = split_support(rho, sigma)?;
    if split.outside_weight > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let cross: f64 = split.inside.iter().map(|(s, w, _)| w * s.ln()).sum();
    Ok(-von_neumann_entropy(rho) - cross)
}

/// `D_max(ρ‖σ) = ln λ_max(σ^{-1/2} ρ σ^{-1/2})` on the support of `σ`, or
/// `f64::INFINITY` when the support of `ρ` is not contained in that of `σ`.
pub fn max_relative_entropy(rho: &DensityMatrix, sigma: &HermitianMatrix) -> Result<f64> {
    let split = split_support(rho, sigma)?;
    if split.outside_weight > SUPPORT_TOL {
        return Ok(f64::INFINITY);
    }
    let n = rho.dim();
    let mut w = CMatrix::zeros(n);
    for (s, _, v) in &split.inside {
        let scale = s.sqrt().recip();
        for i in 0..n {
            for j in 0..n {
                w[(i, j)] += v[i] * v[j].conj() * scale;
            }
        }
    }
    let m = &(&w * rho.matrix()) * &w;
    let top = HermitianMatrix::symmetrized(&m).eigen().max_value();
    Ok(top.ln())
}

/// `Q(A|B) = Q(ρ_AB) - Q(ρ_B)`
pub fn conditional_subentropy(rho_ab: &DensityMatrix, dim_a: usize, dim_b: usize) -> Result<f64> {
    let rho_b = partial_trace(rho_ab, dim_a, dim_b, Subsystem::B)?;
    Ok(subentropy(rho_ab) - subentropy(&rho_b))
}

fn check_regime(t: f64) -> Result<()> {
    let limit = 1.0 / (2.0 * std::f64::consts::E);
    if t.is_nan() || t < 0.0 || t > limit * (1.0 + 1e-12) {
        return Err(Error::OutsideBoundRegime { t });
    }
    Ok(())
}

/// Fannes-type bound `2T ln n + η(2T)` on `|Q(ρ) - Q(σ)|`, valid for trace
/// distance `T ≤ 1/(2e)`.
pub fn fannes_subentropy_bound(t: f64, n: usize) -> Result<f64> {
    check_regime(t)?;
    if n == 0 {
        return Err(Error::InvalidDimension("n = 0".into()));
    }
    Ok(2.0 * t * (n as f64).ln() + eta_unchecked((2.0 * t).min(1.0)))
}

/// Audenaert-type bound `T ln(n-1) + h(T)` on `|Q(ρ) - Q(σ)|`, valid for
/// `T ≤ 1/(2e)` and `n ≥ 2`.
pub fn audenaert_subentropy_bound(t: f64, n: usize) -> Result<f64> {
    check_regime(t)?;
    if n < 2 {
        return Err(Error::InvalidDimension(format!("n = {n}, need n >= 2")));
    }
    Ok(t * ((n - 1) as f64).ln() + binary_entropy(t))
}
