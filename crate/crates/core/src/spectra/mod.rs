//! Linear-algebra substrate: Hermitian and density matrices, spectra,
//! trace distance, partial trace, majorization, and seeded sampling.

mod jacobi;
mod matrix;
mod random;

pub use jacobi::Eigen;
pub use matrix::{CMatrix, C64};
pub use random::{
    complex_gaussian_vector, ginibre, haar_unitary, haar_unitary_with, random_density_matrix,
    random_density_with, random_doubly_stochastic_with, random_pure_vector_with,
    random_simplex_point, random_simplex_with, RngSeed,
};

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Absolute tolerance on `|H_ij - conj(H_ji)|`.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Tolerance on the trace of a state and on negative eigenvalues.
pub const STATE_TOL: f64 = 1e-10;
/// Slack allowed on spectrum entries outside `[0, 1]`.
pub const ENTRY_TOL: f64 = 1e-12;

/// A complex matrix equal to its adjoint (within [`HERMITIAN_TOL`]).
/// Construction symmetrizes away the residual asymmetry.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix(CMatrix);

impl HermitianMatrix {
    pub fn new(m: CMatrix) -> Result<Self> {
        let n = m.dim();
        let mut worst = (0, 0, 0.0f64);
        for i in 0..n {
            for j in i..n {
                let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                if dev > worst.2 {
                    worst = (i, j, dev);
                }
            }
        }
        if worst.2 > HERMITIAN_TOL {
            return Err(Error::NotHermitian {
                row: worst.0,
                col: worst.1,
                deviation: worst.2,
            });
        }
        Ok(Self::symmetrized(&m))
    }

    /// `(M + M†) / 2`, without any tolerance check.
    pub fn symmetrized(m: &CMatrix) -> Self {
        let adj = m.adjoint();
        Self((m + &adj).scale(0.5))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(CMatrix::from_real_diagonal(diag))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> CMatrix {
        self.0
    }

    pub fn eigen(&self) -> Eigen {
        jacobi::jacobi_eigen(&self.0)
    }
}

/// Full eigen-decomposition of a Hermitian matrix: eigenvalues in
/// non-increasing order with an orthonormal eigenvector for each.
pub fn spectral_decompose(h: &HermitianMatrix) -> Eigen {
    h.eigen()
}

/// Validates Hermiticity of a raw matrix before decomposing it.
pub fn spectral_decompose_matrix(m: &CMatrix) -> Result<Eigen> {
    Ok(HermitianMatrix::new(m.clone())?.eigen())
}

/// Real vector in non-increasing order with entries in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Spectrum(Vec<f64>);

impl Spectrum {
    /// Rejects unsorted input and entries outside `[0, 1]` (beyond
    /// [`ENTRY_TOL`]); entries within the slack are clipped.
    pub fn new(values: Vec<f64>) -> Result<Self> {
        for (index, w) in values.windows(2).enumerate() {
            if w[1] > w[0] + ENTRY_TOL {
                return Err(Error::Unsorted { index: index + 1 });
            }
        }
        let mut out = values;
        for (index, v) in out.iter_mut().enumerate() {
            if !(-ENTRY_TOL..=1.0 + ENTRY_TOL).contains(v) || v.is_nan() {
                return Err(Error::EntryOutOfRange { index, value: *v });
            }
            *v = v.clamp(0.0, 1.0);
        }
        Ok(Self(out))
    }

    pub fn from_unsorted(mut values: Vec<f64>) -> Result<Self> {
        values.sort_by(|a, b| b.total_cmp(a));
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.first().copied().unwrap_or(0.0)
    }

    /// Appends `extra` zeros.
    pub fn padded(&self, extra: usize) -> Self {
        let mut v = self.0.clone();
        v.extend(std::iter::repeat_n(0.0, extra));
        Self(v)
    }
}

/// A point of the probability simplex.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SimplexPoint(Vec<f64>);

impl SimplexPoint {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = coords
            .iter()
            .enumerate()
            .find(|(_, x)| x.is_nan() || **x < 0.0)
        {
            return Err(Error::EntryOutOfRange { index, value });
        }
        let sum: f64 = coords.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self(coords))
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

/// A quantum state: Hermitian, positive semi-definite, unit trace.
///
/// The eigen-decomposition is computed once at construction and cached.
/// Eigenvalues in `[-1e-10, 0)` are clipped to zero and the spectrum is
/// renormalized; anything more negative is rejected.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: HermitianMatrix,
    eigen: Eigen,
    spectrum: Spectrum,
}

impl PartialEq for DensityMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl DensityMatrix {
    pub fn new(h: HermitianMatrix) -> Result<Self> {
        if h.dim() == 0 {
            return Err(Error::InvalidDimension(
                "density matrix of dimension 0".into(),
            ));
        }
        let trace = h.matrix().trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::TraceNotOne { trace });
        }
        let eigen = h.eigen();
        let min = eigen.min_value();
        if min < -STATE_TOL {
            return Err(Error::NotPositive {
                min_eigenvalue: min,
            });
        }
        let clipped: Vec<f64> = eigen.values.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = clipped.iter().sum();
        let spectrum = Spectrum::new(clipped.iter().map(|x| x / total).collect())?;
        Ok(Self {
            matrix: h,
            eigen,
            spectrum,
        })
    }

    pub fn from_matrix(m: CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::new(m)?)
    }

    /// `|psi><psi|` for a (not necessarily normalized) nonzero vector.
    pub fn pure(psi: &[C64]) -> Result<Self> {
        let norm: f64 = psi.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidArgument(
                "pure state from a zero vector".into(),
            ));
        }
        let v: Vec<C64> = psi.iter().map(|z| z / norm).collect();
        Self::new(HermitianMatrix::symmetrized(&CMatrix::outer(&v)))
    }

    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        Self::new(HermitianMatrix::from_real_diagonal(probs))
    }

    pub fn maximally_mixed(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidDimension("n = 0".into()));
        }
        Self::diagonal(&vec![1.0 / n as f64; n])
    }

    /// Convex combination `sum_i w_i rho_i`.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let n = first.1.dim();
        let mut acc = CMatrix::zeros(n);
        for (w, rho) in parts {
            if rho.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: rho.dim(),
                });
            }
            acc = &acc + &rho.matrix().scale(*w);
        }
        Self::new(HermitianMatrix::symmetrized(&acc))
    }

    /// `U rho U†`
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        Self::new(HermitianMatrix::symmetrized(&self.matrix().conjugate_by(u)))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Self::new(HermitianMatrix::symmetrized(
            &self.matrix().kron(other.matrix()),
        ))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &CMatrix {
        self.matrix.matrix()
    }

    pub fn hermitian(&self) -> &HermitianMatrix {
        &self.matrix
    }

    pub fn eigen(&self) -> &Eigen {
        &self.eigen
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    /// `<v| rho |v>`, clipped to `[0, 1]`.
    pub fn outcome_probability(&self, v: &[C64]) -> f64 {
        self.matrix().expectation(v).re.clamp(0.0, 1.0)
    }

    pub fn purity(&self) -> f64 {
        self.spectrum.values().iter().map(|x| x * x).sum()
    }
}

impl Serialize for CMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<[f64; 2]>> = self
            .rows()
            .map(|r| r.iter().map(|z| [z.re, z.im]).collect())
            .collect();
        rows.serialize(s)
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Doc<'a> {
            dim: usize,
            matrix: &'a CMatrix,
        }
        Doc {
            dim: self.dim(),
            matrix: self.matrix(),
        }
        .serialize(s)
    }
}

/// `½ ||rho - sigma||_1`
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<f64> {
    if rho.dim() != sigma.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: sigma.dim(),
        });
    }
    let diff = HermitianMatrix::symmetrized(&(rho.matrix() - sigma.matrix()));
    let t = 0.5 * diff.eigen().values.iter().map(|x| x.abs()).sum::<f64>();
    Ok(t.clamp(0.0, 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Traces out one factor of a state on `C^dim_a ⊗ C^dim_b` (basis index
/// `a * dim_b + b`) and returns the reduced state of `keep`.
pub fn partial_trace(
    rho_ab: &DensityMatrix,
    dim_a: usize,
    dim_b: usize,
    keep: Subsystem,
) -> Result<DensityMatrix> {
    if dim_a == 0 || dim_b == 0 || dim_a * dim_b != rho_ab.dim() {
        return Err(Error::FactorizationMismatch {
            dim: rho_ab.dim(),
            dim_a,
            dim_b,
        });
    }
    let m = rho_ab.matrix();
    let out = match keep {
        Subsystem::B => CMatrix::from_fn(dim_b, |i, j| {
            (0..dim_a).map(|a| m[(a * dim_b + i, a * dim_b + j)]).sum()
        }),
        Subsystem::A => CMatrix::from_fn(dim_a, |i, j| {
            (0..dim_b).map(|b| m[(i * dim_b + b, j * dim_b + b)]).sum()
        }),
    };
    DensityMatrix::new(HermitianMatrix::symmetrized(&out))
}

const MAJORIZATION_SUM_TOL: f64 = 1e-10;
const MAJORIZATION_TOL: f64 = 1e-12;

/// Whether `mu` majorizes `lambda`: every partial sum of `lambda` is at most
/// the matching partial sum of `mu` (within 1e-12). Both vectors must be
/// sorted non-increasing with equal length and equal totals.
pub fn majorizes(mu: &[f64], lambda: &[f64]) -> Result<bool> {
    if mu.len() != lambda.len() {
        return Err(Error::DimensionMismatch {
            expected: mu.len(),
            found: lambda.len(),
        });
    }
    for v in [mu, lambda] {
        if let Some(index) = v.windows(2).position(|w| w[1] > w[0]) {
            return Err(Error::Unsorted { index: index + 1 });
        }
    }
    let (sm, sl) = (mu.iter().sum::<f64>(), lambda.iter().sum::<f64>());
    if (sm - sl).abs() > MAJORIZATION_SUM_TOL {
        return Err(Error::InvalidArgument(format!(
            "majorization needs equal totals, got {sm} and {sl}"
        )));
    }
    let mut pm = 0.0;
    let mut pl = 0.0;
    for (m, l) in mu.iter().zip(lambda) {
        pm += m;
        pl += l;
        if pl > pm + MAJORIZATION_TOL {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn bell() -> DensityMatrix {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DensityMatrix::pure(&[c(s, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(s, 0.0)]).unwrap()
    }

    #[test]
    fn identity_eigenvalues() {
        let e = spectral_decompose(&HermitianMatrix::new(CMatrix::identity(3)).unwrap());
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_spectrum() {
        let rho = DensityMatrix::diagonal(&[0.25, 0.75]).unwrap();
        assert_eq!(rho.spectrum().values(), &[0.75, 0.25]);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m = CMatrix::from_rows(vec![
            vec![c(2.0, 0.0), c(0.0, 1.0)],
            vec![c(0.0, -1.0), c(2.0, 0.0)],
        ])
        .unwrap();
        let e = spectral_decompose_matrix(&m).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
        assert!(e.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_rows(vec![
            vec![c(1.0, 0.0), c(1.0, 0.0)],
            vec![c(0.0, 0.0), c(1.0, 0.0)],
        ])
        .unwrap();
        assert!(matches!(
            spectral_decompose_matrix(&m),
            Err(Error::NotHermitian { row: 0, col: 1, .. })
        ));
    }

    #[test]
    fn density_validation() {
        assert!(matches!(
            DensityMatrix::diagonal(&[0.5, 0.6]),
            Err(Error::TraceNotOne { .. })
        ));
        assert!(matches!(
            DensityMatrix::diagonal(&[1.1, -0.1]),
            Err(Error::NotPositive { .. })
        ));
        // Roundoff-sized negativity is clipped.
        let rho = DensityMatrix::diagonal(&[1.0 + 5e-11, -5e-11]).unwrap();
        assert_eq!(rho.spectrum().values()[1], 0.0);
        assert!((rho.spectrum().sum() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn trace_distance_examples() {
        let a = DensityMatrix::diagonal(&[1.0, 0.0]).unwrap();
        let b = DensityMatrix::diagonal(&[0.0, 1.0]).unwrap();
        assert_eq!(trace_distance(&a, &a).unwrap(), 0.0);
        assert!((trace_distance(&a, &b).unwrap() - 1.0).abs() < 1e-15);
        let c = DensityMatrix::diagonal(&[0.75, 0.25]).unwrap();
        let d = DensityMatrix::maximally_mixed(2).unwrap();
        assert!((trace_distance(&c, &d).unwrap() - 0.25).abs() < 1e-15);
        let e = DensityMatrix::maximally_mixed(3).unwrap();
        assert!(matches!(
            trace_distance(&a, &e),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn bell_reduction_is_maximally_mixed() {
        let rb = partial_trace(&bell(), 2, 2, Subsystem::B).unwrap();
        assert!(
            rb.matrix()
                .max_abs_diff(&CMatrix::from_real_diagonal(&[0.5, 0.5]))
                < 1e-15
        );
        assert!(matches!(
            partial_trace(&bell(), 3, 2, Subsystem::B),
            Err(Error::FactorizationMismatch { .. })
        ));
    }

    #[test]
    fn product_reduction() {
        let ra = DensityMatrix::diagonal(&[0.9, 0.1]).unwrap();
        let rb = DensityMatrix::diagonal(&[0.2, 0.3, 0.5]).unwrap();
        let ab = ra.tensor(&rb).unwrap();
        let back_b = partial_trace(&ab, 2, 3, Subsystem::B).unwrap();
        let back_a = partial_trace(&ab, 2, 3, Subsystem::A).unwrap();
        assert!(back_b.matrix().max_abs_diff(rb.matrix()) < 1e-10);
        assert!(back_a.matrix().max_abs_diff(ra.matrix()) < 1e-10);
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(!majorizes(&[0.5, 0.5], &[1.0, 0.0]).unwrap());
        assert!(majorizes(&[0.5, 0.3, 0.2], &[0.4, 0.4, 0.2]).unwrap());
        assert!(matches!(
            majorizes(&[0.3, 0.7], &[0.5, 0.5]),
            Err(Error::Unsorted { index: 1 })
        ));
        assert!(majorizes(&[0.5, 0.5], &[0.5]).is_err());
    }

    #[test]
    fn spectrum_rejects_unsorted() {
        assert!(matches!(
            Spectrum::new(vec![0.2, 0.8]),
            Err(Error::Unsorted { index: 1 })
        ));
        assert_eq!(
            Spectrum::from_unsorted(vec![0.2, 0.8]).unwrap().values(),
            &[0.8, 0.2]
        );
    }
}
