//! Seeded sampling of Haar unitaries, simplex points and random states.
//!
//! Every sampler has a seed-level entry point and an `_with` variant that
//! draws from a caller-supplied generator. Parallel callers obtain
//! independent generators through [`RngSeed::stream`], keyed by an index, so
//! results do not depend on how work is split across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::Serialize;

use super::matrix::{CMatrix, C64};
use super::{DensityMatrix, HermitianMatrix, SimplexPoint};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(transparent)]
pub struct RngSeed(pub u64);

impl RngSeed {
    /// Generator for substream `index` of this seed.
    pub fn stream(self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(index);
        rng
    }

    pub fn rng(self) -> ChaCha8Rng {
        self.stream(0)
    }

    /// A new seed deterministically derived from this one (splitmix64).
    pub fn derive(self, index: u64) -> RngSeed {
        let mut z = self
            .0
            .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(index.wrapping_add(1)));
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        RngSeed(z ^ (z >> 31))
    }
}

#[inline]
fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn complex_gaussian_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    (0..n).map(|_| complex_gaussian(rng)).collect()
}

/// `rows x cols` matrix of i.i.d. standard complex Gaussians, stored row-major.
pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Vec<Vec<C64>> {
    (0..rows)
        .map(|_| complex_gaussian_vector(cols, rng))
        .collect()
}

/// Haar-uniform unit vector in `C^n`.
pub fn random_pure_vector_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v = complex_gaussian_vector(n, rng);
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Householder QR of a square matrix. Returns `Q` and the diagonal of `R`.
fn householder_qr(mut a: CMatrix) -> (CMatrix, Vec<C64>) {
    let n = a.dim();
    let mut q = CMatrix::identity(n);
    let mut r_diag = vec![C64::new(0.0, 0.0); n];

    for k in 0..n {
        let x: Vec<C64> = (k..n).map(|i| a[(i, k)]).collect();
        let norm_x = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 {
            x[0] / x[0].norm()
        } else {
            C64::new(1.0, 0.0)
        };
        let alpha = -phase * norm_x;
        let mut v = x;
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        r_diag[k] = alpha;
        if vnorm2 == 0.0 {
            continue;
        }
        let scale = 2.0 / vnorm2;

        // A <- H A on rows k.., columns k..
        for j in k..n {
            let w: C64 = (k..n).map(|i| v[i - k].conj() * a[(i, j)]).sum();
            let w = w * scale;
            for i in k..n {
                let vi = v[i - k];
                a[(i, j)] -= w * vi;
            }
        }
        // Q <- Q H on columns k..
        for i in 0..n {
            let w: C64 = (k..n).map(|l| q[(i, l)] * v[l - k]).sum();
            let w = w * scale;
            for l in k..n {
                let vl = v[l - k].conj();
                q[(i, l)] -= w * vl;
            }
        }
    }
    (q, r_diag)
}

/// Haar-random unitary from a Ginibre matrix: QR, then each column of `Q` is
/// multiplied by the phase of the matching diagonal entry of `R`, which makes
/// the factorization unique (positive diagonal) and the law of `Q` exactly Haar.
pub fn haar_unitary_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
    let g = ginibre(n, n, rng);
    let (mut q, r_diag) = householder_qr(CMatrix::from_rows(g).expect("square"));
    for (j, r) in r_diag.iter().enumerate() {
        let phase = if r.norm() > 0.0 {
            r / r.norm()
        } else {
            C64::new(1.0, 0.0)
        };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

pub fn haar_unitary(n: usize, seed: RngSeed) -> Result<CMatrix> {
    if n == 0 {
        return Err(Error::InvalidDimension("unitary of dimension 0".into()));
    }
    Ok(haar_unitary_with(n, &mut seed.rng()))
}

/// Uniform point of the probability simplex as normalized standard
/// exponentials (flat Dirichlet).
pub fn random_simplex_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let e: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
        let total: f64 = e.iter().sum();
        if total > 0.0 {
            return e.into_iter().map(|x| x / total).collect();
        }
    }
}

pub fn random_simplex_point(n: usize, seed: RngSeed) -> Result<SimplexPoint> {
    if n == 0 {
        return Err(Error::InvalidDimension("simplex of dimension 0".into()));
    }
    SimplexPoint::new(random_simplex_with(n, &mut seed.rng()))
}

/// `G G† / tr(G G†)` with `G` an `n x rank` complex Gaussian matrix.
pub fn random_density_with<R: Rng + ?Sized>(
    n: usize,
    rank: usize,
    rng: &mut R,
) -> Result<DensityMatrix> {
    if rank == 0 || rank > n {
        return Err(Error::InvalidDimension(format!(
            "rank {rank} outside 1..={n}"
        )));
    }
    let g = ginibre(n, rank, rng);
    let mut m = CMatrix::from_fn(n, |i, j| {
        g[i].iter().zip(&g[j]).map(|(a, b)| a * b.conj()).sum()
    });
    let tr = m.trace().re;
    for z in m.data_mut() {
        *z /= tr;
    }
    DensityMatrix::new(HermitianMatrix::symmetrized(&m))
}

pub fn random_density_matrix(n: usize, rank: usize, seed: RngSeed) -> Result<DensityMatrix> {
    random_density_with(n, rank, &mut seed.rng())
}

/// Random doubly stochastic matrix as a convex combination of `terms`
/// uniformly random permutation matrices (Birkhoff). Row-major `n x n`.
pub fn random_doubly_stochastic_with<R: Rng + ?Sized>(
    n: usize,
    terms: usize,
    rng: &mut R,
) -> Vec<Vec<f64>> {
    let weights = random_simplex_with(terms.max(1), rng);
    let mut out = vec![vec![0.0; n]; n];
    for w in weights {
        let mut perm: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            let j = rng.random_range(0..=i);
            perm.swap(i, j);
        }
        for (i, &p) in perm.iter().enumerate() {
            out[i][p] += w;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unitarity_error(u: &CMatrix) -> f64 {
        (&u.adjoint() * u).max_abs_diff(&CMatrix::identity(u.dim()))
    }

    #[test]
    fn haar_is_unitary() {
        for n in 1..=12 {
            let u = haar_unitary(n, RngSeed(n as u64)).unwrap();
            assert!(unitarity_error(&u) < 1e-12, "n = {n}");
        }
    }

    #[test]
    fn haar_one_dimensional_is_a_phase() {
        let u = haar_unitary(1, RngSeed(3)).unwrap();
        assert!((u[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn haar_rejects_zero_dimension() {
        assert!(haar_unitary(0, RngSeed(0)).is_err());
        assert!(random_simplex_point(0, RngSeed(0)).is_err());
    }

    #[test]
    fn seeded_samplers_are_deterministic() {
        assert_eq!(
            haar_unitary(4, RngSeed(9)).unwrap(),
            haar_unitary(4, RngSeed(9)).unwrap()
        );
        assert_eq!(
            random_density_matrix(3, 2, RngSeed(9)).unwrap(),
            random_density_matrix(3, 2, RngSeed(9)).unwrap()
        );
        assert_ne!(
            haar_unitary(4, RngSeed(9)).unwrap(),
            haar_unitary(4, RngSeed(10)).unwrap()
        );
    }

    #[test]
    fn streams_differ() {
        let a: f64 = RngSeed(1).stream(0).random();
        let b: f64 = RngSeed(1).stream(1).random();
        assert_ne!(a, b);
    }

    #[test]
    fn point_simplex() {
        assert_eq!(
            random_simplex_point(1, RngSeed(5)).unwrap().coords(),
            &[1.0]
        );
    }

    #[test]
    fn density_rank_contract() {
        let pure = random_density_matrix(2, 1, RngSeed(1)).unwrap();
        assert!((pure.spectrum().max() - 1.0).abs() < 1e-9);
        let full = random_density_matrix(4, 4, RngSeed(2)).unwrap();
        assert!(full.spectrum().values().iter().all(|&x| x > 0.0));
        assert!(random_density_matrix(3, 4, RngSeed(0)).is_err());
        assert!(random_density_matrix(3, 0, RngSeed(0)).is_err());
    }

    #[test]
    fn doubly_stochastic_rows_and_columns() {
        let mut rng = RngSeed(4).rng();
        let a = random_doubly_stochastic_with(5, 4, &mut rng);
        for i in 0..5 {
            let row: f64 = a[i].iter().sum();
            let col: f64 = a.iter().map(|r| r[i]).sum();
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
        }
    }
}
