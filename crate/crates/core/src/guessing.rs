//! Classical-quantum states, guessing probabilities and the min-conditional
//! entropy, with a scanner for `Q(X|B) ≤ H_min(X|B)` and a numerical check of
//! the derivative sign pattern in the two-pure-state case.

use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::entropy::{conditional_subentropy, subentropy_integral};
use crate::error::{Error, Result};
use crate::spectra::{
    random_density_with, random_simplex_with, CMatrix, DensityMatrix, HermitianMatrix, RngSeed, C64,
};

const PROB_TOL: f64 = 1e-10;
/// Tolerance on positivity and completeness of POVM elements.
pub const POVM_TOL: f64 = 1e-9;
/// Iteration cap for [`pguess_general`].
pub const MAX_ITERATIONS: usize = 10_000;

/// `ρ_XB = Σ_x p_x |x><x| ⊗ ρ_B^x`, stored as its ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct CQState {
    outcomes: Vec<(f64, DensityMatrix)>,
    dim_b: usize,
}

impl CQState {
    pub fn new(outcomes: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let dim_b = outcomes
            .first()
            .map(|(_, r)| r.dim())
            .ok_or_else(|| Error::InvalidArgument("c-q state without outcomes".into()))?;
        Self::with_dim(dim_b, outcomes)
    }

    pub fn with_dim(dim_b: usize, outcomes: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::InvalidArgument("c-q state without outcomes".into()));
        }
        let mut outcomes = outcomes;
        for (index, (p, rho)) in outcomes.iter_mut().enumerate() {
            if rho.dim() != dim_b {
                return Err(Error::DimensionMismatch {
                    expected: dim_b,
                    found: rho.dim(),
                });
            }
            if p.is_nan() || *p < -1e-12 || *p > 1.0 + 1e-12 {
                return Err(Error::EntryOutOfRange { index, value: *p });
            }
            *p = p.clamp(0.0, 1.0);
        }
        let sum: f64 = outcomes.iter().map(|(p, _)| p).sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(Error::NotNormalized { sum });
        }
        Ok(Self { outcomes, dim_b })
    }

    pub fn outcomes(&self) -> &[(f64, DensityMatrix)] {
        &self.outcomes
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.outcomes.iter().map(|(p, _)| *p).collect()
    }

    /// The operators `p_x ρ_x`.
    pub fn weighted(&self) -> Vec<CMatrix> {
        self.outcomes
            .iter()
            .map(|(p, r)| r.matrix().scale(*p))
            .collect()
    }

    /// `ρ_B = Σ_x p_x ρ_x`
    pub fn reduced(&self) -> Result<DensityMatrix> {
        let parts: Vec<(f64, &DensityMatrix)> =
            self.outcomes.iter().map(|(p, r)| (*p, r)).collect();
        DensityMatrix::mixture(&parts)
    }
}

impl Serialize for CQState {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Outcome<'a> {
            p: f64,
            matrix: &'a CMatrix,
        }
        #[derive(Serialize)]
        struct Doc<'a> {
            #[serde(rename = "dim_B")]
            dim_b: usize,
            outcomes: Vec<Outcome<'a>>,
        }
        Doc {
            dim_b: self.dim_b,
            outcomes: self
                .outcomes
                .iter()
                .map(|(p, r)| Outcome {
                    p: *p,
                    matrix: r.matrix(),
                })
                .collect(),
        }
        .serialize(s)
    }
}

/// Positive operators summing to the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Povm {
    elements: Vec<HermitianMatrix>,
}

impl Povm {
    pub fn new(elements: Vec<HermitianMatrix>) -> Result<Self> {
        let n = elements
            .first()
            .map(|e| e.dim())
            .ok_or_else(|| Error::InvalidArgument("POVM without elements".into()))?;
        let mut total = CMatrix::zeros(n);
        for e in &elements {
            if e.dim() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: e.dim(),
                });
            }
            let min = e.eigen().min_value();
            if min < -POVM_TOL {
                return Err(Error::NotPositive {
                    min_eigenvalue: min,
                });
            }
            total = &total + e.matrix();
        }
        let deviation = total.max_abs_diff(&CMatrix::identity(n));
        if deviation > POVM_TOL {
            return Err(Error::InvalidArgument(format!(
                "POVM elements sum to the identity only within {deviation:e}"
            )));
        }
        Ok(Self { elements })
    }

    fn from_matrices(elements: Vec<CMatrix>) -> Self {
        Self {
            elements: elements.iter().map(HermitianMatrix::symmetrized).collect(),
        }
    }

    pub fn elements(&self) -> &[HermitianMatrix] {
        &self.elements
    }

    /// `Σ_x p_x tr(ρ_x E_x)`
    pub fn success_probability(&self, cq: &CQState) -> Result<f64> {
        if cq.len() != self.elements.len() {
            return Err(Error::OutcomeCount {
                expected: cq.len(),
                found: self.elements.len(),
            });
        }
        let ms: Vec<CMatrix> = self.elements.iter().map(|e| e.matrix().clone()).collect();
        Ok(objective(&cq.weighted(), &ms))
    }
}

impl Serialize for Povm {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let ms: Vec<&CMatrix> = self.elements.iter().map(|e| e.matrix()).collect();
        ms.serialize(s)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GuessResult {
    /// Success probability of `optimal_povm`, equal to `lower_bound`.
    pub p_guess: f64,
    pub lower_bound: f64,
    /// `tr σ` for a dual-feasible `σ ≥ p_x ρ_x`.
    pub upper_bound: f64,
    pub optimal_povm: Povm,
    pub iterations: usize,
    /// Whether `upper_bound - lower_bound ≤ tol` was reached.
    pub certified: bool,
}

impl GuessResult {
    pub fn gap(&self) -> f64 {
        self.upper_bound - self.lower_bound
    }
}

/// Block-diagonal `Σ_x p_x |x><x| ⊗ ρ_x`, basis index `x * dim_B + b`.
pub fn cq_to_density(cq: &CQState) -> Result<DensityMatrix> {
    let d = cq.dim_b;
    let mut m = CMatrix::zeros(d * cq.len());
    for (x, (p, rho)) in cq.outcomes.iter().enumerate() {
        for i in 0..d {
            for j in 0..d {
                m[(x * d + i, x * d + j)] = rho.matrix()[(i, j)] * *p;
            }
        }
    }
    DensityMatrix::new(HermitianMatrix::symmetrized(&m))
}

/// `½(1 + √(1 - 4 p₁ p₂ cos²θ))` for two pure states with overlap `cos θ`.
pub fn pguess_two_pure(p1: f64, theta: f64) -> f64 {
    let p2 = 1.0 - p1;
    let c = theta.cos();
    0.5 * (1.0 + (1.0 - 4.0 * p1 * p2 * c * c).max(0.0).sqrt())
}

/// Eigenvalues `λ± = ½(1 ± √(1 - 4 p₁ p₂ sin²θ))` of `ρ_B` for
/// [`two_pure_cq`].
pub fn two_pure_reduced_eigenvalues(p1: f64, theta: f64) -> (f64, f64) {
    let p2 = 1.0 - p1;
    let s = theta.sin();
    let r = (1.0 - 4.0 * p1 * p2 * s * s).max(0.0).sqrt();
    (0.5 * (1.0 + r), 0.5 * (1.0 - r))
}

/// Outcomes `|ψ₁> = (1, 0)` and `|ψ₂> = (cos θ, sin θ)` with priors
/// `p₁, 1 - p₁`.
pub fn two_pure_cq(p1: f64, theta: f64) -> Result<CQState> {
    if !(0.0..=1.0).contains(&p1) {
        return Err(Error::OutOfDomain {
            name: "p1",
            value: p1,
        });
    }
    let z = C64::new(0.0, 0.0);
    let psi1 = DensityMatrix::pure(&[C64::new(1.0, 0.0), z])?;
    let psi2 = DensityMatrix::pure(&[C64::new(theta.cos(), 0.0), C64::new(theta.sin(), 0.0)])?;
    CQState::new(vec![(p1, psi1), (1.0 - p1, psi2)])
}

/// Helstrom: `½(1 + ||p₁ρ₁ - p₂ρ₂||₁)`.
pub fn pguess_binary(cq: &CQState) -> Result<f64> {
    if cq.len() != 2 {
        return Err(Error::OutcomeCount {
            expected: 2,
            found: cq.len(),
        });
    }
    let a = cq.weighted();
    let diff = HermitianMatrix::symmetrized(&(&a[0] - &a[1]));
    let norm: f64 = diff.eigen().values.iter().map(|x| x.abs()).sum();
    Ok((0.5 * (1.0 + norm)).min(1.0))
}

/// `Re tr(AB)` for Hermitian `A`, `B`.
fn trace_product(a: &CMatrix, b: &CMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (a[(i, j)] * b[(j, i)]).re;
        }
    }
    s
}

fn objective(a: &[CMatrix], e: &[CMatrix]) -> f64 {
    a.iter().zip(e).map(|(a, e)| trace_product(a, e)).sum()
}

/// `M^{-1/2}` on the support of a PSD matrix, and the projector onto its
/// kernel.
fn inverse_sqrt(m: &CMatrix) -> (CMatrix, CMatrix) {
    let eig = HermitianMatrix::symmetrized(m).eigen();
    let cutoff = eig.max_value().max(0.0) * 1e-13;
    let inv = eig.map_values(|x| {
        if x > cutoff && x > 0.0 {
            x.sqrt().recip()
        } else {
            0.0
        }
    });
    let kernel = eig.map_values(|x| if x > cutoff && x > 0.0 { 0.0 } else { 1.0 });
    (inv, kernel)
}

/// `W^{-1/2} B_x W^{-1/2}` with `W = Σ B_x`; the kernel of `W` is assigned to
/// the first element so the result is complete.
fn normalize_povm(parts: Vec<CMatrix>) -> Vec<CMatrix> {
    let n = parts[0].dim();
    let mut total = CMatrix::zeros(n);
    for p in &parts {
        total = &total + p;
    }
    let (w, kernel) = inverse_sqrt(&total);
    let mut out: Vec<CMatrix> = parts
        .iter()
        .map(|p| HermitianMatrix::symmetrized(&(&(&w * p) * &w)).into_matrix())
        .collect();
    out[0] = &out[0] + &kernel;
    out
}

fn pretty_good_measurement(a: &[CMatrix]) -> Vec<CMatrix> {
    normalize_povm(a.to_vec())
}

/// One fixed-point step `E_x ← R^{-1/2} A_x E_x A_x R^{-1/2}`,
/// `R = Σ A_x E_x A_x`, whose fixed points satisfy the optimality conditions.
fn fixed_point_step(a: &[CMatrix], e: &[CMatrix]) -> Vec<CMatrix> {
    let parts: Vec<CMatrix> = a.iter().zip(e).map(|(a, e)| &(a * e) * a).collect();
    normalize_povm(parts)
}

/// Upper bound `tr σ` from a feasible `σ ≥ A_x` built around
/// `Z = Σ A_x E_x`. Two constructions are tried: a uniform shift `Z + sI`,
/// and `Z + Σ_x N_x` with `N_x` the negative part of `Z - A_x`.
fn dual_bound(a: &[CMatrix], e: &[CMatrix]) -> f64 {
    let n = a[0].dim();
    let mut z = CMatrix::zeros(n);
    for (a, e) in a.iter().zip(e) {
        z = &z + &(a * e);
    }
    let z = HermitianMatrix::symmetrized(&z).into_matrix();
    let base = z.trace().re;
    let mut shift: f64 = 0.0;
    let mut negative_mass = 0.0;
    for ax in a {
        let eig = HermitianMatrix::symmetrized(&(&z - ax)).eigen();
        shift = shift.max(-eig.min_value());
        negative_mass += eig
            .values
            .iter()
            .filter(|&&x| x < 0.0)
            .map(|x| -x)
            .sum::<f64>();
    }
    base + (shift * n as f64).min(negative_mass)
}

/// Guessing probability by primal iteration from the pretty-good measurement
/// with a dual certificate. Stops when the certified gap is at most `tol` or
/// after [`MAX_ITERATIONS`] steps (then `certified` is false).
pub fn pguess_general(cq: &CQState, tol: f64) -> Result<GuessResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::OutOfDomain {
            name: "tol",
            value: tol,
        });
    }
    let a = cq.weighted();
    let mut e = pretty_good_measurement(&a);
    let mut value = objective(&a, &e);
    let mut best = (value, e.clone());
    // Guessing the likeliest x without measuring is also a POVM.
    let probs = cq.probs();
    let (top, &prior) =
        probs.iter().enumerate().fold(
            (0, &f64::MIN),
            |acc, (i, p)| if *p > *acc.1 { (i, p) } else { acc },
        );
    if prior > best.0 {
        let dim = cq.dim_b();
        let trivial = (0..a.len())
            .map(|x| {
                if x == top {
                    CMatrix::identity(dim)
                } else {
                    CMatrix::zeros(dim)
                }
            })
            .collect();
        best = (prior, trivial);
    }
    let mut upper = f64::INFINITY;
    let mut damping = 1.0f64;
    let mut iterations = 0;
    let mut certified = false;
    while iterations < MAX_ITERATIONS {
        upper = upper.min(dual_bound(&a, &e));
        if upper - best.0 <= tol {
            certified = true;
            break;
        }
        iterations += 1;
        let proposal = fixed_point_step(&a, &e);
        let candidate: Vec<CMatrix> = if damping >= 1.0 {
            proposal
        } else {
            e.iter()
                .zip(&proposal)
                .map(|(old, new)| &old.scale(1.0 - damping) + &new.scale(damping))
                .collect()
        };
        let next = objective(&a, &candidate);
        if next + 1e-15 >= value {
            e = candidate;
            value = next;
            if value > best.0 {
                best = (value, e.clone());
            }
            damping = (damping * 2.0).min(1.0);
        } else {
            damping *= 0.5;
            if damping < 1e-8 {
                break;
            }
        }
    }
    let lower = best.0.min(1.0);
    let upper = upper.max(lower);
    Ok(GuessResult {
        p_guess: lower,
        lower_bound: lower,
        upper_bound: upper,
        optimal_povm: Povm::from_matrices(best.1),
        iterations,
        certified,
    })
}

/// `H_min(X|B) = -ln p_guess(X|B)`
pub fn min_conditional_entropy(cq: &CQState, tol: f64) -> Result<f64> {
    let r = pguess_general(cq, tol)?;
    Ok((-r.p_guess.ln()).max(0.0))
}

/// `Q(X|B) = Q(ρ_XB) - Q(ρ_B)`
pub fn cq_conditional_subentropy(cq: &CQState) -> Result<f64> {
    conditional_subentropy(&cq_to_density(cq)?, cq.len(), cq.dim_b)
}

/// `H_min(X|B) - Q(X|B)`
pub fn conjecture2_gap(cq: &CQState, tol: f64) -> Result<f64> {
    Ok(min_conditional_entropy(cq, tol)? - cq_conditional_subentropy(cq)?)
}

/// Which conditional states a scan draws.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EnsembleKind {
    /// Haar-random pure states.
    Pure,
    /// Random states of uniformly random rank (pure states included).
    Mixed,
}

/// Random c-q state: priors uniform on the simplex, conditional states from
/// the induced measure.
pub fn random_cq_with<R: rand::Rng + ?Sized>(
    n_outcomes: usize,
    dim_b: usize,
    kind: EnsembleKind,
    rng: &mut R,
) -> Result<CQState> {
    if n_outcomes == 0 || dim_b == 0 {
        return Err(Error::InvalidDimension(format!(
            "{n_outcomes} outcomes on dimension {dim_b}"
        )));
    }
    let p = random_simplex_with(n_outcomes, rng);
    let mut outcomes = Vec::with_capacity(n_outcomes);
    for px in p {
        let rank = match kind {
            EnsembleKind::Pure => 1,
            EnsembleKind::Mixed => rng.random_range(1..=dim_b),
        };
        outcomes.push((px, random_density_with(dim_b, rank, rng)?));
    }
    CQState::with_dim(dim_b, outcomes)
}

#[derive(Clone, Debug, Serialize)]
pub struct ScanReport {
    pub n_outcomes: usize,
    pub dim_b: usize,
    pub kind: EnsembleKind,
    pub trials: usize,
    pub seed: RngSeed,
    pub min_gap: f64,
    pub argmin_trial: usize,
    pub witness: CQState,
    /// Trials whose guessing-probability gap was not certified.
    pub uncertified: usize,
}

/// Evaluates [`conjecture2_gap`] on `trials` random c-q states. Trial `i`
/// uses substream `i`; the minimum is taken with ties going to the lowest
/// trial index. Only reports evidence; nothing is asserted.
pub fn conjecture2_scan(
    n_outcomes: usize,
    dim_b: usize,
    kind: EnsembleKind,
    trials: usize,
    seed: RngSeed,
    tol: f64,
) -> Result<ScanReport> {
    if trials == 0 {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    let results: Vec<(f64, bool, CQState)> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed.stream(i as u64);
            let cq = random_cq_with(n_outcomes, dim_b, kind, &mut rng)?;
            let g = pguess_general(&cq, tol)?;
            let h_min = (-g.p_guess.ln()).max(0.0);
            let gap = h_min - cq_conditional_subentropy(&cq)?;
            Ok((gap, g.certified, cq))
        })
        .collect::<Result<_>>()?;
    let uncertified = results.iter().filter(|r| !r.1).count();
    let (argmin_trial, _) =
        results
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |(bi, bv), (i, r)| {
                if r.0 < bv {
                    (i, r.0)
                } else {
                    (bi, bv)
                }
            });
    let (min_gap, _, witness) = results.into_iter().nth(argmin_trial).expect("trials >= 1");
    Ok(ScanReport {
        n_outcomes,
        dim_b,
        kind,
        trials,
        seed,
        min_gap,
        argmin_trial,
        witness,
        uncertified,
    })
}

/// Subentropy of the two-level spectrum `(a, b)`, `a + b = 1`, from
/// `-(a² ln a - b² ln b)/(a - b)`. Near `a = b` the removable singularity is
/// replaced by the series `-(f'(m) + f'''(m) δ²/24)`, `f = x² ln x`.
pub fn two_level_subentropy(a: f64, b: f64) -> f64 {
    let d = a - b;
    if d.abs() < 1e-3 {
        let m = 0.5 * (a + b);
        return -(2.0 * m * m.ln() + m + d * d / (12.0 * m));
    }
    let f = |x: f64| if x > 0.0 { x * x * x.ln() } else { 0.0 };
    -(f(a) - f(b)) / d
}

/// `g(θ) = H_min(X|B) - Q(X|B)` for [`two_pure_cq`] from closed forms.
pub fn two_pure_gap(p1: f64, theta: f64) -> f64 {
    let h_min = -pguess_two_pure(p1, theta).ln();
    let (lp, lm) = two_pure_reduced_eigenvalues(p1, theta);
    let q_xb = two_level_subentropy(p1, 1.0 - p1);
    h_min - (q_xb - two_level_subentropy(lp, lm))
}

#[derive(Clone, Debug, Serialize)]
pub struct AppendixReport {
    pub p1: f64,
    pub grid_points: usize,
    /// Grid points in `(0, π/2)` where the derivative is not negative.
    pub violations_left: usize,
    /// Grid points in `(π/2, π)` where the derivative is not positive.
    pub violations_right: usize,
    /// Largest offending derivative value on each side (0 if none).
    pub max_violation_left: f64,
    pub max_violation_right: f64,
    pub min_gap: f64,
    pub gap_at_half_pi: f64,
    /// Largest difference between the finite-difference derivative of `λ₊`
    /// and `-p₁p₂ sin 2θ / √(1 - 4p₁p₂ sin²θ)`.
    pub lambda_derivative_error_sin: f64,
    /// Same comparison with `sin²(2θ)` under the root.
    pub lambda_derivative_error_sin2: f64,
}

impl AppendixReport {
    pub fn violations(&self) -> usize {
        self.violations_left + self.violations_right
    }
}

/// Checks that `g(θ) = H_min(X|B) - Q(X|B)` for two pure qubit states
/// decreases on `(0, π/2)`, increases on `(π/2, π)` and vanishes at `π/2`,
/// using central differences on an open grid with margin and step
/// `π/(10 N)`.
pub fn appendix_sign_check(p1: f64, grid_points: usize) -> Result<AppendixReport> {
    if !(p1 > 0.0 && p1 < 1.0) {
        return Err(Error::OutOfDomain {
            name: "p1",
            value: p1,
        });
    }
    if grid_points < 3 {
        return Err(Error::InvalidArgument(format!(
            "need at least 3 grid points, got {grid_points}"
        )));
    }
    use std::f64::consts::{FRAC_PI_2, PI};
    let h = PI / (10.0 * grid_points as f64);
    let span = PI - 2.0 * h;
    let p2 = 1.0 - p1;
    let mut report = AppendixReport {
        p1,
        grid_points,
        violations_left: 0,
        violations_right: 0,
        max_violation_left: 0.0,
        max_violation_right: 0.0,
        min_gap: f64::INFINITY,
        gap_at_half_pi: two_pure_gap(p1, FRAC_PI_2),
        lambda_derivative_error_sin: 0.0,
        lambda_derivative_error_sin2: 0.0,
    };
    for k in 0..grid_points {
        let theta = h + span * k as f64 / (grid_points - 1) as f64;
        report.min_gap = report.min_gap.min(two_pure_gap(p1, theta));
        let slope = (two_pure_gap(p1, theta + h) - two_pure_gap(p1, theta - h)) / (2.0 * h);
        if theta < FRAC_PI_2 - 1e-12 {
            if slope >= 0.0 {
                report.violations_left += 1;
                report.max_violation_left = report.max_violation_left.max(slope);
            }
        } else if theta > FRAC_PI_2 + 1e-12 && slope <= 0.0 {
            report.violations_right += 1;
            report.max_violation_right = report.max_violation_right.max(-slope);
        }

        let lp = |t: f64| two_pure_reduced_eigenvalues(p1, t).0;
        let fd = (lp(theta + 1e-6) - lp(theta - 1e-6)) / 2e-6;
        let s1 = theta.sin().powi(2);
        let s2 = (2.0 * theta).sin().powi(2);
        let num = -p1 * p2 * (2.0 * theta).sin();
        let r1 = (1.0 - 4.0 * p1 * p2 * s1).max(0.0).sqrt();
        let r2 = (1.0 - 4.0 * p1 * p2 * s2).max(0.0).sqrt();
        if r1 > 1e-3 {
            report.lambda_derivative_error_sin = report
                .lambda_derivative_error_sin
                .max((fd - num / r1).abs());
        }
        if r2 > 1e-3 {
            report.lambda_derivative_error_sin2 = report
                .lambda_derivative_error_sin2
                .max((fd - num / r2).abs());
        }
    }
    Ok(report)
}

/// Subentropy of `ρ_B` for [`two_pure_cq`] evaluated by the general
/// evaluator, for cross-checking [`two_level_subentropy`].
pub fn two_pure_reduced_subentropy(p1: f64, theta: f64) -> f64 {
    let (lp, lm) = two_pure_reduced_eigenvalues(p1, theta);
    subentropy_integral(&[lp, lm])
}
