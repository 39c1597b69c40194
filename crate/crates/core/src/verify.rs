//! Randomized property suites and the subadditivity scan.
//!
//! Every trial draws from its own substream keyed by the dimension setting
//! and the trial index, so reports are identical for any worker count. A
//! check produces a slack that must stay at or above `-tol`; failing trials
//! are reported with their full witness.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::entropy::harmonic_tail;
use crate::entropy::{
    audenaert_subentropy_bound, fannes_subentropy_bound, max_relative_entropy, min_entropy,
    quantum_relative_entropy, subentropy, subentropy_integral, von_neumann_entropy,
    UNIVERSAL_BOUND,
};
use crate::error::{Error, Result};
use crate::guessing::{
    appendix_sign_check, cq_conditional_subentropy, cq_to_density, random_cq_with, AppendixReport,
    CQState, EnsembleKind,
};
use crate::montecarlo::{
    eigen_decomposition, estimate_q_via_haar, estimate_q_via_relent, estimate_q_via_simplex,
    verify_integral_identity, EstimatorResult,
};
use crate::spectra::{
    haar_unitary_with, majorizes, partial_trace, random_density_with,
    random_doubly_stochastic_with, random_simplex_with, trace_distance, DensityMatrix, RngSeed,
    Spectrum, Subsystem,
};

/// Default tolerance on inequality and equality slacks.
pub const DEFAULT_TOL: f64 = 1e-9;
/// Width, in standard errors, allowed for Monte Carlo checks.
pub const SIGMA_WIDTH: f64 = 3.0;
/// Largest number of violations kept in a report (all are counted).
pub const MAX_REPORTED: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Ordering,
    Concavity,
    Schur,
    Continuity,
    SubadditivityProduct,
    ConditionalNonneg,
    Appendix,
    Representations,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Ordering,
        Suite::Concavity,
        Suite::Schur,
        Suite::Continuity,
        Suite::SubadditivityProduct,
        Suite::ConditionalNonneg,
        Suite::Appendix,
        Suite::Representations,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Ordering => "ordering",
            Suite::Concavity => "concavity",
            Suite::Schur => "schur",
            Suite::Continuity => "continuity",
            Suite::SubadditivityProduct => "subadditivity-product",
            Suite::ConditionalNonneg => "conditional-nonneg",
            Suite::Appendix => "appendix",
            Suite::Representations => "representations",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite '{s}'")))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyConfig {
    /// Trials per dimension setting.
    pub trials: usize,
    pub seed: RngSeed,
    pub dims: Vec<usize>,
    /// Monte Carlo samples per estimate (representations suite only).
    pub samples: usize,
    /// Grid points per prior (appendix suite only).
    pub grid_points: usize,
}

impl VerifyConfig {
    pub fn new(trials: usize, seed: RngSeed, dims: Vec<usize>) -> Self {
        Self {
            trials,
            seed,
            dims,
            samples: 100_000,
            grid_points: 101,
        }
    }
}

/// Evidence attached to a violation.
#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    States {
        states: Vec<DensityMatrix>,
        weights: Vec<f64>,
    },
    Spectra {
        spectra: Vec<Vec<f64>>,
    },
    Bipartite {
        state: DensityMatrix,
        dim_a: usize,
        dim_b: usize,
    },
    Cq {
        state: CQState,
    },
    Appendix {
        report: AppendixReport,
    },
    Estimate {
        state: DensityMatrix,
        exact: f64,
        result: EstimatorResult,
    },
}

#[derive(Clone, Debug, Serialize)]
pub struct Violation {
    pub check: &'static str,
    /// Dimension setting, e.g. `"4"` or `"2x3"`.
    pub setting: String,
    pub trial: usize,
    pub slack: f64,
    pub tol: f64,
    pub witness: Witness,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub check: &'static str,
    pub evaluated: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub seed: RngSeed,
    pub trials: usize,
    pub dims: Vec<usize>,
    pub checks: Vec<CheckSummary>,
    pub violation_count: usize,
    pub violations: Vec<Violation>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.violation_count == 0
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.check == name)
    }
}

struct Check {
    name: &'static str,
    slack: f64,
    tol: f64,
}

fn check(name: &'static str, slack: f64) -> Check {
    Check {
        name,
        slack,
        tol: DEFAULT_TOL,
    }
}

struct TrialResult {
    setting: String,
    trial: usize,
    checks: Vec<Check>,
    witness: Option<Witness>,
}

/// Runs `body` for every `(setting, trial)` pair in parallel. The witness
/// closure result is kept only when some check fails.
fn run_trials<S, F>(
    settings: &[S],
    trials: usize,
    seed: RngSeed,
    label: impl Fn(&S) -> String + Sync,
    body: F,
) -> Result<Vec<TrialResult>>
where
    S: Sync,
    F: Fn(&S, &mut rand_chacha::ChaCha8Rng) -> Result<(Vec<Check>, Witness)> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..settings.len())
        .flat_map(|s| (0..trials).map(move |t| (s, t)))
        .collect();
    jobs.into_par_iter()
        .map(|(s, t)| {
            let setting = &settings[s];
            let mut rng = seed.derive(s as u64).stream(t as u64);
            let (checks, witness) = body(setting, &mut rng)?;
            let failed = checks.iter().any(|c| c.slack.is_nan() || c.slack < -c.tol);
            Ok(TrialResult {
                setting: label(setting),
                trial: t,
                checks,
                witness: failed.then_some(witness),
            })
        })
        .collect()
}

fn summarize(suite: Suite, config: &VerifyConfig, results: Vec<TrialResult>) -> SuiteReport {
    let mut checks: Vec<CheckSummary> = Vec::new();
    let mut violations = Vec::new();
    let mut violation_count = 0;
    for r in results {
        for c in &r.checks {
            let idx = match checks.iter().position(|s| s.check == c.name) {
                Some(i) => i,
                None => {
                    checks.push(CheckSummary {
                        check: c.name,
                        evaluated: 0,
                        violations: 0,
                        min_slack: f64::INFINITY,
                        tol: c.tol,
                    });
                    checks.len() - 1
                }
            };
            let s = &mut checks[idx];
            s.evaluated += 1;
            s.min_slack = s.min_slack.min(c.slack);
            if c.slack.is_nan() || c.slack < -c.tol {
                s.violations += 1;
                violation_count += 1;
                if violations.len() < MAX_REPORTED {
                    violations.push(Violation {
                        check: c.name,
                        setting: r.setting.clone(),
                        trial: r.trial,
                        slack: c.slack,
                        tol: c.tol,
                        witness: r.witness.clone().expect("witness kept on failure"),
                    });
                }
            }
        }
    }
    SuiteReport {
        suite,
        seed: config.seed,
        trials: config.trials,
        dims: config.dims.clone(),
        checks,
        violation_count,
        violations,
    }
}

fn random_rank<R: Rng + ?Sized>(n: usize, rng: &mut R) -> usize {
    rng.random_range(1..=n)
}

fn random_state<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<DensityMatrix> {
    let rank = random_rank(n, rng);
    random_density_with(n, rank, rng)
}

fn sorted_desc(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn check_dims(dims: &[usize], max: usize) -> Result<()> {
    if dims.is_empty() {
        return Err(Error::InvalidArgument("no dimensions given".into()));
    }
    if let Some(&d) = dims.iter().find(|&&d| d == 0 || d > max) {
        return Err(Error::InvalidDimension(format!("{d} outside 1..={max}")));
    }
    Ok(())
}

/// `0 ≤ Q ≤ H_min ≤ S`, `Q ≤ 1 - γ`, and `D_max ≥ D` on random pairs.
fn ordering(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let results = run_trials(
        &config.dims,
        config.trials,
        config.seed,
        |n| n.to_string(),
        |&n, rng| {
            let rho = random_state(n, rng)?;
            let sigma = random_state(n, rng)?;
            let q = subentropy(&rho);
            let h_min = min_entropy(&rho);
            let s = von_neumann_entropy(&rho);
            let d = quantum_relative_entropy(&rho, sigma.hermitian())?;
            let d_max = max_relative_entropy(&rho, sigma.hermitian())?;
            let dominance = if d.is_infinite() {
                if d_max.is_infinite() {
                    0.0
                } else {
                    -1.0
                }
            } else {
                d_max - d
            };
            Ok((
                vec![
                    check("q-nonneg", q),
                    check("q-le-hmin", h_min - q),
                    check("hmin-le-s", s - h_min),
                    check("q-le-universal", UNIVERSAL_BOUND - q),
                    check("dmax-ge-d", dominance),
                ],
                Witness::States {
                    states: vec![rho, sigma],
                    weights: vec![],
                },
            ))
        },
    )?;
    Ok(summarize(Suite::Ordering, config, results))
}

/// Concavity on random pairs and monotonicity under random-unitary channels.
fn concavity(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let results = run_trials(
        &config.dims,
        config.trials,
        config.seed,
        |n| n.to_string(),
        |&n, rng| {
            let r1 = random_state(n, rng)?;
            let r2 = random_state(n, rng)?;
            let q: f64 = rng.random_range(0.0..1.0);
            let mix = DensityMatrix::mixture(&[(q, &r1), (1.0 - q, &r2)])?;
            let concave = subentropy(&mix) - (q * subentropy(&r1) + (1.0 - q) * subentropy(&r2));

            let k = rng.random_range(2..=4);
            let weights = random_simplex_with(k, rng);
            let rotated: Vec<DensityMatrix> = (0..k)
                .map(|_| r1.conjugated(&haar_unitary_with(n, rng)))
                .collect::<Result<_>>()?;
            let parts: Vec<(f64, &DensityMatrix)> =
                weights.iter().cloned().zip(rotated.iter()).collect();
            let mixed = DensityMatrix::mixture(&parts)?;
            let enhancing = subentropy(&mixed) - subentropy(&r1);
            Ok((
                vec![
                    check("concavity", concave),
                    check("mixing-enhancing", enhancing),
                ],
                Witness::States {
                    states: vec![r1, r2, mixed],
                    weights: [vec![q], weights].concat(),
                },
            ))
        },
    )?;
    Ok(summarize(Suite::Concavity, config, results))
}

/// Schur concavity on majorizing pairs `λ = sort(Dμ)`, plus zero-padding and
/// permutation invariance of `F`.
fn schur(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let results = run_trials(
        &config.dims,
        config.trials,
        config.seed,
        |n| n.to_string(),
        |&n, rng| {
            let mu = sorted_desc(random_simplex_with(n, rng));
            let d = random_doubly_stochastic_with(n, n, rng);
            let lambda = sorted_desc(
                d.iter()
                    .map(|row| row.iter().zip(&mu).map(|(a, b)| a * b).sum())
                    .collect(),
            );
            let ordered = if majorizes(&mu, &lambda)? { 0.0 } else { -1.0 };
            let f_mu = subentropy_integral(&mu);
            let f_lambda = subentropy_integral(&lambda);

            let extra = rng.random_range(1..=3);
            let padded = Spectrum::new(mu.clone())?.padded(extra);
            let pad = -(subentropy_integral(padded.values()) - f_mu).abs();

            let mut shuffled = mu.clone();
            for i in (1..n).rev() {
                shuffled.swap(i, rng.random_range(0..=i));
            }
            let perm = -(subentropy_integral(&shuffled) - f_mu).abs();
            Ok((
                vec![
                    check("majorization-generated", ordered),
                    check("schur-concavity", f_lambda - f_mu),
                    check("zero-padding", pad),
                    check("permutation", perm),
                ],
                Witness::Spectra {
                    spectra: vec![mu, lambda, shuffled],
                },
            ))
        },
    )?;
    Ok(summarize(Suite::Schur, config, results))
}

/// Both continuity bounds on random pairs with trace distance at most
/// `1/(2e)`.
fn continuity(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    if config.dims.contains(&1) {
        return Err(Error::InvalidDimension("continuity needs n >= 2".into()));
    }
    let limit = 1.0 / (2.0 * std::f64::consts::E);
    let results = run_trials(
        &config.dims,
        config.trials,
        config.seed,
        |n| n.to_string(),
        |&n, rng| {
            let rho = random_state(n, rng)?;
            let tau = random_state(n, rng)?;
            let t0 = trace_distance(&rho, &tau)?;
            let eps_max = if t0 > 0.0 { (limit / t0).min(1.0) } else { 1.0 };
            let eps = rng.random_range(0.0..1.0) * eps_max;
            let sigma = DensityMatrix::mixture(&[(1.0 - eps, &rho), (eps, &tau)])?;
            let t = trace_distance(&rho, &sigma)?.min(limit);
            let diff = (subentropy(&rho) - subentropy(&sigma)).abs();
            Ok((
                vec![
                    check("fannes", fannes_subentropy_bound(t, n)? - diff),
                    check("audenaert", audenaert_subentropy_bound(t, n)? - diff),
                ],
                Witness::States {
                    states: vec![rho, sigma],
                    weights: vec![t],
                },
            ))
        },
    )?;
    Ok(summarize(Suite::Continuity, config, results))
}

fn dimension_pairs(dims: &[usize]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for &a in dims {
        for &b in dims {
            if a * b <= 64 {
                out.push((a, b));
            }
        }
    }
    out
}

/// `Q(ρ_A ⊗ ρ_B) ≤ Q(ρ_A) + Q(ρ_B)` on random products.
fn subadditivity_product(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let pairs = dimension_pairs(&config.dims);
    let results = run_trials(
        &pairs,
        config.trials,
        config.seed,
        |(a, b)| format!("{a}x{b}"),
        |&(a, b), rng| {
            let ra = random_state(a, rng)?;
            let rb = random_state(b, rng)?;
            let joint = ra.tensor(&rb)?;
            let slack = subentropy(&ra) + subentropy(&rb) - subentropy(&joint);
            Ok((
                vec![check("product-subadditivity", slack)],
                Witness::States {
                    states: vec![ra, rb],
                    weights: vec![],
                },
            ))
        },
    )?;
    Ok(summarize(Suite::SubadditivityProduct, config, results))
}

/// `Q(X|B) ≥ 0` on random c-q states, and the majorization `q ≺ λ` between
/// the joint spectrum and the zero-padded spectrum of `ρ_B`.
fn conditional_nonneg(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let pairs = dimension_pairs(&config.dims);
    let results = run_trials(
        &pairs,
        config.trials,
        config.seed,
        |(x, b)| format!("{x}x{b}"),
        |&(x, b), rng| {
            let cq = random_cq_with(x, b, EnsembleKind::Mixed, rng)?;
            let q_cond = cq_conditional_subentropy(&cq)?;
            let joint = cq_to_density(&cq)?;
            let rho_b = partial_trace(&joint, x, b, Subsystem::B)?;
            let q: Vec<f64> = joint.spectrum().values().to_vec();
            let lambda = rho_b.spectrum().padded(q.len() - b);
            let substrate = if majorizes(lambda.values(), &q)? {
                0.0
            } else {
                -1.0
            };
            Ok((
                vec![
                    check("conditional-nonneg", q_cond),
                    check("majorization-substrate", substrate),
                ],
                Witness::Cq { state: cq },
            ))
        },
    )?;
    Ok(summarize(Suite::ConditionalNonneg, config, results))
}

/// Priors used by the appendix suite.
pub const APPENDIX_PRIORS: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Sign pattern, non-negativity and the zero at `π/2` for each prior in
/// [`APPENDIX_PRIORS`]. `trials` and `dims` are not used.
fn appendix(config: &VerifyConfig) -> Result<SuiteReport> {
    let results: Vec<TrialResult> = APPENDIX_PRIORS
        .iter()
        .enumerate()
        .map(|(i, &p1)| {
            let r = appendix_sign_check(p1, config.grid_points)?;
            let checks = vec![
                check("derivative-sign", -(r.violations() as f64)),
                check("gap-nonneg", r.min_gap),
                check("zero-at-half-pi", -r.gap_at_half_pi.abs()),
            ];
            let failed = checks.iter().any(|c| c.slack < -c.tol);
            Ok(TrialResult {
                setting: format!("p1={p1}"),
                trial: i,
                checks,
                witness: failed.then_some(Witness::Appendix { report: r }),
            })
        })
        .collect::<Result<_>>()?;
    Ok(summarize(Suite::Appendix, config, results))
}

fn sigma_check(name: &'static str, r: &EstimatorResult, exact: f64) -> Check {
    Check {
        name,
        slack: SIGMA_WIDTH - r.z_score(exact).abs(),
        tol: 0.0,
    }
}

/// The Haar, simplex and averaged-relative-entropy estimators against the
/// exact value on random full-rank states, plus the simplex integral identity
/// once per dimension. Slacks are in standard errors: `3 - |z|`.
fn representations(config: &VerifyConfig) -> Result<SuiteReport> {
    check_dims(&config.dims, 64)?;
    let samples = config.samples;
    let mut results = run_trials(
        &config.dims,
        config.trials,
        config.seed,
        |n| n.to_string(),
        |&n, rng| {
            let rho = random_density_with(n, n, rng)?;
            let exact = subentropy(&rho);
            let base: u64 = rng.random();
            let haar = estimate_q_via_haar(&rho, samples, RngSeed(base).derive(0))?;
            let simplex = estimate_q_via_simplex(rho.spectrum(), samples, RngSeed(base).derive(1))?;
            let relent = estimate_q_via_relent(
                &rho,
                &eigen_decomposition(&rho)?,
                samples,
                RngSeed(base).derive(2),
            )?;
            let checks = vec![
                sigma_check("haar", &haar, exact),
                sigma_check("simplex", &simplex, exact),
                sigma_check("relent", &relent, exact),
            ];
            let worst = [haar, simplex, relent]
                .into_iter()
                .max_by(|a, b| a.z_score(exact).abs().total_cmp(&b.z_score(exact).abs()))
                .expect("three estimates");
            Ok((
                checks,
                Witness::Estimate {
                    state: rho,
                    exact,
                    result: worst,
                },
            ))
        },
    )?;
    for (i, &n) in config.dims.iter().enumerate() {
        let r = verify_integral_identity(n, samples, config.seed.derive(1_000_000 + i as u64))?;
        let exact = harmonic_tail(n)?;
        let c = sigma_check("integral-identity", &r, exact);
        let failed = c.slack < -c.tol;
        results.push(TrialResult {
            setting: n.to_string(),
            trial: 0,
            checks: vec![c],
            witness: failed.then(|| Witness::Estimate {
                state: DensityMatrix::maximally_mixed(n).expect("n >= 1"),
                exact,
                result: r,
            }),
        });
    }
    Ok(summarize(Suite::Representations, config, results))
}

pub fn run_suite(suite: Suite, config: &VerifyConfig) -> Result<SuiteReport> {
    if config.trials == 0 && suite != Suite::Appendix {
        return Err(Error::InvalidArgument("need at least one trial".into()));
    }
    match suite {
        Suite::Ordering => ordering(config),
        Suite::Concavity => concavity(config),
        Suite::Schur => schur(config),
        Suite::Continuity => continuity(config),
        Suite::SubadditivityProduct => subadditivity_product(config),
        Suite::ConditionalNonneg => conditional_nonneg(config),
        Suite::Appendix => appendix(config),
        Suite::Representations => representations(config),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PairSummary {
    pub dim_a: usize,
    pub dim_b: usize,
    pub trials: usize,
    pub min_slack: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SubadditivityReport {
    pub seed: RngSeed,
    pub trials: usize,
    pub pairs: Vec<PairSummary>,
    /// `min Q(ρ_A) + Q(ρ_B) - Q(ρ_AB)` over all trials.
    pub min_slack: f64,
    pub dim_a: usize,
    pub dim_b: usize,
    pub argmin_trial: usize,
    pub witness: DensityMatrix,
}

/// Evaluates `Q(ρ_A) + Q(ρ_B) - Q(ρ_AB)` on random bipartite states of
/// random rank for each `(dim_a, dim_b)`. The minimum is reported with ties
/// going to the first pair and lowest trial index; nothing is asserted.
pub fn subadditivity_scan(
    pairs: &[(usize, usize)],
    trials: usize,
    seed: RngSeed,
) -> Result<SubadditivityReport> {
    if trials == 0 || pairs.is_empty() {
        return Err(Error::InvalidArgument(
            "need at least one trial and one pair".into(),
        ));
    }
    if let Some(&(a, b)) = pairs.iter().find(|(a, b)| *a == 0 || *b == 0 || a * b > 64) {
        return Err(Error::InvalidDimension(format!("{a}x{b}")));
    }
    let jobs: Vec<(usize, usize)> = (0..pairs.len())
        .flat_map(|p| (0..trials).map(move |t| (p, t)))
        .collect();
    let slacks: Vec<f64> = jobs
        .par_iter()
        .map(|&(p, t)| {
            let (a, b) = pairs[p];
            let rho = random_state(a * b, &mut seed.derive(p as u64).stream(t as u64))?;
            let ra = partial_trace(&rho, a, b, Subsystem::A)?;
            let rb = partial_trace(&rho, a, b, Subsystem::B)?;
            Ok(subentropy(&ra) + subentropy(&rb) - subentropy(&rho))
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, 0usize);
    let mut summaries = Vec::with_capacity(pairs.len());
    for (p, &(a, b)) in pairs.iter().enumerate() {
        let chunk = &slacks[p * trials..(p + 1) * trials];
        let min = chunk.iter().cloned().fold(f64::INFINITY, f64::min);
        summaries.push(PairSummary {
            dim_a: a,
            dim_b: b,
            trials,
            min_slack: min,
        });
        for (t, &s) in chunk.iter().enumerate() {
            if s < best.0 {
                best = (s, p * trials + t);
            }
        }
    }
    let (p, t) = (best.1 / trials, best.1 % trials);
    let (dim_a, dim_b) = pairs[p];
    let witness = random_state(dim_a * dim_b, &mut seed.derive(p as u64).stream(t as u64))?;
    Ok(SubadditivityReport {
        seed,
        trials,
        pairs: summaries,
        min_slack: best.0,
        dim_a,
        dim_b,
        argmin_trial: t,
        witness,
    })
}
