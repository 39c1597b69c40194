//! `subentropy`: compute, estimate and verify subentropy and its relatives.
//!
//! Every command prints one JSON report on stdout; progress goes to stderr.
//! Exit codes: 0 success, 1 violations or a counterexample, 2 parse or usage
//! error, 3 an input that fails a state invariant.

mod report;
mod state;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use subentropy::classical::{
    channel_capacity, classical_subentropy, estimate_q_classical_kl, estimate_q_classical_mi,
};
use subentropy::entropy::{
    conditional_subentropy, harmonic_tail, max_relative_entropy, min_entropy, subentropy,
    subentropy_of_probs, von_neumann_entropy, ProbVector,
};
use subentropy::guessing::{
    conjecture2_scan, cq_conditional_subentropy, min_conditional_entropy, random_cq_with,
    two_pure_cq, EnsembleKind,
};
use subentropy::montecarlo::{
    eigen_decomposition, estimate_q_via_haar, estimate_q_via_relent, estimate_q_via_simplex,
};
use subentropy::spectra::{
    random_density_with, random_pure_vector_with, random_simplex_with, DensityMatrix, RngSeed,
};
use subentropy::verify::{run_suite, subadditivity_scan, Suite, VerifyConfig};
use subentropy::Error;

use report::{format_number, Report};
use state::StateFile;

/// Tolerance for the guessing-probability optimization.
const PGUESS_TOL: f64 = 1e-9;

#[derive(Debug)]
pub enum CliError {
    Parse(String),
    Usage(String),
    Invariant(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::InvalidDimension(_) => {
                CliError::Usage(e.to_string())
            }
            other => CliError::Invariant(other),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Invariant(e) => write!(f, "invalid state: {e}"),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "subentropy",
    version,
    about = "Subentropy and related entropies: exact values, Monte Carlo estimates and property checks"
)]
struct Cli {
    /// Maximum number of worker threads.
    #[arg(long, global = true, env = "SUBENTROPY_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate an entropic quantity of a state file.
    Compute {
        file: PathBuf,
        quantity: Quantity,
        /// Dimension of subsystem A for `conditional` on a bipartite density matrix.
        #[arg(long)]
        dim_a: Option<usize>,
        /// Reference state for `dmax`.
        #[arg(long)]
        sigma: Option<PathBuf>,
    },
    /// Monte Carlo estimate of the subentropy, compared with the exact value.
    Estimate {
        file: PathBuf,
        representation: Representation,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a randomized invariant suite.
    Verify {
        #[arg(value_parser = parse_suite)]
        suite: Suite,
        /// Trials per dimension setting.
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Dimensions, e.g. `2..8` or `2,3,4`.
        #[arg(long, default_value = "2..8", value_parser = parse_dims)]
        dims: std::vec::Vec<usize>,
        /// Samples per estimate (representations suite).
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        /// Grid points per prior (appendix suite).
        #[arg(long, default_value_t = 101)]
        grid_points: usize,
    },
    /// Search random instances for a counterexample to a conjectured inequality.
    Scan {
        conjecture: Conjecture,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Dimension pairs, e.g. `2x2,2x3`. For conditional-minentropy the
        /// pair is outcomes x dim_B.
        #[arg(long, default_value = "2x2", value_parser = parse_pairs)]
        dims: std::vec::Vec<(usize, usize)>,
        /// A minimum slack below `-tol` counts as a counterexample.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Ensemble::Pure)]
        ensemble: Ensemble,
    },
    /// Capacity of the cyclic-permutation channel with input alphabet n.
    Capacity {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Write a state file.
    Generate {
        kind: GenKind,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        rank: Option<usize>,
        /// Comma-separated probabilities.
        #[arg(long, value_delimiter = ',')]
        probs: Option<Vec<f64>>,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        theta: Option<f64>,
        #[arg(long)]
        outcomes: Option<usize>,
        #[arg(long)]
        dim_b: Option<usize>,
        #[arg(long, value_enum, default_value_t = Ensemble::Pure)]
        ensemble: Ensemble,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Quantity {
    Subentropy,
    Vn,
    Minentropy,
    Conditional,
    Dmax,
    ClassicalQ,
}

#[derive(Clone, Copy, ValueEnum)]
enum Representation {
    Haar,
    Simplex,
    Relent,
    ClassicalMi,
    ClassicalKl,
}

#[derive(Clone, Copy, ValueEnum)]
enum Conjecture {
    Subadditivity,
    ConditionalMinentropy,
}

#[derive(Clone, Copy, ValueEnum)]
enum Ensemble {
    Pure,
    Mixed,
}

impl From<Ensemble> for EnsembleKind {
    fn from(e: Ensemble) -> Self {
        match e {
            Ensemble::Pure => EnsembleKind::Pure,
            Ensemble::Mixed => EnsembleKind::Mixed,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum GenKind {
    MaximallyMixed,
    Pure,
    RandomDensity,
    Diagonal,
    Probs,
    RandomProbs,
    TwoPureCq,
    RandomCq,
}

fn name_of<T: ValueEnum>(v: &T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn parse_suite(s: &str) -> Result<Suite, String> {
    s.parse::<Suite>().map_err(|_| {
        let names: Vec<&str> = Suite::ALL.iter().map(|x| x.name()).collect();
        format!(
            "unknown suite '{s}' (expected one of: {})",
            names.join(", ")
        )
    })
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.trim()
        .parse()
        .map_err(|_| format!("'{s}' is not a dimension"))
}

fn parse_dims(s: &str) -> Result<Vec<usize>, String> {
    let mut out = Vec::new();
    for tok in s.split(',') {
        if let Some((a, b)) = tok.split_once("..") {
            let (a, b) = (parse_usize(a)?, parse_usize(b)?);
            if a > b {
                return Err(format!("empty range '{tok}'"));
            }
            out.extend(a..=b);
        } else {
            out.push(parse_usize(tok)?);
        }
    }
    Ok(out)
}

fn parse_pairs(s: &str) -> Result<Vec<(usize, usize)>, String> {
    s.split(',')
        .map(|tok| match tok.split_once('x') {
            Some((a, b)) => Ok((parse_usize(a)?, parse_usize(b)?)),
            None => parse_usize(tok).map(|a| (a, a)),
        })
        .collect()
}

fn resolve_seed(seed: Option<u64>) -> u64 {
    seed.unwrap_or_else(|| {
        let s: u64 = rand::random();
        eprintln!("seed: {s} (generated)");
        s
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable")
}

struct Outcome {
    inputs: Value,
    results: Value,
    seed: Option<u64>,
    violations: Vec<Value>,
}

impl Outcome {
    fn exit_code(&self) -> u8 {
        u8::from(!self.violations.is_empty())
    }
}

fn compute(
    file: PathBuf,
    quantity: Quantity,
    dim_a: Option<usize>,
    sigma: Option<PathBuf>,
) -> Result<Outcome, CliError> {
    let state = StateFile::read(&file)?;
    let value = match quantity {
        Quantity::Subentropy => match &state {
            StateFile::Probs(p) => subentropy_of_probs(p),
            _ => subentropy(&state.density()?),
        },
        Quantity::Vn => von_neumann_entropy(&state.density()?),
        Quantity::Minentropy => match &state {
            StateFile::Cq(cq) => min_conditional_entropy(cq, PGUESS_TOL)?,
            _ => min_entropy(&state.density()?),
        },
        Quantity::Conditional => match &state {
            StateFile::Cq(cq) => cq_conditional_subentropy(cq)?,
            StateFile::Density(rho) => {
                let a = dim_a.ok_or_else(|| {
                    CliError::Usage("conditional on a density matrix needs --dim-a".into())
                })?;
                if a == 0 || rho.dim() % a != 0 {
                    return Err(CliError::Usage(format!(
                        "--dim-a {a} does not divide dimension {}",
                        rho.dim()
                    )));
                }
                conditional_subentropy(rho, a, rho.dim() / a)?
            }
            StateFile::Probs(_) => {
                return Err(CliError::Usage(
                    "conditional needs a density matrix or c-q state".into(),
                ));
            }
        },
        Quantity::Dmax => {
            let path = sigma
                .as_ref()
                .ok_or_else(|| CliError::Usage("dmax needs --sigma".into()))?;
            let s = StateFile::read(path)?.density()?;
            max_relative_entropy(&state.density()?, s.hermitian())?
        }
        Quantity::ClassicalQ => classical_subentropy(&state.distribution()?),
    };
    let name = name_of(&quantity);
    eprintln!(
        "{name} = {}",
        if value.is_finite() {
            format_number(value)
        } else {
            "inf".into()
        }
    );
    Ok(Outcome {
        inputs: json!({ "file": file, "kind": state.kind(), "quantity": name, "dim_a": dim_a, "sigma": sigma }),
        results: json!({ "quantity": name, "value": value, "finite": value.is_finite() }),
        seed: None,
        violations: vec![],
    })
}

fn estimate(
    file: PathBuf,
    rep: Representation,
    samples: usize,
    seed: Option<u64>,
) -> Result<Outcome, CliError> {
    let state = StateFile::read(&file)?;
    let seed = resolve_seed(seed);
    let rng_seed = RngSeed(seed);
    let rho = state.density()?;
    let exact = subentropy(&rho);
    let r = match rep {
        Representation::Haar => estimate_q_via_haar(&rho, samples, rng_seed)?,
        Representation::Simplex => estimate_q_via_simplex(rho.spectrum(), samples, rng_seed)?,
        Representation::Relent => {
            estimate_q_via_relent(&rho, &eigen_decomposition(&rho)?, samples, rng_seed)?
        }
        Representation::ClassicalMi => {
            estimate_q_classical_mi(&state.distribution()?, samples, rng_seed)?
        }
        Representation::ClassicalKl => {
            estimate_q_classical_kl(&state.distribution()?, samples, rng_seed)?
        }
    };
    let z = r.z_score(exact);
    let name = name_of(&rep);
    eprintln!(
        "{name}: estimate {} +/- {} (exact {}, {z:.2} sigma)",
        format_number(r.estimate),
        format_number(r.std_error),
        format_number(exact)
    );
    Ok(Outcome {
        inputs: json!({ "file": file, "kind": state.kind(), "representation": name, "samples": samples }),
        results: json!({
            "representation": name,
            "estimate": r.estimate,
            "std_error": r.std_error,
            "samples": r.samples,
            "exact": exact,
            "deviation_sigma": z,
            "within_3_sigma": z.abs() <= 3.0,
        }),
        seed: Some(seed),
        violations: vec![],
    })
}

fn verify(suite: Suite, config: VerifyConfig) -> Result<Outcome, CliError> {
    eprintln!(
        "verify {suite}: {} trials per setting, dims {:?}, seed {}",
        config.trials, config.dims, config.seed.0
    );
    let report = run_suite(suite, &config)?;
    for c in &report.checks {
        eprintln!(
            "  {}: {} evaluated, {} violations",
            c.check, c.evaluated, c.violations
        );
    }
    Ok(Outcome {
        inputs: json!({
            "suite": suite.name(),
            "trials": config.trials,
            "dims": config.dims,
            "samples": config.samples,
            "grid_points": config.grid_points,
        }),
        results: json!({
            "suite": suite.name(),
            "checks": to_value(&report.checks),
            "violation_count": report.violation_count,
        }),
        seed: Some(config.seed.0),
        violations: report.violations.iter().map(to_value).collect(),
    })
}

fn scan(
    conjecture: Conjecture,
    trials: usize,
    seed: u64,
    pairs: Vec<(usize, usize)>,
    tol: f64,
    ensemble: Ensemble,
) -> Result<Outcome, CliError> {
    let name = name_of(&conjecture);
    eprintln!("scan {name}: {trials} trials per pair over {pairs:?}, seed {seed}");
    let inputs = json!({ "conjecture": name, "trials": trials, "dims": pairs, "tol": tol });
    match conjecture {
        Conjecture::Subadditivity => {
            let r = subadditivity_scan(&pairs, trials, RngSeed(seed))?;
            eprintln!("  min slack {}", format_number(r.min_slack));
            let violations = if r.min_slack < -tol {
                vec![json!({
                    "check": "subadditivity",
                    "slack": r.min_slack,
                    "dim_a": r.dim_a,
                    "dim_b": r.dim_b,
                    "trial": r.argmin_trial,
                    "witness": to_value(&r.witness),
                })]
            } else {
                vec![]
            };
            Ok(Outcome {
                inputs,
                results: to_value(&r),
                seed: Some(seed),
                violations,
            })
        }
        Conjecture::ConditionalMinentropy => {
            let kind = EnsembleKind::from(ensemble);
            let mut reports = Vec::with_capacity(pairs.len());
            for (i, &(n, d)) in pairs.iter().enumerate() {
                reports.push(conjecture2_scan(
                    n,
                    d,
                    kind,
                    trials,
                    RngSeed(seed).derive(i as u64),
                    PGUESS_TOL,
                )?);
            }
            let worst = reports
                .iter()
                .min_by(|a, b| a.min_gap.total_cmp(&b.min_gap))
                .expect("at least one pair");
            eprintln!("  min slack {}", format_number(worst.min_gap));
            let violations = if worst.min_gap < -tol {
                vec![json!({
                    "check": "conditional-minentropy",
                    "slack": worst.min_gap,
                    "outcomes": worst.n_outcomes,
                    "dim_b": worst.dim_b,
                    "trial": worst.argmin_trial,
                    "witness": to_value(&worst.witness),
                })]
            } else {
                vec![]
            };
            Ok(Outcome {
                inputs: json!({ "conjecture": name, "trials": trials, "dims": pairs, "tol": tol, "ensemble": kind }),
                results: json!({ "min_slack": worst.min_gap, "scans": to_value(&reports) }),
                seed: Some(seed),
                violations,
            })
        }
    }
}

fn capacity(n: usize, tol: f64) -> Result<Outcome, CliError> {
    let c = channel_capacity(n, tol)?;
    let exact = (n as f64).ln() - harmonic_tail(n)?;
    let uniform = 1.0 / n as f64;
    let argmax_dev = c
        .argmax
        .probs()
        .iter()
        .map(|p| (p - uniform).abs())
        .fold(0.0, f64::max);
    eprintln!(
        "capacity({n}) = {} after {} iterations (closed form {})",
        format_number(c.capacity),
        c.iterations,
        format_number(exact)
    );
    if !c.converged {
        eprintln!("warning: iteration limit reached before the stopping rule");
    }
    Ok(Outcome {
        inputs: json!({ "n": n, "tol": tol }),
        results: json!({
            "capacity": c.capacity,
            "closed_form": exact,
            "deviation": c.capacity - exact,
            "argmax": c.argmax.probs(),
            "argmax_max_deviation": argmax_dev,
            "iterations": c.iterations,
            "gradient_mapping": c.gradient_mapping,
            "converged": c.converged,
        }),
        seed: None,
        violations: vec![],
    })
}

struct GenArgs {
    dim: Option<usize>,
    rank: Option<usize>,
    probs: Option<Vec<f64>>,
    p1: Option<f64>,
    theta: Option<f64>,
    outcomes: Option<usize>,
    dim_b: Option<usize>,
    ensemble: Ensemble,
    seed: Option<u64>,
}

fn need<T>(v: Option<T>, flag: &str, kind: GenKind) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::Usage(format!("generate {} needs --{flag}", name_of(&kind))))
}

fn generate(kind: GenKind, out: PathBuf, a: GenArgs) -> Result<Outcome, CliError> {
    let random = matches!(
        kind,
        GenKind::Pure | GenKind::RandomDensity | GenKind::RandomProbs | GenKind::RandomCq
    );
    let seed = random.then(|| resolve_seed(a.seed));
    let mut rng = RngSeed(seed.unwrap_or(0)).rng();
    let state = match kind {
        GenKind::MaximallyMixed => {
            StateFile::Density(DensityMatrix::maximally_mixed(need(a.dim, "dim", kind)?)?)
        }
        GenKind::Pure => {
            let n = need(a.dim, "dim", kind)?;
            StateFile::Density(DensityMatrix::pure(&random_pure_vector_with(n, &mut rng))?)
        }
        GenKind::RandomDensity => {
            let n = need(a.dim, "dim", kind)?;
            StateFile::Density(random_density_with(n, a.rank.unwrap_or(n), &mut rng)?)
        }
        GenKind::Diagonal => {
            StateFile::Density(DensityMatrix::diagonal(&need(a.probs, "probs", kind)?)?)
        }
        GenKind::Probs => StateFile::Probs(ProbVector::new(need(a.probs, "probs", kind)?)?),
        GenKind::RandomProbs => {
            let n = need(a.dim, "dim", kind)?;
            if n == 0 {
                return Err(CliError::Usage("--dim must be positive".into()));
            }
            StateFile::Probs(ProbVector::new(random_simplex_with(n, &mut rng))?)
        }
        GenKind::TwoPureCq => StateFile::Cq(two_pure_cq(
            need(a.p1, "p1", kind)?,
            need(a.theta, "theta", kind)?,
        )?),
        GenKind::RandomCq => StateFile::Cq(random_cq_with(
            need(a.outcomes, "outcomes", kind)?,
            need(a.dim_b, "dim-b", kind)?,
            a.ensemble.into(),
            &mut rng,
        )?),
    };
    state.write(&out)?;
    let name = name_of(&kind);
    eprintln!("wrote {} state to {}", state.kind(), out.display());
    Ok(Outcome {
        inputs: json!({ "kind": name, "out": out }),
        results: json!({ "path": out, "kind": state.kind(), "state": to_value(&state) }),
        seed,
        violations: vec![],
    })
}

fn run(command: Command) -> Result<(&'static str, Outcome), CliError> {
    Ok(match command {
        Command::Compute {
            file,
            quantity,
            dim_a,
            sigma,
        } => ("compute", compute(file, quantity, dim_a, sigma)?),
        Command::Estimate {
            file,
            representation,
            samples,
            seed,
        } => ("estimate", estimate(file, representation, samples, seed)?),
        Command::Verify {
            suite,
            trials,
            seed,
            dims,
            samples,
            grid_points,
        } => {
            let config = VerifyConfig {
                trials,
                seed: RngSeed(resolve_seed(seed)),
                dims,
                samples,
                grid_points,
            };
            ("verify", verify(suite, config)?)
        }
        Command::Scan {
            conjecture,
            trials,
            seed,
            dims,
            tol,
            ensemble,
        } => (
            "scan",
            scan(conjecture, trials, resolve_seed(seed), dims, tol, ensemble)?,
        ),
        Command::Capacity { n, tol } => ("capacity", capacity(n, tol)?),
        Command::Generate {
            kind,
            out,
            dim,
            rank,
            probs,
            p1,
            theta,
            outcomes,
            dim_b,
            ensemble,
            seed,
        } => {
            let args = GenArgs {
                dim,
                rank,
                probs,
                p1,
                theta,
                outcomes,
                dim_b,
                ensemble,
                seed,
            };
            ("generate", generate(kind, out, args)?)
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(w) = cli.workers {
        if w == 0 {
            eprintln!("error: --workers must be at least 1");
            return ExitCode::from(2);
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build_global()
            .expect("thread pool is configured once");
    }
    let start = Instant::now();
    match run(cli.command) {
        Ok((command, outcome)) => {
            let report = Report {
                command: command.into(),
                inputs: outcome.inputs.clone(),
                results: outcome.results.clone(),
                seed: outcome.seed,
                violations: outcome.violations.clone(),
                runtime_ms: start.elapsed().as_millis() as u64,
            };
            println!("{}", report.to_json());
            ExitCode::from(outcome.exit_code())
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
