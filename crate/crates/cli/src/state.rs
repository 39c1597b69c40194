//! State files: density matrices, probability vectors and c-q states as JSON.

use std::path::Path;

use serde::{Deserialize, Serialize};
use subentropy::entropy::ProbVector;
use subentropy::guessing::{cq_to_density, CQState};
use subentropy::spectra::{CMatrix, DensityMatrix, C64};

use crate::CliError;

type RawMatrix = Vec<Vec<[f64; 2]>>;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    dim: Option<usize>,
    matrix: Option<RawMatrix>,
    probs: Option<Vec<f64>>,
    cq: Option<RawCq>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCq {
    #[serde(rename = "dim_B")]
    dim_b: usize,
    outcomes: Vec<RawOutcome>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutcome {
    p: f64,
    matrix: RawMatrix,
}

#[derive(Clone, Debug)]
pub enum StateFile {
    Density(DensityMatrix),
    Probs(ProbVector),
    Cq(CQState),
}

impl Serialize for StateFile {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Probs<'a> {
            probs: &'a [f64],
        }
        #[derive(Serialize)]
        struct Cq<'a> {
            cq: &'a CQState,
        }
        match self {
            StateFile::Density(rho) => rho.serialize(s),
            StateFile::Probs(p) => Probs { probs: p.probs() }.serialize(s),
            StateFile::Cq(cq) => Cq { cq }.serialize(s),
        }
    }
}

fn to_matrix(raw: RawMatrix, dim: usize, what: &str) -> Result<CMatrix, CliError> {
    if raw.len() != dim {
        return Err(CliError::Parse(format!(
            "{what}: expected {dim} rows, found {}",
            raw.len()
        )));
    }
    let mut rows = Vec::with_capacity(dim);
    for (r, row) in raw.into_iter().enumerate() {
        if row.len() != dim {
            return Err(CliError::Parse(format!(
                "{what} row {r}: expected {dim} entries, found {}",
                row.len()
            )));
        }
        let mut out = Vec::with_capacity(dim);
        for (c, [re, im]) in row.into_iter().enumerate() {
            if !re.is_finite() || !im.is_finite() {
                return Err(CliError::Parse(format!(
                    "{what} entry ({r}, {c}) is not finite"
                )));
            }
            out.push(C64::new(re, im));
        }
        rows.push(out);
    }
    Ok(CMatrix::from_rows(rows)?)
}

impl StateFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawState =
            serde_json::from_str(text).map_err(|e| CliError::Parse(e.to_string()))?;
        match (raw.matrix, raw.probs, raw.cq) {
            (Some(m), None, None) => {
                let dim = raw.dim.unwrap_or(m.len());
                let m = to_matrix(m, dim, "matrix")?;
                Ok(StateFile::Density(DensityMatrix::from_matrix(m)?))
            }
            (None, Some(p), None) => {
                if raw.dim.is_some_and(|d| d != p.len()) {
                    return Err(CliError::Parse(format!(
                        "probs: \"dim\" does not match {} entries",
                        p.len()
                    )));
                }
                Ok(StateFile::Probs(ProbVector::new(p)?))
            }
            (None, None, Some(cq)) => {
                if raw.dim.is_some() {
                    return Err(CliError::Parse(
                        "\"dim\" is not used with \"cq\"; give \"dim_B\"".into(),
                    ));
                }
                let mut outcomes = Vec::with_capacity(cq.outcomes.len());
                for (k, o) in cq.outcomes.into_iter().enumerate() {
                    let m = to_matrix(o.matrix, cq.dim_b, &format!("cq outcome {k} matrix"))?;
                    outcomes.push((o.p, DensityMatrix::from_matrix(m)?));
                }
                Ok(StateFile::Cq(CQState::with_dim(cq.dim_b, outcomes)?))
            }
            _ => Err(CliError::Parse(
                "state file needs exactly one of \"matrix\", \"probs\" or \"cq\"".into(),
            )),
        }
    }

    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Parse(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Parse(msg) => CliError::Parse(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let text = serde_json::to_string_pretty(self).expect("state serializes");
        std::fs::write(path, text + "\n")
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            StateFile::Density(_) => "density",
            StateFile::Probs(_) => "probs",
            StateFile::Cq(_) => "cq",
        }
    }

    /// The quantum state: the density matrix itself, `diag(p)`, or the joint
    /// c-q state.
    pub fn density(&self) -> Result<DensityMatrix, CliError> {
        Ok(match self {
            StateFile::Density(rho) => rho.clone(),
            StateFile::Probs(p) => DensityMatrix::diagonal(p.probs())?,
            StateFile::Cq(cq) => cq_to_density(cq)?,
        })
    }

    /// The classical distribution: `p` itself or the spectrum of the state.
    pub fn distribution(&self) -> Result<ProbVector, CliError> {
        match self {
            StateFile::Probs(p) => Ok(p.clone()),
            _ => Ok(ProbVector::new(
                self.density()?.spectrum().values().to_vec(),
            )?),
        }
    }
}
