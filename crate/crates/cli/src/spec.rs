//! Model files read by the CLI.
//!
//! Complex numbers are `[re, im]` pairs; a bare number is read as a real
//! value. Matrices are row-major nested arrays. Everything present in a file
//! is validated when it is loaded, and each failure names the field path.

use std::collections::BTreeMap;
use std::path::Path;

use qtime_core::linalg::{c, Operator, StateVector, C64};
use serde::Deserialize;
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(untagged)]
pub enum RawComplex {
    Pair([f64; 2]),
    Real(f64),
}

impl From<RawComplex> for C64 {
    fn from(z: RawComplex) -> Self {
        match z {
            RawComplex::Pair([re, im]) => c(re, im),
            RawComplex::Real(re) => c(re, 0.0),
        }
    }
}

pub type RawVector = Vec<RawComplex>;
pub type RawMatrix = Vec<Vec<RawComplex>>;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    system: Option<RawSystem>,
    clock: Option<RawClock>,
    interaction: Option<RawInteraction>,
    initial_state: Option<RawVector>,
    post_state: Option<RawVector>,
    #[serde(default)]
    bases: BTreeMap<String, RawBasis>,
    experiment: Option<RawExperiment>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    dim: usize,
    hamiltonian: RawMatrix,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawClock {
    dim: usize,
    omega: f64,
    #[serde(default = "centered_default")]
    centered: bool,
}

fn centered_default() -> bool {
    true
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInteraction {
    matrix: RawMatrix,
    #[serde(default)]
    time_diagonal: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    vectors: Vec<RawVector>,
    labels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExperiment {
    name: Option<String>,
    #[serde(default)]
    parameters: Parameters,
}

/// Experiment knobs; each experiment reads the ones it needs.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Parameters {
    pub basis: Option<String>,
    pub bases: Option<Vec<String>>,
    pub times: Option<Vec<f64>>,
    pub observable: Option<RawMatrix>,
    pub process: Option<RawMatrix>,
    pub instances: Option<usize>,
    pub dim: Option<usize>,
    pub half_size: Option<usize>,
    pub delta: Option<f64>,
    pub sigma: Option<f64>,
    pub sweep: Option<Vec<usize>>,
    pub drift_half_size: Option<usize>,
    pub drift_sigma: Option<f64>,
    pub dt: Option<f64>,
    pub pairs: Option<usize>,
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub hermitian: f64,
    pub norm: f64,
    pub orthonormal: f64,
    /// Pass/fail threshold for reported checks; each experiment has its own
    /// default when absent.
    pub check: Option<f64>,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            norm: 1e-10,
            orthonormal: 1e-10,
            check: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClockParams {
    pub dim: usize,
    pub omega: f64,
}

#[derive(Clone, Debug)]
pub struct Interaction {
    pub matrix: Operator,
    pub time_diagonal: bool,
}

#[derive(Clone, Debug)]
pub struct NamedBasis {
    pub vectors: Vec<StateVector>,
    pub labels: Vec<String>,
}

#[derive(Debug)]
pub struct ModelSpec {
    hamiltonian: Option<Operator>,
    clock: Option<ClockParams>,
    interaction: Option<Interaction>,
    initial_state: Option<StateVector>,
    post_state: Option<StateVector>,
    bases: BTreeMap<String, NamedBasis>,
    pub experiment: Option<String>,
    pub parameters: Parameters,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Lowercase hex SHA-256 of the model file bytes.
    pub digest: String,
}

pub fn load(path: &Path) -> Result<ModelSpec, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::io(format!("reading spec {}", path.display()), e))?;
    parse(&bytes)
}

pub fn parse(bytes: &[u8]) -> Result<ModelSpec, CliError> {
    let raw: RawSpec = serde_json::from_slice(bytes).map_err(|e| CliError::Parse {
        line: e.line(),
        column: e.column(),
        message: {
            let full = e.to_string();
            let suffix = format!(" at line {} column {}", e.line(), e.column());
            full.strip_suffix(&suffix).unwrap_or(&full).to_owned()
        },
    })?;
    let digest = format!("{:x}", Sha256::digest(bytes));
    validate(raw, digest)
}

pub fn vector(raw: &[RawComplex]) -> StateVector {
    StateVector::new(raw.iter().map(|&z| z.into()).collect())
}

/// Square matrix of side `dim`.
pub fn matrix(raw: &RawMatrix, dim: usize, path: &str) -> Result<Operator, CliError> {
    if raw.len() != dim {
        return Err(CliError::validation(path, format!("expected {dim} rows, found {}", raw.len())));
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != dim {
            return Err(CliError::validation(
                format!("{path}[{i}]"),
                format!("expected {dim} entries, found {}", row.len()),
            ));
        }
    }
    Ok(Operator::from_fn(dim, dim, |i, j| raw[i][j].into()))
}

fn hermitian(raw: &RawMatrix, dim: usize, path: &str, tol: f64) -> Result<Operator, CliError> {
    let h = matrix(raw, dim, path)?;
    let deviation = h.hermiticity_deviation();
    if deviation > tol {
        return Err(CliError::validation(
            path,
            format!("matrix is not Hermitian (deviation {deviation:e} > {tol:e})"),
        ));
    }
    Ok(h)
}

fn unit_state(raw: &[RawComplex], dim: usize, path: &str, tol: f64) -> Result<StateVector, CliError> {
    if raw.len() != dim {
        return Err(CliError::validation(path, format!("expected {dim} amplitudes, found {}", raw.len())));
    }
    let v = vector(raw);
    if (v.norm() - 1.0).abs() > tol {
        return Err(CliError::validation(path, format!("state has norm {}, expected 1", v.norm())));
    }
    Ok(v)
}

fn basis(raw: RawBasis, dim: usize, path: &str, tol: &Tolerances) -> Result<NamedBasis, CliError> {
    if raw.vectors.is_empty() || raw.vectors.len() > dim {
        return Err(CliError::validation(
            format!("{path}.vectors"),
            format!("need between 1 and {dim} vectors, found {}", raw.vectors.len()),
        ));
    }
    let vectors = raw
        .vectors
        .iter()
        .enumerate()
        .map(|(i, v)| unit_state(v, dim, &format!("{path}.vectors[{i}]"), tol.norm))
        .collect::<Result<Vec<_>, _>>()?;
    for (i, a) in vectors.iter().enumerate() {
        for (j, b) in vectors.iter().enumerate().skip(i + 1) {
            let overlap = a.inner(b).norm();
            if overlap > tol.orthonormal {
                return Err(CliError::validation(
                    format!("{path}.vectors"),
                    format!("vectors {i} and {j} overlap by {overlap:e}"),
                ));
            }
        }
    }
    let labels = match raw.labels {
        Some(labels) if labels.len() != vectors.len() => {
            return Err(CliError::validation(
                format!("{path}.labels"),
                format!("{} labels for {} vectors", labels.len(), vectors.len()),
            ))
        }
        Some(labels) => labels,
        None => (0..vectors.len()).map(|i| i.to_string()).collect(),
    };
    Ok(NamedBasis { vectors, labels })
}

fn validate(raw: RawSpec, digest: String) -> Result<ModelSpec, CliError> {
    let tol = raw.tolerances;
    for (name, value) in [("hermitian", tol.hermitian), ("norm", tol.norm), ("orthonormal", tol.orthonormal)] {
        if !(value.is_finite() && value >= 0.0) {
            return Err(CliError::validation(format!("tolerances.{name}"), "must be finite and nonnegative"));
        }
    }
    if tol.check.is_some_and(|t| !(t.is_finite() && t >= 0.0)) {
        return Err(CliError::validation("tolerances.check", "must be finite and nonnegative"));
    }

    let (dim, hamiltonian) = match &raw.system {
        Some(s) => {
            if s.dim == 0 {
                return Err(CliError::validation("system.dim", "must be positive"));
            }
            (Some(s.dim), Some(hermitian(&s.hamiltonian, s.dim, "system.hamiltonian", tol.hermitian)?))
        }
        None => (None, None),
    };

    let clock = match raw.clock {
        Some(cl) => {
            if cl.dim < 2 {
                return Err(CliError::validation("clock.dim", format!("need d_C >= 2, got {}", cl.dim)));
            }
            if !(cl.omega.is_finite() && cl.omega > 0.0) {
                return Err(CliError::validation("clock.omega", "must be a positive number"));
            }
            if !cl.centered {
                return Err(CliError::validation(
                    "clock.centered",
                    "only centered clock spectra are supported",
                ));
            }
            Some(ClockParams {
                dim: cl.dim,
                omega: cl.omega,
            })
        }
        None => None,
    };

    let needs_system = |path: &str| {
        dim.ok_or_else(|| CliError::validation(path, "requires a system block to fix the dimension"))
    };

    let interaction = match raw.interaction {
        Some(i) => {
            let d_r = needs_system("interaction")?;
            let d_c = clock
                .ok_or_else(|| CliError::validation("interaction", "requires a clock block"))?
                .dim;
            let matrix = hermitian(&i.matrix, d_c * d_r, "interaction.matrix", tol.hermitian)?;
            Some(Interaction {
                matrix,
                time_diagonal: i.time_diagonal,
            })
        }
        None => None,
    };

    let initial_state = match &raw.initial_state {
        Some(v) => Some(unit_state(v, needs_system("initial_state")?, "initial_state", tol.norm)?),
        None => None,
    };
    let post_state = match &raw.post_state {
        Some(v) => Some(unit_state(v, needs_system("post_state")?, "post_state", tol.norm)?),
        None => None,
    };

    let mut bases = BTreeMap::new();
    for (name, b) in raw.bases {
        let path = format!("bases.{name}");
        let d = needs_system(&path)?;
        bases.insert(name, basis(b, d, &path, &tol)?);
    }

    let (experiment, parameters) = match raw.experiment {
        Some(e) => (e.name, e.parameters),
        None => (None, Parameters::default()),
    };

    Ok(ModelSpec {
        hamiltonian,
        clock,
        interaction,
        initial_state,
        post_state,
        bases,
        experiment,
        parameters,
        tolerances: tol,
        seed: raw.seed,
        digest,
    })
}

fn missing(path: &str) -> CliError {
    CliError::validation(path, "required by this experiment but absent")
}

impl ModelSpec {
    pub fn hamiltonian(&self) -> Result<&Operator, CliError> {
        self.hamiltonian.as_ref().ok_or_else(|| missing("system"))
    }

    pub fn dim(&self) -> Option<usize> {
        self.hamiltonian.as_ref().map(Operator::rows)
    }

    pub fn clock(&self) -> Result<ClockParams, CliError> {
        self.clock.ok_or_else(|| missing("clock"))
    }

    pub fn interaction(&self) -> Option<&Interaction> {
        self.interaction.as_ref()
    }

    pub fn initial_state(&self) -> Result<&StateVector, CliError> {
        self.initial_state.as_ref().ok_or_else(|| missing("initial_state"))
    }

    pub fn post_state(&self) -> Option<&StateVector> {
        self.post_state.as_ref()
    }

    pub fn basis(&self, name: &str, path: &str) -> Result<&NamedBasis, CliError> {
        self.bases
            .get(name)
            .ok_or_else(|| CliError::validation(path, format!("no basis named {name:?} under bases")))
    }

    /// Check threshold: the model file's, else the experiment default.
    pub fn check_tol(&self, default: f64) -> f64 {
        self.tolerances.check.unwrap_or(default)
    }
}
