//! JSON run configurations. Every field has a default, unknown fields are
//! rejected and `schema_version` must match [`SCHEMA_VERSION`].

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use mereo::models::{TfimParams, ToyParams};
use mereo::optim::OptConfig;
use mereo::sweep::{Direction, DEFAULT_DELTA, DEFAULT_H, DEFAULT_J, DEFAULT_N_AVG, DEFAULT_N_STEPS, MAX_SITES};

use crate::error::config_err;
use crate::{CliError, SCHEMA_VERSION};

pub trait RunConfig: Serialize + DeserializeOwned + Default {
    fn schema_version(&self) -> u32;
    fn seed(&self) -> u64;
    fn set_seed(&mut self, seed: u64);
    fn check(&self) -> Result<(), CliError>;
}

/// Read `path` (or take defaults), apply the seed override and validate.
pub fn load<T: RunConfig>(path: Option<&Path>, seed: Option<u64>) -> Result<T, CliError> {
    let mut cfg: T = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
        }
        None => T::default(),
    };
    if cfg.schema_version() != SCHEMA_VERSION {
        return Err(CliError::Config(format!(
            "schema_version {} unsupported (expected {SCHEMA_VERSION})",
            cfg.schema_version()
        )));
    }
    if let Some(s) = seed {
        cfg.set_seed(s);
    }
    cfg.check()?;
    Ok(cfg)
}

macro_rules! run_config {
    ($t:ty) => {
        impl RunConfig for $t {
            fn schema_version(&self) -> u32 {
                self.schema_version
            }
            fn seed(&self) -> u64 {
                self.seed
            }
            fn set_seed(&mut self, seed: u64) {
                self.seed = seed;
            }
            fn check(&self) -> Result<(), CliError> {
                self.validate()
            }
        }
    };
}

fn check_sites(n: usize) -> Result<(), CliError> {
    if n < 2 || n % 2 != 0 || n > MAX_SITES {
        return Err(CliError::Config(format!("n_sites must be even and in 2..={MAX_SITES}, got {n}")));
    }
    Ok(())
}

fn positive(name: &str, x: f64) -> Result<(), CliError> {
    if !(x > 0.0 && x.is_finite()) {
        return Err(CliError::Config(format!("{name} must be positive, got {x}")));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyAbelianConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub params: ToyParams,
    /// Direction of the parameter displacement, per site.
    pub deps: Vec<f64>,
    pub dj: Vec<f64>,
    /// Base step of the Richardson finite-difference metric.
    pub fd_step: f64,
    pub tolerance: f64,
}

impl Default for ToyAbelianConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            params: ToyParams { eps: vec![1.0, 0.6, -0.4], j: vec![1.0, 0.9, 0.3] },
            deps: vec![1.0, 0.0, 0.5],
            dj: vec![0.0, 1.0, -0.2],
            fd_step: 1e-3,
            tolerance: 1e-6,
        }
    }
}

impl ToyAbelianConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate_angles().map_err(config_err)?;
        let n = self.params.n();
        if n > 4 || self.deps.len() != n || self.dj.len() != n {
            return Err(CliError::Config(format!(
                "need 1..=4 sites with deps and dj of matching length, got {n}, {}, {}",
                self.deps.len(),
                self.dj.len()
            )));
        }
        positive("fd_step", self.fd_step)?;
        positive("tolerance", self.tolerance)
    }
}
run_config!(ToyAbelianConfig);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToyFactorConfig {
    pub schema_version: u32,
    pub seed: u64,
    /// One (ε, J) per L/R pair.
    pub params: ToyParams,
    pub deps: Vec<f64>,
    pub dj: Vec<f64>,
    pub tolerance: f64,
}

impl Default for ToyFactorConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            params: ToyParams { eps: vec![0.5, -0.3], j: vec![0.8, 0.6] },
            deps: vec![1.0, 0.4],
            dj: vec![-0.5, 1.0],
            tolerance: 1e-8,
        }
    }
}

impl ToyFactorConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        self.params.validate_angles().map_err(config_err)?;
        let n = self.params.n();
        if n > 2 || self.deps.len() != n || self.dj.len() != n {
            return Err(CliError::Config(format!(
                "need 1 or 2 pairs with deps and dj of matching length, got {n}, {}, {}",
                self.deps.len(),
                self.dj.len()
            )));
        }
        positive("tolerance", self.tolerance)
    }
}
run_config!(ToyFactorConfig);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrabilityConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub n_sites: usize,
    pub j: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub direction: Direction,
    pub opt: OptConfig,
}

impl Default for IntegrabilityConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            n_sites: 6,
            j: DEFAULT_J,
            delta: DEFAULT_DELTA,
            n_steps: DEFAULT_N_STEPS,
            direction: Direction::Outward,
            opt: OptConfig::default(),
        }
    }
}

impl IntegrabilityConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_sites(self.n_sites)?;
        if self.n_steps < 2 {
            return Err(CliError::Config("n_steps must be at least 2".into()));
        }
        positive("delta", self.delta)?;
        self.opt.validate().map_err(config_err)
    }
}
run_config!(IntegrabilityConfig);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub n_sites: usize,
    pub h: f64,
    pub j_center: f64,
    pub delta: f64,
    pub n_steps: usize,
    pub n_avg: usize,
    pub opt: OptConfig,
}

impl Default for DisorderConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            n_sites: 4,
            h: DEFAULT_H,
            j_center: DEFAULT_J,
            delta: DEFAULT_DELTA,
            n_steps: DEFAULT_N_STEPS,
            n_avg: DEFAULT_N_AVG,
            opt: OptConfig::default(),
        }
    }
}

impl DisorderConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        check_sites(self.n_sites)?;
        if self.n_steps < 2 || self.n_avg < 1 {
            return Err(CliError::Config("need n_steps >= 2 and n_avg >= 1".into()));
        }
        if !(self.delta >= 0.0 && self.delta.is_finite()) {
            return Err(CliError::Config(format!("delta must be nonnegative, got {}", self.delta)));
        }
        self.opt.validate().map_err(config_err)
    }
}
run_config!(DisorderConfig);

/// Hamiltonian for the OTOC probe.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ProbeModel {
    Tfim { j: f64, h: f64 },
    /// Random Hermitian from the run seed, rescaled to max |E| = `norm`.
    Random { norm: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OtocProbeConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub n_sites: usize,
    /// Sites of subsystem A.
    pub left_sites: Vec<usize>,
    pub model: ProbeModel,
    pub times: Vec<f64>,
    pub n_samples: usize,
}

impl Default for OtocProbeConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            n_sites: 3,
            left_sites: vec![0],
            model: ProbeModel::Tfim { j: DEFAULT_J, h: DEFAULT_H },
            times: (0..=20).map(|i| 0.25 * i as f64).collect(),
            n_samples: 2048,
        }
    }
}

impl OtocProbeConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(2..=4).contains(&self.n_sites) {
            return Err(CliError::Config(format!("n_sites must be in 2..=4, got {}", self.n_sites)));
        }
        if self.n_samples == 0 || self.times.is_empty() {
            return Err(CliError::Config("need at least one time and one sample".into()));
        }
        if self.times.iter().any(|t| !t.is_finite()) {
            return Err(CliError::Config("times must be finite".into()));
        }
        match &self.model {
            ProbeModel::Tfim { j, h } => TfimParams::clean(self.n_sites, *j, *h).validate().map_err(config_err),
            ProbeModel::Random { norm } => positive("norm", *norm),
        }
    }
}
run_config!(OtocProbeConfig);

/// Deliberate defects for exercising the verify report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Fault {
    /// Flip the sign of κ in the line element ds = κ ‖Q(K)‖₂.
    KappaSign,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub metric_algebras: usize,
    pub nrc_samples: usize,
    pub covariance_instances: usize,
    pub inject: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            seed: 0,
            metric_algebras: 20,
            nrc_samples: 4096,
            covariance_instances: 20,
            inject: None,
        }
    }
}

impl VerifyConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        if self.metric_algebras == 0 || self.nrc_samples == 0 || self.covariance_instances == 0 {
            return Err(CliError::Config("counts must be positive".into()));
        }
        Ok(())
    }
}
run_config!(VerifyConfig);
