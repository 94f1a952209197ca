//! Run configuration shared by the CLI commands.
//!
//! A config file is flat TOML whose keys match the long flag names with
//! dashes replaced by underscores. Precedence is flags, then file, then the
//! defaults below.

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::featuremap::{Entanglement, FeatureMapSpec, PhiFamily};
use crate::kernel::KernelMode;
use crate::svm::SolverParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    #[default]
    Quantum,
    Rbf,
}

impl std::str::FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantum" => Ok(KernelKind::Quantum),
            "rbf" => Ok(KernelKind::Rbf),
            other => Err(Error::config(format!("unknown kernel '{other}' (expected quantum|rbf)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ModeKind {
    #[default]
    Exact,
    Shots,
}

impl std::str::FromStr for ModeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(ModeKind::Exact),
            "shots" => Ok(ModeKind::Shots),
            other => Err(Error::config(format!("unknown kernel mode '{other}' (expected exact|shots)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub kernel: KernelKind,
    pub reps: usize,
    pub entanglement: Entanglement,
    pub phi: PhiFamily,
    pub feature_range: [f64; 2],
    /// Expected qubit count; checked against the derived value when set.
    pub qubits: Option<usize>,
    /// PCA output dimension; 0 disables PCA.
    pub pca_dim: usize,
    /// Trailing feature columns (e.g. age, sex) appended after PCA.
    pub demographics: usize,
    /// Min/max rescaling of encoder inputs into `feature_range`.
    pub rescale: bool,
    pub mode: ModeKind,
    pub shots: u64,
    pub c: f64,
    pub tol: f64,
    pub max_passes: usize,
    /// RBF gamma; `None` uses `1 / (dim · variance)` of the training features.
    pub gamma: Option<f64>,
    pub test_fraction: f64,
    pub seed: u64,
    /// Worker threads, 0 = one per core.
    pub threads: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let solver = SolverParams::default();
        Self {
            kernel: KernelKind::Quantum,
            reps: 2,
            entanglement: Entanglement::Linear,
            phi: PhiFamily::StandardZz,
            feature_range: [0.0, PI],
            qubits: None,
            pca_dim: 8,
            demographics: 0,
            rescale: true,
            mode: ModeKind::Exact,
            shots: 1024,
            c: solver.c,
            tol: solver.tol,
            max_passes: solver.max_passes,
            gamma: None,
            test_fraction: 0.3,
            seed: 0,
            threads: 0,
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::config(format!("invalid config: {e}")))
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn solver(&self) -> SolverParams {
        SolverParams { c: self.c, tol: self.tol, max_passes: self.max_passes }
    }

    pub fn kernel_mode(&self) -> KernelMode {
        match self.mode {
            ModeKind::Exact => KernelMode::Exact,
            ModeKind::Shots => KernelMode::Shots { shots: self.shots, seed: self.seed },
        }
    }

    /// Encoder width for raw inputs of dimension `input_dim`.
    pub fn encoded_dim(&self, input_dim: usize) -> Result<usize> {
        if self.demographics >= input_dim {
            return Err(Error::config(format!(
                "{} demographic columns leave no imaging features in {input_dim}-column data",
                self.demographics
            )));
        }
        let base = if self.pca_dim > 0 { self.pca_dim } else { input_dim - self.demographics };
        let dim = base + self.demographics;
        if let Some(q) = self.qubits {
            if q != dim {
                return Err(Error::config(format!(
                    "qubits = {q} but PCA dimension {base} + {} demographic columns gives {dim}",
                    self.demographics
                )));
            }
        }
        Ok(dim)
    }

    pub fn feature_map(&self, num_qubits: usize) -> Result<FeatureMapSpec> {
        FeatureMapSpec::new(num_qubits, self.reps, self.entanglement, self.phi, self.feature_range)
    }

    pub fn validate(&self) -> Result<()> {
        self.solver().validate()?;
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return Err(Error::config(format!(
                "test_fraction must be in (0, 1), got {}",
                self.test_fraction
            )));
        }
        if self.mode == ModeKind::Shots && self.shots == 0 {
            return Err(Error::config("shots must be at least 1"));
        }
        if let Some(g) = self.gamma {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::config(format!("gamma must be positive, got {g}")));
            }
        }
        let [lo, hi] = self.feature_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config("feature_range must be finite with lower < upper"));
        }
        Ok(())
    }
}
