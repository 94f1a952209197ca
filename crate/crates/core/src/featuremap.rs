//! Second-order Z/ZZ phase encoding circuit.
//!
//! Each repetition applies a Hadamard layer followed by the diagonal unitary
//! `exp(i·(Σ_k φ_k(x)·Z_k + Σ_{(j,k)} φ_jk(x)·Z_j·Z_k))`. Only single-qubit and
//! pairwise interaction terms are supported.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Gate, QuantumState, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Entanglement {
    /// Nearest neighbours `(k, k+1)`.
    Linear,
    /// Every pair `j < k`.
    Full,
}

impl Entanglement {
    pub fn pairs(self, num_qubits: usize) -> Vec<(usize, usize)> {
        match self {
            Entanglement::Linear => (1..num_qubits).map(|k| (k - 1, k)).collect(),
            Entanglement::Full => {
                (0..num_qubits).flat_map(|j| (j + 1..num_qubits).map(move |k| (j, k))).collect()
            }
        }
    }
}

impl std::str::FromStr for Entanglement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" => Ok(Entanglement::Linear),
            "full" => Ok(Entanglement::Full),
            other => Err(Error::config(format!("unknown entanglement '{other}' (expected linear|full)"))),
        }
    }
}

/// Angle functions for the single-qubit and pairwise phase terms.
pub trait PhiMap {
    fn single(&self, x: &[f64], k: usize) -> f64;
    fn pair(&self, x: &[f64], j: usize, k: usize) -> f64;
}

/// Named angle families that can be stored in a config or bundle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhiFamily {
    /// `φ_k = x_k`, `φ_jk = (π − x_j)(π − x_k)`.
    #[serde(rename = "standard-zz")]
    StandardZz,
}

impl PhiMap for PhiFamily {
    fn single(&self, x: &[f64], k: usize) -> f64 {
        match self {
            PhiFamily::StandardZz => x[k],
        }
    }

    fn pair(&self, x: &[f64], j: usize, k: usize) -> f64 {
        match self {
            PhiFamily::StandardZz => (PI - x[j]) * (PI - x[k]),
        }
    }
}

impl std::str::FromStr for PhiFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard-zz" => Ok(PhiFamily::StandardZz),
            other => Err(Error::config(format!("unknown phi family '{other}' (expected standard-zz)"))),
        }
    }
}

#[derive(Deserialize)]
struct RawSpec {
    qubits: usize,
    reps: usize,
    entanglement: Entanglement,
    phi: PhiFamily,
    feature_range: [f64; 2],
}

/// Immutable description of an encoding circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpec")]
pub struct FeatureMapSpec {
    #[serde(rename = "qubits")]
    num_qubits: usize,
    #[serde(rename = "reps")]
    repetitions: usize,
    entanglement: Entanglement,
    phi: PhiFamily,
    feature_range: [f64; 2],
}

impl TryFrom<RawSpec> for FeatureMapSpec {
    type Error = Error;

    fn try_from(raw: RawSpec) -> Result<Self> {
        FeatureMapSpec::new(raw.qubits, raw.reps, raw.entanglement, raw.phi, raw.feature_range)
    }
}

impl FeatureMapSpec {
    pub fn new(
        num_qubits: usize,
        repetitions: usize,
        entanglement: Entanglement,
        phi: PhiFamily,
        feature_range: [f64; 2],
    ) -> Result<Self> {
        if num_qubits == 0 || num_qubits > MAX_QUBITS {
            return Err(Error::config(format!(
                "feature map dimension must be in 1..={MAX_QUBITS}, got {num_qubits}"
            )));
        }
        if repetitions == 0 {
            return Err(Error::config("feature map needs at least one repetition"));
        }
        let [lo, hi] = feature_range;
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::config(format!(
                "feature range must be finite with lower < upper, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { num_qubits, repetitions, entanglement, phi, feature_range })
    }

    /// Two repetitions, linear entanglement, standard angles, range `[0, π]`.
    pub fn default_spec(dimension: usize) -> Result<Self> {
        Self::new(dimension, 2, Entanglement::Linear, PhiFamily::StandardZz, [0.0, PI])
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn repetitions(&self) -> usize {
        self.repetitions
    }

    pub fn entanglement(&self) -> Entanglement {
        self.entanglement
    }

    pub fn phi(&self) -> PhiFamily {
        self.phi
    }

    pub fn feature_range(&self) -> [f64; 2] {
        self.feature_range
    }

    pub fn with_repetitions(mut self, repetitions: usize) -> Result<Self> {
        if repetitions == 0 {
            return Err(Error::config("feature map needs at least one repetition"));
        }
        self.repetitions = repetitions;
        Ok(self)
    }

    pub fn with_entanglement(mut self, entanglement: Entanglement) -> Self {
        self.entanglement = entanglement;
        self
    }

    pub fn pairs(&self) -> Vec<(usize, usize)> {
        self.entanglement.pairs(self.num_qubits)
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.num_qubits {
            return Err(Error::arg(format!(
                "feature vector has {} components, feature map expects {}",
                x.len(),
                self.num_qubits
            )));
        }
        if let Some(k) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite feature at index {k}")));
        }
        Ok(())
    }

    /// Gate list of the full encoding circuit for `x`.
    pub fn circuit(&self, x: &[f64]) -> Result<Vec<Gate>> {
        self.circuit_with(&self.phi, x)
    }

    pub fn circuit_with(&self, phi: &dyn PhiMap, x: &[f64]) -> Result<Vec<Gate>> {
        self.check_input(x)?;
        let n = self.num_qubits;
        let pairs = self.pairs();
        let mut layer = Vec::with_capacity(2 * n + pairs.len());
        layer.extend((0..n).map(Gate::Hadamard));
        layer.extend((0..n).map(|k| Gate::PhaseZ(k, phi.single(x, k))));
        layer.extend(pairs.iter().map(|&(j, k)| Gate::ZzPhase(j, k, phi.pair(x, j, k))));
        Ok(layer.repeat(self.repetitions))
    }

    /// `|ψ(x)⟩` for this spec's angle family.
    pub fn encode(&self, x: &[f64]) -> Result<QuantumState> {
        self.encode_with(&self.phi, x)
    }

    /// `|ψ(x)⟩` with caller-supplied angle functions.
    pub fn encode_with(&self, phi: &dyn PhiMap, x: &[f64]) -> Result<QuantumState> {
        let gates = self.circuit_with(phi, x)?;
        let mut state = QuantumState::zero_state(self.num_qubits)?;
        state.apply_all(&gates)?;
        Ok(state)
    }

    /// Affine map of `x_raw` from `bounds` into the feature range.
    pub fn rescale(&self, x_raw: &[f64], bounds: &FeatureBounds) -> Result<Vec<f64>> {
        bounds.rescale(x_raw, self.feature_range)
    }
}

/// Per-dimension source interval used for rescaling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureBounds {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl FeatureBounds {
    pub fn new(min: Vec<f64>, max: Vec<f64>) -> Result<Self> {
        if min.len() != max.len() {
            return Err(Error::arg("bounds min/max lengths differ"));
        }
        for (k, (lo, hi)) in min.iter().zip(&max).enumerate() {
            if !lo.is_finite() || !hi.is_finite() {
                return Err(Error::arg(format!("non-finite bound in dimension {k}")));
            }
            if lo > hi {
                return Err(Error::arg(format!("bound min > max in dimension {k}")));
            }
        }
        Ok(Self { min, max })
    }

    /// Column-wise min/max of `rows`.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let first = rows.first().ok_or_else(|| Error::arg("cannot take bounds of no rows"))?;
        let mut min = first.clone();
        let mut max = first.clone();
        for row in &rows[1..] {
            if row.len() != min.len() {
                return Err(Error::arg("rows have inconsistent dimensions"));
            }
            for (k, &v) in row.iter().enumerate() {
                min[k] = min[k].min(v);
                max[k] = max[k].max(v);
            }
        }
        Self::new(min, max)
    }

    pub fn dim(&self) -> usize {
        self.min.len()
    }

    /// Constant dimensions map to the midpoint of `range`. Values outside the
    /// bounds extrapolate linearly.
    pub fn rescale(&self, x_raw: &[f64], range: [f64; 2]) -> Result<Vec<f64>> {
        if x_raw.len() != self.dim() {
            return Err(Error::arg(format!(
                "vector has {} components, bounds cover {}",
                x_raw.len(),
                self.dim()
            )));
        }
        let [lo, hi] = range;
        Ok(x_raw
            .iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(&v, (&a, &b))| if a == b { 0.5 * (lo + hi) } else { lo + (v - a) / (b - a) * (hi - lo) })
            .collect())
    }
}
