//! Fidelity kernels over encoded states and the RBF baseline.
//!
//! The quantum kernel is `K(x, y) = |⟨ψ(x)|ψ(y)⟩|²`. In shot mode it is
//! estimated with the compute–uncompute circuit: prepare `U(y)|0⟩`, apply
//! `U(x)†`, sample computational-basis outcomes and report the frequency of
//! the all-zeros outcome.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMapSpec;
use crate::statevec::{Gate, QuantumState};

/// Which kernel function produced a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum KernelSpec {
    Quantum { feature_map: FeatureMapSpec },
    Rbf { gamma: f64 },
}

impl KernelSpec {
    pub fn quantum(spec: FeatureMapSpec) -> Self {
        KernelSpec::Quantum { feature_map: spec }
    }

    pub fn rbf(gamma: f64) -> Result<Self> {
        check_gamma(gamma)?;
        Ok(KernelSpec::Rbf { gamma })
    }

    /// Stable descriptor: a spec hash for quantum kernels, gamma for RBF.
    pub fn kernel_id(&self) -> String {
        match self {
            KernelSpec::Quantum { feature_map } => {
                let json = serde_json::to_vec(feature_map).expect("spec serializes");
                let digest = Sha256::digest(&json);
                format!("quantum:{}", &hex::encode(digest)[..16])
            }
            KernelSpec::Rbf { gamma } => format!("rbf:gamma={gamma:e}"),
        }
    }

    fn input_dim(&self) -> Option<usize> {
        match self {
            KernelSpec::Quantum { feature_map } => Some(feature_map.num_qubits()),
            KernelSpec::Rbf { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum KernelMode {
    #[default]
    Exact,
    Shots {
        shots: u64,
        seed: u64,
    },
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::config(format!("RBF gamma must be positive, got {gamma}")));
    }
    Ok(())
}

pub fn rbf_kernel(gamma: f64, x: &[f64], y: &[f64]) -> Result<f64> {
    check_gamma(gamma)?;
    if x.len() != y.len() {
        return Err(Error::arg(format!("RBF kernel of vectors with {} and {} components", x.len(), y.len())));
    }
    let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((-gamma * d2).exp())
}

/// `1 / (dimension · variance)` over all entries of `rows`; 1.0 when the
/// variance is zero.
pub fn default_rbf_gamma(rows: &[Vec<f64>]) -> Result<f64> {
    let dim = rows
        .first()
        .map(Vec::len)
        .filter(|&d| d > 0)
        .ok_or_else(|| Error::arg("no data for gamma heuristic"))?;
    let count = (rows.len() * dim) as f64;
    let mean = rows.iter().flatten().sum::<f64>() / count;
    let var = rows.iter().flatten().map(|v| (v - mean).powi(2)).sum::<f64>() / count;
    Ok(if var > 0.0 { 1.0 / (dim as f64 * var) } else { 1.0 })
}

pub fn quantum_kernel_exact(spec: &FeatureMapSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    let a = spec.encode(x)?;
    if x == y {
        return Ok(1.0);
    }
    let b = spec.encode(y)?;
    Ok(a.fidelity(&b)?.min(1.0))
}

pub fn quantum_kernel_shots(
    spec: &FeatureMapSpec,
    x: &[f64],
    y: &[f64],
    shots: u64,
    seed: u64,
) -> Result<f64> {
    check_shots(shots)?;
    let circuit_x = spec.circuit(x)?;
    let prepared = spec.encode(y)?;
    compute_uncompute(&prepared, &circuit_x, shots, seed)
}

fn check_shots(shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::arg("shot count must be at least 1"));
    }
    Ok(())
}

/// Applies `circuit†` to `prepared` and samples `shots` outcomes.
fn compute_uncompute(prepared: &QuantumState, circuit: &[Gate], shots: u64, seed: u64) -> Result<f64> {
    let mut state = prepared.clone();
    state.apply_all_inverse(circuit)?;
    let probs = state.probabilities();
    let dist =
        WeightedIndex::new(&probs).map_err(|e| Error::arg(format!("bad outcome distribution: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zeros = (0..shots).filter(|_| dist.sample(&mut rng) == 0).count();
    Ok(zeros as f64 / shots as f64)
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Substream seed for matrix entry `(i, j)`, independent of evaluation order.
pub fn pair_seed(seed: u64, i: usize, j: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ i as u64) ^ (j as u64).rotate_left(32))
}

// Cross blocks draw from a different family of substreams than square Grams.
const CROSS_DOMAIN: u64 = 0x5EED_C505_5000_0001;

/// Pairwise kernel evaluator with per-row work cached.
enum Evaluator<'a> {
    Exact {
        states: Vec<QuantumState>,
        other_states: Vec<QuantumState>,
        rows: &'a [Vec<f64>],
        other: &'a [Vec<f64>],
    },
    Shots {
        circuits: Vec<Vec<Gate>>,
        other: Vec<QuantumState>,
        shots: u64,
    },
    Rbf {
        gamma: f64,
        rows: &'a [Vec<f64>],
        other: &'a [Vec<f64>],
    },
}

impl<'a> Evaluator<'a> {
    /// Rows index the first argument (`x`, the uncomputed side in shot mode),
    /// `other` the second.
    fn new(
        kernel: &KernelSpec,
        mode: KernelMode,
        rows: &'a [Vec<f64>],
        other: &'a [Vec<f64>],
    ) -> Result<Self> {
        if let Some(dim) = kernel.input_dim() {
            for r in rows.iter().chain(other) {
                if r.len() != dim {
                    return Err(Error::arg(format!("row has {} features, kernel expects {dim}", r.len())));
                }
            }
        } else {
            let dim = rows[0].len();
            if rows.iter().chain(other).any(|r| r.len() != dim) {
                return Err(Error::arg("rows have inconsistent dimensions"));
            }
        }
        match (kernel, mode) {
            (KernelSpec::Rbf { gamma }, KernelMode::Exact) => {
                check_gamma(*gamma)?;
                Ok(Evaluator::Rbf { gamma: *gamma, rows, other })
            }
            (KernelSpec::Rbf { .. }, KernelMode::Shots { .. }) => {
                Err(Error::config("shot mode applies only to quantum kernels"))
            }
            (KernelSpec::Quantum { feature_map }, KernelMode::Exact) => {
                let states = encode_all(feature_map, rows)?;
                let other_states = encode_all(feature_map, other)?;
                Ok(Evaluator::Exact { states, other_states, rows, other })
            }
            (KernelSpec::Quantum { feature_map }, KernelMode::Shots { shots, .. }) => {
                check_shots(shots)?;
                let circuits = rows.par_iter().map(|r| feature_map.circuit(r)).collect::<Result<Vec<_>>>()?;
                let other = encode_all(feature_map, other)?;
                Ok(Evaluator::Shots { circuits, other, shots })
            }
        }
    }

    fn eval(&self, i: usize, j: usize, seed: u64) -> Result<f64> {
        match self {
            // Identical inputs give identical states; skip the rounding.
            Evaluator::Exact { rows, other, .. } if rows[i] == other[j] => Ok(1.0),
            Evaluator::Exact { states, other_states, .. } => {
                Ok(states[i].fidelity(&other_states[j])?.min(1.0))
            }
            Evaluator::Shots { circuits, other, shots } => {
                compute_uncompute(&other[j], &circuits[i], *shots, seed)
            }
            Evaluator::Rbf { gamma, rows, other } => rbf_kernel(*gamma, &rows[i], &other[j]),
        }
    }
}

fn encode_all(spec: &FeatureMapSpec, rows: &[Vec<f64>]) -> Result<Vec<QuantumState>> {
    rows.par_iter().map(|r| spec.encode(r)).collect()
}

/// Symmetric matrix of pairwise kernel values over one set of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramMatrix {
    size: usize,
    values: Vec<f64>,
    mode: KernelMode,
    kernel_id: String,
}

impl GramMatrix {
    /// Wraps an existing row-major matrix, checking it is square and symmetric.
    pub fn from_values(
        size: usize,
        values: Vec<f64>,
        mode: KernelMode,
        kernel_id: impl Into<String>,
    ) -> Result<Self> {
        if size == 0 || values.len() != size * size {
            return Err(Error::arg(format!("expected {size}x{size} values, got {}", values.len())));
        }
        for i in 0..size {
            for j in 0..i {
                if values[i * size + j] != values[j * size + i] {
                    return Err(Error::arg(format!("matrix not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { size, values, mode, kernel_id: kernel_id.into() })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.size + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.size..(i + 1) * self.size]
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.size).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        let m = DMatrix::from_row_slice(self.size, self.size, &self.values);
        m.symmetric_eigenvalues().iter().copied().collect()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Principal submatrix on `indices`, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> GramMatrix {
        let n = indices.len();
        let mut values = Vec::with_capacity(n * n);
        for &i in indices {
            values.extend(indices.iter().map(|&j| self.get(i, j)));
        }
        GramMatrix { size: n, values, mode: self.mode, kernel_id: self.kernel_id.clone() }
    }

    /// Diagonal shift that makes the matrix numerically PSD:
    /// `max(0, −λ_min) + 1e-8`.
    pub fn psd_jitter(&self) -> f64 {
        (-self.min_eigenvalue()).max(0.0) + 1e-8
    }

    pub fn with_jitter(&self, lambda: f64) -> GramMatrix {
        let mut out = self.clone();
        for i in 0..self.size {
            out.values[i * self.size + i] += lambda;
        }
        out
    }
}

/// Kernel values between `test` rows and `train` rows (`|test| × |train|`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossKernel {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
    mode: KernelMode,
    kernel_id: String,
}

impl CrossKernel {
    pub fn from_values(
        rows: usize,
        cols: usize,
        values: Vec<f64>,
        kernel_id: impl Into<String>,
    ) -> Result<Self> {
        if values.len() != rows * cols {
            return Err(Error::arg("cross kernel value count mismatch"));
        }
        Ok(Self { rows, cols, values, mode: KernelMode::Exact, kernel_id: kernel_id.into() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn mode(&self) -> KernelMode {
        self.mode
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols + j]
    }
}

/// Gram matrix of `rows`. The upper triangle is evaluated once per unordered
/// pair and mirrored; the diagonal is set to 1.
pub fn gram(kernel: &KernelSpec, rows: &[Vec<f64>], mode: KernelMode) -> Result<GramMatrix> {
    if rows.is_empty() {
        return Err(Error::arg("cannot build a Gram matrix of an empty dataset"));
    }
    let m = rows.len();
    let evaluator = Evaluator::new(kernel, mode, rows, rows)?;
    let seed = match mode {
        KernelMode::Shots { seed, .. } => seed,
        KernelMode::Exact => 0,
    };
    let upper: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| (i + 1..m).map(|j| evaluator.eval(i, j, pair_seed(seed, i, j))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut values = vec![0.0; m * m];
    for (i, row) in upper.iter().enumerate() {
        values[i * m + i] = 1.0;
        for (off, &v) in row.iter().enumerate() {
            let j = i + 1 + off;
            values[i * m + j] = v;
            values[j * m + i] = v;
        }
    }
    Ok(GramMatrix { size: m, values, mode, kernel_id: kernel.kernel_id() })
}

/// Kernel block between unseen `test` rows and the `train` rows.
pub fn gram_cross(
    kernel: &KernelSpec,
    train: &[Vec<f64>],
    test: &[Vec<f64>],
    mode: KernelMode,
) -> Result<CrossKernel> {
    if train.is_empty() || test.is_empty() {
        return Err(Error::arg("cross kernel needs non-empty train and test rows"));
    }
    let evaluator = Evaluator::new(kernel, mode, test, train)?;
    let seed = match mode {
        KernelMode::Shots { seed, .. } => seed ^ CROSS_DOMAIN,
        KernelMode::Exact => 0,
    };
    let n = train.len();
    let rows: Vec<Vec<f64>> = (0..test.len())
        .into_par_iter()
        .map(|i| (0..n).map(|j| evaluator.eval(i, j, pair_seed(seed, i, j))).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    Ok(CrossKernel { rows: test.len(), cols: n, values: rows.concat(), mode, kernel_id: kernel.kernel_id() })
}
