//! Kernel SVM on a precomputed Gram matrix.
//!
//! Binary problems are solved in the dual with SMO using the maximal
//! violating pair as working set:
//!
//! ```text
//! max_α  Σ α_i − ½ Σ_ij α_i α_j y_i y_j K_ij    s.t.  0 ≤ α_i ≤ C,  Σ α_i y_i = 0
//! ```
//!
//! Multi-class models train one binary machine per class pair on the
//! corresponding principal submatrix and predict by majority vote.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{CrossKernel, GramMatrix, KernelMode};

const TAU: f64 = 1e-12;
/// Relative distance from a box bound below which a multiplier is put on it.
const BOUND_SNAP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverParams {
    pub c: f64,
    pub tol: f64,
    /// Iteration cap in units of the problem size.
    pub max_passes: usize,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self { c: 1.0, tol: 1e-3, max_passes: 10_000 }
    }
}

impl SolverParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c.is_finite() && self.c > 0.0) {
            return Err(Error::config(format!("C must be positive, got {}", self.c)));
        }
        if !(self.tol.is_finite() && self.tol > 0.0) {
            return Err(Error::config(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::config("max_passes must be at least 1"));
        }
        Ok(())
    }
}

/// Two-class machine: `f(x) = Σ_i coef_i · K(x_i, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinarySvm {
    /// `α_i · y_i` per support vector.
    dual_coefs: Vec<f64>,
    support_indices: Vec<usize>,
    bias: f64,
    c: f64,
    train_size: usize,
    iterations: usize,
}

impl BinarySvm {
    pub fn dual_coefs(&self) -> &[f64] {
        &self.dual_coefs
    }

    pub fn support_indices(&self) -> &[usize] {
        &self.support_indices
    }

    pub fn bias(&self) -> f64 {
        self.bias
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn train_size(&self) -> usize {
        self.train_size
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// Dense `α` over the training set.
    pub fn alphas(&self) -> Vec<f64> {
        let mut alpha = vec![0.0; self.train_size];
        for (&i, &coef) in self.support_indices.iter().zip(&self.dual_coefs) {
            alpha[i] = coef.abs();
        }
        alpha
    }

    /// `Σ coef_i · kernel_row[support_i] + bias`.
    pub fn decision_value(&self, kernel_row: &[f64]) -> Result<f64> {
        if kernel_row.len() != self.train_size {
            return Err(Error::arg(format!(
                "kernel row has {} entries, model was trained on {}",
                kernel_row.len(),
                self.train_size
            )));
        }
        Ok(self.decision_unchecked(kernel_row))
    }

    fn decision_unchecked(&self, kernel_row: &[f64]) -> f64 {
        self.support_indices.iter().zip(&self.dual_coefs).map(|(&i, &coef)| coef * kernel_row[i]).sum::<f64>()
            + self.bias
    }

    fn remap(mut self, global: &[usize], train_size: usize) -> Self {
        for idx in &mut self.support_indices {
            *idx = global[*idx];
        }
        self.train_size = train_size;
        self
    }
}

/// Dual objective `Σ α − ½ αᵀ Q α` with `Q_ij = y_i y_j K_ij`.
pub fn dual_objective(gram: &GramMatrix, labels: &[f64], alpha: &[f64]) -> f64 {
    let n = alpha.len();
    let mut quad = 0.0;
    for i in 0..n {
        if alpha[i] == 0.0 {
            continue;
        }
        for j in 0..n {
            quad += alpha[i] * alpha[j] * labels[i] * labels[j] * gram.get(i, j);
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

fn check_binary_labels(labels: &[f64]) -> Result<()> {
    if labels.iter().any(|&y| y != 1.0 && y != -1.0) {
        return Err(Error::arg("binary labels must be +1 or -1"));
    }
    let pos = labels.iter().any(|&y| y > 0.0);
    let neg = labels.iter().any(|&y| y < 0.0);
    if !(pos && neg) {
        return Err(Error::arg("binary problem needs both classes"));
    }
    Ok(())
}

/// Solves the binary dual with SMO.
pub fn solve_binary(gram: &GramMatrix, labels: &[f64], params: &SolverParams) -> Result<BinarySvm> {
    params.validate()?;
    let n = labels.len();
    if gram.size() != n {
        return Err(Error::arg(format!("Gram matrix is {0}x{0} but {n} labels were given", gram.size())));
    }
    check_binary_labels(labels)?;

    let c = params.c;
    let y = labels;
    let qd: Vec<f64> = (0..n).map(|i| gram.get(i, i)).collect();
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let max_iter = params.max_passes.saturating_mul(n.max(1));

    let in_up = |a: f64, y: f64| (y > 0.0 && a < c) || (y < 0.0 && a > 0.0);
    let in_low = |a: f64, y: f64| (y > 0.0 && a > 0.0) || (y < 0.0 && a < c);

    let mut iterations = 0;
    loop {
        let mut gmax = f64::NEG_INFINITY;
        let mut gmin = f64::INFINITY;
        let (mut i, mut j) = (usize::MAX, usize::MAX);
        for t in 0..n {
            let v = -y[t] * grad[t];
            if in_up(alpha[t], y[t]) && v >= gmax {
                gmax = v;
                i = t;
            }
            if in_low(alpha[t], y[t]) && v <= gmin {
                gmin = v;
                j = t;
            }
        }
        let gap = gmax - gmin;
        if i == usize::MAX || j == usize::MAX || gap < params.tol {
            break;
        }
        if iterations >= max_iter {
            return Err(Error::NotConverged { iterations, violation: gap });
        }
        iterations += 1;

        let kij = gram.get(i, j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        if y[i] != y[j] {
            let quad = (qd[i] + qd[j] + 2.0 * kij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (qd[i] + qd[j] - 2.0 * kij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        // `c - diff` and `sum - c` can land an ulp away from a bound; a
        // multiplier left there would count as free when fixing the offset.
        for t in [i, j] {
            if alpha[t] < BOUND_SNAP * c {
                alpha[t] = 0.0;
            } else if alpha[t] > c - BOUND_SNAP * c {
                alpha[t] = c;
            }
        }

        let (da_i, da_j) = (alpha[i] - old_i, alpha[j] - old_j);
        let (row_i, row_j) = (gram.row(i), gram.row(j));
        for k in 0..n {
            grad[k] += y[k] * (y[i] * row_i[k] * da_i + y[j] * row_j[k] * da_j);
        }
    }

    // Offset: average y·∇ over free variables, else midpoint of the bounds.
    let (mut ub, mut lb) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut sum_free, mut n_free) = (0.0, 0usize);
    for t in 0..n {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                ub = ub.min(yg);
            } else {
                lb = lb.max(yg);
            }
        } else {
            n_free += 1;
            sum_free += yg;
        }
    }
    let rho = if n_free > 0 { sum_free / n_free as f64 } else { 0.5 * (ub + lb) };

    let (support_indices, dual_coefs): (Vec<usize>, Vec<f64>) =
        (0..n).filter(|&t| alpha[t] > 0.0).map(|t| (t, alpha[t] * y[t])).unzip();

    Ok(BinarySvm { dual_coefs, support_indices, bias: -rho, c, train_size: n, iterations })
}

/// Binary machine for one class pair: positive decision votes `positive`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub positive: usize,
    pub negative: usize,
    pub model: BinarySvm,
}

/// One-vs-one ensemble over all class pairs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiClassSvm {
    classes: Vec<usize>,
    pairwise_models: Vec<PairModel>,
    kernel_id: String,
    jitter: f64,
    params: SolverParams,
    train_size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub label: usize,
    /// Votes per entry of `MultiClassSvm::classes`.
    pub votes: Vec<u32>,
}

impl MultiClassSvm {
    /// Trains one machine per class pair. Shot-estimated Gram matrices get a
    /// diagonal jitter first so every subproblem is convex.
    pub fn fit(gram: &GramMatrix, labels: &[usize], params: &SolverParams) -> Result<Self> {
        params.validate()?;
        if gram.size() != labels.len() {
            return Err(Error::arg(format!(
                "Gram matrix is {0}x{0} but {1} labels were given",
                gram.size(),
                labels.len()
            )));
        }
        let mut classes: Vec<usize> = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        if classes.len() < 2 {
            return Err(Error::arg("multi-class fit needs at least two distinct classes"));
        }

        let jitter = match gram.mode() {
            KernelMode::Exact => 0.0,
            KernelMode::Shots { .. } => gram.psd_jitter(),
        };
        let gram = if jitter > 0.0 { gram.with_jitter(jitter) } else { gram.clone() };

        let pairs: Vec<(usize, usize)> = classes
            .iter()
            .enumerate()
            .flat_map(|(ia, &a)| classes[ia + 1..].iter().map(move |&b| (a, b)))
            .collect();

        let pairwise_models = pairs
            .par_iter()
            .map(|&(a, b)| {
                let idx: Vec<usize> =
                    (0..labels.len()).filter(|&t| labels[t] == a || labels[t] == b).collect();
                let y: Vec<f64> = idx.iter().map(|&t| if labels[t] == a { 1.0 } else { -1.0 }).collect();
                let sub = gram.submatrix(&idx);
                solve_binary(&sub, &y, params)
                    .map(|m| PairModel { positive: a, negative: b, model: m.remap(&idx, labels.len()) })
                    .map_err(|e| Error::Pair { class_a: a, class_b: b, source: Box::new(e) })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            classes,
            pairwise_models,
            kernel_id: gram.kernel_id().to_string(),
            jitter,
            params: *params,
            train_size: labels.len(),
        })
    }

    pub fn classes(&self) -> &[usize] {
        &self.classes
    }

    pub fn pairwise_models(&self) -> &[PairModel] {
        &self.pairwise_models
    }

    pub fn kernel_id(&self) -> &str {
        &self.kernel_id
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn params(&self) -> &SolverParams {
        &self.params
    }

    pub fn train_size(&self) -> usize {
        self.train_size
    }

    /// Majority vote per test row. Ties go to the tied class with the largest
    /// summed |decision value| over its won votes, then to the lowest label.
    pub fn predict(&self, cross: &CrossKernel) -> Result<Vec<Prediction>> {
        if cross.kernel_id() != self.kernel_id {
            return Err(Error::config(format!(
                "kernel mismatch: model trained with '{}', cross block built with '{}'",
                self.kernel_id,
                cross.kernel_id()
            )));
        }
        if cross.cols() != self.train_size {
            return Err(Error::arg(format!(
                "cross block has {} columns, model was trained on {} rows",
                cross.cols(),
                self.train_size
            )));
        }
        Ok((0..cross.rows()).into_par_iter().map(|r| self.predict_row(cross.row(r))).collect())
    }

    fn predict_row(&self, row: &[f64]) -> Prediction {
        let k = self.classes.len();
        let pos = |label: usize| self.classes.binary_search(&label).expect("known class");
        let mut votes = vec![0u32; k];
        let mut strength = vec![0.0f64; k];
        for pm in &self.pairwise_models {
            let dv = pm.model.decision_unchecked(row);
            let winner = if dv > 0.0 { pm.positive } else { pm.negative };
            let w = pos(winner);
            votes[w] += 1;
            strength[w] += dv.abs();
        }
        let mut best = 0;
        for c in 1..k {
            let better = votes[c] > votes[best] || (votes[c] == votes[best] && strength[c] > strength[best]);
            if better {
                best = c;
            }
        }
        Prediction { label: self.classes[best], votes }
    }
}
