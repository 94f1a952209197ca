//! Reference implementations used as test oracles. Each one takes a
//! different route from the library: dense matrices instead of in-place
//! amplitude updates, active-set enumeration and grids instead of SMO,
//! covariance eigendecomposition instead of SVD.
#![allow(dead_code, clippy::needless_range_loop)]

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_point(rng: &mut ChaCha8Rng, dim: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(lo..hi)).collect()
}

// ---------------------------------------------------------------------------
// Dense complex matrices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    pub n: usize,
    pub data: Vec<Complex64>,
}

impl CMat {
    pub fn zeros(n: usize) -> Self {
        Self { n, data: vec![Complex64::new(0.0, 0.0); n * n] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_real(n: usize, values: &[f64]) -> Self {
        Self { n, data: values.iter().map(|&v| Complex64::new(v, 0.0)).collect() }
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        let n = self.n;
        let mut out = CMat::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        CMat { n: self.n, data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect() }
    }

    pub fn scale(&self, s: Complex64) -> CMat {
        CMat { n: self.n, data: self.data.iter().map(|a| a * s).collect() }
    }

    /// `self ⊗ other`.
    pub fn kron(&self, other: &CMat) -> CMat {
        let (a, b) = (self.n, other.n);
        let n = a * b;
        let mut out = CMat::zeros(n);
        for i in 0..a {
            for j in 0..a {
                for k in 0..b {
                    for l in 0..b {
                        out.data[(i * b + k) * n + j * b + l] = self.get(i, j) * other.get(k, l);
                    }
                }
            }
        }
        out
    }

    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        (0..self.n).map(|i| (0..self.n).map(|j| self.get(i, j) * v[j]).sum()).collect()
    }

    pub fn max_abs_entry(&self) -> f64 {
        self.data.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Matrix exponential by scaling and squaring with a Taylor series.
    pub fn expm(&self) -> CMat {
        let norm = self.max_abs_entry() * self.n as f64;
        let mut squarings = 0;
        while norm / f64::powi(2.0, squarings) > 0.5 {
            squarings += 1;
        }
        let a = self.scale(Complex64::new(f64::powi(2.0, -squarings), 0.0));
        let mut term = CMat::identity(self.n);
        let mut sum = CMat::identity(self.n);
        for k in 1..=30 {
            term = term.mul(&a).scale(Complex64::new(1.0 / k as f64, 0.0));
            sum = sum.add(&term);
        }
        for _ in 0..squarings {
            sum = sum.mul(&sum);
        }
        sum
    }
}

pub fn hadamard_2x2() -> CMat {
    let s = 1.0 / 2f64.sqrt();
    CMat::from_real(2, &[s, s, s, -s])
}

pub fn pauli_z() -> CMat {
    CMat::from_real(2, &[1.0, 0.0, 0.0, -1.0])
}

/// Full-register operator with `single` on `qubit` and identity elsewhere.
/// Qubit `k` is bit `k` of the basis index, so qubit 0 is the rightmost factor.
pub fn embed(n: usize, factors: &[(usize, CMat)]) -> CMat {
    let mut out = CMat::identity(1);
    for q in (0..n).rev() {
        let f = factors.iter().find(|(k, _)| *k == q).map_or_else(|| CMat::identity(2), |(_, m)| m.clone());
        out = out.kron(&f);
    }
    out
}

/// Controlled-NOT as a permutation of basis states.
pub fn cnot(n: usize, control: usize, target: usize) -> CMat {
    let dim = 1 << n;
    let mut m = CMat::zeros(dim);
    for i in 0..dim {
        let j = if i >> control & 1 == 1 { i ^ (1 << target) } else { i };
        m.data[j * dim + i] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `exp(i·θ·Z)` on one qubit, built as a matrix exponential.
pub fn phase_z_dense(n: usize, qubit: usize, theta: f64) -> CMat {
    embed(n, &[(qubit, pauli_z())]).scale(Complex64::new(0.0, theta)).expm()
}

/// `exp(i·θ·Z_a Z_b)` assembled as CNOT · phase on the target · CNOT.
pub fn zz_phase_dense(n: usize, a: usize, b: usize, theta: f64) -> CMat {
    let c = cnot(n, a, b);
    c.mul(&phase_z_dense(n, b, theta)).mul(&c)
}

/// State produced by the second-order feature map, computed as
/// `(exp(i·G(x)) · H^{⊗n})^reps |0⟩` with
/// `G(x) = Σ_k x_k Z_k + Σ_{(j,k)} (π − x_j)(π − x_k) Z_j Z_k`.
pub fn feature_map_state(n: usize, reps: usize, pairs: &[(usize, usize)], x: &[f64]) -> Vec<Complex64> {
    let dim = 1 << n;
    let mut generator = CMat::zeros(dim);
    for (k, &xk) in x.iter().enumerate() {
        generator = generator.add(&embed(n, &[(k, pauli_z())]).scale(Complex64::new(xk, 0.0)));
    }
    for &(j, k) in pairs {
        let angle = (PI - x[j]) * (PI - x[k]);
        let zz = embed(n, &[(j, pauli_z()), (k, pauli_z())]);
        generator = generator.add(&zz.scale(Complex64::new(angle, 0.0)));
    }
    let u_phi = generator.scale(Complex64::new(0.0, 1.0)).expm();
    let h_all = embed(n, &(0..n).map(|q| (q, hadamard_2x2())).collect::<Vec<_>>());
    let layer = u_phi.mul(&h_all);
    let mut state = vec![Complex64::new(0.0, 0.0); dim];
    state[0] = Complex64::new(1.0, 0.0);
    for _ in 0..reps {
        state = layer.apply(&state);
    }
    state
}

pub fn linear_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|k| (k - 1, k)).collect()
}

pub fn full_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |k| (j, k))).collect()
}

pub fn fidelity_dense(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>().norm_sqr()
}

// ---------------------------------------------------------------------------
// SVM dual oracles
// ---------------------------------------------------------------------------

/// `Σ α − ½ Σ α_i α_j y_i y_j K_ij`.
pub fn dual_objective(k: &[Vec<f64>], y: &[f64], alpha: &[f64]) -> f64 {
    let n = y.len();
    let mut quad = 0.0;
    for i in 0..n {
        for j in 0..n {
            quad += alpha[i] * alpha[j] * y[i] * y[j] * k[i][j];
        }
    }
    alpha.iter().sum::<f64>() - 0.5 * quad
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub alpha: Vec<f64>,
    pub objective: f64,
    pub bias: f64,
}

impl DualSolution {
    pub fn decision(&self, y: &[f64], kernel_row: &[f64]) -> f64 {
        self.alpha.iter().zip(y).zip(kernel_row).map(|((a, yi), k)| a * yi * k).sum::<f64>() + self.bias
    }
}

/// Bias from the KKT conditions: mean over free multipliers, otherwise the
/// midpoint of the interval allowed by the bound multipliers.
pub fn kkt_bias(k: &[Vec<f64>], y: &[f64], alpha: &[f64], c: f64) -> f64 {
    let n = y.len();
    let f: Vec<f64> = (0..n).map(|i| (0..n).map(|j| alpha[j] * y[j] * k[i][j]).sum()).collect();
    let eps = 1e-8 * c;
    let free: Vec<usize> = (0..n).filter(|&i| alpha[i] > eps && alpha[i] < c - eps).collect();
    if !free.is_empty() {
        return free.iter().map(|&i| y[i] - f[i]).sum::<f64>() / free.len() as f64;
    }
    let mut lower = f64::NEG_INFINITY;
    let mut upper = f64::INFINITY;
    for i in 0..n {
        let at_zero = alpha[i] <= eps;
        let edge = y[i] - f[i];
        // y_i (f_i + b) ≥ 1 at α = 0, ≤ 1 at α = C.
        if (y[i] > 0.0) == at_zero {
            lower = lower.max(edge);
        } else {
            upper = upper.min(edge);
        }
    }
    match (lower.is_finite(), upper.is_finite()) {
        (true, true) => 0.5 * (lower + upper),
        (true, false) => lower,
        (false, true) => upper,
        (false, false) => 0.0,
    }
}

/// Exact dual optimum by enumerating every assignment of each multiplier to
/// {0, C, free}. For each assignment the free multipliers and the equality
/// multiplier solve the stationarity system
/// `[Q_FF y_F; y_Fᵀ 0] [α_F; ν] = [1 − Q_FU·C; −y_U·C]`;
/// feasible solutions are scored and the best kept. Exponential in `n`.
pub fn active_set_optimum(k: &[Vec<f64>], y: &[f64], c: f64) -> DualSolution {
    let n = y.len();
    assert!(n <= 8, "active-set oracle is exponential in n");
    let q = |i: usize, j: usize| y[i] * y[j] * k[i][j];
    let mut best: Option<(f64, Vec<f64>)> = None;
    let total = 3usize.pow(n as u32);
    for code in 0..total {
        let mut state = vec![0u8; n];
        let mut rest = code;
        for s in state.iter_mut() {
            *s = (rest % 3) as u8;
            rest /= 3;
        }
        let free: Vec<usize> = (0..n).filter(|&i| state[i] == 2).collect();
        let upper: Vec<usize> = (0..n).filter(|&i| state[i] == 1).collect();
        let mut alpha = vec![0.0; n];
        for &i in &upper {
            alpha[i] = c;
        }
        if !free.is_empty() {
            let m = free.len();
            let mut a = DMatrix::<f64>::zeros(m + 1, m + 1);
            let mut b = DVector::<f64>::zeros(m + 1);
            for (r, &i) in free.iter().enumerate() {
                for (s, &j) in free.iter().enumerate() {
                    a[(r, s)] = q(i, j);
                }
                a[(r, m)] = y[i];
                a[(m, r)] = y[i];
                b[r] = 1.0 - upper.iter().map(|&j| q(i, j) * c).sum::<f64>();
            }
            b[m] = -upper.iter().map(|&j| y[j] * c).sum::<f64>();
            let svd = a.clone().svd(true, true);
            let Ok(sol) = svd.solve(&b, 1e-12) else { continue };
            if (&a * &sol - &b).norm() > 1e-8 {
                continue;
            }
            for (r, &i) in free.iter().enumerate() {
                alpha[i] = sol[r];
            }
        }
        let tol = 1e-9;
        if alpha.iter().any(|&a| a < -tol || a > c + tol) {
            continue;
        }
        let balance: f64 = alpha.iter().zip(y).map(|(a, yi)| a * yi).sum();
        if balance.abs() > 1e-8 {
            continue;
        }
        let alpha: Vec<f64> = alpha.iter().map(|a| a.clamp(0.0, c)).collect();
        let obj = dual_objective(k, y, &alpha);
        if best.as_ref().is_none_or(|(b, _)| obj > *b) {
            best = Some((obj, alpha));
        }
    }
    let (objective, alpha) = best.expect("α = 0 is always feasible");
    let bias = kkt_bias(k, y, &alpha, c);
    DualSolution { alpha, objective, bias }
}

/// Best dual objective over a grid of step `c / steps` for problems of at
/// most three points; the last multiplier is fixed by the equality
/// constraint.
pub fn grid_optimum(k: &[Vec<f64>], y: &[f64], c: f64, steps: usize) -> f64 {
    let n = y.len();
    assert!((2..=3).contains(&n), "grid oracle handles 2 or 3 points");
    let h = c / steps as f64;
    let mut best = f64::NEG_INFINITY;
    let mut consider = |alpha: &[f64]| {
        let last = alpha[n - 1];
        if (-1e-12..=c + 1e-12).contains(&last) {
            best = best.max(dual_objective(k, y, alpha));
        }
    };
    let finish = |alpha: &mut Vec<f64>| {
        let partial: f64 = (0..n - 1).map(|i| alpha[i] * y[i]).sum();
        alpha[n - 1] = -partial * y[n - 1];
    };
    if n == 2 {
        for s in 0..=steps {
            let mut alpha = vec![s as f64 * h, 0.0];
            finish(&mut alpha);
            consider(&alpha);
        }
    } else {
        for s in 0..=steps {
            for t in 0..=steps {
                let mut alpha = vec![s as f64 * h, t as f64 * h, 0.0];
                finish(&mut alpha);
                consider(&alpha);
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// PCA oracle
// ---------------------------------------------------------------------------

pub struct Spectrum {
    /// Eigenvalues of `X_cᵀ X_c` (squared singular values), descending.
    pub values: Vec<f64>,
    /// Matching unit eigenvectors.
    pub vectors: Vec<Vec<f64>>,
}

/// Eigendecomposition of the scatter matrix of the centred rows.
pub fn scatter_spectrum(rows: &[Vec<f64>]) -> Spectrum {
    let m = rows.len();
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m as f64).collect();
    let mut s = DMatrix::<f64>::zeros(d, d);
    for r in rows {
        for i in 0..d {
            for j in 0..d {
                s[(i, j)] += (r[i] - mean[i]) * (r[j] - mean[j]);
            }
        }
    }
    let eig = s.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    Spectrum {
        values: order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect(),
        vectors: order.iter().map(|&i| eig.eigenvectors.column(i).iter().copied().collect()).collect(),
    }
}

pub fn covariance(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = rows.len() as f64;
    let d = rows[0].len();
    let mean: Vec<f64> = (0..d).map(|j| rows.iter().map(|r| r[j]).sum::<f64>() / m).collect();
    (0..d)
        .map(|i| {
            (0..d)
                .map(|j| rows.iter().map(|r| (r[i] - mean[i]) * (r[j] - mean[j])).sum::<f64>() / (m - 1.0))
                .collect()
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Report schema
// ---------------------------------------------------------------------------

type LabeledRows = Vec<(String, Vec<f64>)>;

fn parse_csv_grid(text: &str) -> Result<(Vec<String>, LabeledRows), String> {
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().ok_or("empty CSV")?.split(',').map(str::to_string).collect();
    if header.first().map(String::as_str) != Some("true\\predicted") {
        return Err(format!("unexpected header start {:?}", header.first()));
    }
    let mut rows = Vec::new();
    for line in lines {
        let mut cells = line.split(',');
        let name = cells.next().ok_or("empty row")?.to_string();
        let values = cells
            .map(|c| c.parse::<f64>().map_err(|e| format!("bad cell {c:?}: {e}")))
            .collect::<Result<Vec<_>, _>>()?;
        rows.push((name, values));
    }
    Ok((header[1..].to_vec(), rows))
}

/// Checks the files written by `eval` for a `k`-class problem.
pub fn validate_report(dir: &Path, class_names: &[String]) -> Result<(), String> {
    let k = class_names.len();
    let read = |name: &str| std::fs::read_to_string(dir.join(name)).map_err(|e| format!("{name}: {e}"));

    let (cols, rows) = parse_csv_grid(&read("confusion_counts.csv")?)?;
    if cols != class_names || rows.len() != k {
        return Err(format!("counts CSV has columns {cols:?} and {} rows", rows.len()));
    }
    let mut total = 0.0;
    for (i, (name, values)) in rows.iter().enumerate() {
        if name != &class_names[i] || values.len() != k {
            return Err(format!("counts row {i} malformed"));
        }
        if values.iter().any(|v| v.fract() != 0.0 || *v < 0.0) {
            return Err(format!("counts row {i} has non-count cells"));
        }
        total += values.iter().sum::<f64>();
    }

    let (pcols, prows) = parse_csv_grid(&read("confusion_percent.csv")?)?;
    if pcols != class_names || prows.len() != k {
        return Err("percent CSV shape mismatch".into());
    }
    for (i, (_, values)) in prows.iter().enumerate() {
        let sum: f64 = values.iter().sum();
        let support: f64 = rows[i].1.iter().sum();
        if support > 0.0 && (sum - 100.0).abs() > 0.05 * k as f64 + 1e-9 {
            return Err(format!("percent row {i} sums to {sum}"));
        }
        if values.iter().any(|v| !(0.0..=100.0).contains(v)) {
            return Err(format!("percent row {i} out of range"));
        }
    }

    let metrics: serde_json::Value =
        serde_json::from_str(&read("metrics.json")?).map_err(|e| format!("metrics.json: {e}"))?;
    if metrics["evaluation"] != "held-out" {
        return Err("evaluation field must be \"held-out\"".into());
    }
    if metrics["samples"].as_f64() != Some(total) {
        return Err(format!("samples {} != confusion total {total}", metrics["samples"]));
    }
    let acc = metrics["accuracy"].as_f64().ok_or("accuracy missing")?;
    if !(0.0..=1.0).contains(&acc) {
        return Err("accuracy out of range".into());
    }
    if !(metrics["macro_f1"].is_null()
        || metrics["macro_f1"].as_f64().is_some_and(|f| (0.0..=1.0).contains(&f)))
    {
        return Err("macro_f1 malformed".into());
    }
    let per_class = metrics["per_class"].as_array().ok_or("per_class missing")?;
    if per_class.len() != k {
        return Err(format!("per_class has {} entries", per_class.len()));
    }
    for (i, entry) in per_class.iter().enumerate() {
        for key in ["class", "name", "support", "precision", "recall", "f1"] {
            if entry.get(key).is_none() {
                return Err(format!("per_class[{i}] lacks {key}"));
            }
        }
        if entry["name"] != class_names[i].as_str() {
            return Err(format!("per_class[{i}] name mismatch"));
        }
    }
    let pairs = metrics["pairwise_confusion"].as_array().ok_or("pairwise_confusion missing")?;
    if pairs.len() != k * (k - 1) / 2 {
        return Err(format!("{} pairwise rates for {k} classes", pairs.len()));
    }
    for p in pairs {
        let (a, b) = (p["class_a"].as_u64(), p["class_b"].as_u64());
        if !matches!((a, b), (Some(a), Some(b)) if a < b && (b as usize) < k) {
            return Err(format!("bad pair entry {p}"));
        }
        if !(p["rate"].is_null() || p["rate"].as_f64().is_some_and(|r| (0.0..=1.0).contains(&r))) {
            return Err(format!("bad rate in {p}"));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Small binary SVM problems
// ---------------------------------------------------------------------------

pub struct BinaryProblem {
    pub kernel: &'static str,
    pub labels: Vec<f64>,
    pub gram: Vec<Vec<f64>>,
    /// Kernel rows of the probe points against the training points.
    pub probe_rows: Vec<Vec<f64>>,
}

type KernelFn<'a> = &'a dyn Fn(&[f64], &[f64]) -> f64;

fn kernel_matrix(f: KernelFn<'_>, rows: &[Vec<f64>], cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    rows.iter().map(|r| cols.iter().map(|c| f(r, c)).collect()).collect()
}

/// Every labeling with both classes present, for two random point sets of
/// each size 2..=6, under a 2-qubit quantum kernel and an RBF kernel.
pub fn small_binary_problems(seed: u64) -> Vec<BinaryProblem> {
    use qkernel::featuremap::FeatureMapSpec;
    use qkernel::kernel::{quantum_kernel_exact, rbf_kernel};

    let mut rng = rng(seed);
    let probes: Vec<Vec<f64>> = (0..10).map(|_| random_point(&mut rng, 2, 0.0, PI)).collect();
    let spec = FeatureMapSpec::default_spec(2).unwrap();
    let quantum = move |a: &[f64], b: &[f64]| quantum_kernel_exact(&spec, a, b).unwrap();
    let rbf = |a: &[f64], b: &[f64]| rbf_kernel(1.0, a, b).unwrap();
    let kernels: [(&'static str, KernelFn<'_>); 2] = [("quantum", &quantum), ("rbf", &rbf)];

    let mut problems = Vec::new();
    for n in 2..=6usize {
        for _ in 0..2 {
            let points: Vec<Vec<f64>> = (0..n).map(|_| random_point(&mut rng, 2, 0.0, PI)).collect();
            for (name, f) in kernels {
                let gram = kernel_matrix(f, &points, &points);
                let probe_rows = kernel_matrix(f, &probes, &points);
                for mask in 1..(1u32 << n) - 1 {
                    let labels = (0..n).map(|i| if mask >> i & 1 == 1 { 1.0 } else { -1.0 }).collect();
                    problems.push(BinaryProblem {
                        kernel: name,
                        labels,
                        gram: gram.clone(),
                        probe_rows: probe_rows.clone(),
                    });
                }
            }
        }
    }
    problems
}

#[derive(Debug, Default)]
pub struct SmoReport {
    pub problems: usize,
    pub worst_objective_gap: f64,
    pub worst_balance: f64,
    pub bound_violations: usize,
    pub prediction_mismatches: usize,
    pub failures: Vec<String>,
}

/// Solves every problem with the library SMO and compares against the
/// active-set oracle.
pub fn check_smo(problems: &[BinaryProblem], c: f64) -> SmoReport {
    use qkernel::kernel::{GramMatrix, KernelMode};
    use qkernel::svm::{solve_binary, SolverParams};

    let params = SolverParams { c, ..SolverParams::default() };
    let mut report = SmoReport::default();
    for (p_idx, p) in problems.iter().enumerate() {
        report.problems += 1;
        let n = p.labels.len();
        let flat: Vec<f64> = p.gram.iter().flatten().copied().collect();
        let gram = GramMatrix::from_values(n, flat, KernelMode::Exact, "test").unwrap();
        let model = match solve_binary(&gram, &p.labels, &params) {
            Ok(m) => m,
            Err(e) => {
                report.failures.push(format!("problem {p_idx} ({}): {e}", p.kernel));
                continue;
            }
        };
        let alpha = model.alphas();
        if alpha.iter().any(|&a| !(0.0..=c).contains(&a)) {
            report.bound_violations += 1;
        }
        let balance: f64 = alpha.iter().zip(&p.labels).map(|(a, y)| a * y).sum();
        report.worst_balance = report.worst_balance.max(balance.abs());

        let oracle = active_set_optimum(&p.gram, &p.labels, c);
        let gap = (dual_objective(&p.gram, &p.labels, &alpha) - oracle.objective).abs();
        report.worst_objective_gap = report.worst_objective_gap.max(gap);

        for row in &p.probe_rows {
            let ours = model.decision_value(row).unwrap() > 0.0;
            let theirs = oracle.decision(&p.labels, row) > 0.0;
            if ours != theirs {
                report.prediction_mismatches += 1;
                report.failures.push(format!(
                    "problem {p_idx} ({}): probe decision {} vs oracle {}",
                    p.kernel,
                    model.decision_value(row).unwrap(),
                    oracle.decision(&p.labels, row)
                ));
            }
        }
    }
    report
}
