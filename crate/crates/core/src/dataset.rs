//! Labeled feature tables: synthetic generators, CSV IO and stratified splits.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::featuremap::FeatureMapSpec;
use crate::statevec::QuantumState;

/// Dementia staging by CDR-SB score, label `k` is `STAGE_NAMES[k]`:
/// 0 (0), questionable (0.5–2.5), very mild (3–4), mild (4.5–9),
/// moderate (9.5–15.5), severe (16–18).
pub const STAGE_NAMES: [&str; 6] = ["normal", "questionable", "very-mild", "mild", "moderate", "severe"];

pub const GAUSSIAN_GENERATOR: &str = "gaussian-stages";
pub const QUANTUM_GENERATOR: &str = "quantum-anchors";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum DataSource {
    Synthetic { seed: u64, generator_id: String },
    Csv { path: PathBuf, checksum: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Vec<Vec<f64>>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    source: DataSource,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        source: DataSource,
    ) -> Result<Self> {
        if features.len() != labels.len() {
            return Err(Error::arg(format!("{} feature rows but {} labels", features.len(), labels.len())));
        }
        if class_names.len() < 2 {
            return Err(Error::arg("a dataset needs at least two classes"));
        }
        if let Some(first) = features.first() {
            if first.is_empty() || features.iter().any(|r| r.len() != first.len()) {
                return Err(Error::arg("feature rows must share a non-zero dimension"));
            }
        }
        if features.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::arg("dataset contains non-finite features"));
        }
        if let Some(&bad) = labels.iter().find(|&&l| l >= class_names.len()) {
            return Err(Error::arg(format!("label {bad} outside 0..{}", class_names.len())));
        }
        Ok(Self { features, labels, class_names, source })
    }

    pub fn features(&self) -> &[Vec<f64>] {
        &self.features
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.class_names.len()
    }

    pub fn source(&self) -> &DataSource {
        &self.source
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.features.first().map_or(0, Vec::len)
    }

    fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            features: idx.iter().map(|&i| self.features[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            class_names: self.class_names.clone(),
            source: self.source.clone(),
        }
    }

    /// CSV text: header `f0,…,f{D-1},label`, one sample per line.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for k in 0..self.dim() {
            let _ = write!(out, "f{k},");
        }
        out.push_str("label\n");
        for (row, label) in self.features.iter().zip(&self.labels) {
            for v in row {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(out, "{label}");
        }
        out
    }

    /// SHA-256 of the CSV rendering.
    pub fn checksum(&self) -> String {
        hex::encode(Sha256::digest(self.to_csv_string().as_bytes()))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv_string()).map_err(|e| Error::io(path, e))
    }

    /// Reads a CSV table. Without `class_names` the class count is inferred
    /// from the largest label and classes are named `class0`, `class1`, ….
    pub fn read_csv(path: impl AsRef<Path>, class_names: Option<Vec<String>>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        let checksum = hex::encode(Sha256::digest(&bytes));
        let text = String::from_utf8(bytes).map_err(|_| parse_err(path, 1, "file is not valid UTF-8"))?;
        let (features, labels) = parse_csv(path, &text, class_names.as_ref().map(Vec::len))?;
        let class_names = class_names.unwrap_or_else(|| {
            let k = labels.iter().max().map_or(2, |&m| (m + 1).max(2));
            (0..k).map(|c| format!("class{c}")).collect()
        });
        Dataset::new(features, labels, class_names, DataSource::Csv { path: path.to_path_buf(), checksum })
    }

    /// Stratified split. Per class the test count is the floor or ceiling of
    /// `test_fraction · n_c`, chosen so the overall test size is as close as
    /// possible to `test_fraction · m`. Singleton classes stay in train.
    pub fn split(&self, test_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
        if !(test_fraction > 0.0 && test_fraction < 1.0) {
            return Err(Error::arg(format!("test fraction must be in (0, 1), got {test_fraction}")));
        }
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); self.num_classes()];
        for (i, &l) in self.labels.iter().enumerate() {
            by_class[l].push(i);
        }
        let eligible: Vec<usize> = (0..by_class.len()).filter(|&c| by_class[c].len() >= 2).collect();
        for (c, members) in by_class.iter().enumerate() {
            if members.len() == 1 {
                log::warn!(
                    "class {c} ({}) has a single sample; keeping it in the training split",
                    self.class_names[c]
                );
            }
        }

        let mut take = vec![0usize; by_class.len()];
        let eligible_total: usize = eligible.iter().map(|&c| by_class[c].len()).sum();
        let target = (test_fraction * eligible_total as f64).round() as usize;
        let mut remainders = Vec::new();
        for &c in &eligible {
            let quota = test_fraction * by_class[c].len() as f64;
            take[c] = quota.floor() as usize;
            remainders.push((quota - quota.floor(), c));
        }
        let assigned: usize = take.iter().sum();
        remainders.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
        for &(frac, c) in remainders.iter().take(target.saturating_sub(assigned)) {
            if frac > 0.0 {
                take[c] += 1;
            }
        }
        for &c in &eligible {
            take[c] = take[c].min(by_class[c].len() - 1);
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut train_idx = Vec::new();
        let mut test_idx = Vec::new();
        for (c, members) in by_class.iter().enumerate() {
            let mut shuffled = members.clone();
            shuffled.shuffle(&mut rng);
            test_idx.extend_from_slice(&shuffled[..take[c]]);
            train_idx.extend_from_slice(&shuffled[take[c]..]);
        }
        train_idx.sort_unstable();
        test_idx.sort_unstable();
        Ok((self.subset(&train_idx), self.subset(&test_idx)))
    }
}

fn parse_err(path: &Path, line: usize, message: impl Into<String>) -> Error {
    Error::Parse { path: path.to_path_buf(), line, message: message.into() }
}

fn parse_csv(path: &Path, text: &str, num_classes: Option<usize>) -> Result<(Vec<Vec<f64>>, Vec<usize>)> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines.next().ok_or_else(|| parse_err(path, 1, "missing header row"))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    if columns.last() != Some(&"label") {
        return Err(parse_err(path, 1, "missing label column (last header field must be 'label')"));
    }
    if columns.len() < 2 {
        return Err(parse_err(path, 1, "no feature columns"));
    }
    let width = columns.len();

    let mut features = Vec::new();
    let mut labels = Vec::new();
    for (line_no, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let cells: Vec<&str> = line.split(',').map(str::trim).collect();
        if cells.len() != width {
            return Err(parse_err(path, line_no, format!("expected {width} columns, found {}", cells.len())));
        }
        let row = cells[..width - 1]
            .iter()
            .enumerate()
            .map(|(k, cell)| match cell.parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                Ok(_) => Err(parse_err(path, line_no, format!("non-finite value in column {k}"))),
                Err(_) => Err(parse_err(path, line_no, format!("non-numeric value '{cell}' in column {k}"))),
            })
            .collect::<Result<Vec<f64>>>()?;
        let raw_label = cells[width - 1];
        let label: usize = raw_label
            .parse()
            .map_err(|_| parse_err(path, line_no, format!("invalid label '{raw_label}'")))?;
        if let Some(k) = num_classes {
            if label >= k {
                return Err(parse_err(
                    path,
                    line_no,
                    format!("label {label} outside 0..{k} declared classes"),
                ));
            }
        }
        features.push(row);
        labels.push(label);
    }
    if labels.is_empty() {
        return Err(parse_err(path, 1, "empty dataset"));
    }
    Ok((features, labels))
}

/// Vertices of a regular 5-simplex centred at the origin with unit norm.
fn simplex_vertices() -> Vec<[f64; 5]> {
    // Orthonormal basis of the sum-zero hyperplane of R^6, by Gram–Schmidt.
    let mut basis: Vec<[f64; 6]> = Vec::new();
    for i in 0..5 {
        let mut v = [-1.0 / 6.0; 6];
        v[i] += 1.0;
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= dot * bk;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        basis.push(v.map(|x| x / norm));
    }
    (0..6)
        .map(|i| {
            let mut p = [-1.0 / 6.0; 6];
            p[i] += 1.0;
            let mut coords = [0.0; 5];
            for (c, b) in coords.iter_mut().zip(&basis) {
                *c = p.iter().zip(b).map(|(x, y)| x * y).sum();
            }
            let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
            coords.map(|x| x / norm)
        })
        .collect()
}

/// Six unit-covariance Gaussian clusters, one per stage, with means at
/// `separation` times the unit-norm regular simplex vertices (first five axes).
pub fn generate_gaussian_stages(seed: u64, per_class: usize, dim: usize, separation: f64) -> Result<Dataset> {
    if per_class == 0 {
        return Err(Error::config("per-class count must be at least 1"));
    }
    if dim < 5 {
        return Err(Error::config(format!(
            "gaussian stage generator needs dim >= 5 to place six simplex vertices, got {dim}"
        )));
    }
    if !(separation.is_finite() && separation >= 0.0) {
        return Err(Error::config(format!("separation must be >= 0, got {separation}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vertices = simplex_vertices();
    let mut features = Vec::with_capacity(6 * per_class);
    let mut labels = Vec::with_capacity(6 * per_class);
    for (class, vertex) in vertices.iter().enumerate() {
        for _ in 0..per_class {
            let row: Vec<f64> = (0..dim)
                .map(|k| {
                    let mean = if k < 5 { separation * vertex[k] } else { 0.0 };
                    mean + rng.sample::<f64, _>(StandardNormal)
                })
                .collect();
            features.push(row);
            labels.push(class);
        }
    }
    Dataset::new(
        features,
        labels,
        STAGE_NAMES.iter().map(|s| s.to_string()).collect(),
        DataSource::Synthetic { seed, generator_id: GAUSSIAN_GENERATOR.into() },
    )
}

/// Labels points by which of two anchor states they overlap more with.
#[derive(Debug, Clone)]
pub struct AnchorLabeler {
    spec: FeatureMapSpec,
    plus: QuantumState,
    minus: QuantumState,
    margin: f64,
}

impl AnchorLabeler {
    pub fn new(spec: FeatureMapSpec, anchor_plus: &[f64], anchor_minus: &[f64], margin: f64) -> Result<Self> {
        if !(margin.is_finite() && margin > 0.0) {
            return Err(Error::config(format!("margin must be positive, got {margin}")));
        }
        let plus = spec.encode(anchor_plus)?;
        let minus = spec.encode(anchor_minus)?;
        Ok(Self { spec, plus, minus, margin })
    }

    /// `K(x, a⁺) − K(x, a⁻)`.
    pub fn score(&self, x: &[f64]) -> Result<f64> {
        let s = self.spec.encode(x)?;
        Ok(self.plus.fidelity(&s)? - self.minus.fidelity(&s)?)
    }

    /// 1 for the `a⁺` side, 0 for `a⁻`, `None` inside the margin.
    pub fn label(&self, x: &[f64]) -> Result<Option<usize>> {
        let score = self.score(x)?;
        Ok(if score.abs() < self.margin {
            None
        } else if score > 0.0 {
            Some(1)
        } else {
            Some(0)
        })
    }
}

fn uniform_point(rng: &mut ChaCha8Rng, dim: usize, range: [f64; 2]) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(range[0]..range[1])).collect()
}

/// Binary data labeled by a fixed decision rule in the quantum feature space:
/// `sign(K(x, a⁺) − K(x, a⁻))` for two random anchors, rejecting points within
/// `margin` of the boundary.
pub fn generate_quantum_labeled(
    seed: u64,
    count: usize,
    spec: &FeatureMapSpec,
    margin: f64,
) -> Result<Dataset> {
    if count < 4 {
        return Err(Error::config(format!("quantum-labeled generator needs count >= 4, got {count}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = spec.num_qubits();
    let range = spec.feature_range();
    let anchor_plus = uniform_point(&mut rng, dim, range);
    let anchor_minus = uniform_point(&mut rng, dim, range);
    let labeler = AnchorLabeler::new(spec.clone(), &anchor_plus, &anchor_minus, margin)?;

    let budget = count.saturating_mul(100);
    let mut features = Vec::with_capacity(count);
    let mut labels = Vec::with_capacity(count);
    let mut attempts = 0;
    while features.len() < count {
        if attempts >= budget {
            return Err(Error::config(format!(
                "rejected over 99% of {attempts} candidates at margin {margin}; try a smaller margin"
            )));
        }
        attempts += 1;
        let x = uniform_point(&mut rng, dim, range);
        if let Some(label) = labeler.label(&x)? {
            features.push(x);
            labels.push(label);
        }
    }
    Dataset::new(
        features,
        labels,
        vec!["anchor-minus".into(), "anchor-plus".into()],
        DataSource::Synthetic { seed, generator_id: QUANTUM_GENERATOR.into() },
    )
}
