//! End-to-end fit and evaluation: PCA → rescale → kernel → one-vs-one SVM.

use serde::{Deserialize, Serialize};

use crate::config::{KernelKind, RunConfig};
use crate::dataset::Dataset;
use crate::dimred::PcaModel;
use crate::error::{Error, Result};
use crate::eval::{metrics, ConfusionMatrix, Metrics};
use crate::featuremap::FeatureBounds;
use crate::kernel::{default_rbf_gamma, gram, gram_cross, KernelMode, KernelSpec};
use crate::svm::{MultiClassSvm, Prediction};

pub const FORMAT_VERSION: u32 = 1;

/// Maps raw feature rows to encoder inputs.
///
/// The leading `input_dim − demographics` columns go through PCA (when
/// fitted); trailing demographic columns are appended unchanged, and the
/// joint vector is min/max rescaled into `feature_range`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Preprocessor {
    pub input_dim: usize,
    pub demographics: usize,
    pub pca: Option<PcaModel>,
    pub bounds: Option<FeatureBounds>,
    pub feature_range: [f64; 2],
}

impl Preprocessor {
    pub fn fit(rows: &[Vec<f64>], cfg: &RunConfig) -> Result<(Self, Vec<Vec<f64>>)> {
        let input_dim = rows.first().map(Vec::len).ok_or_else(|| Error::arg("no training rows"))?;
        cfg.encoded_dim(input_dim)?;
        let split = input_dim - cfg.demographics;
        let pca = if cfg.pca_dim > 0 {
            let imaging: Vec<Vec<f64>> = rows.iter().map(|r| r[..split].to_vec()).collect();
            Some(PcaModel::fit(&imaging, cfg.pca_dim)?)
        } else {
            None
        };
        let mut pre = Preprocessor {
            input_dim,
            demographics: cfg.demographics,
            pca,
            bounds: None,
            feature_range: cfg.feature_range,
        };
        let reduced = rows.iter().map(|r| pre.reduce(r)).collect::<Result<Vec<_>>>()?;
        if cfg.rescale {
            pre.bounds = Some(FeatureBounds::from_rows(&reduced)?);
        }
        let encoded = reduced.iter().map(|r| pre.rescale(r)).collect::<Result<Vec<_>>>()?;
        Ok((pre, encoded))
    }

    fn reduce(&self, row: &[f64]) -> Result<Vec<f64>> {
        let split = self.input_dim - self.demographics;
        let mut out = match &self.pca {
            Some(p) => p.transform(&row[..split])?,
            None => row[..split].to_vec(),
        };
        out.extend_from_slice(&row[split..]);
        Ok(out)
    }

    fn rescale(&self, reduced: &[f64]) -> Result<Vec<f64>> {
        match &self.bounds {
            Some(b) => b.rescale(reduced, self.feature_range),
            None => Ok(reduced.to_vec()),
        }
    }

    pub fn apply(&self, row: &[f64]) -> Result<Vec<f64>> {
        if row.len() != self.input_dim {
            return Err(Error::arg(format!(
                "feature dimension mismatch: model expects {} columns, data has {}",
                self.input_dim,
                row.len()
            )));
        }
        self.rescale(&self.reduce(row)?)
    }

    pub fn apply_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.apply(r)).collect()
    }
}

/// Everything needed to classify new rows, persisted as one JSON document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelBundle {
    pub format_version: u32,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub created_at: u64,
    pub class_names: Vec<String>,
    pub preprocessor: Preprocessor,
    pub kernel: KernelSpec,
    pub mode: KernelMode,
    pub svm: MultiClassSvm,
    /// Encoder inputs of the training rows, needed for cross kernels.
    pub train_features: Vec<Vec<f64>>,
    pub train_labels: Vec<usize>,
}

impl ModelBundle {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::config("bundle has no format_version"))?;
        if version > u64::from(FORMAT_VERSION) {
            return Err(Error::config(format!(
                "bundle format_version {version} is newer than supported version {FORMAT_VERSION}"
            )));
        }
        Ok(serde_json::from_value(value)?)
    }
}

fn now_secs() -> u64 {
    std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs())
}

pub fn fit(train: &Dataset, cfg: &RunConfig) -> Result<ModelBundle> {
    cfg.validate().map_err(|e| e.in_stage("config"))?;
    if train.is_empty() {
        return Err(Error::arg("training set is empty").in_stage("preprocess"));
    }
    let (preprocessor, features) =
        Preprocessor::fit(train.features(), cfg).map_err(|e| e.in_stage("preprocess"))?;

    let kernel = match cfg.kernel {
        KernelKind::Quantum => {
            KernelSpec::quantum(cfg.feature_map(features[0].len()).map_err(|e| e.in_stage("kernel"))?)
        }
        KernelKind::Rbf => {
            let gamma = match cfg.gamma {
                Some(g) => g,
                None => default_rbf_gamma(&features).map_err(|e| e.in_stage("kernel"))?,
            };
            KernelSpec::rbf(gamma).map_err(|e| e.in_stage("kernel"))?
        }
    };
    let mode = cfg.kernel_mode();
    let gram = gram(&kernel, &features, mode).map_err(|e| e.in_stage("kernel"))?;
    let svm = MultiClassSvm::fit(&gram, train.labels(), &cfg.solver()).map_err(|e| e.in_stage("svm"))?;

    Ok(ModelBundle {
        format_version: FORMAT_VERSION,
        created_at: now_secs(),
        class_names: train.class_names().to_vec(),
        preprocessor,
        kernel,
        mode,
        svm,
        train_features: features,
        train_labels: train.labels().to_vec(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub predictions: Vec<Prediction>,
    pub confusion: ConfusionMatrix,
    pub metrics: Metrics,
}

impl Evaluation {
    pub fn accuracy(&self) -> f64 {
        self.metrics.accuracy
    }
}

pub fn predict(bundle: &ModelBundle, rows: &[Vec<f64>]) -> Result<Vec<Prediction>> {
    let features = bundle.preprocessor.apply_rows(rows).map_err(|e| e.in_stage("preprocess"))?;
    let cross = gram_cross(&bundle.kernel, &bundle.train_features, &features, bundle.mode)
        .map_err(|e| e.in_stage("kernel"))?;
    bundle.svm.predict(&cross).map_err(|e| e.in_stage("predict"))
}

pub fn evaluate(bundle: &ModelBundle, test: &Dataset) -> Result<Evaluation> {
    if test.is_empty() {
        return Err(Error::arg("test set is empty").in_stage("evaluate"));
    }
    let predictions = predict(bundle, test.features())?;
    let predicted: Vec<usize> = predictions.iter().map(|p| p.label).collect();
    let confusion = ConfusionMatrix::from_labels(test.labels(), &predicted, &bundle.class_names)
        .map_err(|e| e.in_stage("evaluate"))?;
    let metrics = metrics(&confusion).map_err(|e| e.in_stage("evaluate"))?;
    Ok(Evaluation { predictions, confusion, metrics })
}
