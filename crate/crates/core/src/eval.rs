//! Confusion matrices and per-class scores.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Counts with rows = true class, columns = predicted class.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    counts: Vec<Vec<u64>>,
    class_names: Vec<String>,
}

impl ConfusionMatrix {
    pub fn from_labels(truth: &[usize], predicted: &[usize], class_names: &[String]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(Error::arg(format!(
                "{} true labels but {} predictions",
                truth.len(),
                predicted.len()
            )));
        }
        let k = class_names.len();
        let mut counts = vec![vec![0u64; k]; k];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= k || p >= k {
                return Err(Error::arg(format!("label {} exceeds {k} classes", t.max(p))));
            }
            counts[t][p] += 1;
        }
        Ok(Self { counts, class_names: class_names.to_vec() })
    }

    /// Same as [`ConfusionMatrix::from_labels`] with classes named by index.
    pub fn confusion(truth: &[usize], predicted: &[usize], num_classes: usize) -> Result<Self> {
        let names: Vec<String> = (0..num_classes).map(|c| c.to_string()).collect();
        Self::from_labels(truth, predicted, &names)
    }

    pub fn counts(&self) -> &[Vec<u64>] {
        &self.counts
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn num_classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn trace(&self) -> u64 {
        (0..self.num_classes()).map(|c| self.counts[c][c]).sum()
    }

    pub fn row_sum(&self, c: usize) -> u64 {
        self.counts[c].iter().sum()
    }

    pub fn column_sum(&self, c: usize) -> u64 {
        self.counts.iter().map(|r| r[c]).sum()
    }

    /// Row-normalized percentages rounded half-up to one decimal; empty rows
    /// are all zero.
    pub fn row_percentages(&self) -> Vec<Vec<f64>> {
        self.counts
            .iter()
            .map(|row| {
                let total: u64 = row.iter().sum();
                row.iter()
                    .map(
                        |&n| {
                            if total == 0 {
                                0.0
                            } else {
                                round_half_up_tenth(100.0 * n as f64 / total as f64)
                            }
                        },
                    )
                    .collect()
            })
            .collect()
    }

    /// `(counts[a][b] + counts[b][a]) / (row_sum(a) + row_sum(b))`.
    pub fn pairwise_confusion_rate(&self, a: usize, b: usize) -> Result<f64> {
        let k = self.num_classes();
        if a == b || a >= k || b >= k {
            return Err(Error::arg(format!("invalid class pair ({a}, {b}) for {k} classes")));
        }
        let denom = self.row_sum(a) + self.row_sum(b);
        if denom == 0 {
            return Err(Error::arg(format!("classes {a} and {b} have no samples")));
        }
        Ok((self.counts[a][b] + self.counts[b][a]) as f64 / denom as f64)
    }

    fn to_csv_with<T: std::fmt::Display>(&self, cells: &[Vec<T>]) -> String {
        let mut out = String::from("true\\predicted");
        for name in &self.class_names {
            let _ = write!(out, ",{name}");
        }
        out.push('\n');
        for (name, row) in self.class_names.iter().zip(cells) {
            out.push_str(name);
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn counts_csv(&self) -> String {
        self.to_csv_with(&self.counts)
    }

    pub fn percent_csv(&self) -> String {
        let pct: Vec<Vec<String>> =
            self.row_percentages().iter().map(|r| r.iter().map(|v| format!("{v:.1}")).collect()).collect();
        self.to_csv_with(&pct)
    }
}

fn round_half_up_tenth(x: f64) -> f64 {
    // nudge before flooring so values like 12.45 that print exactly are not
    // pulled down by binary representation error
    ((x * 10.0) + 0.5 + 1e-9).floor() / 10.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub class: usize,
    pub name: String,
    /// True samples of this class.
    pub support: u64,
    /// `None` when nothing was predicted as this class.
    pub precision: Option<f64>,
    /// `None` when the class has no true samples.
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    /// Names of the undefined statistics, e.g. `["precision"]`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRate {
    pub class_a: usize,
    pub class_b: usize,
    pub rate: Option<f64>,
}

/// Metrics document written next to the confusion CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    /// Always `"held-out"`: scores are measured on data the model did not see.
    pub evaluation: String,
    pub samples: u64,
    pub accuracy: f64,
    /// Unweighted mean F1 over classes whose F1 is defined.
    pub macro_f1: Option<f64>,
    pub per_class: Vec<ClassMetrics>,
    pub pairwise_confusion: Vec<PairRate>,
}

pub fn metrics(cm: &ConfusionMatrix) -> Result<Metrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::arg("cannot score an empty confusion matrix"));
    }
    let k = cm.num_classes();
    let per_class: Vec<ClassMetrics> = (0..k)
        .map(|c| {
            let tp = cm.counts[c][c] as f64;
            let col = cm.column_sum(c);
            let row = cm.row_sum(c);
            let precision = (col > 0).then(|| tp / col as f64);
            let recall = (row > 0).then(|| tp / row as f64);
            let f1 = match (precision, recall) {
                (Some(p), Some(r)) if p + r > 0.0 => Some(2.0 * p * r / (p + r)),
                (Some(_), Some(_)) => Some(0.0),
                _ => None,
            };
            let mut undefined = Vec::new();
            if precision.is_none() {
                undefined.push("precision".to_string());
            }
            if recall.is_none() {
                undefined.push("recall".to_string());
            }
            if f1.is_none() {
                undefined.push("f1".to_string());
            }
            ClassMetrics {
                class: c,
                name: cm.class_names[c].clone(),
                support: row,
                precision,
                recall,
                f1,
                undefined,
            }
        })
        .collect();

    let defined: Vec<f64> = per_class.iter().filter_map(|m| m.f1).collect();
    let macro_f1 = (!defined.is_empty()).then(|| defined.iter().sum::<f64>() / defined.len() as f64);

    let mut pairwise_confusion = Vec::new();
    for a in 0..k {
        for b in a + 1..k {
            pairwise_confusion.push(PairRate {
                class_a: a,
                class_b: b,
                rate: cm.pairwise_confusion_rate(a, b).ok(),
            });
        }
    }

    Ok(Metrics {
        evaluation: "held-out".into(),
        samples: total,
        accuracy: cm.trace() as f64 / total as f64,
        macro_f1,
        per_class,
        pairwise_confusion,
    })
}
