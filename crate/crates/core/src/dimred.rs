//! Principal component analysis via SVD of the centered data matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fitted projection onto the leading principal directions.
///
/// Each component is sign-normalized so that its largest-magnitude entry is
/// positive (lowest index wins ties), which makes projections reproducible
/// across SVD backends and row orderings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    input_dim: usize,
    output_dim: usize,
    mean: Vec<f64>,
    /// `output_dim` rows of length `input_dim`, orthonormal.
    components: Vec<Vec<f64>>,
    /// Sample variance (denominator `m − 1`) along each component.
    explained_variance: Vec<f64>,
    /// Total sample variance of the training data.
    total_variance: f64,
}

impl PcaModel {
    pub fn fit(rows: &[Vec<f64>], output_dim: usize) -> Result<Self> {
        let m = rows.len();
        if m < 2 {
            return Err(Error::arg(format!("PCA needs at least 2 rows, got {m}")));
        }
        let input_dim = rows[0].len();
        if input_dim == 0 || rows.iter().any(|r| r.len() != input_dim) {
            return Err(Error::arg("PCA rows must share a non-zero dimension"));
        }
        if rows.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::arg("PCA input contains non-finite values"));
        }
        let max_dim = (m - 1).min(input_dim);
        if output_dim == 0 || output_dim > max_dim {
            return Err(Error::config(format!(
                "PCA output dimension {output_dim} outside 1..={max_dim} for {m} rows of dimension {input_dim}"
            )));
        }

        let mut mean = vec![0.0; input_dim];
        for r in rows {
            for (acc, v) in mean.iter_mut().zip(r) {
                *acc += v;
            }
        }
        mean.iter_mut().for_each(|v| *v /= m as f64);

        let centered = DMatrix::from_fn(m, input_dim, |i, j| rows[i][j] - mean[j]);
        let total_sq = centered.norm_squared();
        if total_sq == 0.0 {
            return Err(Error::Degenerate("all rows are identical (zero variance)".into()));
        }

        let svd = centered.svd(false, true);
        let v_t =
            svd.v_t.ok_or_else(|| Error::Degenerate("SVD did not return right singular vectors".into()))?;
        let sv = svd.singular_values;

        let mut order: Vec<usize> = (0..sv.len()).collect();
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]).then(a.cmp(&b)));

        let denom = (m - 1) as f64;
        let mut components = Vec::with_capacity(output_dim);
        let mut explained_variance = Vec::with_capacity(output_dim);
        for &k in order.iter().take(output_dim) {
            let mut c: Vec<f64> = v_t.row(k).iter().copied().collect();
            let mut lead = 0;
            for (idx, v) in c.iter().enumerate() {
                if v.abs() > c[lead].abs() {
                    lead = idx;
                }
            }
            if c[lead] < 0.0 {
                c.iter_mut().for_each(|v| *v = -*v);
            }
            components.push(c);
            explained_variance.push(sv[k] * sv[k] / denom);
        }

        Ok(Self {
            input_dim,
            output_dim,
            mean,
            components,
            explained_variance,
            total_variance: total_sq / denom,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn explained_variance(&self) -> &[f64] {
        &self.explained_variance
    }

    pub fn total_variance(&self) -> f64 {
        self.total_variance
    }

    /// `components · (x − mean)`.
    pub fn transform(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim {
            return Err(Error::arg(format!("PCA expects {} inputs, got {}", self.input_dim, x.len())));
        }
        Ok(self
            .components
            .iter()
            .map(|c| c.iter().zip(x.iter().zip(&self.mean)).map(|(w, (v, mu))| w * (v - mu)).sum())
            .collect())
    }

    pub fn transform_rows(&self, rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
        rows.iter().map(|r| self.transform(r)).collect()
    }

    /// Maps projected coordinates back to the input space.
    pub fn inverse_transform(&self, z: &[f64]) -> Result<Vec<f64>> {
        if z.len() != self.output_dim {
            return Err(Error::arg(format!(
                "PCA inverse expects {} coordinates, got {}",
                self.output_dim,
                z.len()
            )));
        }
        let mut x = self.mean.clone();
        for (coef, c) in z.iter().zip(&self.components) {
            for (xi, ci) in x.iter_mut().zip(c) {
                *xi += coef * ci;
            }
        }
        Ok(x)
    }
}
