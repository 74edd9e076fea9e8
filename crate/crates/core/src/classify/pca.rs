use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::FeatureVector;
use crate::error::{Error, Result};

/// Principal axes of a set of feature vectors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `d` orthonormal rows, by descending explained variance.
    pub components: Vec<Vec<f64>>,
    pub eigenvalues: Vec<f64>,
}

impl PcaModel {
    pub fn input_dim(&self) -> usize {
        self.mean.len()
    }

    pub fn output_dim(&self) -> usize {
        self.components.len()
    }
}

/// Fits the top-`d` principal axes of the sample covariance (`n - 1`
/// denominator).
///
/// Each axis is flipped so its largest-magnitude entry is positive (first
/// such entry on ties), making the basis reproducible.
pub fn pca_fit(vectors: &[FeatureVector], d: usize) -> Result<PcaModel> {
    let n = vectors.len();
    let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
    if d == 0 || d > dim {
        return Err(Error::Config(format!(
            "cannot keep {d} components of {dim}-dimensional data"
        )));
    }
    if n < d + 1 {
        return Err(Error::Config(format!(
            "PCA with {d} components needs at least {} samples, got {n}",
            d + 1
        )));
    }
    if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
        return Err(Error::dims(format!("{dim}-dimensional vectors"), v.len()));
    }

    let mut mean = vec![0.0; dim];
    for v in vectors {
        for (m, x) in mean.iter_mut().zip(&v.0) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let centered = DMatrix::from_fn(n, dim, |i, j| vectors[i].0[j] - mean[j]);
    let cov = (centered.transpose() * &centered) / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);

    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));

    let mut components = Vec::with_capacity(d);
    let mut eigenvalues = Vec::with_capacity(d);
    for &k in order.iter().take(d) {
        let mut axis: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
        let pivot = axis
            .iter()
            .enumerate()
            .fold(0, |best, (i, v)| if v.abs() > axis[best].abs() { i } else { best });
        if axis[pivot] < 0.0 {
            axis.iter_mut().for_each(|v| *v = -*v);
        }
        components.push(axis);
        eigenvalues.push(eig.eigenvalues[k].max(0.0));
    }
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
    })
}

/// `components * (v - mean)`.
pub fn pca_project(model: &PcaModel, v: &FeatureVector) -> Result<Vec<f64>> {
    if v.len() != model.input_dim() {
        return Err(Error::dims(
            format!("{}-dimensional vector", model.input_dim()),
            v.len(),
        ));
    }
    Ok(model
        .components
        .iter()
        .map(|axis| {
            axis.iter()
                .zip(&v.0)
                .zip(&model.mean)
                .map(|((a, x), m)| a * (x - m))
                .sum()
        })
        .collect())
}
