use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 0.99 quantile of the chi-squared distribution with 3 degrees of freedom.
pub const DEFAULT_CHI2_THRESHOLD: f64 = 11.345;

/// Smallest ridge added to a class covariance.
const MIN_RIDGE: f64 = 1e-12;

/// One class-conditional multivariate normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GaussianRepr", into = "GaussianRepr")]
pub struct ClassGaussian {
    label: String,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
    inverse: Vec<Vec<f64>>,
    log_det: f64,
}

#[derive(Serialize, Deserialize)]
struct GaussianRepr {
    label: String,
    mean: Vec<f64>,
    covariance: Vec<Vec<f64>>,
}

impl TryFrom<GaussianRepr> for ClassGaussian {
    type Error = Error;

    fn try_from(r: GaussianRepr) -> Result<Self> {
        ClassGaussian::new(r.label, r.mean, r.covariance)
    }
}

impl From<ClassGaussian> for GaussianRepr {
    fn from(g: ClassGaussian) -> Self {
        GaussianRepr {
            label: g.label,
            mean: g.mean,
            covariance: g.covariance,
        }
    }
}

impl ClassGaussian {
    /// Builds a class model, caching the inverse and log-determinant.
    /// Fails unless `covariance` is symmetric positive definite.
    pub fn new(label: String, mean: Vec<f64>, covariance: Vec<Vec<f64>>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || covariance.len() != d || covariance.iter().any(|r| r.len() != d) {
            return Err(Error::dims(format!("{d}x{d} covariance"), "ragged matrix"));
        }
        let sigma = DMatrix::from_fn(d, d, |i, j| covariance[i][j]);
        if (0..d).any(|i| (0..i).any(|j| (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12)) {
            return Err(Error::Config(format!("covariance of {label:?} is not symmetric")));
        }
        let chol = sigma
            .cholesky()
            .ok_or_else(|| Error::Config(format!("covariance of {label:?} is not positive definite")))?;
        let log_det = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let inv = chol.inverse();
        let inverse = (0..d)
            .map(|i| (0..d).map(|j| 0.5 * (inv[(i, j)] + inv[(j, i)])).collect())
            .collect();
        Ok(Self {
            label,
            mean,
            covariance,
            inverse,
            log_det,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &[Vec<f64>] {
        &self.covariance
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// Squared Mahalanobis distance of `x` from the class mean.
    pub fn mahalanobis2(&self, x: &[f64]) -> f64 {
        let delta: Vec<f64> = x.iter().zip(&self.mean).map(|(a, m)| a - m).collect();
        let mut acc = 0.0;
        for (i, row) in self.inverse.iter().enumerate() {
            let mut inner = 0.0;
            for (j, v) in row.iter().enumerate() {
                inner += v * delta[j];
            }
            acc += delta[i] * inner;
        }
        acc
    }

    pub fn log_likelihood(&self, x: &[f64]) -> f64 {
        let d = self.dim() as f64;
        -0.5 * (self.mahalanobis2(x) + self.log_det + d * (2.0 * std::f64::consts::PI).ln())
    }
}

/// Classification outcome for one embedded sample.
#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Accept {
        class: usize,
        label: String,
        log_likelihood: f64,
        mahalanobis2: f64,
    },
    /// The most likely class was still outside its acceptance ellipsoid.
    Reject {
        nearest: usize,
        log_likelihood: f64,
        mahalanobis2: f64,
    },
}

impl Verdict {
    pub fn label(&self) -> Option<&str> {
        match self {
            Verdict::Accept { label, .. } => Some(label),
            Verdict::Reject { .. } => None,
        }
    }

    pub fn is_reject(&self) -> bool {
        matches!(self, Verdict::Reject { .. })
    }

    pub fn mahalanobis2(&self) -> f64 {
        match self {
            Verdict::Accept { mahalanobis2, .. } | Verdict::Reject { mahalanobis2, .. } => {
                *mahalanobis2
            }
        }
    }
}

/// Fits one Gaussian per class with a ridge of `1e-6 * trace / d`.
pub fn gaussian_fit(classes: &[(String, Vec<Vec<f64>>)]) -> Result<Vec<ClassGaussian>> {
    classes
        .iter()
        .map(|(label, points)| {
            let d = points.first().map(Vec::len).unwrap_or(0);
            if d == 0 || points.len() < d + 1 {
                return Err(Error::Config(format!(
                    "class {label:?} has {} samples; a {d}-dimensional Gaussian needs at least {}",
                    points.len(),
                    d + 1
                )));
            }
            if points.iter().any(|p| p.len() != d) {
                return Err(Error::dims(format!("{d}-dimensional points"), "mixed dimensions"));
            }
            let n = points.len() as f64;
            let mean: Vec<f64> = (0..d)
                .map(|j| points.iter().map(|p| p[j]).sum::<f64>() / n)
                .collect();
            let mut cov = vec![vec![0.0; d]; d];
            for p in points {
                for i in 0..d {
                    for j in 0..=i {
                        cov[i][j] += (p[i] - mean[i]) * (p[j] - mean[j]);
                    }
                }
            }
            for i in 0..d {
                for j in 0..=i {
                    cov[i][j] /= n - 1.0;
                    cov[j][i] = cov[i][j];
                }
            }
            let trace: f64 = (0..d).map(|i| cov[i][i]).sum();
            let ridge = (1e-6 * trace / d as f64).max(MIN_RIDGE);
            for (i, row) in cov.iter_mut().enumerate() {
                row[i] += ridge;
            }
            ClassGaussian::new(label.clone(), mean, cov)
        })
        .collect()
}

/// Picks the class of highest log-likelihood (lowest index on ties) and
/// rejects when its squared Mahalanobis distance exceeds `chi2_threshold`.
pub fn classify(gaussians: &[ClassGaussian], x: &[f64], chi2_threshold: f64) -> Verdict {
    let mut best: Option<(usize, f64)> = None;
    for (k, g) in gaussians.iter().enumerate() {
        let ll = g.log_likelihood(x);
        if best.is_none_or(|(_, b)| ll > b) {
            best = Some((k, ll));
        }
    }
    let (class, log_likelihood) = best.expect("at least one class model");
    let mahalanobis2 = gaussians[class].mahalanobis2(x);
    if mahalanobis2 > chi2_threshold {
        Verdict::Reject {
            nearest: class,
            log_likelihood,
            mahalanobis2,
        }
    } else {
        Verdict::Accept {
            class,
            label: gaussians[class].label.clone(),
            log_likelihood,
            mahalanobis2,
        }
    }
}
