use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    classify, gaussian_fit, pca_fit, pca_project, vectorize, ClassGaussian, FeatureVector,
    PcaModel, Verdict,
};
use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::tseries::{kmeans_dtw, rescale_with, CenterSeq, Point, SuperSample};

use super::{PipelineConfig, Tau};

/// Version written by [`save_model`] and accepted by [`load_model`].
pub const FORMAT_VERSION: u32 = 1;

/// Label reserved for rejected gestures on the wire.
pub const REJECT_LABEL: &str = "reject";

/// A trained recognizer: configuration, super samples, PCA basis and class
/// Gaussians. Immutable after training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GestureModel {
    pub format_version: u32,
    /// Configuration used for training, with `tau` resolved.
    pub config: PipelineConfig,
    pub super_samples: Vec<SuperSample>,
    pub pca: PcaModel,
    /// One Gaussian per class, in label order.
    pub classes: Vec<ClassGaussian>,
}

/// The result of classifying one center sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub verdict: Verdict,
    /// Point in the PCA space.
    pub embedding: Vec<f64>,
    /// Inclusive window of the input that was matched.
    pub window: (usize, usize),
    /// Index into [`GestureModel::super_samples`].
    pub nearest: usize,
}

impl GestureModel {
    pub fn tau(&self) -> usize {
        self.super_samples[0].points.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.classes.iter().map(|g| g.label())
    }

    pub fn class_index(&self, label: &str) -> Option<usize> {
        self.classes.iter().position(|g| g.label() == label)
    }

    fn supers(&self) -> Vec<&[Point]> {
        self.super_samples.iter().map(|s| s.points.points()).collect()
    }

    /// Rescales, vectorizes and projects a center sequence.
    pub fn embed(&self, seq: &[Point], open_ended: bool) -> Result<(Vec<f64>, (usize, usize), usize)> {
        let supers = self.supers();
        let r = rescale_with(seq, &supers, open_ended, &self.config.dtw_params())?;
        let v = vectorize(&r.points, self.tau())?;
        Ok((pca_project(&self.pca, &v)?, r.window, r.nearest))
    }

    /// Embeds `seq` and runs the Gaussian classifier with rejection.
    pub fn classify_seq(&self, seq: &[Point], open_ended: bool) -> Result<Classification> {
        let (embedding, window, nearest) = self.embed(seq, open_ended)?;
        let verdict = classify(&self.classes, &embedding, self.config.chi2_threshold);
        Ok(Classification {
            verdict,
            embedding,
            window,
            nearest,
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    /// Parses a model document, checking the version before the body.
    pub fn from_json(text: &str, path: Option<&Path>) -> Result<Self> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::parse(path, e.to_string()))?;
        let version = value
            .get("format_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| Error::parse(path, "missing format_version"))?;
        if version != FORMAT_VERSION as u64 {
            return Err(Error::Version {
                found: version.min(u32::MAX as u64) as u32,
                supported: FORMAT_VERSION,
            });
        }
        let model: GestureModel =
            serde_json::from_value(value).map_err(|e| Error::parse(path, e.to_string()))?;
        model.check().map_err(|e| Error::parse(path, e.to_string()))?;
        Ok(model)
    }

    fn check(&self) -> Result<()> {
        self.config.validate()?;
        let tau = match self.config.tau {
            Tau::Fixed(t) => t,
            Tau::Auto => return Err(Error::Config("model tau is unresolved".into())),
        };
        if self.classes.is_empty() || self.super_samples.is_empty() {
            return Err(Error::Config("model has no classes".into()));
        }
        if let Some(s) = self.super_samples.iter().find(|s| s.points.len() != tau) {
            return Err(Error::Length {
                expected: tau,
                actual: s.points.len(),
            });
        }
        if self.pca.input_dim() != 2 * tau || self.pca.components.iter().any(|c| c.len() != 2 * tau) {
            return Err(Error::dims(format!("PCA input of {}", 2 * tau), self.pca.input_dim()));
        }
        let d = self.pca.output_dim();
        if let Some(g) = self.classes.iter().find(|g| g.dim() != d) {
            return Err(Error::dims(format!("{d}-dimensional class models"), g.dim()));
        }
        for s in &self.super_samples {
            if self.class_index(&s.label).is_none() {
                return Err(Error::UnknownLabel(s.label.clone()));
            }
        }
        Ok(())
    }
}

/// Trains a model from labeled center sequences.
///
/// Classes are ordered by label. Per class, K-means under DTW yields `K`
/// super samples of length `tau`; every training sample is then rescaled
/// onto its nearest super sample (over all classes), vectorized and used to
/// fit the PCA basis and the class Gaussians.
pub fn train(dataset: &[(String, CenterSeq)], cfg: &PipelineConfig) -> Result<GestureModel> {
    cfg.validate()?;
    if dataset.is_empty() {
        return Err(Error::Config("training set is empty".into()));
    }
    let mut by_class: BTreeMap<&str, Vec<&CenterSeq>> = BTreeMap::new();
    for (label, seq) in dataset {
        if label == REJECT_LABEL || label.is_empty() || label.contains(char::is_whitespace) {
            return Err(Error::Config(format!("{label:?} cannot be used as a class label")));
        }
        by_class.entry(label).or_default().push(seq);
    }
    let k = cfg.clusters_per_class;
    let d = cfg.pca_dim;
    for (label, seqs) in &by_class {
        if seqs.len() < k.max(d + 1) {
            return Err(Error::Config(format!(
                "class {label:?} has {} samples; K = {k} and a {d}-dimensional Gaussian need {}",
                seqs.len(),
                k.max(d + 1)
            )));
        }
    }

    let tau = match cfg.tau {
        Tau::Fixed(t) => t,
        Tau::Auto => {
            let mean = dataset.iter().map(|(_, s)| s.len()).sum::<usize>() as f64 / dataset.len() as f64;
            (mean.round() as usize).max(2)
        }
    };
    let mut config = cfg.clone();
    config.tau = Tau::Fixed(tau);
    config.check_tau(tau)?;
    if 2 * tau < d {
        return Err(Error::Config(format!("pca_dim = {d} exceeds 2 tau = {}", 2 * tau)));
    }

    let mut super_samples = Vec::new();
    for (ci, (label, seqs)) in by_class.iter().enumerate() {
        let owned: Vec<CenterSeq> = seqs.iter().map(|s| (*s).clone()).collect();
        let params = config.kmeans_params(derive_seed(config.kmeans_seed, ci as u64));
        let clustering = kmeans_dtw(&owned, k, tau, &params)?;
        for (cluster, points) in clustering.centers.into_iter().enumerate() {
            super_samples.push(SuperSample {
                label: label.to_string(),
                cluster,
                points,
            });
        }
    }

    let supers: Vec<&[Point]> = super_samples.iter().map(|s| s.points.points()).collect();
    let dtw = config.dtw_params();
    let vectors: Vec<(usize, FeatureVector)> = by_class
        .values()
        .enumerate()
        .flat_map(|(ci, seqs)| seqs.iter().map(move |s| (ci, *s)))
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&(ci, s)| {
            let r = rescale_with(s, &supers, false, &dtw)?;
            Ok((ci, vectorize(&r.points, tau)?))
        })
        .collect::<Result<_>>()?;

    let all: Vec<FeatureVector> = vectors.iter().map(|(_, v)| v.clone()).collect();
    let pca = pca_fit(&all, d)?;
    let mut grouped: Vec<(String, Vec<Vec<f64>>)> =
        by_class.keys().map(|l| (l.to_string(), Vec::new())).collect();
    for (ci, v) in &vectors {
        grouped[*ci].1.push(pca_project(&pca, v)?);
    }
    let classes = gaussian_fit(&grouped)?;

    Ok(GestureModel {
        format_version: FORMAT_VERSION,
        config,
        super_samples,
        pca,
        classes,
    })
}

pub fn save_model(model: &GestureModel, path: &Path) -> Result<()> {
    fs::write(path, model.to_json())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<GestureModel> {
    let text = fs::read_to_string(path)?;
    GestureModel::from_json(&text, Some(path))
}
