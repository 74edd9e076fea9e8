use std::fmt;
use std::path::Path;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::motion::{default_activity_threshold, default_compressed_threshold, DEFAULT_SIZES};
use crate::tseries::{DbaParams, DtwParams, KMeansParams};

/// Resampled sequence length: fixed, or the mean training length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Tau {
    #[default]
    Auto,
    Fixed(usize),
}

impl Tau {
    pub fn fixed(self) -> Option<usize> {
        match self {
            Tau::Auto => None,
            Tau::Fixed(t) => Some(t),
        }
    }
}

impl fmt::Display for Tau {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tau::Auto => f.write_str("auto"),
            Tau::Fixed(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for Tau {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Tau::Auto => s.serialize_str("auto"),
            Tau::Fixed(t) => s.serialize_u64(*t as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Tau {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Fixed(u64),
            Name(String),
        }
        match Repr::deserialize(d)? {
            Repr::Fixed(t) => Ok(Tau::Fixed(t as usize)),
            Repr::Name(s) if s == "auto" => Ok(Tau::Auto),
            Repr::Name(s) => Err(serde::de::Error::custom(format!(
                "tau must be \"auto\" or an integer, got {s:?}"
            ))),
        }
    }
}

/// Every tunable of the recognizer.
///
/// Serialized as TOML for `--config` files and embedded in model files.
/// Missing keys take their defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    /// Frame width in pixels.
    pub width: usize,
    /// Frame height in pixels.
    pub height: usize,
    /// Block size `B`.
    pub block: usize,
    /// Number of compressed measurements `M`.
    pub measurements: usize,
    pub phi_seed: u64,
    /// Template side lengths in blocks.
    pub template_sizes: Vec<usize>,
    /// Uncompressed activity gate; defaults to `0.02 * 255 * sqrt(N)`.
    pub activity_threshold: Option<f64>,
    /// Compressed activity gate; defaults to `activity * sqrt(M) / 2`.
    pub compressed_threshold: Option<f64>,
    pub tau: Tau,
    /// Super samples per class `K`.
    pub clusters_per_class: usize,
    pub pca_dim: usize,
    pub chi2_threshold: f64,
    /// FIFO length `L`, in motion centers.
    pub fifo_len: usize,
    /// Active frames needed before a gesture may end.
    pub gate_min_active: usize,
    /// Consecutive still frames that end a gesture.
    pub gate_quiet: usize,
    /// Empty the FIFO after each event; when false the buffer slides.
    pub clear_after_event: bool,
    /// Classify the buffer on every active frame (debugging aid).
    pub classify_every_frame: bool,
    /// Sakoe-Chiba band for training-time DTW; unconstrained when absent.
    pub dtw_window: Option<usize>,
    pub kmeans_seed: u64,
    pub kmeans_max_iter: usize,
    pub dba_max_iter: usize,
    pub dba_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            block: 16,
            measurements: 250,
            phi_seed: 0,
            template_sizes: DEFAULT_SIZES.to_vec(),
            activity_threshold: None,
            compressed_threshold: None,
            tau: Tau::Auto,
            clusters_per_class: 1,
            pca_dim: 3,
            chi2_threshold: crate::classify::DEFAULT_CHI2_THRESHOLD,
            fifo_len: 128,
            gate_min_active: 8,
            gate_quiet: 5,
            clear_after_event: true,
            classify_every_frame: false,
            dtw_window: None,
            kmeans_seed: 0,
            kmeans_max_iter: 20,
            dba_max_iter: 30,
            dba_tol: 1e-6,
        }
    }
}

impl PipelineConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::parse(None, e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = toml::from_str(&text).map_err(|e| Error::parse(Some(path), e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config is always representable as TOML")
    }

    pub fn grid_w(&self) -> usize {
        self.width / self.block
    }

    pub fn grid_h(&self) -> usize {
        self.height / self.block
    }

    /// Block-vector length `N`.
    pub fn grid_len(&self) -> usize {
        self.grid_w() * self.grid_h()
    }

    pub fn activity(&self) -> f64 {
        self.activity_threshold
            .unwrap_or_else(|| default_activity_threshold(self.grid_len()))
    }

    pub fn compressed_activity(&self) -> f64 {
        self.compressed_threshold
            .unwrap_or_else(|| default_compressed_threshold(self.activity(), self.measurements))
    }

    pub fn dtw_params(&self) -> DtwParams {
        DtwParams {
            window: self.dtw_window,
        }
    }

    pub fn kmeans_params(&self, seed: u64) -> KMeansParams {
        KMeansParams {
            max_iter: self.kmeans_max_iter,
            seed,
            dba: DbaParams {
                max_iter: self.dba_max_iter,
                tol: self.dba_tol,
                dtw: self.dtw_params(),
            },
        }
    }

    /// Checks every invariant that does not depend on training data.
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("width", self.width),
            ("height", self.height),
            ("block", self.block),
            ("measurements", self.measurements),
            ("clusters_per_class", self.clusters_per_class),
            ("pca_dim", self.pca_dim),
            ("fifo_len", self.fifo_len),
            ("gate_min_active", self.gate_min_active),
            ("gate_quiet", self.gate_quiet),
        ];
        if let Some((name, _)) = positive.iter().find(|(_, v)| *v == 0) {
            return Err(Error::Config(format!("{name} must be positive")));
        }
        if self.width % self.block != 0 || self.height % self.block != 0 {
            return Err(Error::BlockSize {
                block: self.block,
                width: self.width,
                height: self.height,
            });
        }
        if self.template_sizes.is_empty() || self.template_sizes.contains(&0) {
            return Err(Error::Config("template sizes must be a nonempty set of positive sizes".into()));
        }
        if let Tau::Fixed(t) = self.tau {
            self.check_tau(t)?;
        }
        for (name, v) in [
            ("activity_threshold", self.activity_threshold),
            ("compressed_threshold", self.compressed_threshold),
            ("chi2_threshold", Some(self.chi2_threshold)),
            ("dba_tol", Some(self.dba_tol)),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0) {
                    return Err(Error::Config(format!("{name} must be a nonnegative number")));
                }
            }
        }
        Ok(())
    }

    pub(crate) fn check_tau(&self, tau: usize) -> Result<()> {
        if tau < 2 {
            return Err(Error::Config(format!("tau = {tau} is below 2")));
        }
        if 2 * self.fifo_len < tau {
            return Err(Error::Config(format!(
                "fifo_len = {} is shorter than tau / 2 = {}",
                self.fifo_len,
                tau as f64 / 2.0
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = PipelineConfig::default();
        cfg.validate().unwrap();
        assert_eq!((cfg.grid_w(), cfg.grid_h(), cfg.grid_len()), (40, 30, 1200));
        assert!((cfg.activity() - 0.02 * 255.0 * 1200f64.sqrt()).abs() < 1e-12);
        assert!((cfg.compressed_activity() - cfg.activity() * 250f64.sqrt() / 2.0).abs() < 1e-9);
    }

    #[test]
    fn toml_roundtrip_and_partial_files() {
        let mut cfg = PipelineConfig::default();
        cfg.tau = Tau::Fixed(40);
        cfg.dtw_window = Some(5);
        cfg.activity_threshold = Some(12.5);
        let text = cfg.to_toml_string();
        assert_eq!(PipelineConfig::from_toml_str(&text).unwrap(), cfg);

        let partial = PipelineConfig::from_toml_str("measurements = 200\ntau = \"auto\"\n").unwrap();
        assert_eq!(partial.measurements, 200);
        assert_eq!(partial.tau, Tau::Auto);
        assert_eq!(partial.block, 16);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(matches!(
            PipelineConfig::from_toml_str("block = 7"),
            Err(Error::BlockSize { .. })
        ));
        assert!(matches!(
            PipelineConfig::from_toml_str("tau = 1"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PipelineConfig::from_toml_str("tau = 100\nfifo_len = 40"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PipelineConfig::from_toml_str("measurements = 0"),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            PipelineConfig::from_toml_str("tau = \"often\""),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            PipelineConfig::from_toml_str("mesurements = 10"),
            Err(Error::Parse { .. })
        ));
    }
}
