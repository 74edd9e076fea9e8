use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::sensing::load_frame_sequence;
use crate::synth::{render, write_sequence, Split, SynthSample};
use crate::tseries::CenterSeq;

use super::{extract_sequence, load_centers, records_to_seq, Extractor};

/// Where a sample's motion comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum SampleSource {
    Centers(CenterSeq),
    /// A directory of PGM frames, or a center file.
    Path(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledSample {
    pub label: String,
    pub source: SampleSource,
}

/// Labeled samples, either in memory or on disk.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct LabeledDataset {
    pub samples: Vec<LabeledSample>,
}

impl LabeledDataset {
    pub fn from_sequences(items: Vec<(String, CenterSeq)>) -> Self {
        Self {
            samples: items
                .into_iter()
                .map(|(label, seq)| LabeledSample {
                    label,
                    source: SampleSource::Centers(seq),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Loads every sample as a center sequence. Frame directories go through
    /// the extraction chain; other paths are read as center files.
    pub fn resolve(&self, extractor: &Extractor) -> Result<Vec<(String, CenterSeq)>> {
        self.samples
            .par_iter()
            .map(|s| {
                let seq = match &s.source {
                    SampleSource::Centers(seq) => seq.clone(),
                    SampleSource::Path(p) if p.is_dir() => {
                        extract_sequence(&load_frame_sequence(p)?, extractor).map_err(|e| match e {
                            Error::EmptySequence => Error::parse(Some(p), "no motion in any frame"),
                            e => e,
                        })?
                    }
                    SampleSource::Path(p) => records_to_seq(&load_centers(p)?)
                        .map_err(|_| Error::parse(Some(p), "center file is empty"))?,
                };
                Ok((s.label.clone(), seq))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ManifestEntry {
    pub split: Split,
    pub label: String,
    /// Resolved against the manifest's directory.
    pub path: PathBuf,
}

/// A `split label path` listing, one sample per line.
///
/// `split` is `train`, `test` or `unspecified`; relative paths are resolved
/// against the manifest's directory. Blank lines and `#` comments are
/// ignored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn parse(text: &str, base: &Path, path: Option<&Path>) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.splitn(3, char::is_whitespace);
            let (Some(split), Some(label), Some(rel)) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::parse(path, format!("line {}: expected `split label path`", n + 1)));
            };
            let split = split
                .parse()
                .map_err(|e: Error| Error::parse(path, format!("line {}: {e}", n + 1)))?;
            entries.push(ManifestEntry {
                split,
                label: label.to_string(),
                path: base.join(rel.trim()),
            });
        }
        Ok(Self { entries })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::parse(&text, base, Some(path))
    }

    /// Writes the manifest with paths relative to `base` where possible.
    pub fn render(&self, base: &Path) -> String {
        let mut out = String::new();
        for e in &self.entries {
            let p = e.path.strip_prefix(base).unwrap_or(&e.path);
            let _ = writeln!(out, "{} {} {}", e.split.as_str(), e.label, p.display());
        }
        out
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let base = path.parent().unwrap_or(Path::new("."));
        fs::write(path, self.render(base))?;
        Ok(())
    }

    pub fn split(&self, split: Split) -> LabeledDataset {
        LabeledDataset {
            samples: self
                .entries
                .iter()
                .filter(|e| e.split == split)
                .map(|e| LabeledSample {
                    label: e.label.clone(),
                    source: SampleSource::Path(e.path.clone()),
                })
                .collect(),
        }
    }
}

/// Renders every synthetic sample and runs it through the extraction chain.
pub fn extract_synthetic(
    samples: &[SynthSample],
    extractor: &Extractor,
    intensity: u8,
) -> Result<Vec<CenterSeq>> {
    samples
        .par_iter()
        .map(|s| extract_sequence(&render(&s.truth, intensity)?, extractor))
        .collect()
}

/// Writes each sample as a PGM frame directory under `root` and returns the
/// matching manifest, also saved as `root/manifest.txt`.
pub fn write_synthetic(root: &Path, samples: &[SynthSample], intensity: u8) -> Result<Manifest> {
    samples.par_iter().try_for_each(|s| {
        let frames = render(&s.truth, intensity)?;
        write_sequence(&root.join(s.rel_dir()), &frames, &s.truth)
    })?;
    let manifest = Manifest {
        entries: samples
            .iter()
            .map(|s| ManifestEntry {
                split: s.split,
                label: s.label().to_string(),
                path: root.join(s.rel_dir()),
            })
            .collect(),
    };
    manifest.save(&root.join("manifest.txt"))?;
    Ok(manifest)
}
