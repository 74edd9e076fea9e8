use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::motion::{build_bank, compress_bank, extract_center_compressed, CompressedBank, MotionCenter};
use crate::sensing::{block_average, diff_image, make_phi, project, CodeMatrix, Frame};
use crate::tseries::{CenterSeq, Point};

use super::PipelineConfig;

/// Model-independent sensing state: Φ and the compressed template bank.
///
/// Immutable once built; share it behind an `Arc` across streams.
#[derive(Debug, Clone)]
pub struct Extractor {
    width: usize,
    height: usize,
    block: usize,
    phi: CodeMatrix,
    cbank: CompressedBank,
    threshold: f64,
}

/// One extracted motion center as written to center files.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterRecord {
    /// Index of the later frame of the difference pair.
    pub frame: usize,
    /// Normalized column coordinate in `[0, 1]`.
    pub x: f64,
    /// Normalized row coordinate in `[0, 1]`.
    pub y: f64,
    /// Template side in blocks.
    pub r: usize,
    pub score: f64,
}

impl CenterRecord {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

impl Extractor {
    pub fn new(cfg: &PipelineConfig) -> Result<Self> {
        cfg.validate()?;
        let bank = build_bank(cfg.grid_w(), cfg.grid_h(), &cfg.template_sizes)?;
        let phi = make_phi(cfg.measurements, cfg.grid_len(), cfg.phi_seed)?;
        let cbank = compress_bank(&bank, &phi)?;
        Ok(Self {
            width: cfg.width,
            height: cfg.height,
            block: cfg.block,
            phi,
            cbank,
            threshold: cfg.compressed_activity(),
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn phi(&self) -> &CodeMatrix {
        &self.phi
    }

    pub fn compressed_bank(&self) -> &CompressedBank {
        &self.cbank
    }

    pub fn check_frame(&self, frame: &Frame) -> Result<()> {
        if frame.width() != self.width || frame.height() != self.height {
            return Err(Error::dims(
                format!("{}x{} frame", self.width, self.height),
                format!("{}x{} frame", frame.width(), frame.height()),
            ));
        }
        Ok(())
    }

    /// Diff, block-average, project and match one frame pair.
    pub fn center(&self, prev: &Frame, next: &Frame) -> Result<Option<MotionCenter>> {
        self.check_frame(prev)?;
        self.check_frame(next)?;
        let y = block_average(&diff_image(prev, next)?, self.block)?;
        let y_hat = project(&self.phi, &y)?;
        extract_center_compressed(&y_hat, &self.cbank, self.threshold)
    }

    /// Maps block coordinates to `[0, 1]`.
    pub fn normalize(&self, c: &MotionCenter) -> Point {
        let gw = (self.width / self.block) as f64;
        let gh = (self.height / self.block) as f64;
        Point::new((c.x + 0.5) / gw, (c.y + 0.5) / gh)
    }

    pub fn record(&self, frame: usize, c: &MotionCenter) -> CenterRecord {
        let p = self.normalize(c);
        CenterRecord {
            frame,
            x: p.x,
            y: p.y,
            r: c.r,
            score: c.score,
        }
    }

    /// Centers of every consecutive pair; still pairs are skipped.
    pub fn records(&self, frames: &[Frame]) -> Result<Vec<CenterRecord>> {
        if frames.len() < 2 {
            return Err(Error::InsufficientFrames { found: frames.len() });
        }
        let found: Vec<Option<CenterRecord>> = frames
            .par_windows(2)
            .enumerate()
            .map(|(i, w)| Ok(self.center(&w[0], &w[1])?.map(|c| self.record(i + 1, &c))))
            .collect::<Result<_>>()?;
        Ok(found.into_iter().flatten().collect())
    }
}

/// Runs the extraction chain over a frame sequence and keeps the active
/// centers, normalized to `[0, 1]`.
pub fn extract_sequence(frames: &[Frame], extractor: &Extractor) -> Result<CenterSeq> {
    records_to_seq(&extractor.records(frames)?)
}

pub fn records_to_seq(records: &[CenterRecord]) -> Result<CenterSeq> {
    CenterSeq::new(records.iter().map(CenterRecord::point).collect())
}

/// Writes one `frame_index x y r score` line per record.
pub fn write_centers<W: Write>(mut out: W, records: &[CenterRecord]) -> Result<()> {
    for r in records {
        writeln!(out, "{} {} {} {} {}", r.frame, r.x, r.y, r.r, r.score)?;
    }
    Ok(())
}

pub fn save_centers(path: &Path, records: &[CenterRecord]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    write_centers(&mut out, records)?;
    out.flush()?;
    Ok(())
}

/// Parses center lines; blank lines and `#` comments are ignored.
pub fn parse_centers(text: &str, path: Option<&Path>) -> Result<Vec<CenterRecord>> {
    let mut out = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let bad = |what: &str| Error::parse(path, format!("line {}: {what}", n + 1));
        let f: Vec<&str> = line.split_whitespace().collect();
        if f.len() != 5 {
            return Err(bad("expected `frame_index x y r score`"));
        }
        let rec = CenterRecord {
            frame: f[0].parse().map_err(|_| bad("bad frame index"))?,
            x: f[1].parse().map_err(|_| bad("bad x"))?,
            y: f[2].parse().map_err(|_| bad("bad y"))?,
            r: f[3].parse().map_err(|_| bad("bad r"))?,
            score: f[4].parse().map_err(|_| bad("bad score"))?,
        };
        if !(rec.x.is_finite() && rec.y.is_finite() && rec.score.is_finite()) {
            return Err(bad("non-finite value"));
        }
        out.push(rec);
    }
    Ok(out)
}

pub fn load_centers(path: &Path) -> Result<Vec<CenterRecord>> {
    parse_centers(&fs::read_to_string(path)?, Some(path))
}
