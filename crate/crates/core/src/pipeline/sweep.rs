use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::motion::{build_bank, compress_bank, extract_center, extract_center_compressed};
use crate::rng::derive_seed;
use crate::sensing::{block_average, diff_image, make_phi, project, BlockVector, Frame};
use crate::synth::{add_noise, gen_trajectory, render, Canvas, GestureClass, GestureSpec};
use crate::tseries::Point;

use super::PipelineConfig;

/// Compressed-domain accuracy at one measurement count.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub m: usize,
    /// Mean distance in blocks between compressed and uncompressed centers.
    pub mean_error: f64,
    /// Mean distance in blocks between compressed centers and ground truth.
    pub truth_error: Option<f64>,
    /// Fraction of frames where both domains pick the same template.
    pub agreement: f64,
    /// Frames compared per trial.
    pub frames: usize,
}

/// Measures how compressed extraction degrades as `M` shrinks.
///
/// The reference is uncompressed matched filtering on every frame pair that
/// passes the uncompressed activity gate. For each `M`, `trials` code
/// matrices with seeds derived from `phi_seed` are drawn and the compressed
/// matched filter (ungated) is compared with the reference. `truth` holds one
/// block-unit center per frame pair.
pub fn sweep_m(
    frames: &[Frame],
    cfg: &PipelineConfig,
    ms: &[usize],
    trials: usize,
    truth: Option<&[Point]>,
) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    if frames.len() < 2 {
        return Err(Error::InsufficientFrames { found: frames.len() });
    }
    if trials == 0 || ms.is_empty() || ms.contains(&0) {
        return Err(Error::Config("sweep needs positive M values and trials".into()));
    }
    if let Some(t) = truth {
        if t.len() != frames.len() - 1 {
            return Err(Error::Length {
                expected: frames.len() - 1,
                actual: t.len(),
            });
        }
    }
    let bank = build_bank(cfg.grid_w(), cfg.grid_h(), &cfg.template_sizes)?;
    let blocks: Vec<(usize, BlockVector)> = frames
        .windows(2)
        .enumerate()
        .map(|(i, w)| Ok((i, block_average(&diff_image(&w[0], &w[1])?, cfg.block)?)))
        .collect::<Result<_>>()?;
    let mut reference = Vec::new();
    for (i, y) in &blocks {
        if let Some(c) = extract_center(y, &bank, cfg.activity())? {
            reference.push((*i, y, c));
        }
    }
    if reference.is_empty() {
        return Err(Error::EmptySequence);
    }

    ms.iter()
        .map(|&m| {
            let per_trial: Vec<(f64, f64, usize)> = (0..trials as u64)
                .into_par_iter()
                .map(|t| {
                    let phi = make_phi(m, cfg.grid_len(), derive_seed(cfg.phi_seed, t))?;
                    let cbank = compress_bank(&bank, &phi)?;
                    let (mut err, mut terr, mut same) = (0.0, 0.0, 0);
                    for (i, y, c) in &reference {
                        let got = extract_center_compressed(&project(&phi, y)?, &cbank, 0.0)?
                            .expect("reference frames have motion");
                        let p = Point::new(got.x, got.y);
                        err += p.dist(&Point::new(c.x, c.y));
                        if let Some(t) = truth {
                            terr += p.dist(&t[*i]);
                        }
                        same += usize::from(got.index == c.index);
                    }
                    Ok((err, terr, same))
                })
                .collect::<Result<_>>()?;
            let n = (reference.len() * trials) as f64;
            Ok(SweepRow {
                m,
                mean_error: per_trial.iter().map(|r| r.0).sum::<f64>() / n,
                truth_error: truth.map(|_| per_trial.iter().map(|r| r.1).sum::<f64>() / n),
                agreement: per_trial.iter().map(|r| r.2).sum::<usize>() as f64 / n,
                frames: reference.len(),
            })
        })
        .collect()
}

/// The synthetic Z gesture used for measurement sweeps: a flat square on a
/// dark background, observed through Gaussian pixel noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepScenario {
    pub duration: usize,
    pub amplitude: f64,
    pub jitter_sigma: f64,
    pub noise_sigma: f64,
    pub intensity: u8,
    pub rect_pixels: usize,
    pub seed: u64,
}

impl Default for SweepScenario {
    fn default() -> Self {
        Self {
            duration: 80,
            amplitude: 0.5,
            jitter_sigma: 3.0,
            noise_sigma: 24.0,
            intensity: 200,
            rect_pixels: 72,
            seed: 1,
        }
    }
}

impl SweepScenario {
    /// Renders the frames and the block-unit ground truth for `cfg`'s geometry.
    pub fn generate(&self, cfg: &PipelineConfig) -> Result<(Vec<Frame>, Vec<Point>)> {
        let canvas = Canvas {
            width: cfg.width,
            height: cfg.height,
            block: cfg.block,
            rect_pixels: self.rect_pixels,
        };
        let spec = GestureSpec::with_canvas(
            GestureClass::Z,
            self.duration,
            self.amplitude,
            self.jitter_sigma,
            self.seed,
            canvas,
        )?;
        let truth = gen_trajectory(&spec);
        let mut frames = render(&truth, self.intensity)?;
        if self.noise_sigma > 0.0 {
            add_noise(&mut frames, self.noise_sigma, derive_seed(self.seed, 1))?;
        }
        Ok((frames, truth.centers))
    }
}

/// `m,mean_error,truth_error,agreement,frames` with a header line.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from("m,mean_error,truth_error,agreement,frames\n");
    for r in rows {
        let truth = r.truth_error.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{},{},{},{},{}", r.m, r.mean_error, truth, r.agreement, r.frames);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn more_measurements_track_reference_better() {
        let cfg = PipelineConfig::default();
        let scenario = SweepScenario {
            duration: 30,
            ..Default::default()
        };
        let (frames, truth) = scenario.generate(&cfg).unwrap();
        let rows = sweep_m(&frames, &cfg, &[20, 600], 2, Some(&truth)).unwrap();
        assert_eq!(rows[0].frames, 29);
        assert!(rows[1].mean_error < rows[0].mean_error);
        assert!(rows[1].agreement > rows[0].agreement);
        assert!(rows[1].truth_error.unwrap() <= 1.0);
        let csv = sweep_csv(&rows);
        assert!(csv.starts_with("m,mean_error,truth_error,agreement,frames\n20,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn rejects_bad_input() {
        let cfg = PipelineConfig::default();
        let still = vec![Frame::filled(640, 480, 0).unwrap(); 3];
        assert!(matches!(sweep_m(&still, &cfg, &[50], 1, None), Err(Error::EmptySequence)));
        assert!(matches!(sweep_m(&still, &cfg, &[], 1, None), Err(Error::Config(_))));
        assert!(matches!(
            sweep_m(&still, &cfg, &[50], 1, Some(&[Point::default()])),
            Err(Error::Length { .. })
        ));
    }
}
