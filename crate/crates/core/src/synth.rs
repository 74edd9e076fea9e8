//! Deterministic synthetic gestures: a bright rectangle moved along a
//! class-specific path over a black background.
//!
//! Trajectories are sampled at constant speed along piecewise-linear paths
//! (an ellipse for the circle class) and optionally jittered. Ground truth is
//! given per difference image, in block-grid units, so it compares directly
//! with [`MotionCenter`](crate::motion::MotionCenter) coordinates.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::derive_seed;
use crate::sensing::{pgm, Frame};
use crate::tseries::Point;

/// The five gesture shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GestureClass {
    Plus,
    Circle,
    N,
    X,
    Z,
}

impl GestureClass {
    pub const ALL: [GestureClass; 5] = [
        GestureClass::Plus,
        GestureClass::Circle,
        GestureClass::N,
        GestureClass::X,
        GestureClass::Z,
    ];

    /// Short label used in datasets and reports.
    pub fn label(self) -> &'static str {
        match self {
            GestureClass::Plus => "+",
            GestureClass::Circle => "O",
            GestureClass::N => "N",
            GestureClass::X => "X",
            GestureClass::Z => "Z",
        }
    }

    /// Filesystem-safe name.
    pub fn slug(self) -> &'static str {
        match self {
            GestureClass::Plus => "plus",
            GestureClass::Circle => "circle",
            GestureClass::N => "n",
            GestureClass::X => "x",
            GestureClass::Z => "z",
        }
    }
}

impl fmt::Display for GestureClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for GestureClass {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "+" | "plus" => GestureClass::Plus,
            "o" | "circle" => GestureClass::Circle,
            "n" => GestureClass::N,
            "x" => GestureClass::X,
            "z" => GestureClass::Z,
            _ => return Err(Error::UnknownLabel(s.to_string())),
        })
    }
}

/// Frame geometry shared by generated sequences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    /// Block size used to express ground truth in grid units.
    pub block: usize,
    /// Side of the rendered square in pixels.
    pub rect_pixels: usize,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: 640,
            height: 480,
            block: 16,
            rect_pixels: 72,
        }
    }
}

impl Canvas {
    fn validate(&self) -> Result<()> {
        if self.block == 0 || self.width % self.block != 0 || self.height % self.block != 0 {
            return Err(Error::BlockSize {
                block: self.block,
                width: self.width,
                height: self.height,
            });
        }
        if self.rect_pixels == 0 || self.rect_pixels > self.width.min(self.height) {
            return Err(Error::Config(format!(
                "rectangle of {} pixels does not fit a {}x{} frame",
                self.rect_pixels, self.width, self.height
            )));
        }
        Ok(())
    }

    /// Rectangle side in blocks, rounded to the nearest integer.
    pub fn rect_blocks(&self) -> usize {
        ((self.rect_pixels as f64 / self.block as f64).round() as usize).max(1)
    }
}

/// Parameters of one synthetic gesture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GestureSpec {
    pub class: GestureClass,
    /// Number of frames.
    pub duration: usize,
    /// Extent of the path as a fraction of the frame size.
    pub amplitude: f64,
    /// Standard deviation of per-frame position noise, in pixels.
    pub jitter_sigma: f64,
    pub seed: u64,
    pub canvas: Canvas,
}

impl GestureSpec {
    pub fn new(
        class: GestureClass,
        duration: usize,
        amplitude: f64,
        jitter_sigma: f64,
        seed: u64,
    ) -> Result<Self> {
        Self::with_canvas(class, duration, amplitude, jitter_sigma, seed, Canvas::default())
    }

    pub fn with_canvas(
        class: GestureClass,
        duration: usize,
        amplitude: f64,
        jitter_sigma: f64,
        seed: u64,
        canvas: Canvas,
    ) -> Result<Self> {
        if duration < 8 {
            return Err(Error::Config(format!("duration {duration} is below 8 frames")));
        }
        if !(amplitude > 0.0 && amplitude <= 1.0) {
            return Err(Error::Config(format!("amplitude {amplitude} is outside (0, 1]")));
        }
        if !(jitter_sigma >= 0.0 && jitter_sigma.is_finite()) {
            return Err(Error::Config(format!("jitter sigma {jitter_sigma} is invalid")));
        }
        canvas.validate()?;
        Ok(Self {
            class,
            duration,
            amplitude,
            jitter_sigma,
            seed,
            canvas,
        })
    }
}

/// True motion of one synthetic sequence.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub canvas: Canvas,
    /// Rectangle center of every frame, in pixels.
    pub positions: Vec<Point>,
    /// Center of every difference image in block units (column, row); one
    /// shorter than `positions`.
    pub centers: Vec<Point>,
    /// Rectangle size in blocks for every difference image.
    pub sizes: Vec<usize>,
}

impl GroundTruth {
    fn from_positions(canvas: Canvas, positions: Vec<Point>) -> Self {
        let b = canvas.block as f64;
        let centers = positions
            .windows(2)
            .map(|w| {
                Point::new(
                    0.5 * (w[0].x + w[1].x) / b - 0.5,
                    0.5 * (w[0].y + w[1].y) / b - 0.5,
                )
            })
            .collect::<Vec<_>>();
        let sizes = vec![canvas.rect_blocks(); centers.len()];
        Self {
            canvas,
            positions,
            centers,
            sizes,
        }
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }
}

/// Samples the class path at `duration` equally spaced arc-length positions
/// and adds seeded Gaussian jitter.
pub fn gen_trajectory(spec: &GestureSpec) -> GroundTruth {
    let c = spec.canvas;
    let (cx, cy) = (c.width as f64 / 2.0, c.height as f64 / 2.0);
    let (ax, ay) = (spec.amplitude * cx, spec.amplitude * cy);
    let n = spec.duration;

    let mut positions: Vec<Point> = match spec.class {
        GestureClass::Circle => (0..n)
            .map(|k| {
                let t = -std::f64::consts::FRAC_PI_2
                    + 2.0 * std::f64::consts::PI * k as f64 / (n - 1) as f64;
                Point::new(cx + ax * t.cos(), cy + ay * t.sin())
            })
            .collect(),
        class => {
            let unit: &[(f64, f64)] = match class {
                GestureClass::Plus => &[(-1.0, 0.0), (1.0, 0.0), (0.0, -1.0), (0.0, 1.0)],
                GestureClass::X => &[(-1.0, -1.0), (1.0, 1.0), (1.0, -1.0), (-1.0, 1.0)],
                GestureClass::N => &[(-1.0, 1.0), (-1.0, -1.0), (1.0, 1.0), (1.0, -1.0)],
                GestureClass::Z => &[(-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)],
                GestureClass::Circle => unreachable!(),
            };
            let vertices: Vec<Point> = unit
                .iter()
                .map(|&(u, v)| Point::new(cx + u * ax, cy + v * ay))
                .collect();
            sample_polyline(&vertices, n)
        }
    };

    if spec.jitter_sigma > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
        let normal = Normal::new(0.0, spec.jitter_sigma).expect("finite sigma");
        for p in &mut positions {
            p.x += normal.sample(&mut rng);
            p.y += normal.sample(&mut rng);
        }
    }
    GroundTruth::from_positions(c, positions)
}

fn sample_polyline(vertices: &[Point], n: usize) -> Vec<Point> {
    let lengths: Vec<f64> = vertices.windows(2).map(|w| w[0].dist(&w[1])).collect();
    let total: f64 = lengths.iter().sum();
    let mut out = Vec::with_capacity(n);
    let mut seg = 0;
    let mut start = 0.0;
    for k in 0..n {
        let s = total * k as f64 / (n - 1) as f64;
        while seg + 1 < lengths.len() && s > start + lengths[seg] {
            start += lengths[seg];
            seg += 1;
        }
        let w = if lengths[seg] > 0.0 {
            ((s - start) / lengths[seg]).clamp(0.0, 1.0)
        } else {
            0.0
        };
        let (a, b) = (vertices[seg], vertices[seg + 1]);
        out.push(Point::new(a.x + w * (b.x - a.x), a.y + w * (b.y - a.y)));
    }
    out
}

/// Parameters of an unspecified (non-gesture) motion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RandomWalkSpec {
    pub duration: usize,
    /// Standard deviation of each raw step, in pixels.
    pub step_sigma: f64,
    pub seed: u64,
    pub canvas: Canvas,
}

/// A seeded 2-D random walk smoothed by a 5-frame moving average and kept
/// inside the frame.
pub fn gen_random_walk(spec: &RandomWalkSpec) -> Result<GroundTruth> {
    if spec.duration < 8 {
        return Err(Error::Config(format!(
            "duration {} is below 8 frames",
            spec.duration
        )));
    }
    spec.canvas.validate()?;
    let c = spec.canvas;
    let half = c.rect_pixels as f64 / 2.0;
    let (lo_x, hi_x) = (half + 1.0, c.width as f64 - half - 1.0);
    let (lo_y, hi_y) = (half + 1.0, c.height as f64 - half - 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let normal = Normal::new(0.0, spec.step_sigma.max(0.0)).map_err(|e| Error::Config(e.to_string()))?;

    let pad = 2;
    let mut raw = Vec::with_capacity(spec.duration + 2 * pad);
    let mut p = Point::new(
        rng.random_range(lo_x.min(hi_x)..=hi_x.max(lo_x)),
        rng.random_range(lo_y.min(hi_y)..=hi_y.max(lo_y)),
    );
    for _ in 0..spec.duration + 2 * pad {
        raw.push(p);
        p.x = reflect(p.x + normal.sample(&mut rng), lo_x, hi_x);
        p.y = reflect(p.y + normal.sample(&mut rng), lo_y, hi_y);
    }
    let positions = (pad..pad + spec.duration)
        .map(|i| {
            let win = &raw[i - pad..=i + pad];
            let n = win.len() as f64;
            Point::new(
                win.iter().map(|q| q.x).sum::<f64>() / n,
                win.iter().map(|q| q.y).sum::<f64>() / n,
            )
        })
        .collect();
    Ok(GroundTruth::from_positions(c, positions))
}

fn reflect(v: f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return lo;
    }
    let span = hi - lo;
    let mut t = (v - lo).rem_euclid(2.0 * span);
    if t > span {
        t = 2.0 * span - t;
    }
    lo + t
}

/// Renders one frame per trajectory point: an `intensity`-valued square of
/// side `rect_pixels` centered on the point.
pub fn render_frames(
    truth: &GroundTruth,
    width: usize,
    height: usize,
    rect_pixels: usize,
    intensity: u8,
) -> Result<Vec<Frame>> {
    truth
        .positions
        .iter()
        .enumerate()
        .map(|(t, p)| {
            let left = (p.x - rect_pixels as f64 / 2.0).round();
            let top = (p.y - rect_pixels as f64 / 2.0).round();
            if left < 0.0
                || top < 0.0
                || left as usize + rect_pixels > width
                || top as usize + rect_pixels > height
            {
                return Err(Error::OutOfBounds(format!(
                    "frame {t}: {rect_pixels}px square at ({:.1}, {:.1}) leaves the {width}x{height} frame",
                    p.x, p.y
                )));
            }
            let (left, top) = (left as usize, top as usize);
            let mut frame = Frame::filled(width, height, 0)?;
            let pixels = frame.pixels_mut();
            for row in top..top + rect_pixels {
                pixels[row * width + left..row * width + left + rect_pixels].fill(intensity);
            }
            Ok(frame)
        })
        .collect()
}

/// Renders with the truth's own canvas.
pub fn render(truth: &GroundTruth, intensity: u8) -> Result<Vec<Frame>> {
    let c = truth.canvas;
    render_frames(truth, c.width, c.height, c.rect_pixels, intensity)
}

/// Adds seeded zero-mean Gaussian noise to every pixel, saturating at 0 and 255.
pub fn add_noise(frames: &mut [Frame], sigma: f64, seed: u64) -> Result<()> {
    let normal = Normal::new(0.0, sigma).map_err(|e| Error::Config(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for f in frames {
        for px in f.pixels_mut() {
            *px = (*px as f64 + normal.sample(&mut rng)).round().clamp(0.0, 255.0) as u8;
        }
    }
    Ok(())
}

/// Writes `frame_0000.pgm, ...` and a `truth.txt` sidecar into `dir`.
///
/// The sidecar has one `index x y r` line per difference image, coordinates
/// in blocks.
pub fn write_sequence(dir: &Path, frames: &[Frame], truth: &GroundTruth) -> Result<()> {
    fs::create_dir_all(dir)?;
    for (i, f) in frames.iter().enumerate() {
        pgm::write(&dir.join(format!("frame_{i:04}.pgm")), f)?;
    }
    let mut out = std::io::BufWriter::new(fs::File::create(dir.join("truth.txt"))?);
    for (i, (c, r)) in truth.centers.iter().zip(&truth.sizes).enumerate() {
        writeln!(out, "{i} {} {} {r}", c.x, c.y)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads a `truth.txt` sidecar back as `(center, r)` pairs.
pub fn read_truth(path: &Path) -> Result<Vec<(Point, usize)>> {
    let text = fs::read_to_string(path)?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(n, line)| {
            let f: Vec<&str> = line.split_whitespace().collect();
            let bad = || Error::parse(Some(path), format!("line {}: expected `index x y r`", n + 1));
            if f.len() != 4 {
                return Err(bad());
            }
            let x = f[1].parse().map_err(|_| bad())?;
            let y = f[2].parse().map_err(|_| bad())?;
            let r = f[3].parse().map_err(|_| bad())?;
            Ok((Point::new(x, y), r))
        })
        .collect()
}

/// Variation ranges for a generated dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DatasetSpec {
    pub train_per_class: usize,
    pub test_per_class: usize,
    pub unspecified: usize,
    pub duration: (usize, usize),
    pub amplitude: (f64, f64),
    pub jitter_sigma: f64,
    pub walk_step_sigma: f64,
    pub intensity: u8,
    pub seed: u64,
    pub canvas: Canvas,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            train_per_class: 50,
            test_per_class: 20,
            unspecified: 50,
            duration: (30, 46),
            amplitude: (0.45, 0.6),
            jitter_sigma: 3.0,
            walk_step_sigma: 24.0,
            intensity: 200,
            seed: 0,
            canvas: Canvas::default(),
        }
    }
}

/// Which part of a dataset a sample belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Test,
    Unspecified,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
            Split::Unspecified => "unspecified",
        }
    }
}

impl FromStr for Split {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(Split::Train),
            "test" => Ok(Split::Test),
            "unspecified" => Ok(Split::Unspecified),
            _ => Err(Error::Config(format!("unknown split {s:?}"))),
        }
    }
}

/// One generated sample; `class` is `None` for unspecified motion.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSample {
    pub split: Split,
    pub class: Option<GestureClass>,
    pub index: usize,
    pub truth: GroundTruth,
}

impl SynthSample {
    pub fn label(&self) -> &'static str {
        self.class.map(GestureClass::label).unwrap_or("unspecified")
    }

    /// Directory name relative to the dataset root.
    pub fn rel_dir(&self) -> String {
        let name = self.class.map(GestureClass::slug).unwrap_or("walk");
        format!("{}/{}_{:03}", self.split.as_str(), name, self.index)
    }
}

/// Draws the trajectories of a whole dataset. Each sample has its own seed
/// derived from the dataset seed, so samples are independent of generation
/// order.
pub fn gen_dataset(spec: &DatasetSpec) -> Result<Vec<SynthSample>> {
    let (dmin, dmax) = spec.duration;
    let (amin, amax) = spec.amplitude;
    if dmin > dmax || amin > amax {
        return Err(Error::Config("dataset ranges must satisfy min <= max".into()));
    }
    let mut out = Vec::new();
    for (split, per_class) in [
        (Split::Train, spec.train_per_class),
        (Split::Test, spec.test_per_class),
    ] {
        for (ci, class) in GestureClass::ALL.into_iter().enumerate() {
            for index in 0..per_class {
                let tag = ((split as u64) << 48) | ((ci as u64) << 32) | index as u64;
                let seed = derive_seed(spec.seed, tag);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let duration = rng.random_range(dmin..=dmax);
                let amplitude = if amax > amin {
                    rng.random_range(amin..=amax)
                } else {
                    amin
                };
                let g = GestureSpec::with_canvas(
                    class,
                    duration,
                    amplitude,
                    spec.jitter_sigma,
                    rng.random(),
                    spec.canvas,
                )?;
                out.push(SynthSample {
                    split,
                    class: Some(class),
                    index,
                    truth: gen_trajectory(&g),
                });
            }
        }
    }
    for index in 0..spec.unspecified {
        let seed = derive_seed(spec.seed, (3u64 << 48) | index as u64);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let walk = RandomWalkSpec {
            duration: rng.random_range(dmin..=dmax),
            step_sigma: spec.walk_step_sigma,
            seed: rng.random(),
            canvas: spec.canvas,
        };
        out.push(SynthSample {
            split: Split::Unspecified,
            class: None,
            index,
            truth: gen_random_walk(&walk)?,
        });
    }
    Ok(out)
}
