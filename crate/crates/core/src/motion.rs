//! Motion-center extraction by matched filtering against rectangle templates.
//!
//! A template `X(alpha, r)` is the indicator of an `r x r` block rectangle,
//! scaled to unit l2 norm. For a block vector `y`, minimizing
//! `||y - c X||` over the amplitude `c >= 0` is the same as maximizing the
//! normalized correlation `<y, X> / ||y||`, so extraction is an exhaustive
//! argmax over the bank. In the compressed domain the same argmax is taken
//! over `<y_hat, Phi X> / (||Phi X|| ||y_hat||)`.
//!
//! Ties always resolve to the first template in bank order (ascending size,
//! then row-major top-left corner).

use crate::error::{Error, Result};
use crate::sensing::{l2_norm, BlockVector, CodeMatrix, CodeSpec, MeasurementVector};

/// Template sizes (in blocks) used when none are configured.
pub const DEFAULT_SIZES: [usize; 4] = [3, 4, 5, 6];

/// A unit-norm rectangle indicator on the block grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Template {
    /// Top block row of the rectangle.
    pub top: usize,
    /// Left block column of the rectangle.
    pub left: usize,
    /// Side length in blocks.
    pub size: usize,
}

impl Template {
    /// Value of every in-support entry; `size^2 * value^2 = 1`.
    pub fn value(&self) -> f64 {
        1.0 / self.size as f64
    }

    /// Rectangle center as `(block_row, block_col)`; half-integer for even sizes.
    pub fn alpha(&self) -> (f64, f64) {
        let half = (self.size as f64 - 1.0) / 2.0;
        (self.top as f64 + half, self.left as f64 + half)
    }

    /// Dense row-major vector of length `grid_w * grid_h`.
    pub fn to_vector(&self, grid_w: usize, grid_h: usize) -> Vec<f64> {
        let mut v = vec![0.0; grid_w * grid_h];
        for row in self.top..self.top + self.size {
            v[row * grid_w + self.left..row * grid_w + self.left + self.size].fill(self.value());
        }
        v
    }

    fn correlate(&self, y: &[f64], grid_w: usize) -> f64 {
        let mut acc = 0.0;
        for row in self.top..self.top + self.size {
            let start = row * grid_w + self.left;
            acc += y[start..start + self.size].iter().sum::<f64>();
        }
        acc * self.value()
    }
}

/// Every feasible template for a grid and a set of sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct TemplateBank {
    grid_w: usize,
    grid_h: usize,
    sizes: Vec<usize>,
    templates: Vec<Template>,
}

impl TemplateBank {
    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn templates(&self) -> &[Template] {
        &self.templates
    }

    pub fn len(&self) -> usize {
        self.templates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.templates.is_empty()
    }
}

/// Compressed templates `Phi X` with their norms, in bank order.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedBank {
    bank: TemplateBank,
    code: CodeSpec,
    // template-major: entry k*M + m is row m of Phi X_k
    vectors: Vec<f64>,
    norms: Vec<f64>,
}

impl CompressedBank {
    pub fn bank(&self) -> &TemplateBank {
        &self.bank
    }

    pub fn code(&self) -> CodeSpec {
        self.code
    }

    pub fn measurements(&self) -> usize {
        self.code.rows
    }

    pub fn vector(&self, k: usize) -> &[f64] {
        let m = self.code.rows;
        &self.vectors[k * m..(k + 1) * m]
    }

    pub fn norms(&self) -> &[f64] {
        &self.norms
    }
}

/// A located motion center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MotionCenter {
    /// Column coordinate in blocks.
    pub x: f64,
    /// Row coordinate in blocks.
    pub y: f64,
    /// Rectangle size in blocks.
    pub r: usize,
    /// Normalized correlation of the winning template.
    pub score: f64,
    /// Index of the winning template in its bank.
    pub index: usize,
}

impl MotionCenter {
    fn from_template(t: &Template, index: usize, score: f64) -> Self {
        let (row, col) = t.alpha();
        Self {
            x: col,
            y: row,
            r: t.size,
            score,
            index,
        }
    }
}

/// Enumerates every template that fits the grid, ascending size then row-major.
pub fn build_bank(grid_w: usize, grid_h: usize, sizes: &[usize]) -> Result<TemplateBank> {
    if sizes.is_empty() {
        return Err(Error::Config("template size set is empty".into()));
    }
    let mut sizes = sizes.to_vec();
    sizes.sort_unstable();
    sizes.dedup();
    if let Some(&bad) = sizes
        .iter()
        .find(|&&r| r == 0 || r > grid_w.min(grid_h))
    {
        return Err(Error::Config(format!(
            "template size {bad} does not fit a {grid_w}x{grid_h} grid"
        )));
    }
    let mut templates = Vec::new();
    for &size in &sizes {
        for top in 0..=grid_h - size {
            for left in 0..=grid_w - size {
                templates.push(Template { top, left, size });
            }
        }
    }
    Ok(TemplateBank {
        grid_w,
        grid_h,
        sizes,
        templates,
    })
}

/// Projects every template through `phi`.
///
/// Each row of `phi` is summed over rectangles via a 2-D prefix sum, so the
/// cost is `O(M (N + templates))` rather than `O(M N templates)`.
pub fn compress_bank(bank: &TemplateBank, phi: &CodeMatrix) -> Result<CompressedBank> {
    let (gw, gh) = (bank.grid_w, bank.grid_h);
    if phi.cols() != gw * gh {
        return Err(Error::dims(
            format!("{} columns", gw * gh),
            format!("{} columns", phi.cols()),
        ));
    }
    let m = phi.rows();
    let count = bank.templates.len();
    let mut vectors = vec![0.0; count * m];
    let stride = gw + 1;
    let mut integral = vec![0.0f64; (gh + 1) * stride];
    for r in 0..m {
        let row = phi.row(r);
        for y in 0..gh {
            let mut run = 0.0;
            for x in 0..gw {
                run += f64::from(row[y * gw + x]);
                integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + run;
            }
        }
        for (k, t) in bank.templates.iter().enumerate() {
            let (y0, x0, y1, x1) = (t.top, t.left, t.top + t.size, t.left + t.size);
            let sum = integral[y1 * stride + x1] - integral[y0 * stride + x1]
                - integral[y1 * stride + x0]
                + integral[y0 * stride + x0];
            vectors[k * m + r] = sum * t.value();
        }
    }
    let norms: Vec<f64> = vectors.chunks_exact(m).map(l2_norm).collect();
    if let Some((index, &norm)) = norms.iter().enumerate().find(|(_, &n)| n < 1e-12) {
        return Err(Error::RankDeficiency { index, norm });
    }
    Ok(CompressedBank {
        bank: bank.clone(),
        code: phi.spec(),
        vectors,
        norms,
    })
}

/// Uncompressed matched filter. Returns `None` when `||y|| < activity_threshold`.
pub fn extract_center(
    y: &BlockVector,
    bank: &TemplateBank,
    activity_threshold: f64,
) -> Result<Option<MotionCenter>> {
    if y.grid_w() != bank.grid_w || y.grid_h() != bank.grid_h {
        return Err(Error::dims(
            format!("{}x{} grid", bank.grid_w, bank.grid_h),
            format!("{}x{} grid", y.grid_w(), y.grid_h()),
        ));
    }
    let norm = y.norm();
    if norm < activity_threshold || norm == 0.0 {
        return Ok(None);
    }
    let values = y.values();
    let best = argmax(
        bank.templates
            .iter()
            .map(|t| t.correlate(values, bank.grid_w) / norm),
    );
    Ok(best.map(|(k, score)| MotionCenter::from_template(&bank.templates[k], k, score)))
}

/// Matched filter in the compressed domain. Returns `None` when
/// `||y_hat|| < activity_threshold`.
pub fn extract_center_compressed(
    y_hat: &MeasurementVector,
    cbank: &CompressedBank,
    activity_threshold: f64,
) -> Result<Option<MotionCenter>> {
    let m = cbank.measurements();
    if y_hat.len() != m {
        return Err(Error::dims(format!("{m} measurements"), y_hat.len()));
    }
    let norm = y_hat.norm();
    if norm < activity_threshold || norm == 0.0 {
        return Ok(None);
    }
    let values = y_hat.values();
    let best = argmax(
        cbank
            .vectors
            .chunks_exact(m)
            .zip(&cbank.norms)
            .map(|(v, &vn)| dot(values, v) / (vn * norm)),
    );
    Ok(best.map(|(k, score)| MotionCenter::from_template(&cbank.bank.templates[k], k, score)))
}

/// Default uncompressed activity gate: 2% of the largest possible block-vector
/// norm, `255 sqrt(N)`.
pub fn default_activity_threshold(n: usize) -> f64 {
    0.02 * 255.0 * (n as f64).sqrt()
}

/// Default compressed activity gate, `theta * sqrt(M) / 2`.
pub fn default_compressed_threshold(theta: f64, m: usize) -> f64 {
    theta * (m as f64).sqrt() * 0.5
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

// strict `>` keeps the first maximum
fn argmax(scores: impl Iterator<Item = f64>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (k, s) in scores.enumerate() {
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((k, s)),
        }
    }
    best
}
