//! Frame ingestion and the two compression layers.
//!
//! A difference image is first mean-pooled over `B x B` pixel blocks, giving a
//! low-resolution [`BlockVector`] of length `N`. The second layer multiplies
//! that vector by a `M x N` matrix of random signs ([`CodeMatrix`]), giving an
//! `M`-entry [`MeasurementVector`]. The block averaging operator is never
//! materialized; [`block_average`] is a single pass over the pixels.
//!
//! Every 2-D quantity is vectorized in row-major order.

pub mod pgm;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SplitMix64;

/// An 8-bit grayscale image, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl Frame {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::dims("nonzero frame size", format!("{width}x{height}")));
        }
        if pixels.len() != width * height {
            return Err(Error::dims(
                format!("{} pixels", width * height),
                format!("{} pixels", pixels.len()),
            ));
        }
        Ok(Self {
            width,
            height,
            pixels,
        })
    }

    /// A frame filled with a single intensity.
    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixels_mut(&mut self) -> &mut [u8] {
        &mut self.pixels
    }

    /// Pixel at column `x`, row `y`.
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.width + x]
    }

    fn same_shape(&self, other: &Frame) -> Result<()> {
        if self.width != other.width || self.height != other.height {
            return Err(Error::dims(
                format!("{}x{}", self.width, self.height),
                format!("{}x{}", other.width, other.height),
            ));
        }
        Ok(())
    }
}

/// Absolute difference of two consecutive frames.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffImage {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl DiffImage {
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Block-averaged difference image, `grid_h` rows of `grid_w` blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockVector {
    grid_w: usize,
    grid_h: usize,
    values: Vec<f64>,
}

impl BlockVector {
    /// Wraps raw block values; `values.len()` must equal `grid_w * grid_h`.
    pub fn from_values(grid_w: usize, grid_h: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid_w * grid_h || values.is_empty() {
            return Err(Error::dims(
                format!("{} block values", grid_w * grid_h),
                values.len(),
            ));
        }
        Ok(Self {
            grid_w,
            grid_h,
            values,
        })
    }

    pub fn grid_w(&self) -> usize {
        self.grid_w
    }

    pub fn grid_h(&self) -> usize {
        self.grid_h
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.values)
    }
}

/// Random `+1/-1` measurement matrix, fully determined by `(rows, cols, seed)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeMatrix {
    rows: usize,
    cols: usize,
    seed: u64,
    entries: Vec<i8>,
}

/// The persisted identity of a [`CodeMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeSpec {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
}

impl CodeMatrix {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn spec(&self) -> CodeSpec {
        CodeSpec {
            rows: self.rows,
            cols: self.cols,
            seed: self.seed,
        }
    }

    pub fn entries(&self) -> &[i8] {
        &self.entries
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    /// Multiplies an arbitrary length-`cols` vector.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(Error::dims(format!("length {}", self.cols), x.len()));
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r)
                    .iter()
                    .zip(x)
                    .map(|(&s, &v)| if s > 0 { v } else { -v })
                    .sum()
            })
            .collect())
    }
}

/// Compressed measurements of one difference image.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementVector(Vec<f64>);

impl MeasurementVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.0)
    }
}

pub(crate) fn l2_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Loads every `*.pgm` file of a directory, ordered by file name.
pub fn load_frame_sequence(dir: &Path) -> Result<Vec<Frame>> {
    let mut paths: Vec<_> = fs::read_dir(dir)?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .is_some_and(|ext| ext.eq_ignore_ascii_case("pgm"))
        })
        .collect();
    paths.sort_by(|a, b| a.file_name().cmp(&b.file_name()));
    if paths.len() < 2 {
        return Err(Error::InsufficientFrames { found: paths.len() });
    }
    let frames = paths
        .iter()
        .map(|p| pgm::read(p))
        .collect::<Result<Vec<_>>>()?;
    for f in &frames[1..] {
        frames[0].same_shape(f)?;
    }
    Ok(frames)
}

/// Per-pixel `|next - prev|`.
pub fn diff_image(prev: &Frame, next: &Frame) -> Result<DiffImage> {
    prev.same_shape(next)?;
    let values = prev
        .pixels
        .iter()
        .zip(&next.pixels)
        .map(|(&a, &b)| f64::from(a.abs_diff(b)))
        .collect();
    Ok(DiffImage {
        width: prev.width,
        height: prev.height,
        values,
    })
}

/// Mean of each `block x block` tile, row-major over the block grid.
pub fn block_average(d: &DiffImage, block: usize) -> Result<BlockVector> {
    if block == 0 || d.width % block != 0 || d.height % block != 0 {
        return Err(Error::BlockSize {
            block,
            width: d.width,
            height: d.height,
        });
    }
    let grid_w = d.width / block;
    let grid_h = d.height / block;
    let mut sums = vec![0.0; grid_w * grid_h];
    for (y, row) in d.values.chunks_exact(d.width).enumerate() {
        let out = &mut sums[(y / block) * grid_w..(y / block + 1) * grid_w];
        for (bx, tile) in row.chunks_exact(block).enumerate() {
            out[bx] += tile.iter().sum::<f64>();
        }
    }
    let area = (block * block) as f64;
    sums.iter_mut().for_each(|s| *s /= area);
    Ok(BlockVector {
        grid_w,
        grid_h,
        values: sums,
    })
}

/// Generates the `rows x cols` sign matrix for `seed`.
///
/// Entry `k` (row-major) is `+1` when the low bit of the `k`-th SplitMix64
/// output is set and `-1` otherwise, so any implementation of the same
/// generator reproduces the matrix bit for bit.
pub fn make_phi(rows: usize, cols: usize, seed: u64) -> Result<CodeMatrix> {
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyMatrix { rows, cols });
    }
    let mut rng = SplitMix64::new(seed);
    let entries = (0..rows * cols)
        .map(|_| if rng.next_u64() & 1 == 1 { 1 } else { -1 })
        .collect();
    Ok(CodeMatrix {
        rows,
        cols,
        seed,
        entries,
    })
}

impl CodeSpec {
    pub fn build(&self) -> Result<CodeMatrix> {
        make_phi(self.rows, self.cols, self.seed)
    }
}

/// Compressed measurements `phi * y`.
pub fn project(phi: &CodeMatrix, y: &BlockVector) -> Result<MeasurementVector> {
    phi.apply(&y.values).map(MeasurementVector)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_frame(rng: &mut ChaCha8Rng, w: usize, h: usize) -> Frame {
        Frame::new(w, h, (0..w * h).map(|_| rng.random()).collect()).unwrap()
    }

    #[test]
    fn identical_frames_give_zero_diff() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = random_frame(&mut rng, 6, 4);
        assert!(diff_image(&f, &f).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn diff_matches_per_pixel_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_frame(&mut rng, 8, 8);
        let b = random_frame(&mut rng, 8, 8);
        let d = diff_image(&a, &b).unwrap();
        for y in 0..8 {
            for x in 0..8 {
                let expected = (a.get(x, y) as i32 - b.get(x, y) as i32).abs() as f64;
                assert_eq!(d.values()[y * 8 + x], expected);
            }
        }
        assert_eq!(d, diff_image(&b, &a).unwrap());
    }

    #[test]
    fn diff_rejects_mismatched_frames() {
        let a = Frame::filled(4, 4, 0).unwrap();
        let b = Frame::filled(4, 8, 0).unwrap();
        assert!(matches!(diff_image(&a, &b), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn block_average_of_constant() {
        let a = Frame::filled(12, 6, 7).unwrap();
        let b = Frame::filled(12, 6, 0).unwrap();
        let d = diff_image(&a, &b).unwrap();
        for block in [1, 2, 3, 6] {
            let y = block_average(&d, block).unwrap();
            assert!(y.values().iter().all(|&v| v == 7.0));
        }
    }

    #[test]
    fn block_average_hand_example() {
        let px = [1, 1, 3, 3, 1, 1, 3, 3, 5, 5, 7, 7, 5, 5, 7, 7];
        let f = Frame::new(4, 4, px.to_vec()).unwrap();
        let zero = Frame::filled(4, 4, 0).unwrap();
        let y = block_average(&diff_image(&zero, &f).unwrap(), 2).unwrap();
        assert_eq!(y.values(), &[1.0, 3.0, 5.0, 7.0]);
        assert_eq!((y.grid_w(), y.grid_h()), (2, 2));
    }

    #[test]
    fn block_average_vga_grid() {
        let a = Frame::filled(640, 480, 0).unwrap();
        let y = block_average(&diff_image(&a, &a).unwrap(), 16).unwrap();
        assert_eq!((y.grid_w(), y.grid_h(), y.len()), (40, 30, 1200));
    }

    #[test]
    fn block_average_rejects_bad_block() {
        let a = Frame::filled(10, 8, 0).unwrap();
        let d = diff_image(&a, &a).unwrap();
        assert!(matches!(block_average(&d, 3), Err(Error::BlockSize { .. })));
        assert!(matches!(block_average(&d, 0), Err(Error::BlockSize { .. })));
    }

    #[test]
    fn phi_shape_codomain_and_determinism() {
        let phi = make_phi(200, 768, 42).unwrap();
        assert_eq!((phi.rows(), phi.cols()), (200, 768));
        assert!(phi.entries().iter().all(|&e| e == 1 || e == -1));
        for _ in 0..3 {
            assert_eq!(make_phi(200, 768, 42).unwrap(), phi);
        }
        assert_ne!(make_phi(200, 768, 43).unwrap(), phi);
        assert!(matches!(make_phi(0, 4, 1), Err(Error::EmptyMatrix { .. })));
        assert!(matches!(make_phi(4, 0, 1), Err(Error::EmptyMatrix { .. })));
    }

    #[test]
    fn phi_first_entries_follow_splitmix_low_bit() {
        // SplitMix64(0) reference outputs: e220a8397b1dcdaf, 6e789e6aa1b965f4,
        // 06c45d188009454f, f88bb8a8724c81ec
        let phi = make_phi(1, 4, 0).unwrap();
        assert_eq!(phi.entries(), &[1, -1, 1, -1]);
    }

    #[test]
    fn projection_edge_cases() {
        let phi = make_phi(5, 8, 3).unwrap();
        let zero = BlockVector::from_values(4, 2, vec![0.0; 8]).unwrap();
        assert!(project(&phi, &zero).unwrap().values().iter().all(|&v| v == 0.0));

        // a single all-(+1) row sums the block vector
        let ones = (0..)
            .map(|s| make_phi(1, 3, s).unwrap())
            .find(|m| m.entries().iter().all(|&e| e == 1))
            .unwrap();
        let y = BlockVector::from_values(3, 1, vec![1.5, 2.0, 4.25]).unwrap();
        assert_eq!(project(&ones, &y).unwrap().values(), &[7.75]);

        let short = BlockVector::from_values(2, 2, vec![0.0; 4]).unwrap();
        assert!(matches!(project(&phi, &short), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn projection_matches_naive_matvec() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let phi = make_phi(5, 8, 77).unwrap();
        let vals: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..255.0)).collect();
        let y = BlockVector::from_values(4, 2, vals.clone()).unwrap();
        let got = project(&phi, &y).unwrap();
        for r in 0..5 {
            let mut acc = 0.0;
            for c in 0..8 {
                acc += phi.entries()[r * 8 + c] as f64 * vals[c];
            }
            assert!((got.values()[r] - acc).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn projection_is_linear(
            a in -10.0f64..10.0,
            b in -10.0f64..10.0,
            y1 in proptest::collection::vec(0.0f64..255.0, 12),
            y2 in proptest::collection::vec(0.0f64..255.0, 12),
            seed in any::<u64>(),
        ) {
            let phi = make_phi(7, 12, seed).unwrap();
            let combo: Vec<f64> = y1.iter().zip(&y2).map(|(p, q)| a * p + b * q).collect();
            let lhs = phi.apply(&combo).unwrap();
            let p1 = phi.apply(&y1).unwrap();
            let p2 = phi.apply(&y2).unwrap();
            for i in 0..7 {
                prop_assert!((lhs[i] - (a * p1[i] + b * p2[i])).abs() < 1e-9);
            }
        }

        #[test]
        fn block_average_preserves_mass(
            seed in any::<u64>(),
            block in 1usize..5,
            gw in 1usize..5,
            gh in 1usize..5,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let (w, h) = (gw * block, gh * block);
            let a = random_frame(&mut rng, w, h);
            let b = random_frame(&mut rng, w, h);
            let d = diff_image(&a, &b).unwrap();
            let y = block_average(&d, block).unwrap();
            let lhs: f64 = y.values().iter().sum::<f64>() * (block * block) as f64;
            let rhs: f64 = d.values().iter().sum();
            prop_assert!((lhs - rhs).abs() < 1e-6);
            prop_assert!(y.values().iter().all(|&v| (0.0..=255.0).contains(&v)));
        }

        #[test]
        fn diff_is_symmetric(seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_frame(&mut rng, 5, 3);
            let b = random_frame(&mut rng, 5, 3);
            prop_assert_eq!(diff_image(&a, &b).unwrap(), diff_image(&b, &a).unwrap());
        }
    }
}
