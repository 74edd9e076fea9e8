//! Time-series kernels over 2-D motion-center sequences.
//!
//! * [`dtw`] / [`dtw_open_end`]: full and subsequence dynamic time warping
//!   with path recovery.
//! * [`dba`]: DTW barycenter averaging to a fixed output length.
//! * [`kmeans_dtw`]: K-means under DTW with DBA centers ("super samples").
//! * [`rescale`]: length rescaling of an arbitrary sequence onto the length of
//!   its nearest super sample, following the DTW matching.

mod dba;
mod dtw;
mod kmeans;
mod rescale;

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dba::{dba, DbaParams, DbaResult};
pub use dtw::{dtw, dtw_open_end, dtw_with, Alignment, DtwParams, OpenEndAlignment, WarpPath};
pub use kmeans::{kmeans_dtw, Clustering, KMeansParams};
pub use rescale::{rescale, rescale_with, Rescaled};

/// A 2-D point; motion centers use normalized image coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dist(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl From<[f64; 2]> for Point {
    fn from([x, y]: [f64; 2]) -> Self {
        Self { x, y }
    }
}

impl From<Point> for [f64; 2] {
    fn from(p: Point) -> Self {
        [p.x, p.y]
    }
}

impl From<(f64, f64)> for Point {
    fn from((x, y): (f64, f64)) -> Self {
        Self { x, y }
    }
}

/// A nonempty sequence of finite points.
///
/// Sequences produced by extraction lie in `[0, 1]^2`; see
/// [`CenterSeq::is_normalized`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point>", into = "Vec<Point>")]
pub struct CenterSeq(Vec<Point>);

impl CenterSeq {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySequence);
        }
        if points.iter().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
            return Err(Error::Config("sequence contains non-finite coordinates".into()));
        }
        Ok(Self(points))
    }

    /// Builds a sequence from `(x, y)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Result<Self> {
        Self::new(pairs.iter().copied().map(Point::from).collect())
    }

    pub fn points(&self) -> &[Point] {
        &self.0
    }

    pub fn into_points(self) -> Vec<Point> {
        self.0
    }

    /// True when every coordinate lies in `[0, 1]`.
    pub fn is_normalized(&self) -> bool {
        self.0
            .iter()
            .all(|p| (0.0..=1.0).contains(&p.x) && (0.0..=1.0).contains(&p.y))
    }

    pub(crate) fn from_vec_unchecked(points: Vec<Point>) -> Self {
        debug_assert!(!points.is_empty());
        Self(points)
    }
}

impl Deref for CenterSeq {
    type Target = [Point];

    fn deref(&self) -> &[Point] {
        &self.0
    }
}

impl AsRef<[Point]> for CenterSeq {
    fn as_ref(&self) -> &[Point] {
        &self.0
    }
}

impl TryFrom<Vec<Point>> for CenterSeq {
    type Error = Error;

    fn try_from(points: Vec<Point>) -> Result<Self> {
        Self::new(points)
    }
}

impl From<CenterSeq> for Vec<Point> {
    fn from(seq: CenterSeq) -> Self {
        seq.0
    }
}

/// A length-`tau` cluster barycenter with its class label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuperSample {
    pub label: String,
    pub cluster: usize,
    pub points: CenterSeq,
}

/// Linear resampling to `len` points by uniform index interpolation.
pub fn resample_linear(seq: &[Point], len: usize) -> Result<CenterSeq> {
    if seq.is_empty() || len == 0 {
        return Err(Error::EmptySequence);
    }
    if len == 1 {
        return Ok(CenterSeq(vec![seq[0]]));
    }
    let last = (seq.len() - 1) as f64;
    let points = (0..len)
        .map(|k| {
            let pos = k as f64 * last / (len - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = (lo + 1).min(seq.len() - 1);
            let w = pos - lo as f64;
            Point::new(
                seq[lo].x + w * (seq[hi].x - seq[lo].x),
                seq[lo].y + w * (seq[hi].y - seq[lo].y),
            )
        })
        .collect();
    Ok(CenterSeq(points))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn resample_endpoints_and_length() {
        let s = CenterSeq::from_pairs(&[(0.0, 0.0), (1.0, 0.5), (0.0, 1.0)]).unwrap();
        let r = resample_linear(&s, 5).unwrap();
        assert_eq!(r.len(), 5);
        assert_eq!(r[0], s[0]);
        assert_eq!(r[4], s[2]);
        assert_eq!(r[2], s[1]);
        assert_eq!(r[1], Point::new(0.5, 0.25));
        let single = resample_linear(&[Point::new(0.2, 0.3)], 4).unwrap();
        assert!(single.iter().all(|p| *p == Point::new(0.2, 0.3)));
    }

    #[test]
    fn center_seq_validation() {
        assert!(matches!(CenterSeq::new(vec![]), Err(Error::EmptySequence)));
        assert!(CenterSeq::new(vec![Point::new(f64::NAN, 0.0)]).is_err());
        let s = CenterSeq::from_pairs(&[(1.0, 2.0)]).unwrap();
        assert!(!s.is_normalized());
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, "[[1.0,2.0]]");
        assert_eq!(serde_json::from_str::<CenterSeq>(&json).unwrap(), s);
        assert!(serde_json::from_str::<CenterSeq>("[]").is_err());
    }
}
