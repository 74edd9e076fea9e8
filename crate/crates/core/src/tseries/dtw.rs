use crate::error::{Error, Result};

use super::Point;

/// Optional Sakoe-Chiba band. `None` (the default) leaves warping unconstrained.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DtwParams {
    pub window: Option<usize>,
}

/// Monotone warping path as 0-based `(i, j)` index pairs into `(a, b)`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WarpPath(pub Vec<(usize, usize)>);

impl WarpPath {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Indices into `b` matched to index `i` of `a`, in path order.
    pub fn matches_of_a(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().filter(move |p| p.0 == i).map(|p| p.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Alignment {
    pub distance: f64,
    pub path: WarpPath,
}

/// Result of subsequence matching: `buffer[start..=end]` aligned to the template.
#[derive(Debug, Clone, PartialEq)]
pub struct OpenEndAlignment {
    pub distance: f64,
    pub start: usize,
    pub end: usize,
    /// Pairs are `(buffer index, template index)`.
    pub path: WarpPath,
}

/// Full DTW with Euclidean local cost and unnormalized path sums.
///
/// Traceback prefers the diagonal step, then advancing in `a` only, then
/// advancing in `b` only.
pub fn dtw(a: &[Point], b: &[Point]) -> Result<Alignment> {
    dtw_with(a, b, &DtwParams::default())
}

pub fn dtw_with(a: &[Point], b: &[Point], params: &DtwParams) -> Result<Alignment> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cost = CostMatrix::fill(a, b, params.window, false);
    let (n, m) = (a.len(), b.len());
    let distance = cost.at(n - 1, m - 1);
    let path = cost.traceback(n - 1, m - 1, false);
    Ok(Alignment { distance, path })
}

/// Subsequence DTW: the template must be matched completely, the buffer may be
/// entered and left anywhere.
pub fn dtw_open_end(buffer: &[Point], template: &[Point]) -> Result<OpenEndAlignment> {
    if buffer.is_empty() || template.is_empty() {
        return Err(Error::EmptySequence);
    }
    let cost = CostMatrix::fill(buffer, template, None, true);
    let last = template.len() - 1;
    let mut end = 0;
    for i in 1..buffer.len() {
        if cost.at(i, last) < cost.at(end, last) {
            end = i;
        }
    }
    let distance = cost.at(end, last);
    let path = cost.traceback(end, last, true);
    let start = path.0[0].0;
    Ok(OpenEndAlignment {
        distance,
        start,
        end,
        path,
    })
}

struct CostMatrix {
    cols: usize,
    cells: Vec<f64>,
}

impl CostMatrix {
    /// Accumulated cost; with `free_start`, column 0 restarts at every row.
    fn fill(a: &[Point], b: &[Point], window: Option<usize>, free_start: bool) -> Self {
        let (n, m) = (a.len(), b.len());
        let band = window.map(|w| w.max(n.abs_diff(m)));
        let mut cells = vec![f64::INFINITY; n * m];
        for i in 0..n {
            let (lo, hi) = match band {
                Some(w) => (i.saturating_sub(w), (i + w).min(m - 1)),
                None => (0, m - 1),
            };
            for j in lo..=hi {
                let d = a[i].dist(&b[j]);
                let prev = if i == 0 && j == 0 {
                    0.0
                } else if j == 0 {
                    if free_start {
                        0.0
                    } else {
                        cells[(i - 1) * m]
                    }
                } else if i == 0 {
                    cells[j - 1]
                } else {
                    let diag = cells[(i - 1) * m + j - 1];
                    let up = cells[(i - 1) * m + j];
                    let left = cells[i * m + j - 1];
                    diag.min(up).min(left)
                };
                cells[i * m + j] = d + prev;
            }
        }
        Self { cols: m, cells }
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.cols + j]
    }

    fn traceback(&self, mut i: usize, mut j: usize, free_start: bool) -> WarpPath {
        let mut path = vec![(i, j)];
        loop {
            if j == 0 && (free_start || i == 0) {
                break;
            }
            let (ni, nj) = if i == 0 {
                (0, j - 1)
            } else if j == 0 {
                (i - 1, 0)
            } else {
                let diag = self.at(i - 1, j - 1);
                let up = self.at(i - 1, j);
                let left = self.at(i, j - 1);
                if diag <= up && diag <= left {
                    (i - 1, j - 1)
                } else if up <= left {
                    (i - 1, j)
                } else {
                    (i, j - 1)
                }
            };
            i = ni;
            j = nj;
            path.push((i, j));
        }
        path.reverse();
        WarpPath(path)
    }
}
