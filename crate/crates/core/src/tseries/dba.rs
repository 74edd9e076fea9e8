use rayon::prelude::*;

use crate::error::{Error, Result};

use super::dtw::{dtw_with, Alignment, DtwParams};
use super::{CenterSeq, Point};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DbaParams {
    pub max_iter: usize,
    /// Stop once an iteration lowers the total DTW cost by less than this.
    pub tol: f64,
    pub dtw: DtwParams,
}

impl Default for DbaParams {
    fn default() -> Self {
        Self {
            max_iter: 30,
            tol: 1e-6,
            dtw: DtwParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DbaResult {
    pub barycenter: CenterSeq,
    /// Total DTW cost of the accepted barycenter after each iteration; entry 0
    /// is the cost of the initial barycenter.
    pub objective: Vec<f64>,
}

/// DTW barycenter averaging with a fixed output length.
///
/// Each iteration aligns every sequence to the current barycenter and moves
/// each barycenter point to the mean of the points matched to it. The mean
/// minimizes squared, not plain, Euclidean cost, so an update can occasionally
/// raise the DTW objective; such an update is discarded and iteration stops,
/// which keeps the objective trace non-increasing.
pub fn dba(
    sequences: &[CenterSeq],
    tau: usize,
    init: &[Point],
    params: &DbaParams,
) -> Result<DbaResult> {
    if sequences.is_empty() || init.is_empty() {
        return Err(Error::EmptySequence);
    }
    if init.len() != tau {
        return Err(Error::Length {
            expected: tau,
            actual: init.len(),
        });
    }
    let mut current = init.to_vec();
    let mut alignments = align_all(sequences, &current, &params.dtw)?;
    let mut cost = total(&alignments);
    let mut objective = vec![cost];

    for _ in 0..params.max_iter {
        let candidate = update(sequences, &alignments, tau);
        let cand_alignments = align_all(sequences, &candidate, &params.dtw)?;
        let cand_cost = total(&cand_alignments);
        if cand_cost > cost {
            break;
        }
        let improvement = cost - cand_cost;
        current = candidate;
        alignments = cand_alignments;
        cost = cand_cost;
        objective.push(cost);
        if improvement < params.tol {
            break;
        }
    }
    Ok(DbaResult {
        barycenter: CenterSeq::from_vec_unchecked(current),
        objective,
    })
}

// alignments are (sequence, barycenter) so barycenter indices are the `j`s
fn align_all(
    sequences: &[CenterSeq],
    barycenter: &[Point],
    params: &DtwParams,
) -> Result<Vec<Alignment>> {
    sequences
        .par_iter()
        .map(|s| dtw_with(s, barycenter, params))
        .collect()
}

fn total(alignments: &[Alignment]) -> f64 {
    alignments.iter().map(|a| a.distance).sum()
}

fn update(sequences: &[CenterSeq], alignments: &[Alignment], tau: usize) -> Vec<Point> {
    let mut sums = vec![(0.0f64, 0.0f64); tau];
    let mut counts = vec![0usize; tau];
    for (seq, al) in sequences.iter().zip(alignments) {
        for &(i, j) in al.path.pairs() {
            sums[j].0 += seq[i].x;
            sums[j].1 += seq[i].y;
            counts[j] += 1;
        }
    }
    sums.iter()
        .zip(&counts)
        .map(|(&(sx, sy), &c)| Point::new(sx / c as f64, sy / c as f64))
        .collect()
}
