use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};

use super::dba::{dba, DbaParams};
use super::dtw::dtw_with;
use super::{resample_linear, CenterSeq};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansParams {
    pub max_iter: usize,
    pub seed: u64,
    pub dba: DbaParams,
}

impl Default for KMeansParams {
    fn default() -> Self {
        Self {
            max_iter: 20,
            seed: 0,
            dba: DbaParams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustering {
    /// Length-`tau` cluster barycenters.
    pub centers: Vec<CenterSeq>,
    /// Cluster index of every input sample.
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

/// K-means under DTW with DBA barycenters of length `tau`.
///
/// Initial centers are `k` distinct medoids picked greedily by farthest-point
/// traversal from a seeded start sample, each resampled to `tau`.
pub fn kmeans_dtw(
    samples: &[CenterSeq],
    k: usize,
    tau: usize,
    params: &KMeansParams,
) -> Result<Clustering> {
    if k == 0 || k > samples.len() {
        return Err(Error::Config(format!(
            "K = {k} needs between 1 and {} samples",
            samples.len()
        )));
    }
    if tau == 0 {
        return Err(Error::Config("tau must be positive".into()));
    }
    let dtw_params = params.dba.dtw;
    let dist = |a: &CenterSeq, b: &CenterSeq| dtw_with(a, b, &dtw_params).map(|al| al.distance);

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let start = rng.random_range(0..samples.len());
    let mut medoids = vec![start];
    let mut nearest: Vec<f64> = samples
        .par_iter()
        .map(|s| dist(s, &samples[start]))
        .collect::<Result<_>>()?;
    while medoids.len() < k {
        let next = (0..samples.len())
            .filter(|i| !medoids.contains(i))
            .fold(None::<usize>, |best, i| match best {
                Some(b) if nearest[i] <= nearest[b] => Some(b),
                _ => Some(i),
            })
            .expect("k <= sample count");
        medoids.push(next);
        let fresh: Vec<f64> = samples
            .par_iter()
            .map(|s| dist(s, &samples[next]))
            .collect::<Result<_>>()?;
        for (n, f) in nearest.iter_mut().zip(fresh) {
            *n = n.min(f);
        }
    }
    let mut centers = medoids
        .iter()
        .map(|&i| resample_linear(&samples[i], tau))
        .collect::<Result<Vec<_>>>()?;

    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;
    for _ in 0..params.max_iter.max(1) {
        let scored: Vec<(usize, f64)> = samples
            .par_iter()
            .map(|s| {
                let mut best = (0, f64::INFINITY);
                for (c, center) in centers.iter().enumerate() {
                    let d = dist(s, center)?;
                    if d < best.1 {
                        best = (c, d);
                    }
                }
                Ok(best)
            })
            .collect::<Result<_>>()?;
        let mut next: Vec<usize> = scored.iter().map(|s| s.0).collect();
        reseed_empty(&mut next, &scored, &mut centers, samples, tau)?;
        if next == assignments {
            break;
        }
        assignments = next;
        iterations += 1;

        for (c, center) in centers.iter_mut().enumerate() {
            let members: Vec<CenterSeq> = samples
                .iter()
                .zip(&assignments)
                .filter(|(_, &a)| a == c)
                .map(|(s, _)| s.clone())
                .collect();
            *center = dba(&members, tau, center, &params.dba)?.barycenter;
        }
    }
    Ok(Clustering {
        centers,
        assignments,
        iterations,
    })
}

// Gives every empty cluster the sample farthest from its current center,
// taken only from clusters that keep at least one member.
fn reseed_empty(
    assignments: &mut [usize],
    scored: &[(usize, f64)],
    centers: &mut [CenterSeq],
    samples: &[CenterSeq],
    tau: usize,
) -> Result<()> {
    let k = centers.len();
    let mut taken = vec![false; samples.len()];
    loop {
        let mut sizes = vec![0usize; k];
        for &a in assignments.iter() {
            sizes[a] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return Ok(());
        };
        let donor = (0..samples.len())
            .filter(|&i| !taken[i] && sizes[assignments[i]] > 1)
            .fold(None::<usize>, |best, i| match best {
                Some(b) if scored[i].1 <= scored[b].1 => Some(b),
                _ => Some(i),
            })
            .ok_or_else(|| Error::Config("cannot fill empty cluster".into()))?;
        taken[donor] = true;
        assignments[donor] = empty;
        centers[empty] = resample_linear(&samples[donor], tau)?;
    }
}
