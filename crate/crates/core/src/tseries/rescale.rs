use crate::error::{Error, Result};

use super::dtw::{dtw_open_end, dtw_with, DtwParams};
use super::{CenterSeq, Point};

#[derive(Debug, Clone, PartialEq)]
pub struct Rescaled {
    /// The rescaled sequence, exactly as long as the super samples.
    pub points: CenterSeq,
    /// Index of the nearest super sample.
    pub nearest: usize,
    pub distance: f64,
    /// Inclusive window of the input that was used; the whole input unless
    /// open-ended matching trimmed it.
    pub window: (usize, usize),
}

/// DTW length rescaling with unconstrained warping.
pub fn rescale<S: AsRef<[Point]>>(t: &[Point], supers: &[S], open_ended: bool) -> Result<Rescaled> {
    rescale_with(t, supers, open_ended, &DtwParams::default())
}

/// Maps `t` onto the length of its nearest super sample.
///
/// The nearest super sample `S*` is found by DTW (or by subsequence DTW when
/// `open_ended` is set, after which `t` is trimmed to the matched window). For
/// every point of `S*`, the output takes the matched point of `t` closest to
/// it; when only one point of `t` is matched, that point is used as is.
pub fn rescale_with<S: AsRef<[Point]>>(
    t: &[Point],
    supers: &[S],
    open_ended: bool,
    params: &DtwParams,
) -> Result<Rescaled> {
    if t.is_empty() || supers.is_empty() {
        return Err(Error::EmptySequence);
    }
    let tau = supers[0].as_ref().len();
    if tau == 0 {
        return Err(Error::EmptySequence);
    }
    if let Some(bad) = supers.iter().find(|s| s.as_ref().len() != tau) {
        return Err(Error::Config(format!(
            "super samples have mixed lengths ({tau} and {})",
            bad.as_ref().len()
        )));
    }

    let mut nearest = 0;
    let mut best = f64::INFINITY;
    let mut window = (0, t.len() - 1);
    for (k, s) in supers.iter().enumerate() {
        if open_ended {
            let al = dtw_open_end(t, s.as_ref())?;
            if al.distance < best {
                best = al.distance;
                nearest = k;
                window = (al.start, al.end);
            }
        } else {
            let d = dtw_with(s.as_ref(), t, params)?.distance;
            if d < best {
                best = d;
                nearest = k;
            }
        }
    }

    let target = supers[nearest].as_ref();
    let trimmed = &t[window.0..=window.1];
    let alignment = dtw_with(target, trimmed, params)?;
    let mut out = Vec::with_capacity(tau);
    let pairs = alignment.path.pairs();
    let mut cursor = 0;
    for (i, s) in target.iter().enumerate() {
        // path is sorted by i, so the matches of i are one contiguous run
        let mut chosen: Option<(usize, f64)> = None;
        while cursor < pairs.len() && pairs[cursor].0 == i {
            let j = pairs[cursor].1;
            let d = s.dist(&trimmed[j]);
            if chosen.is_none_or(|(_, bd)| d < bd) {
                chosen = Some((j, d));
            }
            cursor += 1;
        }
        let (j, _) = chosen.expect("every index of a full warping path is matched");
        out.push(trimmed[j]);
    }
    Ok(Rescaled {
        points: CenterSeq::from_vec_unchecked(out),
        nearest,
        distance: alignment.distance,
        window,
    })
}
