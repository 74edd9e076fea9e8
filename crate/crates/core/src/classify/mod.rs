//! Fixed-length feature vectors, PCA embedding and a Gaussian
//! maximum-likelihood classifier with an ellipsoidal rejection region.

mod gaussian;
mod pca;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tseries::{CenterSeq, Point};

pub use gaussian::{classify, gaussian_fit, ClassGaussian, Verdict, DEFAULT_CHI2_THRESHOLD};
pub use pca::{pca_fit, pca_project, PcaModel};

/// `[x_1 .. x_tau, y_1 .. y_tau]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Concatenates all x coordinates followed by all y coordinates.
pub fn vectorize(s: &[Point], tau: usize) -> Result<FeatureVector> {
    if s.len() != tau {
        return Err(Error::Length {
            expected: tau,
            actual: s.len(),
        });
    }
    Ok(FeatureVector(
        s.iter().map(|p| p.x).chain(s.iter().map(|p| p.y)).collect(),
    ))
}

/// Inverse of [`vectorize`].
pub fn devectorize(v: &FeatureVector) -> Result<CenterSeq> {
    if v.is_empty() || v.len() % 2 != 0 {
        return Err(Error::Length {
            expected: v.len() + v.len() % 2,
            actual: v.len(),
        });
    }
    let tau = v.len() / 2;
    CenterSeq::new(
        (0..tau)
            .map(|i| Point::new(v.0[i], v.0[tau + i]))
            .collect(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn vectorize_orders_x_then_y() {
        let s = CenterSeq::from_pairs(&[(1.0, 2.0), (3.0, 4.0)]).unwrap();
        assert_eq!(vectorize(&s, 2).unwrap().0, vec![1.0, 3.0, 2.0, 4.0]);
    }

    #[test]
    fn vectorize_dimension() {
        let s = CenterSeq::new(vec![Point::new(0.5, 0.5); 116]).unwrap();
        assert_eq!(vectorize(&s, 116).unwrap().len(), 232);
    }

    #[test]
    fn vectorize_rejects_wrong_length() {
        let s = CenterSeq::new(vec![Point::new(0.5, 0.5); 5]).unwrap();
        assert!(matches!(vectorize(&s, 4), Err(Error::Length { expected: 4, actual: 5 })));
    }

    proptest! {
        #[test]
        fn devectorize_inverts(pts in proptest::collection::vec((0.0f64..1.0, 0.0f64..1.0), 1..40)) {
            let s = CenterSeq::from_pairs(&pts).unwrap();
            let v = vectorize(&s, s.len()).unwrap();
            prop_assert_eq!(devectorize(&v).unwrap(), s);
        }
    }
}
