//! Supervised dataset: an n x p feature matrix paired with a continuous target.

use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: Mat,
    targets: Vec<f64>,
}

impl Dataset {
    pub fn new(features: Mat, targets: Vec<f64>) -> Result<Self> {
        if features.rows() != targets.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} feature rows vs {} targets",
                features.rows(),
                targets.len()
            )));
        }
        Ok(Dataset { features, targets })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.features.rows()
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.features.cols()
    }

    #[inline]
    pub fn x(&self, i: usize, j: usize) -> f64 {
        self.features.at(i, j)
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        self.features.row(i)
    }

    #[inline]
    pub fn y(&self) -> &[f64] {
        &self.targets
    }

    pub fn features(&self) -> &Mat {
        &self.features
    }

    /// New dataset holding the given rows, in the given order.
    pub fn select_rows(&self, rows: &[usize]) -> Dataset {
        let p = self.p();
        let mut data = Vec::with_capacity(rows.len() * p);
        let mut y = Vec::with_capacity(rows.len());
        for &r in rows {
            data.extend_from_slice(self.row(r));
            y.push(self.targets[r]);
        }
        Dataset {
            features: Mat::from_vec(rows.len(), p, data).expect("consistent row width"),
            targets: y,
        }
    }
}
