//! Kernel-target alignment spectra.
//!
//! A spectrum pairs each eigen- or singular value (descending) with the
//! absolute Pearson correlation between the corresponding eigenvector and
//! the target. Zero-variance vectors or targets get alignment 0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Mat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentComponent {
    /// 1-based, following the descending value order.
    pub index: usize,
    /// Eigenvalue or singular value this component belongs to.
    pub value: f64,
    /// |pearson(u_i, Y)| in [0, 1].
    pub alignment: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSpectrum {
    pub components: Vec<AlignmentComponent>,
}

impl AlignmentSpectrum {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn alignments(&self) -> impl Iterator<Item = f64> + '_ {
        self.components.iter().map(|c| c.alignment)
    }

    /// Largest alignment over all components ("peak").
    pub fn peak(&self) -> f64 {
        self.alignments().fold(0.0, f64::max)
    }

    /// 1-based index of the best-aligned component.
    pub fn peak_index(&self) -> usize {
        self.components
            .iter()
            .max_by(|a, b| a.alignment.total_cmp(&b.alignment))
            .map_or(0, |c| c.index)
    }

    /// CSV with columns (component, value, alignment).
    pub fn to_csv(&self) -> String {
        let mut out = String::from("component,value,alignment\n");
        for c in &self.components {
            out.push_str(&format!("{},{},{}\n", c.index, c.value, c.alignment));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlignmentSummary {
    /// Alignment of the first (largest-value) component.
    pub first: f64,
    /// Best alignment over all provided components.
    pub best: f64,
    /// Mean of the 5 largest alignments among the first 10 components.
    pub top5_of_10: f64,
}

/// Pearson correlation; 0 when either argument has zero variance.
pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n = a.len() as f64;
    if a.is_empty() {
        return 0.0;
    }
    let mean_a = a.iter().sum::<f64>() / n;
    let mean_b = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in a.iter().zip(b) {
        let da = x - mean_a;
        let db = y - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if var_a <= 0.0 || var_b <= 0.0 {
        return 0.0;
    }
    cov / (var_a.sqrt() * var_b.sqrt())
}

/// Alignment spectrum over the first `n_components` columns of `u`.
///
/// `values` supplies the ordering key (eigenvalues or singular values,
/// already descending, as produced by the `linalg` solvers).
pub fn alignment_spectrum(
    u: &Mat,
    values: &[f64],
    y: &[f64],
    n_components: usize,
) -> Result<AlignmentSpectrum> {
    if u.rows() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: u.rows(),
        });
    }
    if y.len() != u.rows() {
        return Err(Error::DimensionMismatch(format!(
            "{} eigenvector rows vs {} targets",
            u.rows(),
            y.len()
        )));
    }
    if n_components > u.cols() || n_components > values.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} components requested from {} columns / {} values",
            n_components,
            u.cols(),
            values.len()
        )));
    }

    let components = (0..n_components)
        .map(|i| {
            let col = u.col(i);
            let r = pearson(&col, y).abs().min(1.0);
            AlignmentComponent {
                index: i + 1,
                value: values[i],
                alignment: r,
            }
        })
        .collect();
    Ok(AlignmentSpectrum { components })
}

/// Unnormalized variant |u_i^T y| for all requested components. The Pearson
/// form is what gets reported; this one exists for energy-conservation
/// checks against ||y||^2.
pub fn alignment_scalar_products(u: &Mat, y: &[f64], n_components: usize) -> Vec<f64> {
    (0..n_components.min(u.cols()))
        .map(|i| {
            let col = u.col(i);
            crate::matrix::dot(&col, y).abs()
        })
        .collect()
}

/// The three scalar summaries: first, best, and mean of the best 5 among the
/// leading 10 components.
pub fn summarize_alignment(spectrum: &AlignmentSpectrum) -> Result<AlignmentSummary> {
    if spectrum.len() < 10 {
        return Err(Error::InsufficientData {
            needed: 10,
            got: spectrum.len(),
        });
    }
    let first = spectrum.components[0].alignment;
    let best = spectrum.peak();
    let mut head: Vec<f64> = spectrum.alignments().take(10).collect();
    head.sort_by(|a, b| b.total_cmp(a));
    let top5_of_10 = head[..5].iter().sum::<f64>() / 5.0;
    Ok(AlignmentSummary {
        first,
        best,
        top5_of_10,
    })
}
