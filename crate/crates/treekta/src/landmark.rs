//! Landmark (prototype) learning on kernel similarities.
//!
//! A landmark design is the n x n_L slice of the train kernel at a random
//! subset of columns. A linear predictor is fit on those similarity features
//! through the normal equations, and alignment spectra come from the thin
//! SVD of the design: singular values order the components, left singular
//! vectors play the role of eigenvectors.

use rand_chacha::ChaCha8Rng;

use crate::alignment::{alignment_spectrum, AlignmentSpectrum};
use crate::error::{Error, Result};
use crate::kernel::KernelMatrix;
use crate::krr::RIDGE_GRID;
use crate::linalg::{solve_spd, thin_svd};
use crate::matrix::Mat;

#[derive(Debug, Clone)]
pub struct LandmarkDesign {
    landmark_indices: Vec<usize>,
    matrix: Mat,
}

impl LandmarkDesign {
    /// Columns of the train kernel at the selected landmark rows.
    pub fn from_kernel(kernel: &KernelMatrix, landmark_indices: &[usize]) -> Result<Self> {
        let n = kernel.n();
        if let Some(&bad) = landmark_indices.iter().find(|&&i| i >= n) {
            return Err(Error::DimensionMismatch(format!(
                "landmark index {} out of range for {} rows",
                bad, n
            )));
        }
        let mut matrix = Mat::zeros(n, landmark_indices.len());
        for i in 0..n {
            for (j, &l) in landmark_indices.iter().enumerate() {
                matrix.set(i, j, kernel.at(i, l));
            }
        }
        Ok(LandmarkDesign {
            landmark_indices: landmark_indices.to_vec(),
            matrix,
        })
    }

    /// Direct construction from a similarity matrix (n x n_L).
    pub fn from_matrix(matrix: Mat, landmark_indices: Vec<usize>) -> Result<Self> {
        if matrix.cols() != landmark_indices.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns vs {} landmark indices",
                matrix.cols(),
                landmark_indices.len()
            )));
        }
        Ok(LandmarkDesign {
            landmark_indices,
            matrix,
        })
    }

    pub fn n(&self) -> usize {
        self.matrix.rows()
    }

    pub fn n_landmarks(&self) -> usize {
        self.matrix.cols()
    }

    pub fn landmark_indices(&self) -> &[usize] {
        &self.landmark_indices
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }
}

/// `n_l` distinct indices drawn uniformly without replacement from 0..n.
pub fn select_landmarks(n: usize, n_l: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    if n_l > n {
        return Err(Error::InvalidConfig(format!(
            "cannot select {} landmarks from {} rows",
            n_l, n
        )));
    }
    if n_l == 0 {
        return Err(Error::InvalidConfig("need at least one landmark".into()));
    }
    Ok(rand::seq::index::sample(rng, n, n_l).into_vec())
}

/// Least-squares coefficients of the landmark predictor, solved through the
/// normal equations. A singular Gram matrix falls back to the same ascending
/// ridge grid the kernel ridge fit uses.
pub fn landmark_fit(design: &LandmarkDesign, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != design.n() {
        return Err(Error::DimensionMismatch(format!(
            "design has {} rows but target has length {}",
            design.n(),
            y.len()
        )));
    }
    if design.matrix.max_abs() == 0.0 {
        return Err(Error::DegenerateDesign);
    }
    let gram = design.matrix.gram();
    let rhs = design.matrix.transpose_mul_vec(y)?;
    match solve_spd(&gram, 0.0, &rhs) {
        Ok(beta) => return Ok(beta),
        Err(Error::NotPositiveDefinite) => {}
        Err(e) => return Err(e),
    }
    for &ridge in &RIDGE_GRID {
        match solve_spd(&gram, ridge, &rhs) {
            Ok(beta) => return Ok(beta),
            Err(Error::NotPositiveDefinite) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(Error::KernelUnusable)
}

/// Fitted values `L beta`.
pub fn landmark_predict(design: &LandmarkDesign, beta: &[f64]) -> Result<Vec<f64>> {
    design.matrix.mul_vec(beta)
}

/// Alignment spectrum of the landmark design: thin SVD, then correlations of
/// the left singular vectors with the target.
pub fn landmark_alignment(
    design: &LandmarkDesign,
    y: &[f64],
    n_components: usize,
) -> Result<AlignmentSpectrum> {
    if n_components > design.n_landmarks() {
        return Err(Error::DimensionMismatch(format!(
            "{} components requested from {} landmarks",
            n_components,
            design.n_landmarks()
        )));
    }
    let svd = thin_svd(&design.matrix)?;
    alignment_spectrum(&svd.u, &svd.singular_values, y, n_components)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::alignment::pearson;
    use crate::kernel::kernel_matrix;
    use crate::linalg::sym_eig;
    use crate::rf::fit_rf;
    use crate::simgen::{generate, ScenarioFamily, ScenarioSpec};
    use crate::tree::TreeConfig;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn selection_shapes() {
        let mut r = rng(1);
        let all = select_landmarks(10, 10, &mut r).unwrap();
        let mut sorted = all.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, (0..10).collect::<Vec<_>>());

        let one = select_landmarks(10, 1, &mut r).unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0] < 10);

        assert!(select_landmarks(5, 6, &mut r).is_err());
    }

    #[test]
    fn selection_deterministic() {
        let a = select_landmarks(100, 20, &mut rng(7)).unwrap();
        let b = select_landmarks(100, 20, &mut rng(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn identity_design_recovers_targets() {
        let n = 6;
        let design =
            LandmarkDesign::from_matrix(Mat::identity(n), (0..n).collect()).unwrap();
        let y: Vec<f64> = (0..n).map(|i| i as f64 - 2.5).collect();
        let beta = landmark_fit(&design, &y).unwrap();
        for (b, t) in beta.iter().zip(&y) {
            assert!((b - t).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_target_zero_coefficients() {
        let design =
            LandmarkDesign::from_matrix(Mat::identity(4), (0..4).collect()).unwrap();
        let beta = landmark_fit(&design, &[0.0; 4]).unwrap();
        assert!(beta.iter().all(|&b| b == 0.0));
    }

    #[test]
    fn all_zero_design_rejected() {
        let design = LandmarkDesign::from_matrix(Mat::zeros(5, 2), vec![0, 1]).unwrap();
        assert!(matches!(
            landmark_fit(&design, &[1.0; 5]),
            Err(Error::DegenerateDesign)
        ));
    }

    #[test]
    fn matches_normal_equations_oracle() {
        let mut r = rng(3);
        let n = 40;
        let n_l = 5;
        let mut m = Mat::zeros(n, n_l);
        for i in 0..n {
            for j in 0..n_l {
                m.set(i, j, r.gen_range(0.0..1.0));
            }
        }
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-2.0..2.0)).collect();
        let design = LandmarkDesign::from_matrix(m.clone(), (0..n_l).collect()).unwrap();
        let beta = landmark_fit(&design, &y).unwrap();

        // explicit (L^T L)^{-1} L^T y via the Gauss-Jordan oracle
        let gram = m.transpose().matmul(&m).unwrap();
        let inv = crate::linalg::tests::invert_dense(&gram);
        let expect = inv.mul_vec(&m.transpose_mul_vec(&y).unwrap()).unwrap();
        for j in 0..n_l {
            assert!(
                (beta[j] - expect[j]).abs() < 1e-7,
                "beta[{}]: {} vs {}",
                j,
                beta[j],
                expect[j]
            );
        }
    }

    #[test]
    fn invertible_square_design_interpolates() {
        let mut r = rng(5);
        let n = 8;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, r.gen_range(0.0..1.0) + if i == j { 1.0 } else { 0.0 });
            }
        }
        let y: Vec<f64> = (0..n).map(|_| r.gen_range(-1.0..1.0)).collect();
        let design = LandmarkDesign::from_matrix(m, (0..n).collect()).unwrap();
        let beta = landmark_fit(&design, &y).unwrap();
        let fitted = landmark_predict(&design, &beta).unwrap();
        for i in 0..n {
            assert!((fitted[i] - y[i]).abs() < 1e-6);
        }
    }

    #[test]
    fn column_order_does_not_change_fitted_values() {
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 30, 5, 2);
        let data = generate(&spec).unwrap();
        let forest = fit_rf(&data, 20, &TreeConfig::for_forest(data.p()), 0).unwrap();
        let k = kernel_matrix(&forest, &data).unwrap();

        let idx = vec![3, 11, 19, 27];
        let design = LandmarkDesign::from_kernel(&k, &idx).unwrap();
        let beta = landmark_fit(&design, data.y()).unwrap();
        let fitted = landmark_predict(&design, &beta).unwrap();

        let mut reversed = idx.clone();
        reversed.reverse();
        let design_r = LandmarkDesign::from_kernel(&k, &reversed).unwrap();
        let beta_r = landmark_fit(&design_r, data.y()).unwrap();
        let fitted_r = landmark_predict(&design_r, &beta_r).unwrap();
        for i in 0..data.n() {
            assert!((fitted[i] - fitted_r[i]).abs() < 1e-7);
        }
    }

    #[test]
    fn rank_one_design_alignment_is_column_correlation() {
        let n = 12;
        let mut m = Mat::zeros(n, 3);
        let col: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin().abs()).collect();
        for i in 0..n {
            m.set(i, 0, col[i]);
        }
        let y: Vec<f64> = (0..n).map(|i| i as f64).collect();
        let design = LandmarkDesign::from_matrix(m, vec![0, 1, 2]).unwrap();
        let spec = landmark_alignment(&design, &y, 3).unwrap();
        assert!(spec.components[0].value > 0.0);
        assert!(spec.components[1].value.abs() < 1e-12);
        let expect = pearson(&col, &y).abs();
        assert!((spec.components[0].alignment - expect).abs() < 1e-10);
    }

    #[test]
    fn full_kernel_landmarks_reproduce_kernel_spectrum() {
        // with n_L = n and L = K, left singular vectors of L are eigenvectors
        // of K^2, i.e. the same eigenvectors as K for a PSD kernel
        let spec = ScenarioSpec::new(ScenarioFamily::Friedman, 50, 6, 23);
        let data = generate(&spec).unwrap();
        let forest = fit_rf(&data, 30, &TreeConfig::for_forest(data.p()), 11).unwrap();
        let k = kernel_matrix(&forest, &data).unwrap();

        let design = LandmarkDesign::from_kernel(&k, &(0..data.n()).collect::<Vec<_>>()).unwrap();
        let landmark_spec = landmark_alignment(&design, data.y(), 20).unwrap();

        let eig = sym_eig(k.values()).unwrap();
        let kernel_spec =
            alignment_spectrum(&eig.eigenvectors, &eig.eigenvalues, data.y(), 20).unwrap();

        for (l, e) in landmark_spec
            .components
            .iter()
            .zip(&kernel_spec.components)
        {
            assert!(
                (l.alignment - e.alignment).abs() < 1e-6,
                "component {}: {} vs {}",
                l.index,
                l.alignment,
                e.alignment
            );
            // singular values of a PSD matrix are its eigenvalues
            assert!((l.value - e.value).abs() < 1e-8);
        }
    }

    #[test]
    fn squared_singular_values_match_outer_gram_eigenvalues() {
        let spec = ScenarioSpec::new(ScenarioFamily::Meier1, 35, 4, 4);
        let data = generate(&spec).unwrap();
        let forest = fit_rf(&data, 15, &TreeConfig::for_forest(data.p()), 6).unwrap();
        let k = kernel_matrix(&forest, &data).unwrap();
        let idx = select_landmarks(data.n(), 10, &mut rng(2)).unwrap();
        let design = LandmarkDesign::from_kernel(&k, &idx).unwrap();

        let svd = thin_svd(design.matrix()).unwrap();
        let outer = design
            .matrix()
            .matmul(&design.matrix().transpose())
            .unwrap();
        let eig = sym_eig(&outer).unwrap();
        for j in 0..design.n_landmarks() {
            assert!(
                (svd.singular_values[j].powi(2) - eig.eigenvalues[j]).abs() < 1e-8,
                "sigma_{}^2 = {} vs lambda = {}",
                j,
                svd.singular_values[j].powi(2),
                eig.eigenvalues[j]
            );
        }
    }

    #[test]
    fn design_rows_at_landmarks_have_unit_entry() {
        let spec = ScenarioSpec::new(ScenarioFamily::Meier2, 20, 4, 0);
        let data = generate(&spec).unwrap();
        let forest = fit_rf(&data, 8, &TreeConfig::for_forest(data.p()), 1).unwrap();
        let k = kernel_matrix(&forest, &data).unwrap();
        let idx = vec![2, 9, 15];
        let design = LandmarkDesign::from_kernel(&k, &idx).unwrap();
        for (j, &l) in idx.iter().enumerate() {
            assert_eq!(design.matrix().at(l, j), 1.0);
        }
        for v in design.matrix().data() {
            assert!((0.0..=1.0).contains(v));
        }
    }
}
