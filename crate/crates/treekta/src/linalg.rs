//! Dense symmetric eigendecomposition, thin SVD and SPD solves.
//!
//! Two eigensolver routes are provided. [`sym_eig`] runs cyclic Jacobi
//! rotations, which are simple and extremely accurate for the symmetric PSD
//! kernels this crate produces. [`sym_eig_ql`] reduces to tridiagonal form
//! with Householder reflections and diagonalizes with implicit QL shifts;
//! it is an order of magnitude faster for n in the hundreds and above.
//! Both produce the same contract: eigenvalues in descending order, columns
//! of `U` orthonormal, and each eigenvector sign-normalized so that its
//! largest-magnitude entry is positive.

use crate::error::{Error, Result};
use crate::matrix::{dot, Mat};

/// Jacobi convergence: off-diagonal Frobenius norm below this fraction of
/// the input Frobenius norm.
const JACOBI_REL_TOL: f64 = 1e-12;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Relative asymmetry tolerated in eigensolver input.
const SYMMETRY_TOL: f64 = 1e-10;

/// Singular values below this fraction of the largest are treated as zero
/// and their left vectors are completed by re-orthogonalization.
const SVD_NULL_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    /// Descending.
    pub eigenvalues: Vec<f64>,
    /// Orthonormal columns, ordered to match `eigenvalues`.
    pub eigenvectors: Mat,
}

#[derive(Debug, Clone)]
pub struct ThinSvd {
    /// n x r, orthonormal columns.
    pub u: Mat,
    /// Descending, non-negative.
    pub singular_values: Vec<f64>,
    /// n_l x r, orthonormal columns.
    pub v: Mat,
}

fn check_symmetric(a: &Mat) -> Result<()> {
    if a.rows() != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            a.rows(),
            a.cols()
        )));
    }
    let scale = a.max_abs().max(1.0);
    if a.asymmetry() > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric);
    }
    Ok(())
}

/// Symmetric eigendecomposition by cyclic Jacobi rotations.
///
/// Sweeps run until the off-diagonal Frobenius norm drops below
/// `1e-12 * ||A||_F` or 100 sweeps have been applied.
pub fn sym_eig(a: &Mat) -> Result<EigenDecomposition> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            eigenvectors: Mat::zeros(0, 0),
        });
    }

    let mut m = a.clone();
    // vt rows are the current eigenvector estimates (V^T), so rotations touch
    // contiguous memory.
    let mut vt = Mat::identity(n);
    let norm = a.frobenius_norm();
    let tol = JACOBI_REL_TOL * norm;

    for _sweep in 0..JACOBI_MAX_SWEEPS {
        let off = off_diagonal_norm(&m);
        if off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                jacobi_rotate(&mut m, &mut vt, n, p, q);
            }
        }
    }

    let eigenvalues: Vec<f64> = (0..n).map(|i| m.at(i, i)).collect();
    Ok(finish_eig(eigenvalues, vt, n))
}

fn off_diagonal_norm(m: &Mat) -> f64 {
    let n = m.rows();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            let v = m.at(i, j);
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

#[inline]
fn jacobi_rotate(m: &mut Mat, vt: &mut Mat, n: usize, p: usize, q: usize) {
    let apq = m.at(p, q);
    if apq == 0.0 {
        return;
    }
    let app = m.at(p, p);
    let aqq = m.at(q, q);

    // Skip rotations that cannot change the off-diagonal mass at working
    // precision; also guards the t computation below.
    let small = 100.0 * apq.abs();
    if app.abs() + small == app.abs() && aqq.abs() + small == aqq.abs() {
        m.set(p, q, 0.0);
        m.set(q, p, 0.0);
        return;
    }

    let theta = 0.5 * (aqq - app) / apq;
    let t = if theta.abs() > 1e200 {
        0.5 / theta
    } else {
        let sign = if theta >= 0.0 { 1.0 } else { -1.0 };
        sign / (theta.abs() + (1.0 + theta * theta).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    rotate_rows(m.data_mut(), n, p, q, c, s);
    // the row pass produced J^T A; mirroring the rotated rows back into the
    // columns completes J^T A J for symmetric A.
    let new_pp = c * c * app - 2.0 * s * c * apq + s * s * aqq;
    let new_qq = s * s * app + 2.0 * s * c * apq + c * c * aqq;
    {
        let d = m.data_mut();
        d[p * n + p] = new_pp;
        d[q * n + q] = new_qq;
        d[p * n + q] = 0.0;
        d[q * n + p] = 0.0;
        for j in 0..n {
            if j != p && j != q {
                d[j * n + p] = d[p * n + j];
                d[j * n + q] = d[q * n + j];
            }
        }
    }
    rotate_rows(vt.data_mut(), n, p, q, c, s);
}

/// rows[p] <- c*rows[p] - s*rows[q]; rows[q] <- s*rows[p] + c*rows[q]
#[inline]
fn rotate_rows(data: &mut [f64], n: usize, p: usize, q: usize, c: f64, s: f64) {
    let (lo, hi) = if p < q { (p, q) } else { (q, p) };
    let (head, tail) = data.split_at_mut(hi * n);
    let row_hi = &mut tail[..n];
    let row_lo = &mut head[lo * n..lo * n + n];
    if p < q {
        for (a, b) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    } else {
        for (b, a) in row_lo.iter_mut().zip(row_hi.iter_mut()) {
            let x = *a;
            let y = *b;
            *a = c * x - s * y;
            *b = s * x + c * y;
        }
    }
}

/// Sort descending by eigenvalue, transpose vt into column form and fix signs.
fn finish_eig(eigenvalues: Vec<f64>, vt: Mat, n: usize) -> EigenDecomposition {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eigenvalues[b].total_cmp(&eigenvalues[a]));

    let mut values = Vec::with_capacity(n);
    let mut u = Mat::zeros(n, n);
    for (col, &idx) in order.iter().enumerate() {
        values.push(eigenvalues[idx]);
        let row = vt.row(idx);
        let flip = sign_flip(row);
        for i in 0..n {
            u.set(i, col, flip * row[i]);
        }
    }
    EigenDecomposition {
        eigenvalues: values,
        eigenvectors: u,
    }
}

/// -1 if the largest-magnitude entry is negative, else +1.
fn sign_flip(v: &[f64]) -> f64 {
    let mut best = 0.0f64;
    let mut sign = 1.0;
    for &x in v {
        if x.abs() > best {
            best = x.abs();
            sign = if x < 0.0 { -1.0 } else { 1.0 };
        }
    }
    sign
}

/// Symmetric eigendecomposition via Householder tridiagonalization followed
/// by implicit QL with shifts. Same output contract as [`sym_eig`], an order
/// of magnitude faster for n in the hundreds.
pub fn sym_eig_ql(a: &Mat) -> Result<EigenDecomposition> {
    check_symmetric(a)?;
    let n = a.rows();
    if n == 0 {
        return Ok(EigenDecomposition {
            eigenvalues: vec![],
            eigenvectors: Mat::zeros(0, 0),
        });
    }

    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    let reflectors = tridiagonalize(a, &mut d, &mut e);

    // accumulate Q with columns as eigenvector candidates, then transpose so
    // the QL rotations touch contiguous rows
    let q = accumulate_reflectors(&reflectors, n);
    let mut qt = q.transpose();
    ql_implicit(&mut qt, &mut d, &mut e)?;
    Ok(finish_eig(d, qt, n))
}

struct Reflector {
    /// First row/column the reflector acts on.
    offset: usize,
    beta: f64,
    v: Vec<f64>,
}

/// Householder reduction A -> T. Returns the reflectors; (d, e) receive the
/// diagonal and sub-diagonal (e[k] couples rows k-1 and k). All inner loops
/// run along contiguous rows of the symmetric working copy.
fn tridiagonalize(a: &Mat, d: &mut [f64], e: &mut [f64]) -> Vec<Reflector> {
    let n = a.rows();
    let mut w = a.clone();
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    let mut p = vec![0.0; n];

    for k in 0..n.saturating_sub(2) {
        d[k] = w.at(k, k);
        let m = n - k - 1;
        let x = &w.row(k)[k + 1..];
        let norm_x = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm_x == 0.0 {
            e[k + 1] = 0.0;
            reflectors.push(Reflector {
                offset: k + 1,
                beta: 0.0,
                v: vec![0.0; m],
            });
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm_x } else { norm_x };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|t| t * t).sum();
        let beta = if vnorm2 == 0.0 { 0.0 } else { 2.0 / vnorm2 };
        e[k + 1] = alpha;

        if beta != 0.0 {
            // p = beta * B v over the trailing block B = w[k+1.., k+1..]
            for (i, pi) in p[..m].iter_mut().enumerate() {
                let row = &w.row(k + 1 + i)[k + 1..];
                *pi = beta * dot(row, &v);
            }
            let kappa = 0.5 * beta * dot(&p[..m], &v);
            for (pi, vi) in p[..m].iter_mut().zip(&v) {
                *pi -= kappa * vi;
            }
            // B -= v p^T + p v^T, one contiguous row at a time
            for i in 0..m {
                let (vi, pi) = (v[i], p[i]);
                let row = &mut w.row_mut(k + 1 + i)[k + 1..];
                for ((r, &vj), &pj) in row.iter_mut().zip(&v).zip(&p[..m]) {
                    *r -= vi * pj + pi * vj;
                }
            }
        }
        reflectors.push(Reflector {
            offset: k + 1,
            beta,
            v,
        });
    }

    if n >= 2 {
        d[n - 2] = w.at(n - 2, n - 2);
        e[n - 1] = w.at(n - 2, n - 1);
    }
    d[n - 1] = w.at(n - 1, n - 1);
    e[0] = 0.0;
    reflectors
}

/// Q = H_0 H_1 ... applied to the identity, built in reverse so each step
/// only touches the trailing corner.
fn accumulate_reflectors(reflectors: &[Reflector], n: usize) -> Mat {
    let mut q = Mat::identity(n);
    let mut t = vec![0.0; n];
    for r in reflectors.iter().rev() {
        if r.beta == 0.0 {
            continue;
        }
        let off = r.offset;
        let m = n - off;
        // t = v^T Q[off.., off..]
        for tj in t[..m].iter_mut() {
            *tj = 0.0;
        }
        for (i, &vi) in r.v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let row = &q.row(off + i)[off..];
            for (tj, &rj) in t[..m].iter_mut().zip(row) {
                *tj += vi * rj;
            }
        }
        for (i, &vi) in r.v.iter().enumerate() {
            let scale = r.beta * vi;
            if scale == 0.0 {
                continue;
            }
            let row = &mut q.row_mut(off + i)[off..];
            for (rj, &tj) in row.iter_mut().zip(&t[..m]) {
                *rj -= scale * tj;
            }
        }
    }
    q
}

/// Implicit QL with shifts on the tridiagonal (d, e). `qt` holds eigenvector
/// candidates as rows; plane rotations combine adjacent rows in place.
fn ql_implicit(qt: &mut Mat, d: &mut [f64], e: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;

    for l in 0..n {
        let mut iter = 0;
        loop {
            // find small sub-diagonal element
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                // QL virtually never needs more than a handful of iterations;
                // treat stagnation as numerical failure rather than looping.
                return Err(Error::NotPositiveDefinite);
            }

            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            let sign_r = if g >= 0.0 { r.abs() } else { -r.abs() };
            g = d[m] - d[l] + e[l] / (g + sign_r);
            let mut s = 1.0;
            let mut c = 1.0;
            let mut p = 0.0;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                // rows i, i+1 of qt correspond to eigenvector columns i, i+1
                rotate_rows(qt.data_mut(), n, i, i + 1, c, s);
            }
            if r == 0.0 && m > l + 1 {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

/// Jacobi for small problems, QL beyond; both satisfy the same contract.
pub fn sym_eig_auto(a: &Mat) -> Result<EigenDecomposition> {
    if a.rows() <= 128 {
        sym_eig(a)
    } else {
        sym_eig_ql(a)
    }
}

/// Thin SVD of an n x n_l matrix (n >= n_l) via the eigendecomposition of
/// the n_l x n_l Gram matrix.
pub fn thin_svd(l: &Mat) -> Result<ThinSvd> {
    let n = l.rows();
    let n_l = l.cols();
    if n_l == 0 || n < n_l {
        return Err(Error::DimensionMismatch(format!(
            "thin_svd wants n >= n_l >= 1, got {}x{} (transpose first)",
            n, n_l
        )));
    }

    let gram = l.gram();
    let eig = sym_eig(&gram)?;
    let singular_values: Vec<f64> = eig
        .eigenvalues
        .iter()
        .map(|&v| v.max(0.0).sqrt())
        .collect();
    let sigma_max = singular_values[0];

    let mut u = Mat::zeros(n, n_l);
    let mut v = eig.eigenvectors;
    for j in 0..n_l {
        let sv = singular_values[j];
        if sigma_max > 0.0 && sv > SVD_NULL_TOL * sigma_max {
            let vj = v.col(j);
            let uj = l.mul_vec(&vj).expect("gram dims agree");
            for i in 0..n {
                u.set(i, j, uj[i] / sv);
            }
            // sign convention lives on the left vectors; flip the pair so the
            // product L = U S V^T is preserved
            let flip = sign_flip(&u.col(j));
            if flip < 0.0 {
                for i in 0..n {
                    let x = u.at(i, j);
                    u.set(i, j, -x);
                }
                for i in 0..n_l {
                    let x = v.at(i, j);
                    v.set(i, j, -x);
                }
            }
        } else {
            complete_column(&mut u, j);
        }
    }

    Ok(ThinSvd {
        u,
        singular_values,
        v,
    })
}

/// Fill column `j` of `u` with a unit vector orthogonal to columns 0..j by
/// Gram-Schmidt over canonical basis vectors. Deterministic.
fn complete_column(u: &mut Mat, j: usize) {
    let n = u.rows();
    for seed in 0..n {
        let mut cand = vec![0.0; n];
        cand[seed] = 1.0;
        for prev in 0..j {
            let proj: f64 = (0..n).map(|i| cand[i] * u.at(i, prev)).sum();
            for (i, c) in cand.iter_mut().enumerate() {
                *c -= proj * u.at(i, prev);
            }
        }
        let norm = cand.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.5 {
            let flip = sign_flip(&cand);
            for (i, c) in cand.iter().enumerate() {
                u.set(i, j, flip * c / norm);
            }
            return;
        }
    }
    // more columns than dimensions would be rejected at entry
    unreachable!("orthogonal completion always finds a basis vector");
}

/// Lower Cholesky factor of `a + ridge*I`.
pub fn cholesky(a: &Mat, ridge: f64) -> Result<Mat> {
    let n = a.rows();
    if n != a.cols() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} matrix is not square",
            a.rows(),
            a.cols()
        )));
    }
    let mut l = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..=i {
            let mut sum = a.at(i, j) + if i == j { ridge } else { 0.0 };
            let (ri, rj) = (l.row(i), l.row(j));
            for k in 0..j {
                sum -= ri[k] * rj[k];
            }
            if i == j {
                if !(sum > 0.0) {
                    return Err(Error::NotPositiveDefinite);
                }
                l.set(i, j, sum.sqrt());
            } else {
                l.set(i, j, sum / l.at(j, j));
            }
        }
    }
    Ok(l)
}

/// Solves `(A + ridge*I) x = b` for symmetric positive definite systems via
/// Cholesky factorization and two triangular solves.
pub fn solve_spd(a: &Mat, ridge: f64, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "matrix is {}x{} but rhs has length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    let l = cholesky(a, ridge)?;
    let n = b.len();
    // forward: L y = b
    let mut y = b.to_vec();
    for i in 0..n {
        let row = l.row(i);
        let mut sum = y[i];
        for k in 0..i {
            sum -= row[k] * y[k];
        }
        y[i] = sum / row[i];
    }
    // back: L^T x = y
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in i + 1..n {
            sum -= l.at(k, i) * y[k];
        }
        y[i] = sum / l.at(i, i);
    }
    Ok(y)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use rand::Rng;
    use rand_chacha::rand_core::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    pub fn random_symmetric(n: usize, rng: &mut ChaCha8Rng) -> Mat {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let v: f64 = rng.gen_range(-1.0..1.0);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    fn reconstruction_error(a: &Mat, eig: &EigenDecomposition) -> f64 {
        let n = a.rows();
        let u = &eig.eigenvectors;
        let mut ul = u.clone();
        for j in 0..n {
            for i in 0..n {
                let v = ul.at(i, j) * eig.eigenvalues[j];
                ul.set(i, j, v);
            }
        }
        let rec = ul.matmul(&u.transpose()).unwrap();
        let mut diff = 0.0;
        for i in 0..n {
            for j in 0..n {
                let d = rec.at(i, j) - a.at(i, j);
                diff += d * d;
            }
        }
        diff.sqrt() / a.frobenius_norm().max(1e-300)
    }

    fn orthonormality_error(u: &Mat) -> f64 {
        let g = u.transpose().matmul(u).unwrap();
        g.max_abs_diff(&Mat::identity(g.rows()))
    }

    #[test]
    fn identity_eigenvalues() {
        let eig = sym_eig(&Mat::identity(3)).unwrap();
        for v in &eig.eigenvalues {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn analytic_two_by_two() {
        let a = Mat::from_rows(&[vec![2.0, 1.0], vec![1.0, 2.0]]).unwrap();
        let eig = sym_eig(&a).unwrap();
        assert!((eig.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        // sign convention: largest-magnitude entry positive
        assert!((eig.eigenvectors.at(0, 0) - inv_sqrt2).abs() < 1e-12);
        assert!((eig.eigenvectors.at(1, 0) - inv_sqrt2).abs() < 1e-12);
        assert!((eig.eigenvectors.at(0, 1).abs() - inv_sqrt2).abs() < 1e-12);
        assert!((eig.eigenvectors.at(1, 1).abs() - inv_sqrt2).abs() < 1e-12);
        assert!(eig.eigenvectors.at(0, 1) * eig.eigenvectors.at(1, 1) < 0.0);
    }

    #[test]
    fn random_reconstruction_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[1usize, 2, 5, 17, 50] {
            let a = random_symmetric(n, &mut rng);
            let eig = sym_eig(&a).unwrap();
            assert!(reconstruction_error(&a, &eig) < 1e-9, "n={}", n);
            assert!(orthonormality_error(&eig.eigenvectors) < 1e-9, "n={}", n);
        }
    }

    #[test]
    fn ql_agrees_with_jacobi() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &n in &[2usize, 3, 8, 33, 80] {
            let a = random_symmetric(n, &mut rng);
            let j = sym_eig(&a).unwrap();
            let q = sym_eig_ql(&a).unwrap();
            assert!(reconstruction_error(&a, &q) < 1e-9, "n={}", n);
            assert!(orthonormality_error(&q.eigenvectors) < 1e-9, "n={}", n);
            for i in 0..n {
                assert!(
                    (j.eigenvalues[i] - q.eigenvalues[i]).abs() < 1e-8 * a.max_abs().max(1.0),
                    "n={} i={}",
                    n,
                    i
                );
            }
        }
    }

    #[test]
    fn rejects_asymmetric() {
        let a = Mat::from_rows(&[vec![1.0, 2.0], vec![0.5, 1.0]]).unwrap();
        assert!(matches!(sym_eig(&a), Err(Error::NotSymmetric)));
        assert!(matches!(sym_eig_ql(&a), Err(Error::NotSymmetric)));
    }

    #[test]
    fn svd_identity_and_padded_diagonal() {
        let svd = thin_svd(&Mat::identity(4)).unwrap();
        for s in &svd.singular_values {
            assert!((s - 1.0).abs() < 1e-12);
        }

        let mut l = Mat::zeros(4, 2);
        l.set(0, 0, 3.0);
        l.set(1, 1, 2.0);
        let svd = thin_svd(&l).unwrap();
        assert!((svd.singular_values[0] - 3.0).abs() < 1e-12);
        assert!((svd.singular_values[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn svd_random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut l = Mat::zeros(60, 20);
        for i in 0..60 {
            for j in 0..20 {
                l.set(i, j, rng.gen_range(-1.0..1.0));
            }
        }
        let svd = thin_svd(&l).unwrap();
        let mut us = svd.u.clone();
        for j in 0..20 {
            for i in 0..60 {
                let v = us.at(i, j) * svd.singular_values[j];
                us.set(i, j, v);
            }
        }
        let rec = us.matmul(&svd.v.transpose()).unwrap();
        let mut err = 0.0;
        for i in 0..60 {
            for j in 0..20 {
                let d = rec.at(i, j) - l.at(i, j);
                err += d * d;
            }
        }
        assert!(err.sqrt() / l.frobenius_norm() < 1e-9);
        assert!(orthonormality_error(&svd.u) < 1e-9);
        assert!(orthonormality_error(&svd.v) < 1e-9);
    }

    #[test]
    fn svd_rank_deficient_orthonormal_completion() {
        // one informative column, three zero columns
        let mut l = Mat::zeros(6, 4);
        for i in 0..6 {
            l.set(i, 0, (i as f64) - 2.0);
        }
        let svd = thin_svd(&l).unwrap();
        assert!(svd.singular_values[0] > 0.0);
        for j in 1..4 {
            assert!(svd.singular_values[j].abs() < 1e-12);
        }
        assert!(orthonormality_error(&svd.u) < 1e-9);
    }

    #[test]
    fn svd_singular_values_match_gram_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut l = Mat::zeros(30, 10);
        for i in 0..30 {
            for j in 0..10 {
                l.set(i, j, rng.gen_range(0.0..1.0));
            }
        }
        let svd = thin_svd(&l).unwrap();
        let llt = l.matmul(&l.transpose()).unwrap();
        let eig = sym_eig_ql(&llt).unwrap();
        for j in 0..10 {
            assert!((svd.singular_values[j].powi(2) - eig.eigenvalues[j]).abs() < 1e-8);
        }
    }

    #[test]
    fn svd_rejects_wide_input() {
        assert!(thin_svd(&Mat::zeros(3, 5)).is_err());
        assert!(thin_svd(&Mat::zeros(3, 0)).is_err());
    }

    #[test]
    fn solve_identity_cases() {
        let b = vec![1.0, -2.0, 3.0];
        let x = solve_spd(&Mat::identity(3), 0.0, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).abs() < 1e-14);
        }
        let x = solve_spd(&Mat::identity(3), 1.0, &b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi / 2.0).abs() < 1e-14);
        }
    }

    /// Gauss-Jordan inverse; test-only oracle independent of the Cholesky path.
    pub fn invert_dense(a: &Mat) -> Mat {
        let n = a.rows();
        let mut work = a.clone();
        let mut inv = Mat::identity(n);
        for col in 0..n {
            let mut pivot = col;
            for r in col + 1..n {
                if work.at(r, col).abs() > work.at(pivot, col).abs() {
                    pivot = r;
                }
            }
            if pivot != col {
                for j in 0..n {
                    let tmp = work.at(col, j);
                    work.set(col, j, work.at(pivot, j));
                    work.set(pivot, j, tmp);
                    let tmp = inv.at(col, j);
                    inv.set(col, j, inv.at(pivot, j));
                    inv.set(pivot, j, tmp);
                }
            }
            let d = work.at(col, col);
            for j in 0..n {
                work.set(col, j, work.at(col, j) / d);
                inv.set(col, j, inv.at(col, j) / d);
            }
            for r in 0..n {
                if r != col {
                    let f = work.at(r, col);
                    if f != 0.0 {
                        for j in 0..n {
                            work.set(r, j, work.at(r, j) - f * work.at(col, j));
                            inv.set(r, j, inv.at(r, j) - f * inv.at(col, j));
                        }
                    }
                }
            }
        }
        inv
    }

    #[test]
    fn solve_matches_explicit_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let n = 30;
        // random PSD: B^T B
        let b_mat = {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            m
        };
        let a = b_mat.transpose().matmul(&b_mat).unwrap();
        let ridge = 1e-6;
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();

        let x = solve_spd(&a, ridge, &rhs).unwrap();

        let mut ridged = a.clone();
        for i in 0..n {
            ridged.set(i, i, ridged.at(i, i) + ridge);
        }
        let expect = invert_dense(&ridged).mul_vec(&rhs).unwrap();
        for i in 0..n {
            assert!((x[i] - expect[i]).abs() < 1e-8, "i={}", i);
        }

        // residual contract
        let resid = ridged.mul_vec(&x).unwrap();
        let binf = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..n {
            assert!((resid[i] - rhs[i]).abs() < 1e-8 * binf);
        }
    }

    #[test]
    fn solve_rejects_indefinite() {
        let a = Mat::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        assert!(matches!(
            solve_spd(&a, 0.0, &[1.0, 1.0]),
            Err(Error::NotPositiveDefinite)
        ));
    }

    #[test]
    fn solve_is_quadratic_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let n = 12;
        let b_mat = {
            let mut m = Mat::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    m.set(i, j, rng.gen_range(-1.0..1.0));
                }
            }
            m
        };
        let a = b_mat.transpose().matmul(&b_mat).unwrap();
        let ridge = 0.1;
        let rhs: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let x = solve_spd(&a, ridge, &rhs).unwrap();

        let mut ridged = a.clone();
        for i in 0..n {
            ridged.set(i, i, ridged.at(i, i) + ridge);
        }
        let objective = |v: &[f64]| {
            let av = ridged.mul_vec(v).unwrap();
            0.5 * crate::matrix::dot(v, &av) - crate::matrix::dot(&rhs, v)
        };
        let fx = objective(&x);
        for _ in 0..25 {
            let mut delta: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let norm = delta.iter().map(|d| d * d).sum::<f64>().sqrt();
            for d in &mut delta {
                *d *= 1e-3 / norm;
            }
            let perturbed: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            assert!(objective(&perturbed) >= fx);
        }
    }
}
