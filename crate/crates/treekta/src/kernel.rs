//! Leaf co-occurrence kernels of fitted tree ensembles.
//!
//! K[i][j] is the fraction of trees in which rows i and j land in the same
//! terminal node. Per tree, rows are bucketed by leaf id and counts are
//! incremented within buckets, which costs O(n + sum of bucket sizes squared)
//! instead of O(n^2) pairwise leaf comparisons.

use std::fs;
use std::io::Write as _;
use std::path::Path;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::gbt::GbtModel;
use crate::matrix::Mat;
use crate::rf::RandomForest;
use crate::tree::Tree;

/// Anything made of trees that can route a feature vector to a leaf.
pub trait LeafEnsemble {
    fn trees(&self) -> &[Tree];
    fn n_features(&self) -> usize;
}

impl LeafEnsemble for RandomForest {
    fn trees(&self) -> &[Tree] {
        self.trees()
    }
    fn n_features(&self) -> usize {
        self.n_features()
    }
}

impl LeafEnsemble for GbtModel {
    fn trees(&self) -> &[Tree] {
        self.trees()
    }
    fn n_features(&self) -> usize {
        // boosted trees are grown on a fixed feature count; read it off the
        // first split, or accept any width for stump-only models
        self.trees()
            .iter()
            .flat_map(|t| t.nodes())
            .filter_map(|n| match n {
                crate::tree::Node::Split { feature, .. } => Some(feature + 1),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }
}

/// Symmetric train kernel with unit diagonal; entries are multiples of 1/M.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelMatrix {
    values: Mat,
    m_trees: usize,
}

impl KernelMatrix {
    pub fn n(&self) -> usize {
        self.values.rows()
    }

    pub fn m_trees(&self) -> usize {
        self.m_trees
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values.at(i, j)
    }

    /// Headerless CSV, one row per line.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = String::new();
        for i in 0..self.n() {
            let row: Vec<String> = self.values.row(i).iter().map(|v| v.to_string()).collect();
            out.push_str(&row.join(","));
            out.push('\n');
        }
        let mut f = fs::File::create(path)?;
        f.write_all(out.as_bytes())?;
        Ok(())
    }

    /// Reads a headerless square CSV. `m_trees` is not stored in the file;
    /// callers that need exact multiples pass it separately.
    pub fn read_csv(path: &Path, m_trees: usize) -> Result<KernelMatrix> {
        let text = fs::read_to_string(path)?;
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<f64> = line
                .split(',')
                .enumerate()
                .map(|(j, cell)| {
                    cell.trim().parse::<f64>().map_err(|e| Error::CsvParse {
                        row: i + 1,
                        col: j + 1,
                        message: e.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            rows.push(row);
        }
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::CsvFormat("kernel matrix must be square".into()));
        }
        Ok(KernelMatrix {
            values: Mat::from_rows(&rows)?,
            m_trees,
        })
    }

    /// Wraps a precomputed kernel (used by the CLI import path).
    pub fn from_values(values: Mat, m_trees: usize) -> Result<KernelMatrix> {
        if values.rows() != values.cols() {
            return Err(Error::DimensionMismatch(format!(
                "kernel must be square, got {}x{}",
                values.rows(),
                values.cols()
            )));
        }
        Ok(KernelMatrix { values, m_trees })
    }
}

/// Rectangular test x train co-occurrence kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct CrossKernel {
    values: Mat,
    m_trees: usize,
}

impl CrossKernel {
    pub fn n_test(&self) -> usize {
        self.values.rows()
    }

    pub fn n_train(&self) -> usize {
        self.values.cols()
    }

    pub fn m_trees(&self) -> usize {
        self.m_trees
    }

    pub fn values(&self) -> &Mat {
        &self.values
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values.at(i, j)
    }

    /// Wraps precomputed cross-similarities.
    pub fn from_values(values: Mat, m_trees: usize) -> CrossKernel {
        CrossKernel { values, m_trees }
    }
}

fn check_features(ensemble: &impl LeafEnsemble, data: &Dataset) -> Result<()> {
    let need = ensemble.n_features();
    if data.p() < need {
        return Err(Error::DimensionMismatch(format!(
            "ensemble reads feature {} but data has {} columns",
            need.saturating_sub(1),
            data.p()
        )));
    }
    Ok(())
}

/// Leaf id of every row under one tree.
fn leaf_assignments(tree: &Tree, data: &Dataset) -> Vec<u32> {
    (0..data.n()).map(|i| tree.leaf_of(data.row(i))).collect()
}

/// Group row indices by leaf id: returns (offsets, rows) as a CSR-style pair.
fn bucket_by_leaf(leaves: &[u32], n_leaves: usize) -> (Vec<u32>, Vec<u32>) {
    let mut counts = vec![0u32; n_leaves + 1];
    for &l in leaves {
        counts[l as usize + 1] += 1;
    }
    for i in 0..n_leaves {
        counts[i + 1] += counts[i];
    }
    let mut rows = vec![0u32; leaves.len()];
    let mut cursor = counts.clone();
    for (row, &l) in leaves.iter().enumerate() {
        rows[cursor[l as usize] as usize] = row as u32;
        cursor[l as usize] += 1;
    }
    (counts, rows)
}

fn accumulate_tree_counts(tree: &Tree, data: &Dataset, counts: &mut [u32]) {
    let n = data.n();
    let leaves = leaf_assignments(tree, data);
    let (offsets, rows) = bucket_by_leaf(&leaves, tree.n_leaves() as usize);
    for leaf in 0..tree.n_leaves() as usize {
        let bucket = &rows[offsets[leaf] as usize..offsets[leaf + 1] as usize];
        for (a, &i) in bucket.iter().enumerate() {
            let base = i as usize * n;
            for &j in &bucket[a + 1..] {
                counts[base + j as usize] += 1;
            }
        }
    }
}

/// Train-side co-occurrence kernel of a fitted ensemble.
pub fn kernel_matrix(ensemble: &impl LeafEnsemble, data: &Dataset) -> Result<KernelMatrix> {
    check_features(ensemble, data)?;
    let n = data.n();
    let m = ensemble.trees().len();

    // upper-triangular co-occurrence counts; u32 addition commutes, so the
    // parallel reduction order cannot change the result
    #[cfg(feature = "parallel")]
    let counts: Vec<u32> = ensemble
        .trees()
        .par_iter()
        .fold(
            || vec![0u32; n * n],
            |mut acc, tree| {
                accumulate_tree_counts(tree, data, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u32; n * n],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<u32> = {
        let mut acc = vec![0u32; n * n];
        for tree in ensemble.trees() {
            accumulate_tree_counts(tree, data, &mut acc);
        }
        acc
    };

    let mut values = Mat::zeros(n, n);
    let m_f = m as f64;
    for i in 0..n {
        values.set(i, i, 1.0);
        for j in i + 1..n {
            let v = counts[i * n + j] as f64 / m_f;
            values.set(i, j, v);
            values.set(j, i, v);
        }
    }
    Ok(KernelMatrix { values, m_trees: m })
}

/// Co-occurrence fractions between test rows and train rows.
pub fn cross_kernel(
    ensemble: &impl LeafEnsemble,
    test_data: &Dataset,
    train_data: &Dataset,
) -> Result<CrossKernel> {
    check_features(ensemble, test_data)?;
    check_features(ensemble, train_data)?;
    if test_data.p() != train_data.p() {
        return Err(Error::DimensionMismatch(format!(
            "test has {} features, train has {}",
            test_data.p(),
            train_data.p()
        )));
    }
    let n_test = test_data.n();
    let n_train = train_data.n();
    let m = ensemble.trees().len();

    let accumulate = |tree: &Tree, counts: &mut [u32]| {
        let train_leaves = leaf_assignments(tree, train_data);
        let (offsets, rows) = bucket_by_leaf(&train_leaves, tree.n_leaves() as usize);
        for t in 0..n_test {
            let leaf = tree.leaf_of(test_data.row(t)) as usize;
            let bucket = &rows[offsets[leaf] as usize..offsets[leaf + 1] as usize];
            let base = t * n_train;
            for &j in bucket {
                counts[base + j as usize] += 1;
            }
        }
    };

    #[cfg(feature = "parallel")]
    let counts: Vec<u32> = ensemble
        .trees()
        .par_iter()
        .fold(
            || vec![0u32; n_test * n_train],
            |mut acc, tree| {
                accumulate(tree, &mut acc);
                acc
            },
        )
        .reduce(
            || vec![0u32; n_test * n_train],
            |mut a, b| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                a
            },
        );
    #[cfg(not(feature = "parallel"))]
    let counts: Vec<u32> = {
        let mut acc = vec![0u32; n_test * n_train];
        for tree in ensemble.trees() {
            accumulate(tree, &mut acc);
        }
        acc
    };

    let m_f = m as f64;
    let values = Mat::from_vec(
        n_test,
        n_train,
        counts.into_iter().map(|c| c as f64 / m_f).collect(),
    )?;
    Ok(CrossKernel { values, m_trees: m })
}
