//! Similarity-induced graph (SIG) construction.
//!
//! Each view's feature matrix is turned into a nonnegative N x N graph by
//! adaptive k-nearest-neighbor weighting: within a row, closer points get
//! larger weights, the k-th neighbor gets weight proportional to its distance
//! gap to the (k+1)-th, and every row sums to one before symmetrization.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// One view's raw features: a row per sample.
#[derive(Debug, Clone)]
pub struct FeatureMatrix {
    pub data: DMatrix<f64>,
    pub view_id: usize,
}

impl FeatureMatrix {
    pub fn new(data: DMatrix<f64>, view_id: usize) -> Result<Self> {
        if data.nrows() < 2 || data.ncols() < 1 {
            return Err(Error::DegenerateMatrix {
                rows: data.nrows(),
                cols: data.ncols(),
            });
        }
        for i in 0..data.nrows() {
            if data.row(i).iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { view: view_id, row: i });
            }
        }
        Ok(Self { data, view_id })
    }

    pub fn n_samples(&self) -> usize {
        self.data.nrows()
    }

    pub fn dim(&self) -> usize {
        self.data.ncols()
    }
}

/// Nonnegative symmetric similarity graph over N samples.
#[derive(Debug, Clone)]
pub struct SimilarityGraph {
    pub weights: DMatrix<f64>,
    pub neighbor_count: usize,
}

impl SimilarityGraph {
    pub fn n(&self) -> usize {
        self.weights.nrows()
    }
}

/// Squared Euclidean distances between all row pairs of `x`.
///
/// The result is symmetric with a zero diagonal.
pub fn pairwise_sq_distances(x: &FeatureMatrix) -> Result<DMatrix<f64>> {
    let n = x.n_samples();
    let d = x.dim();
    for i in 0..n {
        if x.data.row(i).iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { view: x.view_id, row: i });
        }
    }
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for c in 0..d {
                let diff = x.data[(i, c)] - x.data[(j, c)];
                acc += diff * diff;
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

/// Adaptive-neighbor weights from a squared-distance matrix, one simplex row
/// per sample.
///
/// For row i with sorted squared distances d_(1) <= ... <= d_(n-1) to the
/// other points, neighbor j among the k nearest receives
/// (d_(k+1) - d_ij) / (k d_(k+1) - sum_{h<=k} d_(h)) and everything else is
/// zero, so each row sums to one and has at most k nonzeros. A degenerate
/// denominator (the k nearest all tied with the (k+1)-th) falls back to
/// uniform 1/k over the k nearest.
pub fn neighbor_weights(distances: &DMatrix<f64>, k: usize) -> Result<DMatrix<f64>> {
    let n = distances.nrows();
    if k < 1 || k + 2 > n {
        return Err(Error::InvalidNeighborCount { k, n });
    }
    let mut s = DMatrix::zeros(n, n);
    let mut order: Vec<usize> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        order.extend((0..n).filter(|&j| j != i));
        // Stable sort: ties keep the lower sample index first.
        order.sort_by(|&a, &b| distances[(i, a)].total_cmp(&distances[(i, b)]));

        let d_cut = distances[(i, order[k])];
        let d_sum: f64 = order[..k].iter().map(|&j| distances[(i, j)]).sum();
        let denom = k as f64 * d_cut - d_sum;
        if denom > f64::EPSILON * (1.0 + k as f64 * d_cut.abs()) {
            for &j in &order[..k] {
                s[(i, j)] = (d_cut - distances[(i, j)]) / denom;
            }
        } else {
            for &j in &order[..k] {
                s[(i, j)] = 1.0 / k as f64;
            }
        }
    }
    Ok(s)
}

/// (S + S^T) / 2.
pub fn symmetrize(s: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = s.clone();
    for i in 0..s.nrows() {
        for j in 0..s.ncols() {
            out[(i, j)] = 0.5 * (s[(i, j)] + s[(j, i)]);
        }
    }
    out
}

/// Build the similarity-induced graph for one view: pairwise squared
/// distances, adaptive-neighbor rows, then symmetrization.
pub fn build_sig(x: &FeatureMatrix, k: usize) -> Result<SimilarityGraph> {
    let distances = pairwise_sq_distances(x)?;
    let rows = neighbor_weights(&distances, k)?;
    Ok(SimilarityGraph {
        weights: symmetrize(&rows),
        neighbor_count: k,
    })
}

/// Column-wise standardization to zero mean and unit variance.
///
/// Constant columns are centered but left unscaled.
pub fn standardize_columns(x: &FeatureMatrix) -> FeatureMatrix {
    let n = x.n_samples() as f64;
    let mut data = x.data.clone();
    for c in 0..data.ncols() {
        let mean = data.column(c).sum() / n;
        let var = data.column(c).iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        for i in 0..data.nrows() {
            data[(i, c)] -= mean;
            if sd > 0.0 {
                data[(i, c)] /= sd;
            }
        }
    }
    FeatureMatrix {
        data,
        view_id: x.view_id,
    }
}
