//! Alternating-minimization engine for consistency/inconsistency-aware
//! multi-view graph clustering.
//!
//! Given one similarity graph S_v per view, the solver learns
//!   - a unified graph U whose rows live on the probability simplex,
//!   - a spectral embedding F spanning the bottom eigenvectors of U's
//!     Laplacian,
//!   - per-view consistent parts A_v with 0 <= A_v <= S_v, and
//!   - adaptive view weights alpha,
//! by cycling alpha -> U -> F -> A until U stops moving. The inconsistent
//! remainders S_v - A_v are penalized in magnitude (beta on the diagonal of
//! the penalty matrix B) and in cross-view overlap (gamma off the diagonal).
//! The rank regularizer weight lambda is adapted each sweep so that U's
//! Laplacian ends up with exactly `n_clusters` (near-)zero eigenvalues, at
//! which point the connected components of U are the clusters.
//!
//! With `baseline_mode` the consistent parts are pinned to the raw graphs
//! (A_v = S_v) and the A-step is skipped, which recovers the plain unified
//! graph method this one extends.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::SimilarityGraph;
use crate::linalg::{pinv_with_condition, symmetric_eigen_ascending};

/// Guard for the adaptive view-weight denominator.
const ALPHA_GUARD: f64 = 1e-10;
/// Eigenvalues below this count as zero when reading connectivity off L_U.
const ZERO_EIG_TOL: f64 = 1e-10;
/// Graph entries below this are ignored by the component search.
const COMPONENT_EDGE_TOL: f64 = 1e-10;
const LAMBDA_MIN: f64 = 1e-8;
const LAMBDA_MAX: f64 = 1e8;

#[derive(Debug, Clone)]
pub struct Hyperparams {
    /// Neighbor count used when building the similarity graphs.
    pub k: usize,
    /// Initial rank-regularizer weight.
    pub lambda0: f64,
    /// Penalty on the magnitude of each view's inconsistent part.
    pub beta: f64,
    /// Penalty on cross-view overlap of inconsistent parts.
    pub gamma: f64,
    pub n_clusters: usize,
    pub max_iter: usize,
    /// Relative Frobenius change of U below which the loop stops.
    pub tol: f64,
    /// Pin A_v = S_v and skip the A-step (plain unified-graph baseline).
    pub baseline_mode: bool,
}

impl Hyperparams {
    pub fn new(n_clusters: usize) -> Self {
        Self {
            k: 15,
            lambda0: 1.0,
            beta: 1e-12,
            gamma: 1e-5,
            n_clusters,
            max_iter: 50,
            tol: 1e-6,
            baseline_mode: false,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if !(self.lambda0 > 0.0) {
            return Err(Error::InvalidHyperparam(format!("lambda0 = {}", self.lambda0)));
        }
        if !(self.beta > 0.0) {
            return Err(Error::InvalidHyperparam(format!("beta = {}", self.beta)));
        }
        if !(self.gamma > 0.0) {
            return Err(Error::InvalidHyperparam(format!("gamma = {}", self.gamma)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidHyperparam(format!("tol = {}", self.tol)));
        }
        if self.max_iter < 1 {
            return Err(Error::InvalidHyperparam("max_iter = 0".into()));
        }
        if self.n_clusters < 2 || self.n_clusters > n {
            return Err(Error::InvalidClusterCount {
                c: self.n_clusters,
                n,
            });
        }
        Ok(())
    }
}

/// One completed sweep of the solver loop.
#[derive(Debug, Clone)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Fit of U to the raw graphs: sum_v alpha_v ||U - S_v||_F^2 with the
    /// fit weights alpha_v = 1 / (2 ||U - S_v||_F) taken at the current U,
    /// which equals half the summed distances. Using these weights rather
    /// than the solver's internal ones keeps the value comparable between
    /// the full method and the baseline.
    pub sig_fit: f64,
    /// Full objective at the end of the sweep.
    pub objective: f64,
    /// Rank-regularizer weight in effect during the sweep.
    pub lambda: f64,
    /// Near-zero eigenvalues of L_U after the embedding update.
    pub zero_eigenvalues: usize,
    /// Condition number of the V x V system solved by the A-step
    /// (NaN in baseline mode, where the A-step is skipped).
    pub penalty_condition: f64,
}

#[derive(Debug, Clone)]
pub struct SolverState {
    /// Unified graph; every row on the probability simplex.
    pub u: DMatrix<f64>,
    /// N x C orthonormal embedding from the bottom of L_U's spectrum.
    pub f: DMatrix<f64>,
    /// Positive per-view weights.
    pub alpha: DVector<f64>,
    /// Per-view consistent parts, 0 <= A_v <= S_v.
    pub a: Vec<DMatrix<f64>>,
    pub lambda: f64,
    /// Ascending eigenvalues of the current L_U.
    pub eigenvalues: DVector<f64>,
    pub trace: Vec<IterationRecord>,
    pub converged: bool,
}

impl SolverState {
    pub fn n_views(&self) -> usize {
        self.a.len()
    }

    pub fn n_samples(&self) -> usize {
        self.u.nrows()
    }

    pub fn iterations(&self) -> usize {
        self.trace.len()
    }
}

/// V x V penalty matrix: beta on the diagonal, gamma elsewhere.
pub fn penalty_matrix(n_views: usize, beta: f64, gamma: f64) -> DMatrix<f64> {
    let mut b = DMatrix::from_element(n_views, n_views, gamma);
    for v in 0..n_views {
        b[(v, v)] = beta;
    }
    b
}

/// System matrix of the A-step: 2 diag(alpha) + B.
pub fn system_matrix(alpha: &DVector<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut c = b.clone();
    for v in 0..alpha.len() {
        c[(v, v)] += 2.0 * alpha[v];
    }
    c
}

fn check_views(sigs: &[SimilarityGraph]) -> Result<usize> {
    let Some(first) = sigs.first() else {
        return Err(Error::NoViews);
    };
    let n = first.n();
    for (v, sig) in sigs.iter().enumerate() {
        if sig.n() != n {
            return Err(Error::SampleCountMismatch {
                view: v,
                rows: sig.n(),
                expected: n,
            });
        }
    }
    Ok(n)
}

/// Initial state: uniform view weights, A_v = S_v, U the weight-averaged
/// graph re-projected row-wise onto the simplex, F from U's Laplacian.
pub fn init_state(sigs: &[SimilarityGraph], hp: &Hyperparams) -> Result<SolverState> {
    let n = check_views(sigs)?;
    hp.validate(n)?;
    let n_views = sigs.len();
    let alpha = DVector::from_element(n_views, 1.0 / n_views as f64);

    let mut u = DMatrix::zeros(n, n);
    for sig in sigs {
        u += &sig.weights * (1.0 / n_views as f64);
    }
    let mut row = vec![0.0; n];
    for i in 0..n {
        for j in 0..n {
            row[j] = u[(i, j)];
        }
        let projected = project_simplex(&row);
        for j in 0..n {
            u[(i, j)] = projected[j];
        }
    }

    let l = laplacian(&u);
    let (f, eigenvalues) = update_f(&l, hp.n_clusters)?;

    Ok(SolverState {
        u,
        f,
        alpha,
        a: sigs.iter().map(|s| s.weights.clone()).collect(),
        lambda: hp.lambda0,
        eigenvalues,
        trace: Vec::new(),
        converged: false,
    })
}

/// Adaptive view weights: alpha_v = 1 / (2 ||U - A_v||_F), guarded away
/// from division by zero.
pub fn update_alpha(state: &SolverState) -> DVector<f64> {
    DVector::from_iterator(
        state.n_views(),
        state.a.iter().map(|a_v| {
            let dist = (&state.u - a_v).norm();
            1.0 / (2.0 * dist.max(ALPHA_GUARD))
        }),
    )
}

/// Squared Euclidean distances between the rows of the embedding.
pub fn compute_p(f: &DMatrix<f64>) -> DMatrix<f64> {
    let n = f.nrows();
    let c = f.ncols();
    let mut p = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let mut acc = 0.0;
            for t in 0..c {
                let diff = f[(i, t)] - f[(j, t)];
                acc += diff * diff;
            }
            p[(i, j)] = acc;
            p[(j, i)] = acc;
        }
    }
    p
}

/// Euclidean projection onto the probability simplex by sort and threshold.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    // Stable descending sort: ties keep the smaller index first.
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (idx, &w) in sorted.iter().enumerate() {
        cumsum += w;
        let t = (cumsum - 1.0) / (idx as f64 + 1.0);
        if w - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Row-wise unified-graph update.
///
/// Each row solves min_u sum_v alpha_v ||u - c_v||^2 over the simplex, with
/// per-view targets c_v = (a_v)_i - lambda/(2 V alpha_v) p_i, whose solution
/// is the simplex projection of the alpha-weighted mean of the targets. With
/// equal weights this is the plain mean of the targets; weighting keeps the
/// step an exact minimizer of the full objective's U-block.
pub fn update_u(state: &SolverState, _hp: &Hyperparams) -> DMatrix<f64> {
    let n = state.n_samples();
    let n_views = state.n_views();
    let p = compute_p(&state.f);
    let alpha_sum: f64 = state.alpha.sum();
    let mut u = DMatrix::zeros(n, n);
    let mut target = vec![0.0; n];
    for i in 0..n {
        // alpha-weighted mean of c_v collapses to
        // (sum_v alpha_v (a_v)_i - lambda/2 p_i) / sum_v alpha_v.
        for j in 0..n {
            let mut acc = 0.0;
            for v in 0..n_views {
                acc += state.alpha[v] * state.a[v][(i, j)];
            }
            target[j] = (acc - 0.5 * state.lambda * p[(i, j)]) / alpha_sum;
        }
        let row = project_simplex(&target);
        for j in 0..n {
            u[(i, j)] = row[j];
        }
    }
    u
}

/// Unnormalized Laplacian of the symmetrized graph: L = diag(W 1) - W with
/// W = (U + U^T)/2.
pub fn laplacian(u: &DMatrix<f64>) -> DMatrix<f64> {
    let n = u.nrows();
    let mut l = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut degree = 0.0;
        for j in 0..n {
            let w = 0.5 * (u[(i, j)] + u[(j, i)]);
            l[(i, j)] = -w;
            degree += w;
        }
        l[(i, i)] += degree;
    }
    l
}

/// Embedding update: the eigenvectors of the `c` smallest eigenvalues of L,
/// as columns, together with the full ascending spectrum.
pub fn update_f(l: &DMatrix<f64>, c: usize) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = l.nrows();
    if c > n {
        return Err(Error::InvalidClusterCount { c, n });
    }
    let (values, vectors) = symmetric_eigen_ascending(l)?;
    let f = vectors.columns(0, c).into_owned();
    Ok((f, values))
}

/// Pre-clamp consistent parts: solve the per-entry V x V stationarity system
/// (2 diag(alpha) + B) x = h with h_v = (2 alpha_v U + sum_w b_vw S_w)_ij,
/// factoring the system once and applying it to all entries. Returns the
/// unclamped solution and the system's condition number.
pub fn solve_consistent_parts(
    state: &SolverState,
    sigs: &[SimilarityGraph],
    b: &DMatrix<f64>,
) -> (Vec<DMatrix<f64>>, f64) {
    let n_views = sigs.len();
    let c = system_matrix(&state.alpha, b);
    let (c_pinv, cond) = pinv_with_condition(&c);

    let h: Vec<DMatrix<f64>> = (0..n_views)
        .map(|v| {
            let mut h_v = &state.u * (2.0 * state.alpha[v]);
            for w in 0..n_views {
                h_v += &sigs[w].weights * b[(v, w)];
            }
            h_v
        })
        .collect();

    let a = (0..n_views)
        .map(|v| {
            let mut a_v = DMatrix::zeros(state.n_samples(), state.n_samples());
            for w in 0..n_views {
                a_v += &h[w] * c_pinv[(v, w)];
            }
            a_v
        })
        .collect();
    (a, cond)
}

/// Consistent-part update: stationarity solve followed by the clamp
/// max(A, 0) then min(A, S_v).
pub fn update_a(
    state: &SolverState,
    sigs: &[SimilarityGraph],
    b: &DMatrix<f64>,
) -> (Vec<DMatrix<f64>>, f64) {
    let (mut a, cond) = solve_consistent_parts(state, sigs, b);
    for (a_v, sig) in a.iter_mut().zip(sigs) {
        for (x, &s) in a_v.iter_mut().zip(sig.weights.iter()) {
            *x = x.max(0.0).min(s);
        }
    }
    (a, cond)
}

/// Rank-weight adaptation: with too many zero Laplacian eigenvalues the graph
/// is over-fragmented and lambda halves; with too few it doubles; at the
/// target count it is left alone. Clamped to [1e-8, 1e8].
pub fn adapt_lambda(state: &SolverState, n_clusters: usize) -> f64 {
    let zeros = count_zero_eigenvalues(&state.eigenvalues);
    let lambda = if zeros > n_clusters {
        state.lambda / 2.0
    } else if zeros < n_clusters {
        state.lambda * 2.0
    } else {
        state.lambda
    };
    lambda.clamp(LAMBDA_MIN, LAMBDA_MAX)
}

pub fn count_zero_eigenvalues(eigenvalues: &DVector<f64>) -> usize {
    eigenvalues.iter().filter(|&&e| e < ZERO_EIG_TOL).count()
}

/// Weighted fit of the unified graph to the raw similarity graphs,
/// sum_v alpha_v ||U - S_v||_F^2.
pub fn sig_fit(u: &DMatrix<f64>, alpha: &DVector<f64>, sigs: &[SimilarityGraph]) -> f64 {
    sigs.iter()
        .zip(alpha.iter())
        .map(|(sig, &a)| a * (u - &sig.weights).norm_squared())
        .sum()
}

/// The traced fit: sig_fit with weights alpha_v = 1 / (2 ||U - S_v||_F)
/// evaluated at `u` itself, which reduces to sum_v ||U - S_v||_F / 2.
pub fn traced_sig_fit(u: &DMatrix<f64>, sigs: &[SimilarityGraph]) -> f64 {
    sigs.iter().map(|sig| 0.5 * (u - &sig.weights).norm()).sum()
}

/// Full objective:
/// sum_v alpha_v ||U - A_v||_F^2 + 2 lambda Tr(F^T L_U F)
/// + 1/2 sum_{v,w} b_vw <S_v - A_v, S_w - A_w>.
///
/// The pairwise penalty is weighted so that the A-step's stationarity system
/// is its exact minimizer.
pub fn objective_value(
    u: &DMatrix<f64>,
    f: &DMatrix<f64>,
    alpha: &DVector<f64>,
    a: &[DMatrix<f64>],
    sigs: &[SimilarityGraph],
    lambda: f64,
    b: &DMatrix<f64>,
) -> f64 {
    let fit: f64 = a
        .iter()
        .zip(alpha.iter())
        .map(|(a_v, &w)| w * (u - a_v).norm_squared())
        .sum();

    let l = laplacian(u);
    let lf = &l * f;
    let rank_term = 2.0 * lambda * f.iter().zip(lf.iter()).map(|(x, y)| x * y).sum::<f64>();

    let residuals: Vec<DMatrix<f64>> = sigs
        .iter()
        .zip(a.iter())
        .map(|(sig, a_v)| &sig.weights - a_v)
        .collect();
    let mut penalty = 0.0;
    for v in 0..residuals.len() {
        for w in 0..residuals.len() {
            let inner: f64 = residuals[v]
                .iter()
                .zip(residuals[w].iter())
                .map(|(x, y)| x * y)
                .sum();
            penalty += b[(v, w)] * inner;
        }
    }

    fit + rank_term + 0.5 * penalty
}

/// Run the alternating loop until the relative Frobenius change of U drops
/// below `hp.tol` or `hp.max_iter` sweeps complete.
pub fn run(sigs: &[SimilarityGraph], hp: &Hyperparams) -> Result<SolverState> {
    let mut state = init_state(sigs, hp)?;
    let b = penalty_matrix(sigs.len(), hp.beta, hp.gamma);

    for iteration in 1..=hp.max_iter {
        state.alpha = update_alpha(&state);
        let u_new = update_u(&state, hp);
        let u_prev = std::mem::replace(&mut state.u, u_new);

        let l = laplacian(&state.u);
        let (f, eigenvalues) = update_f(&l, hp.n_clusters)?;
        state.f = f;
        state.eigenvalues = eigenvalues;
        let zero_eigenvalues = count_zero_eigenvalues(&state.eigenvalues);

        let lambda_used = state.lambda;
        state.lambda = adapt_lambda(&state, hp.n_clusters);

        let mut penalty_condition = f64::NAN;
        if !hp.baseline_mode {
            let (a, cond) = update_a(&state, sigs, &b);
            state.a = a;
            penalty_condition = cond;
        }

        state.trace.push(IterationRecord {
            iteration,
            sig_fit: traced_sig_fit(&state.u, sigs),
            objective: objective_value(
                &state.u,
                &state.f,
                &state.alpha,
                &state.a,
                sigs,
                lambda_used,
                &b,
            ),
            lambda: lambda_used,
            zero_eigenvalues,
            penalty_condition,
        });

        let delta = (&state.u - &u_prev).norm() / u_prev.norm().max(1e-12);
        if delta < hp.tol {
            state.converged = true;
            break;
        }
    }
    Ok(state)
}

/// Cluster labels plus the component count seen before any repair.
#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    /// Connected components of the thresholded graph before merge/split.
    pub components_found: usize,
}

/// Read clusters off the unified graph: connected components of the
/// symmetrized graph with edges below 1e-10 dropped. When the component
/// count misses the target, components are greedily merged by largest
/// inter-block weight mass, or the largest component is split by spectral
/// bisection, until the target is met.
pub fn extract_clusters(u: &DMatrix<f64>, n_clusters: usize) -> ClusterAssignment {
    let n = u.nrows();
    let target = n_clusters.clamp(1, n.max(1));
    let w = crate::graph::symmetrize(u);

    let mut labels = connected_components(&w);
    let components_found = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut count = components_found;

    while count > target {
        merge_closest_pair(&w, &mut labels, count);
        count -= 1;
    }
    while count < target {
        if !split_largest(&w, &mut labels, count) {
            break;
        }
        count += 1;
    }

    ClusterAssignment {
        labels: relabel_by_first_occurrence(&labels),
        components_found,
    }
}

fn connected_components(w: &DMatrix<f64>) -> Vec<usize> {
    let n = w.nrows();
    let mut labels = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if labels[start] != usize::MAX {
            continue;
        }
        stack.push(start);
        labels[start] = next;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if labels[j] == usize::MAX && i != j && w[(i, j)] >= COMPONENT_EDGE_TOL {
                    labels[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    labels
}

/// Merge the pair of blocks with the largest total cross weight in the
/// unthresholded graph; ties pick the lexicographically smallest pair.
fn merge_closest_pair(w: &DMatrix<f64>, labels: &mut [usize], count: usize) {
    let n = labels.len();
    let mut mass = vec![vec![0.0f64; count]; count];
    for i in 0..n {
        for j in (i + 1)..n {
            let (a, b) = (labels[i], labels[j]);
            if a != b {
                mass[a.min(b)][a.max(b)] += w[(i, j)];
            }
        }
    }
    let mut best = (0usize, 1usize);
    let mut best_mass = f64::NEG_INFINITY;
    for a in 0..count {
        for b in (a + 1)..count {
            if mass[a][b] > best_mass {
                best_mass = mass[a][b];
                best = (a, b);
            }
        }
    }
    let (keep, drop) = best;
    for l in labels.iter_mut() {
        if *l == drop {
            *l = keep;
        } else if *l > drop {
            *l -= 1;
        }
    }
}

/// Split the largest splittable block two ways along its Fiedler vector.
/// Returns false when every block is a singleton.
fn split_largest(w: &DMatrix<f64>, labels: &mut [usize], count: usize) -> bool {
    let mut sizes = vec![0usize; count];
    for &l in labels.iter() {
        sizes[l] += 1;
    }
    let Some(block) = (0..count)
        .filter(|&c| sizes[c] >= 2)
        .max_by_key(|&c| (sizes[c], usize::MAX - c))
    else {
        return false;
    };
    let nodes: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == block).collect();
    let moved = spectral_bisection(w, &nodes);
    for i in moved {
        labels[i] = count;
    }
    true
}

/// Indices (into the full graph) of the half of `nodes` to peel off.
fn spectral_bisection(w: &DMatrix<f64>, nodes: &[usize]) -> Vec<usize> {
    let m = nodes.len();
    if m == 2 {
        return vec![nodes[1]];
    }
    let sub = DMatrix::from_fn(m, m, |a, b| if a == b { 0.0 } else { w[(nodes[a], nodes[b])] });
    let l = laplacian(&sub);
    let Ok((_, vectors)) = symmetric_eigen_ascending(&l) else {
        // Degenerate fallback: peel off the back half in index order.
        return nodes[m / 2..].to_vec();
    };
    let fiedler = vectors.column(1);
    let negative: Vec<usize> = (0..m).filter(|&a| fiedler[a] < 0.0).collect();
    if !negative.is_empty() && negative.len() < m {
        return negative.iter().map(|&a| nodes[a]).collect();
    }
    // One-sided sign pattern: cut at the largest gap in the sorted values.
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| fiedler[a].total_cmp(&fiedler[b]));
    let mut cut = 1;
    let mut best_gap = f64::NEG_INFINITY;
    for t in 1..m {
        let gap = fiedler[order[t]] - fiedler[order[t - 1]];
        if gap > best_gap {
            best_gap = gap;
            cut = t;
        }
    }
    order[cut..].iter().map(|&a| nodes[a]).collect()
}

fn relabel_by_first_occurrence(labels: &[usize]) -> Vec<usize> {
    let mut mapping = std::collections::HashMap::new();
    let mut next = 0usize;
    labels
        .iter()
        .map(|&l| {
            *mapping.entry(l).or_insert_with(|| {
                let id = next;
                next += 1;
                id
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::SimilarityGraph;
    use nalgebra::dmatrix;

    fn sig(weights: DMatrix<f64>) -> SimilarityGraph {
        SimilarityGraph {
            weights,
            neighbor_count: 1,
        }
    }

    /// Block-diagonal graph with `blocks` blocks of `size` nodes, uniform
    /// weights inside each block.
    fn block_graph(blocks: usize, size: usize) -> SimilarityGraph {
        let n = blocks * size;
        let w = 1.0 / (size - 1) as f64;
        let weights = DMatrix::from_fn(n, n, |i, j| {
            if i != j && i / size == j / size {
                w
            } else {
                0.0
            }
        });
        sig(weights)
    }

    fn small_random_state(seed: u64, n: usize, n_views: usize, c: usize) -> (Vec<SimilarityGraph>, SolverState, Hyperparams) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let sigs: Vec<SimilarityGraph> = (0..n_views)
            .map(|_| {
                let mut rows = DMatrix::from_fn(n, n, |i, j| {
                    if i == j {
                        0.0
                    } else {
                        rng.gen_range(0.0..1.0)
                    }
                });
                for i in 0..n {
                    let s = rows.row(i).sum();
                    for j in 0..n {
                        rows[(i, j)] /= s;
                    }
                }
                sig(crate::graph::symmetrize(&rows))
            })
            .collect();
        let mut hp = Hyperparams::new(c);
        hp.lambda0 = 0.5;
        let state = init_state(&sigs, &hp).unwrap();
        (sigs, state, hp)
    }

    #[test]
    fn init_uniform_alpha() {
        let s = block_graph(2, 3);
        let sigs = vec![s.clone(), s.clone(), s.clone(), s];
        let state = init_state(&sigs, &Hyperparams::new(2)).unwrap();
        for v in 0..4 {
            assert_eq!(state.alpha[v], 0.25);
        }
    }

    #[test]
    fn init_single_view_keeps_projected_graph() {
        let s = block_graph(2, 3);
        let state = init_state(&[s.clone()], &Hyperparams::new(2)).unwrap();
        // Rows of the block graph already sum to 1, so projection is a no-op.
        assert!((&state.u - &s.weights).norm() < 1e-12);
    }

    #[test]
    fn init_rows_on_simplex() {
        let s = block_graph(3, 3);
        let sigs = vec![s.clone(), s.clone(), s];
        let state = init_state(&sigs, &Hyperparams::new(3)).unwrap();
        for i in 0..9 {
            assert!((state.u.row(i).sum() - 1.0).abs() <= 1e-8);
        }
    }

    #[test]
    fn init_rejects_mismatched_views() {
        let sigs = vec![block_graph(2, 3), block_graph(2, 2)];
        assert!(init_state(&sigs, &Hyperparams::new(2)).is_err());
    }

    #[test]
    fn init_rejects_too_many_clusters() {
        let s = block_graph(2, 2);
        assert!(init_state(&[s], &Hyperparams::new(5)).is_err());
    }

    #[test]
    fn alpha_formula() {
        let s = block_graph(2, 2);
        let mut state = init_state(&[s], &Hyperparams::new(2)).unwrap();
        // ||U - A||_F^2 = 0.25 -> alpha = 1/(2*0.5) = 1.
        state.a[0] = &state.u + DMatrix::from_element(4, 4, 0.125);
        let d2 = (&state.u - &state.a[0]).norm_squared();
        assert!((d2 - 0.25).abs() < 1e-12);
        assert!((update_alpha(&state)[0] - 1.0).abs() < 1e-12);
        // ||U - A||_F^2 = 1 -> alpha = 0.5.
        state.a[0] = &state.u + DMatrix::from_element(4, 4, 0.25);
        assert!((update_alpha(&state)[0] - 0.5).abs() < 1e-12);
        // U = A -> guard kicks in.
        state.a[0] = state.u.clone();
        let alpha = update_alpha(&state);
        assert_eq!(alpha[0], 5e9);
        assert!(alpha[0].is_finite());
    }

    #[test]
    fn p_matrix_examples() {
        let f = dmatrix![1.0, 0.0; 1.0, 0.0];
        let p = compute_p(&f);
        assert_eq!(p[(0, 1)], 0.0);

        let f = dmatrix![1.0, 0.0; 0.0, 1.0];
        let p = compute_p(&f);
        assert_eq!(p, dmatrix![0.0, 2.0; 2.0, 0.0]);
    }

    #[test]
    fn p_matrix_matches_loop_oracle() {
        let f = DMatrix::from_fn(6, 3, |i, j| ((i * 5 + j) as f64 * 0.73).sin());
        let p = compute_p(&f);
        for i in 0..6 {
            for j in 0..6 {
                let expect: f64 = (0..3).map(|t| (f[(i, t)] - f[(j, t)]).powi(2)).sum();
                assert!((p[(i, j)] - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn simplex_projection_examples() {
        assert_eq!(project_simplex(&[1.0, 0.0, 0.0]), vec![1.0, 0.0, 0.0]);

        let thirds = project_simplex(&[0.6, 0.6, 0.6]);
        for x in &thirds {
            assert!((x - 1.0 / 3.0).abs() <= 1e-12);
        }

        let p = project_simplex(&[0.9, 0.3, -0.2]);
        assert!((p[0] - 0.8).abs() <= 1e-12);
        assert!((p[1] - 0.2).abs() <= 1e-12);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn update_u_identity_when_lambda_zero_single_view() {
        let s = block_graph(2, 3);
        let mut state = init_state(&[s.clone()], &Hyperparams::new(2)).unwrap();
        state.lambda = 0.0;
        let u = update_u(&state, &Hyperparams::new(2));
        assert!((&u - &s.weights).norm() <= 1e-12);
    }

    #[test]
    fn update_u_mean_of_equal_rows() {
        let s = block_graph(2, 3);
        let sigs = vec![s.clone(), s.clone()];
        let mut state = init_state(&sigs, &Hyperparams::new(2)).unwrap();
        state.lambda = 0.0;
        // Both views share A_v, so the target is the common row.
        let u = update_u(&state, &Hyperparams::new(2));
        assert!((&u - &s.weights).norm() <= 1e-12);
    }

    #[test]
    fn update_u_beats_random_simplex_points() {
        // Fresh init keeps alpha uniform, where the per-view target objective
        // and the weighted solve share their minimizer.
        let (_sigs, state, hp) = small_random_state(7, 6, 3, 2);
        let u = update_u(&state, &hp);
        let p = compute_p(&state.f);
        let row_objective = |row: &[f64], i: usize| -> f64 {
            let mut total = 0.0;
            for v in 0..state.n_views() {
                let mut fit = 0.0;
                for j in 0..6 {
                    let c =
                        state.a[v][(i, j)] - state.lambda / (2.0 * 3.0 * state.alpha[v]) * p[(i, j)];
                    fit += (row[j] - c).powi(2);
                }
                total += fit;
            }
            total
        };
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
        for i in 0..6 {
            let ours: Vec<f64> = (0..6).map(|j| u[(i, j)]).collect();
            let ours_obj = row_objective(&ours, i);
            for _ in 0..1000 {
                // Random simplex point by exponential-spacing normalization.
                let mut cand: Vec<f64> = (0..6).map(|_| -rng.gen_range(1e-12f64..1.0).ln()).collect();
                let s: f64 = cand.iter().sum();
                for c in &mut cand {
                    *c /= s;
                }
                assert!(ours_obj <= row_objective(&cand, i) + 1e-9);
            }
        }
    }

    #[test]
    fn laplacian_two_node_path() {
        let u = dmatrix![0.0, 1.0; 1.0, 0.0];
        let l = laplacian(&u);
        assert_eq!(l, dmatrix![1.0, -1.0; -1.0, 1.0]);
        let (vals, _) = symmetric_eigen_ascending(&l).unwrap();
        assert!(vals[0].abs() < 1e-12);
        assert!((vals[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let u = DMatrix::from_fn(5, 5, |i, j| if i == j { 0.0 } else { (i + 2 * j) as f64 * 0.01 });
        let l = laplacian(&u);
        for i in 0..5 {
            assert!(l.row(i).sum().abs() <= 1e-12);
        }
    }

    #[test]
    fn laplacian_block_diagonal_zero_eigenvalues() {
        let s = block_graph(3, 4);
        let l = laplacian(&s.weights);
        let (vals, _) = symmetric_eigen_ascending(&l).unwrap();
        assert_eq!(count_zero_eigenvalues(&vals), 3);
    }

    #[test]
    fn embedding_of_disconnected_graph_has_zero_trace() {
        let s = block_graph(2, 2);
        let l = laplacian(&s.weights);
        let (f, _) = update_f(&l, 2).unwrap();
        let lf = &l * &f;
        let trace: f64 = f.iter().zip(lf.iter()).map(|(a, b)| a * b).sum();
        assert!(trace.abs() <= 1e-10);
    }

    #[test]
    fn embedding_trace_matches_smallest_eigenvalues() {
        // Random PSD matrix via M M^T.
        let m = DMatrix::from_fn(8, 8, |i, j| ((i * 3 + j * 7) as f64 * 0.41).sin());
        let psd = &m * m.transpose();
        let (f, vals) = update_f(&psd, 3).unwrap();
        let lf = &psd * &f;
        let trace: f64 = f.iter().zip(lf.iter()).map(|(a, b)| a * b).sum();
        let expect: f64 = vals.iter().take(3).sum();
        assert!((trace - expect).abs() <= 1e-8 * (1.0 + expect.abs()));
    }

    #[test]
    fn embedding_is_orthonormal() {
        let (_sigs, state, _) = small_random_state(3, 10, 2, 3);
        let gram = state.f.transpose() * &state.f;
        assert!((gram - DMatrix::<f64>::identity(3, 3)).norm() <= 1e-8);
    }

    #[test]
    fn system_matrix_assembly() {
        // Default penalties with two equally weighted views.
        let alpha = DVector::from_vec(vec![0.5, 0.5]);
        let b = penalty_matrix(2, 1e-12, 1e-5);
        let c = system_matrix(&alpha, &b);
        assert_eq!(c[(0, 0)], 1.0 + 1e-12);
        assert_eq!(c[(1, 1)], 1.0 + 1e-12);
        assert_eq!(c[(0, 1)], 1e-5);
        assert_eq!(c[(1, 0)], 1e-5);
    }

    #[test]
    fn a_update_single_view_beta_zero_returns_clamped_u() {
        let s = block_graph(2, 3);
        let mut state = init_state(&[s.clone()], &Hyperparams::new(2)).unwrap();
        // Nudge U away from S so the clamp is visible.
        state.u[(0, 1)] += 0.2;
        let b = penalty_matrix(1, 0.0, 0.0);
        let (pre, _) = solve_consistent_parts(&state, &[s.clone()], &b);
        assert!((&pre[0] - &state.u).norm() <= 1e-12);
        let (post, _) = update_a(&state, &[s.clone()], &b);
        for i in 0..6 {
            for j in 0..6 {
                let expect = state.u[(i, j)].max(0.0).min(s.weights[(i, j)]);
                assert!((post[0][(i, j)] - expect).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn a_update_stationarity_residual_vanishes() {
        let (sigs, mut state, hp) = small_random_state(11, 8, 3, 2);
        state.alpha = update_alpha(&state);
        let b = penalty_matrix(3, hp.beta, hp.gamma);
        let (pre, cond) = solve_consistent_parts(&state, &sigs, &b);
        assert!(cond.is_finite());
        let mut max_resid = 0.0f64;
        let mut h_scale = 0.0f64;
        for v in 0..3 {
            let mut h_v = &state.u * (2.0 * state.alpha[v]);
            for w in 0..3 {
                h_v += &sigs[w].weights * b[(v, w)];
            }
            h_scale = h_scale.max(h_v.amax());
            let mut lhs = &pre[v] * (2.0 * state.alpha[v]);
            for w in 0..3 {
                lhs += &pre[w] * b[(v, w)];
            }
            max_resid = max_resid.max((h_v - lhs).amax());
        }
        assert!(max_resid <= 1e-8 * (1.0 + h_scale));
    }

    #[test]
    fn a_update_respects_bounds_exactly() {
        let (sigs, mut state, hp) = small_random_state(13, 8, 3, 2);
        state.alpha = update_alpha(&state);
        let b = penalty_matrix(3, hp.beta, hp.gamma);
        let (post, _) = update_a(&state, &sigs, &b);
        for (a_v, sig) in post.iter().zip(&sigs) {
            for (x, s) in a_v.iter().zip(sig.weights.iter()) {
                assert!(*x >= 0.0);
                assert!(*x <= *s);
            }
        }
    }

    #[test]
    fn lambda_adaptation_rules() {
        let s = block_graph(2, 3);
        let mut state = init_state(&[s], &Hyperparams::new(2)).unwrap();

        state.eigenvalues = DVector::from_vec(vec![0.0, 0.0, 1.0, 2.0, 2.0, 3.0]);
        state.lambda = 4.0;
        assert_eq!(adapt_lambda(&state, 2), 4.0);

        state.eigenvalues = DVector::from_vec(vec![0.5, 1.0, 1.0, 2.0, 2.0, 3.0]);
        assert_eq!(adapt_lambda(&state, 5), 8.0);

        state.lambda = LAMBDA_MAX;
        assert_eq!(adapt_lambda(&state, 5), LAMBDA_MAX);

        state.eigenvalues = DVector::from_vec(vec![0.0, 0.0, 0.0, 2.0, 2.0, 3.0]);
        state.lambda = 4.0;
        assert_eq!(adapt_lambda(&state, 2), 2.0);
    }

    #[test]
    fn run_single_iteration_has_single_record() {
        let s = block_graph(2, 3);
        let mut hp = Hyperparams::new(2);
        hp.max_iter = 1;
        let state = run(&[s.clone(), s], &hp).unwrap();
        assert_eq!(state.trace.len(), 1);
        assert_eq!(state.trace[0].iteration, 1);
    }

    #[test]
    fn run_consistent_views_reach_block_diagonal_fixed_point() {
        let s = block_graph(3, 4);
        let sigs = vec![s.clone(), s.clone(), s.clone()];
        let state = run(&sigs, &Hyperparams::new(3)).unwrap();
        assert!(state.converged);
        assert!(state.trace.last().unwrap().sig_fit <= 1e-8);
        for i in 0..12 {
            for j in 0..12 {
                if i / 4 != j / 4 {
                    assert!(state.u[(i, j)].abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn baseline_and_full_agree_when_views_consistent_and_penalty_large() {
        let s = block_graph(2, 4);
        let sigs = vec![s.clone(), s.clone()];
        let mut hp = Hyperparams::new(2);
        hp.beta = 1e6;
        hp.gamma = 1e6;
        let full = run(&sigs, &hp).unwrap();
        hp.baseline_mode = true;
        let baseline = run(&sigs, &hp).unwrap();
        assert!((&full.u - &baseline.u).norm() <= 1e-6);
    }

    #[test]
    fn extract_two_blocks() {
        let s = block_graph(2, 3);
        let out = extract_clusters(&s.weights, 2);
        assert_eq!(out.components_found, 2);
        assert_eq!(out.labels, vec![0, 0, 0, 1, 1, 1]);
    }

    #[test]
    fn extract_single_cluster_fully_connected() {
        let n = 5;
        let u = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 0.25 });
        let out = extract_clusters(&u, 1);
        assert_eq!(out.components_found, 1);
        assert!(out.labels.iter().all(|&l| l == 0));
    }

    #[test]
    fn extract_merges_pair_with_largest_cross_mass() {
        // Three 3-node blocks; blocks 1 and 2 share the heaviest
        // sub-threshold cross edges, so asking for 2 clusters merges them.
        let mut w = block_graph(3, 3).weights;
        for i in 0..3 {
            for j in 3..6 {
                w[(i, j)] = 1e-13;
                w[(j, i)] = 1e-13;
            }
        }
        for i in 3..6 {
            for j in 6..9 {
                w[(i, j)] = 5e-12;
                w[(j, i)] = 5e-12;
            }
        }
        let out = extract_clusters(&w, 2);
        assert_eq!(out.components_found, 3);
        assert_eq!(out.labels, vec![0, 0, 0, 1, 1, 1, 1, 1, 1]);

        // Exhaustive check: of the three possible merges, 1-2 has the
        // largest inter-block mass.
        let mass = |a: std::ops::Range<usize>, b: std::ops::Range<usize>| -> f64 {
            let mut total = 0.0;
            for i in a {
                for j in b.clone() {
                    total += w[(i, j)];
                }
            }
            total
        };
        let m01 = mass(0..3, 3..6);
        let m12 = mass(3..6, 6..9);
        let m02 = mass(0..3, 6..9);
        assert!(m12 > m01 && m12 > m02);
    }

    #[test]
    fn extract_splits_when_too_few_components() {
        // One connected graph made of two dense lobes joined by one edge.
        let mut w = block_graph(2, 4).weights;
        w[(0, 4)] = 0.05;
        w[(4, 0)] = 0.05;
        let out = extract_clusters(&w, 2);
        assert_eq!(out.components_found, 1);
        let first = &out.labels[..4];
        let second = &out.labels[4..];
        assert!(first.iter().all(|&l| l == first[0]));
        assert!(second.iter().all(|&l| l == second[0]));
        assert_ne!(first[0], second[0]);
    }
}
