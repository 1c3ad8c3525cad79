//! Shared helpers for integration tests: independent oracles and the
//! random-instance invariant battery.
//!
//! Oracles deliberately avoid every solver code path they check. The
//! simplex oracle enumerates active sets instead of sorting; the
//! consistent-part oracle solves one small dense system per matrix entry
//! instead of factoring once and combining matrices.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cigmvc::graph::{build_sig, FeatureMatrix, SimilarityGraph};
use cigmvc::linalg::symmetric_eigen_ascending;
use cigmvc::solver::{
    adapt_lambda, init_state, laplacian, objective_value, penalty_matrix, solve_consistent_parts,
    update_a, update_alpha, update_f, update_u, Hyperparams,
};

/// Exact simplex projection by exhaustive active-set enumeration, valid for
/// n <= 4. For every non-empty support T the equality-constrained minimizer
/// is v_i + (1 - sum_T v) / |T| on T and 0 elsewhere; the best feasible
/// candidate over all supports is the projection.
pub fn oracle_simplex_qp(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    assert!((1..=4).contains(&n), "active-set enumeration is for n <= 4");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let sum: f64 = support.iter().map(|&i| v[i]).sum();
        let shift = (1.0 - sum) / support.len() as f64;
        let mut candidate = vec![0.0; n];
        let mut feasible = true;
        for &i in &support {
            candidate[i] = v[i] + shift;
            if candidate[i] < 0.0 {
                feasible = false;
                break;
            }
        }
        if !feasible {
            continue;
        }
        let objective: f64 = (0..n).map(|i| (candidate[i] - v[i]).powi(2)).sum();
        if best.as_ref().map_or(true, |(b, _)| objective < *b) {
            best = Some((objective, candidate));
        }
    }
    best.expect("the full support is always feasible after shifting").1
}

/// Consistent-part update oracle: for every entry (i, j), assemble the
/// V x V system (2 diag(alpha) + B) x = h with
/// h_v = 2 alpha_v U_ij + sum_w b_vw (S_w)_ij, solve it with a fresh LU
/// factorization, then clamp to [0, (S_v)_ij].
pub fn oracle_a_update(
    u: &DMatrix<f64>,
    sigs: &[SimilarityGraph],
    alpha: &DVector<f64>,
    b: &DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    let n_views = sigs.len();
    let n = u.nrows();
    let mut system = b.clone();
    for t in 0..n_views {
        system[(t, t)] += 2.0 * alpha[t];
    }
    let mut out = vec![DMatrix::zeros(n, n); n_views];
    for i in 0..n {
        for j in 0..n {
            let h = DVector::from_fn(n_views, |t, _| {
                2.0 * alpha[t] * u[(i, j)]
                    + (0..n_views).map(|w| b[(t, w)] * sigs[w].weights[(i, j)]).sum::<f64>()
            });
            let x = system.clone().lu().solve(&h).expect("positive definite system");
            for t in 0..n_views {
                out[t][(i, j)] = x[t].max(0.0).min(sigs[t].weights[(i, j)]);
            }
        }
    }
    out
}

/// A random solver instance: graphs built from uniform random features, and
/// hyperparameters drawn from ranges that keep the A-step system positive
/// definite.
pub fn random_instance(seed: u64) -> (Vec<SimilarityGraph>, Hyperparams) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n: usize = rng.gen_range(8..=50);
    let n_views: usize = rng.gen_range(1..=4);
    let dim: usize = rng.gen_range(2..=8);
    let k: usize = rng.gen_range(2..=(n - 2).min(8));
    let c: usize = rng.gen_range(2..=(n / 2).min(6));

    let mut hp = Hyperparams::new(c);
    hp.k = k;
    hp.lambda0 = 10f64.powf(rng.gen_range(-1.0..1.0));
    hp.beta = 10f64.powf(rng.gen_range(-12.0..-3.0));
    hp.gamma = 10f64.powf(rng.gen_range(-6.0..-3.0));

    let sigs = (0..n_views)
        .map(|view| {
            let data = DMatrix::from_fn(n, dim, |_, _| rng.gen_range(-5.0..5.0));
            build_sig(&FeatureMatrix::new(data, view).unwrap(), k).unwrap()
        })
        .collect();
    (sigs, hp)
}

fn descent_tol(reference: f64) -> f64 {
    1e-9 * reference.abs().max(1.0)
}

/// Run three solver sweeps on a random instance, checking after every
/// subproblem:
///   - rows of U stay on the probability simplex,
///   - F stays orthonormal and Tr(F^T L F) equals the sum of the C
///     smallest Laplacian eigenvalues,
///   - the pre-clamp A solve satisfies its stationarity system,
///   - the clamp respects 0 <= A_v <= S_v exactly,
///   - each subproblem does not increase the objective at fixed weights
///     and fixed lambda (relative tolerance 1e-9).
pub fn check_invariants(seed: u64) {
    let (sigs, hp) = random_instance(seed);
    let b = penalty_matrix(sigs.len(), hp.beta, hp.gamma);
    let mut state = init_state(&sigs, &hp).unwrap();
    let n = state.n_samples();

    for sweep in 0..3 {
        let ctx = |what: &str| format!("seed {seed}, sweep {sweep}: {what}");
        state.alpha = update_alpha(&state);
        let lambda = state.lambda;
        let objective =
            |s: &cigmvc::solver::SolverState| objective_value(&s.u, &s.f, &s.alpha, &s.a, &sigs, lambda, &b);

        let j0 = objective(&state);
        state.u = update_u(&state, &hp);
        for i in 0..n {
            let row = state.u.row(i);
            assert!((row.sum() - 1.0).abs() <= 1e-9, "{}", ctx("row sum off simplex"));
            assert!(row.iter().all(|&x| x >= 0.0), "{}", ctx("negative U entry"));
        }
        let j1 = objective(&state);
        assert!(j1 <= j0 + descent_tol(j0), "{}: {j0} -> {j1}", ctx("U step increased objective"));

        let l = laplacian(&state.u);
        let (f, eigenvalues) = update_f(&l, hp.n_clusters).unwrap();
        state.f = f;
        state.eigenvalues = eigenvalues;
        let gram = state.f.transpose() * &state.f;
        let c = hp.n_clusters;
        assert!(
            (gram - DMatrix::<f64>::identity(c, c)).norm() <= 1e-8,
            "{}",
            ctx("F not orthonormal")
        );
        let lf = &l * &state.f;
        let trace: f64 = state.f.iter().zip(lf.iter()).map(|(a, b)| a * b).sum();
        let smallest: f64 = state.eigenvalues.iter().take(c).sum();
        assert!(
            (trace - smallest).abs() <= 1e-8 * (1.0 + smallest.abs()),
            "{}: {trace} vs {smallest}",
            ctx("embedding trace mismatch")
        );
        let j2 = objective(&state);
        assert!(j2 <= j1 + descent_tol(j1), "{}: {j1} -> {j2}", ctx("F step increased objective"));

        let (pre_clamp, _) = solve_consistent_parts(&state, &sigs, &b);
        for v in 0..sigs.len() {
            let mut lhs = &pre_clamp[v] * (2.0 * state.alpha[v]);
            for w in 0..sigs.len() {
                lhs += &pre_clamp[w] * b[(v, w)];
            }
            let mut rhs = &state.u * (2.0 * state.alpha[v]);
            for w in 0..sigs.len() {
                rhs += &sigs[w].weights * b[(v, w)];
            }
            assert!(
                (rhs - lhs).amax() <= 1e-6,
                "{}",
                ctx("pre-clamp stationarity residual too large")
            );
        }
        let (post, _) = update_a(&state, &sigs, &b);
        for (a_v, sig) in post.iter().zip(&sigs) {
            for (x, s) in a_v.iter().zip(sig.weights.iter()) {
                assert!(*x >= 0.0 && *x <= *s, "{}", ctx("A outside [0, S]"));
            }
        }
        state.a = post;
        let j3 = objective(&state);
        assert!(j3 <= j2 + descent_tol(j2), "{}: {j2} -> {j3}", ctx("A step increased objective"));

        state.lambda = adapt_lambda(&state, hp.n_clusters);
    }

    // The full-spectrum identity also pins the eigenvalue count.
    let (values, _) = symmetric_eigen_ascending(&laplacian(&state.u)).unwrap();
    assert_eq!(values.len(), n);
}
