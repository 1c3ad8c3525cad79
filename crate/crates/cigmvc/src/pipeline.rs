//! End-to-end clustering runs: features to graphs to unified graph to
//! labels, with quality scores when ground truth is available.

use crate::dataset::MultiViewDataset;
use crate::error::Result;
use crate::graph::{build_sig, standardize_columns, FeatureMatrix, SimilarityGraph};
use crate::metrics;
use crate::solver::{extract_clusters, run, ClusterAssignment, Hyperparams, SolverState};

/// Everything produced by one clustering run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: SolverState,
    pub assignment: ClusterAssignment,
    /// Clustering accuracy in [0, 1] against ground truth, when available.
    pub accuracy: Option<f64>,
    /// Normalized mutual information in [0, 1], when available.
    pub nmi: Option<f64>,
}

/// One adaptive-neighbor similarity graph per view, optionally on
/// per-column standardized features.
pub fn build_sigs(
    views: &[FeatureMatrix],
    k: usize,
    standardize: bool,
) -> Result<Vec<SimilarityGraph>> {
    views
        .iter()
        .map(|view| {
            if standardize {
                build_sig(&standardize_columns(view), k)
            } else {
                build_sig(view, k)
            }
        })
        .collect()
}

/// Solve on prebuilt graphs and read labels off the unified graph.
pub fn cluster_sigs(
    sigs: &[SimilarityGraph],
    hp: &Hyperparams,
) -> Result<(SolverState, ClusterAssignment)> {
    let state = run(sigs, hp)?;
    let assignment = extract_clusters(&state.u, hp.n_clusters);
    Ok((state, assignment))
}

/// Full run on a dataset, scoring against its labels when present.
pub fn cluster_dataset(
    dataset: &MultiViewDataset,
    hp: &Hyperparams,
    standardize: bool,
) -> Result<RunOutcome> {
    let sigs = build_sigs(&dataset.views, hp.k, standardize)?;
    let (state, assignment) = cluster_sigs(&sigs, hp)?;
    let (accuracy, nmi) = match &dataset.labels {
        Some(truth) => (
            Some(metrics::accuracy(&assignment.labels, truth)?),
            Some(metrics::nmi(&assignment.labels, truth)?),
        ),
        None => (None, None),
    };
    Ok(RunOutcome {
        state,
        assignment,
        accuracy,
        nmi,
    })
}
