//! External clustering quality measures.
//!
//! Both measures compare a predicted label vector against ground truth and
//! are invariant to renaming clusters on either side. Accuracy matches
//! predicted clusters to truth clusters one-to-one so that the matched
//! agreement count is maximal; normalized mutual information needs no
//! matching at all.

use pathfinding::prelude::{kuhn_munkres, Matrix};

use crate::error::{Error, Result};

fn contingency(pred: &[usize], truth: &[usize]) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::LabelVectorMismatch {
            left: pred.len(),
            right: truth.len(),
        });
    }
    let np = pred.iter().max().unwrap() + 1;
    let nt = truth.iter().max().unwrap() + 1;
    let mut table = vec![vec![0usize; nt]; np];
    for (&p, &t) in pred.iter().zip(truth) {
        table[p][t] += 1;
    }
    Ok(table)
}

/// Clustering accuracy: the largest fraction of samples that agree under a
/// one-to-one matching of predicted clusters to truth clusters, found by
/// maximum-weight assignment on the contingency table.
pub fn accuracy(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let m = table.len().max(table[0].len());
    // Zero-padding to square leaves unmatched clusters contributing nothing.
    let mut weights = Matrix::new(m, m, 0i64);
    for (p, row) in table.iter().enumerate() {
        for (t, &count) in row.iter().enumerate() {
            weights[(p, t)] = count as i64;
        }
    }
    let (matched, _) = kuhn_munkres(&weights);
    Ok(matched as f64 / pred.len() as f64)
}

/// Normalized mutual information I(P; T) / sqrt(H(P) H(T)) with natural
/// logarithms. Two single-cluster partitions agree perfectly and score 1;
/// otherwise a zero entropy on either side scores 0.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let table = contingency(pred, truth)?;
    let n = pred.len() as f64;

    let row_sums: Vec<usize> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<usize> = (0..table[0].len())
        .map(|t| table.iter().map(|r| r[t]).sum())
        .collect();

    let nontrivial_pred = row_sums.iter().filter(|&&s| s > 0).count() > 1;
    let nontrivial_truth = col_sums.iter().filter(|&&s| s > 0).count() > 1;
    if !nontrivial_pred && !nontrivial_truth {
        return Ok(1.0);
    }

    let entropy = |sums: &[usize]| -> f64 {
        sums.iter()
            .filter(|&&s| s > 0)
            .map(|&s| {
                let p = s as f64 / n;
                -p * p.ln()
            })
            .sum()
    };
    let h_pred = entropy(&row_sums);
    let h_truth = entropy(&col_sums);

    let mut information = 0.0;
    for (p, row) in table.iter().enumerate() {
        for (t, &count) in row.iter().enumerate() {
            if count > 0 {
                let joint = count as f64 / n;
                information +=
                    joint * (n * count as f64 / (row_sums[p] as f64 * col_sums[t] as f64)).ln();
            }
        }
    }

    if information <= 0.0 || h_pred == 0.0 || h_truth == 0.0 {
        return Ok(0.0);
    }
    Ok(information / (h_pred * h_truth).sqrt())
}
