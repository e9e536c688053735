//! Permutation-invariant error rates and the geometry of labeled embeddings.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::graph::Labels;
use crate::math::sqrt;
use crate::{Error, Result};

/// `counts[p][t]`: points predicted `p` whose true label is `t`.
pub fn confusion_matrix(pred: &[usize], truth: &[usize], k: usize) -> Result<Vec<Vec<usize>>> {
    if pred.len() != truth.len() {
        return Err(Error::param(format!(
            "prediction has {} entries, truth has {}",
            pred.len(),
            truth.len()
        )));
    }
    let mut counts = vec![vec![0usize; k]; k];
    for (&p, &t) in pred.iter().zip(truth) {
        if p >= k || t >= k {
            return Err(Error::param(format!("label out of range for k = {k}")));
        }
        counts[p][t] += 1;
    }
    Ok(counts)
}

/// Fraction of points misclassified under the best bijection of labels.
///
/// Solved as a maximum-weight assignment on the confusion matrix.
pub fn error_rate_exact(pred: &[usize], truth: &[usize]) -> Result<f64> {
    if pred.is_empty() {
        return Err(Error::param("empty label vectors"));
    }
    let k = pred.iter().chain(truth).copied().max().unwrap_or(0) + 1;
    let confusion = confusion_matrix(pred, truth, k)?;
    let cost: Vec<Vec<i64>> = confusion
        .iter()
        .map(|row| row.iter().map(|&c| -(c as i64)).collect())
        .collect();
    let assignment = min_cost_assignment(&cost);
    let matched: usize = assignment.iter().enumerate().map(|(p, &t)| confusion[p][t]).sum();
    Ok(1.0 - matched as f64 / pred.len() as f64)
}

/// Hungarian algorithm (shortest augmenting paths with potentials) on a
/// square cost matrix; returns the column assigned to each row.
pub fn min_cost_assignment(cost: &[Vec<i64>]) -> Vec<usize> {
    let n = cost.len();
    const INF: i64 = i64::MAX / 4;
    // 1-based with a virtual column 0
    let mut u = vec![0i64; n + 1];
    let mut v = vec![0i64; n + 1];
    let mut row_of = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = INF;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[row_of[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut col_of = vec![0usize; n];
    for j in 1..=n {
        if row_of[j] > 0 {
            col_of[row_of[j] - 1] = j - 1;
        }
    }
    col_of
}

/// Count-based error `1 − Σ min(p̂_i, t̂_i)/n` with both vectors sorted
/// descending. It ignores which points land in which class, so it never
/// exceeds [`error_rate_exact`].
pub fn error_rate_counts(pred_counts: &[usize], truth_counts: &[usize], n: usize) -> Result<f64> {
    let sp: usize = pred_counts.iter().sum();
    let st: usize = truth_counts.iter().sum();
    if sp != n || st != n {
        return Err(Error::param(format!(
            "counts sum to {sp} and {st}, expected {n}"
        )));
    }
    if n == 0 {
        return Err(Error::param("n must be positive"));
    }
    let mut p = pred_counts.to_vec();
    let mut t = truth_counts.to_vec();
    p.sort_unstable_by(|a, b| b.cmp(a));
    t.sort_unstable_by(|a, b| b.cmp(a));
    let overlap: usize = p.iter().zip(&t).map(|(a, b)| *a.min(b)).sum();
    Ok(1.0 - overlap as f64 / n as f64)
}

/// Class sizes for labels in `0..k`.
pub fn class_counts(labels: &[usize], k: usize) -> Vec<usize> {
    let mut counts = vec![0; k];
    for &l in labels {
        if l < k {
            counts[l] += 1;
        }
    }
    counts
}

/// Centers, separation and radius of the true clusters in an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterGeometry {
    /// One row per class.
    pub centers: DMatrix<f64>,
    /// Smallest distance between two class centers.
    pub separation: f64,
    /// Largest root-mean-square distance of a class to its center.
    pub radius: f64,
}

impl ClusterGeometry {
    /// `Δ_*/2 − r_*`. Margin-based error bounds are vacuous unless this is positive.
    pub fn margin(&self) -> f64 {
        self.separation / 2.0 - self.radius
    }
}

pub fn cluster_geometry(points: &DMatrix<f64>, truth: &Labels) -> Result<ClusterGeometry> {
    let (n, d) = points.shape();
    if truth.len() != n {
        return Err(Error::param(format!(
            "{} labels for {n} embedding rows",
            truth.len()
        )));
    }
    let k = truth.k();
    let counts = truth.counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::contract(format!("class {empty} has no members")));
    }
    let mut centers = DMatrix::zeros(k, d);
    for (i, &l) in truth.as_slice().iter().enumerate() {
        for j in 0..d {
            centers[(l, j)] += points[(i, j)];
        }
    }
    for l in 0..k {
        for j in 0..d {
            centers[(l, j)] /= counts[l] as f64;
        }
    }
    let mut spread = vec![0.0; k];
    for (i, &l) in truth.as_slice().iter().enumerate() {
        spread[l] += (points.row(i) - centers.row(l)).norm_squared();
    }
    let radius = spread
        .iter()
        .zip(&counts)
        .map(|(s, &c)| sqrt(s / c as f64))
        .fold(0.0, f64::max);
    let mut separation = f64::INFINITY;
    for a in 0..k {
        for b in (a + 1)..k {
            separation = separation.min((centers.row(a) - centers.row(b)).norm());
        }
    }
    Ok(ClusterGeometry {
        centers,
        separation,
        radius,
    })
}
