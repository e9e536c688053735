//! Lloyd's k-means with distance-squared seeding and restarts.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::math::sqrt;
use crate::rng::{self, DpRng, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
    /// Stop once no center moves farther than this.
    pub tol: f64,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 10,
            max_iter: 100,
            tol: 1e-6,
        }
    }
}

/// Result of clustering the rows of an embedding.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub k: usize,
    /// Within-cluster sum of squared distances of the best restart.
    pub inertia: f64,
    /// Lloyd iterations used by the best restart.
    pub iterations: usize,
    pub restarts: usize,
    pub centers: DMatrix<f64>,
}

/// Clusters the rows of `points` with the default configuration.
pub fn kmeans(points: &DMatrix<f64>, k: usize, seed: u64) -> Result<ClusterAssignment> {
    kmeans_with(points, k, seed, &KMeansConfig::default())
}

pub fn kmeans_with(
    points: &DMatrix<f64>,
    k: usize,
    seed: u64,
    cfg: &KMeansConfig,
) -> Result<ClusterAssignment> {
    let (n, d) = points.shape();
    if k == 0 {
        return Err(Error::param("k must be >= 1"));
    }
    if k > n {
        return Err(Error::param(format!("k = {k} exceeds the number of points {n}")));
    }
    if cfg.restarts == 0 || cfg.max_iter == 0 {
        return Err(Error::param("restarts and max_iter must be >= 1"));
    }
    // row-major copy: every inner loop walks one point at a time
    let rows = Rows {
        data: (0..n).flat_map(|i| points.row(i).iter().copied().collect::<Vec<_>>()).collect(),
        d,
    };
    let mut rng = rng::stream(seed, Stream::KMeans);
    let mut best: Option<Run> = None;
    for _ in 0..cfg.restarts {
        let run = lloyd(&rows, k, cfg, &mut rng);
        if best.as_ref().is_none_or(|b| run.inertia < b.inertia) {
            best = Some(run);
        }
    }
    let best = best.expect("at least one restart");
    Ok(ClusterAssignment {
        labels: best.labels,
        k,
        inertia: best.inertia,
        iterations: best.iterations,
        restarts: cfg.restarts,
        centers: DMatrix::from_row_slice(k, d, &best.centers),
    })
}

struct Rows {
    data: Vec<f64>,
    d: usize,
}

impl Rows {
    fn len(&self) -> usize {
        if self.d == 0 {
            0
        } else {
            self.data.len() / self.d
        }
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.d..(i + 1) * self.d]
    }
}

struct Run {
    labels: Vec<usize>,
    centers: Vec<f64>,
    inertia: f64,
    iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Careful seeding: each new center is drawn with probability proportional
/// to the squared distance to the nearest existing center.
fn seed_centers(rows: &Rows, k: usize, rng: &mut DpRng) -> Vec<f64> {
    let n = rows.len();
    let d = rows.d;
    let mut centers = Vec::with_capacity(k * d);
    let first = rng.random_range(0..n);
    centers.extend_from_slice(rows.row(first));
    let mut nearest: Vec<f64> = (0..n).map(|i| sq_dist(rows.row(i), rows.row(first))).collect();
    for _ in 1..k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against landing on a zero-weight point through rounding
            if nearest[chosen] == 0.0 {
                chosen = nearest.iter().rposition(|&w| w > 0.0).unwrap_or(chosen);
            }
            chosen
        } else {
            rng.random_range(0..n)
        };
        let c = rows.row(pick).to_vec();
        for (i, w) in nearest.iter_mut().enumerate() {
            *w = w.min(sq_dist(rows.row(i), &c));
        }
        centers.extend_from_slice(&c);
    }
    centers
}

/// Nearest center (lowest index on ties) for every point; returns inertia.
fn assign(rows: &Rows, centers: &[f64], k: usize, labels: &mut [usize], dists: &mut [f64]) -> f64 {
    let d = rows.d;
    let mut inertia = 0.0;
    for i in 0..rows.len() {
        let p = rows.row(i);
        let mut best = (0, f64::INFINITY);
        for c in 0..k {
            let dist = sq_dist(p, &centers[c * d..(c + 1) * d]);
            if dist < best.1 {
                best = (c, dist);
            }
        }
        labels[i] = best.0;
        dists[i] = best.1;
        inertia += best.1;
    }
    inertia
}

/// Moves the farthest point into each empty cluster.
fn repair_empty(rows: &Rows, centers: &mut [f64], k: usize, labels: &mut [usize], dists: &mut [f64]) {
    let d = rows.d;
    loop {
        let mut sizes = vec![0usize; k];
        for &l in labels.iter() {
            sizes[l] += 1;
        }
        let Some(empty) = sizes.iter().position(|&s| s == 0) else {
            return;
        };
        // farthest point among clusters that can spare one
        let mut far: Option<(usize, f64)> = None;
        for i in 0..rows.len() {
            if sizes[labels[i]] > 1 && far.is_none_or(|(_, fd)| dists[i] > fd) {
                far = Some((i, dists[i]));
            }
        }
        let Some((i, _)) = far else {
            return;
        };
        labels[i] = empty;
        dists[i] = 0.0;
        centers[empty * d..(empty + 1) * d].copy_from_slice(rows.row(i));
    }
}

fn update_centers(rows: &Rows, labels: &[usize], k: usize, centers: &mut [f64]) {
    let d = rows.d;
    let mut sums = vec![0.0; k * d];
    let mut counts = vec![0usize; k];
    for (i, &l) in labels.iter().enumerate() {
        counts[l] += 1;
        for (s, x) in sums[l * d..(l + 1) * d].iter_mut().zip(rows.row(i)) {
            *s += x;
        }
    }
    for c in 0..k {
        if counts[c] > 0 {
            for j in 0..d {
                centers[c * d + j] = sums[c * d + j] / counts[c] as f64;
            }
        }
    }
}

fn lloyd(rows: &Rows, k: usize, cfg: &KMeansConfig, rng: &mut DpRng) -> Run {
    let n = rows.len();
    let d = rows.d;
    let mut centers = seed_centers(rows, k, rng);
    let mut labels = vec![0usize; n];
    let mut dists = vec![0.0; n];
    let mut iterations = 0;
    for it in 1..=cfg.max_iter {
        assign(rows, &centers, k, &mut labels, &mut dists);
        repair_empty(rows, &mut centers, k, &mut labels, &mut dists);
        let old = centers.clone();
        update_centers(rows, &labels, k, &mut centers);
        iterations = it;
        let shift = (0..k)
            .map(|c| sq_dist(&old[c * d..(c + 1) * d], &centers[c * d..(c + 1) * d]))
            .fold(0.0, f64::max);
        let shift = sqrt(shift);
        if shift <= cfg.tol {
            break;
        }
    }
    assign(rows, &centers, k, &mut labels, &mut dists);
    repair_empty(rows, &mut centers, k, &mut labels, &mut dists);
    update_centers(rows, &labels, k, &mut centers);
    let inertia = (0..n)
        .map(|i| sq_dist(rows.row(i), &centers[labels[i] * d..(labels[i] + 1) * d]))
        .sum();
    Run {
        labels,
        centers,
        inertia,
        iterations,
    }
}
