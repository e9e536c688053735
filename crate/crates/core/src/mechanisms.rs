//! The privatization mechanisms: randomized response with shuffling (and a
//! subsampled variant), the projected Gaussian sketch, and the noisy power
//! method.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::accounting::{GaussianProjectionParams, PowerMethodParams};
use crate::graph::{DenseAdjacency, Graph, Permutation};
use crate::math::sqrt;
use crate::rng::{self, DpRng, Stream};
use crate::spectral::{orthonormalize, Embedding, LinearOperator, Provenance};
use crate::{Error, Result};

/// Density below which the subsampled mechanism keeps a sparse result.
pub const SPARSE_DENSITY_THRESHOLD: f64 = 0.1;

#[derive(Debug, Clone, PartialEq)]
pub enum AdjacencyStorage {
    Dense(DenseAdjacency),
    Sparse(Graph),
}

/// A randomized 0/1 adjacency matrix together with how it was produced.
///
/// `permutation` maps positions to original node ids: row `a` of the stored
/// matrix belongs to node `permutation[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbedGraph {
    storage: AdjacencyStorage,
    mu: f64,
    q_s: Option<f64>,
    permutation: Permutation,
}

impl PerturbedGraph {
    pub fn n(&self) -> usize {
        match &self.storage {
            AdjacencyStorage::Dense(d) => d.n(),
            AdjacencyStorage::Sparse(g) => g.n(),
        }
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn q_s(&self) -> Option<f64> {
        self.q_s
    }

    pub fn permutation(&self) -> &Permutation {
        &self.permutation
    }

    pub fn storage(&self) -> &AdjacencyStorage {
        &self.storage
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, AdjacencyStorage::Sparse(_))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        match &self.storage {
            AdjacencyStorage::Dense(d) => d.matrix().clone(),
            AdjacencyStorage::Sparse(g) => g.to_dense().into_matrix(),
        }
    }

    pub fn to_graph(&self) -> Result<Graph> {
        match &self.storage {
            AdjacencyStorage::Dense(d) => d.to_graph(),
            AdjacencyStorage::Sparse(g) => Ok(g.clone()),
        }
    }

    pub fn nonzero_count(&self) -> usize {
        match &self.storage {
            AdjacencyStorage::Dense(d) => d.nonzero_count(),
            AdjacencyStorage::Sparse(g) => g.nonzero_entries(),
        }
    }

    /// The matrix in original node order (undoing any shuffle).
    pub fn unshuffled_matrix(&self) -> DMatrix<f64> {
        let m = self.to_matrix();
        let p = self.permutation.as_slice();
        let mut out = DMatrix::zeros(m.nrows(), m.ncols());
        for a in 0..m.nrows() {
            for b in 0..m.ncols() {
                out[(p[a], p[b])] = m[(a, b)];
            }
        }
        out
    }
}

impl LinearOperator for PerturbedGraph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        match &self.storage {
            AdjacencyStorage::Dense(d) => d.apply(x),
            AdjacencyStorage::Sparse(g) => g.apply(x),
        }
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if !(0.0..0.5).contains(&mu) {
        return Err(Error::param(format!("flip probability must lie in [0, 1/2), got {mu}")));
    }
    Ok(())
}

/// Flips every off-diagonal pair independently with probability `mu`.
pub fn rr_perturb(g: &Graph, mu: f64, seed: u64) -> Result<PerturbedGraph> {
    check_mu(mu)?;
    let n = g.n();
    let mut rng = rng::stream(seed, Stream::Flips);
    let mut m = g.to_dense().into_matrix();
    for i in 0..n {
        for j in (i + 1)..n {
            if rng.random::<f64>() < mu {
                let v = 1.0 - m[(i, j)];
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
    }
    Ok(PerturbedGraph {
        storage: AdjacencyStorage::Dense(DenseAdjacency::from_matrix(m)?),
        mu,
        q_s: None,
        permutation: Permutation::identity(n),
    })
}

/// Conjugates by a given permutation: `P Ã Pᵀ`.
pub fn conjugate_with(pg: &PerturbedGraph, perm: &Permutation) -> Result<PerturbedGraph> {
    if perm.len() != pg.n() {
        return Err(Error::param("permutation length differs from node count"));
    }
    let storage = match &pg.storage {
        AdjacencyStorage::Dense(d) => AdjacencyStorage::Dense(d.permuted(perm)),
        AdjacencyStorage::Sparse(g) => AdjacencyStorage::Sparse(g.permuted(perm)?),
    };
    Ok(PerturbedGraph {
        storage,
        mu: pg.mu,
        q_s: pg.q_s,
        permutation: pg.permutation.then(perm),
    })
}

/// Conjugates by a uniformly random permutation.
pub fn shuffle_conjugate(pg: &PerturbedGraph, seed: u64) -> Result<PerturbedGraph> {
    let mut rng = rng::stream(seed, Stream::Permutation);
    let perm = Permutation::random(pg.n(), &mut rng);
    conjugate_with(pg, &perm)
}

/// Randomized response followed by a random shuffle.
pub fn rr_shuffle(g: &Graph, mu: f64, seed: u64) -> Result<PerturbedGraph> {
    shuffle_conjugate(&rr_perturb(g, mu, seed)?, seed)
}

/// `X_ij = B_ij · RR_μ(A_ij)` with `B_ij ~ Bern(q_s)`, then shuffled.
pub fn subsample_perturb_shuffle(g: &Graph, q_s: f64, mu: f64, seed: u64) -> Result<PerturbedGraph> {
    check_mu(mu)?;
    if !(q_s > 0.0 && q_s <= 1.0) {
        return Err(Error::param(format!("subsampling rate must lie in (0, 1], got {q_s}")));
    }
    let n = g.n();
    let mut flips = rng::stream(seed, Stream::Flips);
    let mut keep = rng::stream(seed, Stream::Subsample);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let flipped = flips.random::<f64>() < mu;
            let kept = keep.random::<f64>() < q_s;
            if kept && (g.has_edge(i, j) != flipped) {
                edges.push((i, j));
            }
        }
    }
    let sampled = Graph::from_edges(n, edges)?;
    let expected_density = q_s * (mu + (1.0 - 2.0 * mu) * g.density());
    let storage = if expected_density < SPARSE_DENSITY_THRESHOLD {
        AdjacencyStorage::Sparse(sampled)
    } else {
        AdjacencyStorage::Dense(sampled.to_dense())
    };
    let pg = PerturbedGraph {
        storage,
        mu,
        q_s: Some(q_s),
        permutation: Permutation::identity(n),
    };
    shuffle_conjugate(&pg, seed)
}

/// `Z = Ã − q_s (c A + μ (J − I))` in original node order, `c = 1 − 2μ`
/// (`q_s = 1` without subsampling).
pub fn residual_z(pg: &PerturbedGraph, g: &Graph) -> Result<DMatrix<f64>> {
    if pg.n() != g.n() {
        return Err(Error::Shape {
            expected: (g.n(), g.n()),
            found: (pg.n(), pg.n()),
        });
    }
    let mu = pg.mu;
    let c = 1.0 - 2.0 * mu;
    let q = pg.q_s.unwrap_or(1.0);
    let a = g.to_dense();
    let mut z = pg.unshuffled_matrix();
    let n = g.n();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                z[(i, j)] -= q * (c * a.matrix()[(i, j)] + mu);
            }
        }
    }
    Ok(z)
}

/// Released sketch `Ỹ = A Q + E`. `Q` and `E` are kept for tests only.
#[derive(Debug, Clone)]
pub struct ProjectionSketch {
    released: DMatrix<f64>,
    projection: DMatrix<f64>,
    noise: DMatrix<f64>,
    sigma_bar: f64,
}

impl ProjectionSketch {
    /// The private output `Ỹ`; the only part that may leave the process.
    pub fn released(&self) -> &DMatrix<f64> {
        &self.released
    }

    pub fn into_released(self) -> DMatrix<f64> {
        self.released
    }

    pub fn projection(&self) -> &DMatrix<f64> {
        &self.projection
    }

    pub fn noise(&self) -> &DMatrix<f64> {
        &self.noise
    }

    pub fn sigma_bar(&self) -> f64 {
        self.sigma_bar
    }

    pub fn m(&self) -> usize {
        self.released.ncols()
    }
}

fn gaussian_matrix(rows: usize, cols: usize, scale: f64, rng: &mut DpRng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| scale * rng.sample::<f64, _>(StandardNormal))
}

/// Draws `Q` with i.i.d. `N(0, 1/m)` entries.
pub fn sample_projection(n: usize, m: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = rng::stream(seed, Stream::Projection);
    gaussian_matrix(n, m, 1.0 / sqrt(m as f64), &mut rng)
}

pub fn projected_gaussian<A: LinearOperator>(
    a: &A,
    params: &GaussianProjectionParams,
    seed: u64,
) -> Result<ProjectionSketch> {
    if params.m == 0 {
        return Err(Error::param("projection dimension m must be >= 1"));
    }
    let q = sample_projection(a.dim(), params.m, seed);
    projected_gaussian_with_projection(a, q, params.sigma_bar, seed)
}

/// Same mechanism with a caller-supplied projection (test hook).
pub fn projected_gaussian_with_projection<A: LinearOperator>(
    a: &A,
    projection: DMatrix<f64>,
    sigma_bar: f64,
    seed: u64,
) -> Result<ProjectionSketch> {
    if projection.nrows() != a.dim() {
        return Err(Error::Shape {
            expected: (a.dim(), projection.ncols()),
            found: projection.shape(),
        });
    }
    if !(sigma_bar >= 0.0) {
        return Err(Error::param("noise scale must be nonnegative"));
    }
    let mut rng = rng::stream(seed, Stream::ProjectionNoise);
    let noise = gaussian_matrix(a.dim(), projection.ncols(), sigma_bar, &mut rng);
    let released = a.apply(&projection) + &noise;
    Ok(ProjectionSketch {
        released,
        projection,
        noise,
        sigma_bar,
    })
}

/// Final iterate of the noisy power method.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerIterate {
    x: DMatrix<f64>,
    iters: usize,
    sigma_bar: f64,
}

impl PowerIterate {
    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn iters(&self) -> usize {
        self.iters
    }

    pub fn sigma_bar(&self) -> f64 {
        self.sigma_bar
    }

    pub fn into_embedding(self) -> Result<Embedding> {
        Embedding::new(self.x, Provenance::PowerIterate)
    }
}

pub fn noisy_power_method<A: LinearOperator>(
    a: &A,
    k: usize,
    params: &PowerMethodParams,
    seed: u64,
) -> Result<PowerIterate> {
    noisy_power_method_observed(
        a,
        k,
        params.iters,
        params.sensitivity * params.sigma_bar,
        seed,
        |_, _| {},
    )
}

/// `Y_i = A X_{i−1} + Z_i`, `X_i = QR(Y_i)`, with `Z_i ~ N(0, noise_sd²)`.
///
/// `observe(i, X_i)` is called after every iteration, `i = 1..=iters`.
pub fn noisy_power_method_observed<A, F>(
    a: &A,
    k: usize,
    iters: usize,
    noise_sd: f64,
    seed: u64,
    mut observe: F,
) -> Result<PowerIterate>
where
    A: LinearOperator,
    F: FnMut(usize, &DMatrix<f64>),
{
    let n = a.dim();
    if k == 0 || k >= n {
        return Err(Error::param(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    if iters == 0 {
        return Err(Error::param("iteration count N must be >= 1"));
    }
    if !(noise_sd >= 0.0) {
        return Err(Error::param("noise scale must be nonnegative"));
    }
    let mut init = rng::stream(seed, Stream::PowerInit);
    let mut noise = rng::stream(seed, Stream::PowerNoise);
    let mut x = orthonormalize(&gaussian_matrix(n, k, 1.0, &mut init));
    for i in 1..=iters {
        let mut y = a.apply(&x);
        if noise_sd > 0.0 {
            y += gaussian_matrix(n, k, noise_sd, &mut noise);
        }
        x = orthonormalize(&y);
        observe(i, &x);
    }
    Ok(PowerIterate {
        x,
        iters,
        sigma_bar: noise_sd,
    })
}
