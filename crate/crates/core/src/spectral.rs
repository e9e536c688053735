//! Dense linear algebra used by the pipelines: eigen/singular subspaces,
//! sign-fixed QR, subspace distances and Procrustes alignment.

use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use crate::graph::{DenseAdjacency, Graph};
use crate::math::sqrt;
use crate::{Error, Result};

const ORTHONORMAL_TOL: f64 = 1e-8;
const SYMMETRY_TOL: f64 = 1e-9;
const SIGN_EPS: f64 = 1e-12;

/// Something that can be multiplied against a block of column vectors.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64>;
}

impl LinearOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self * x
    }
}

impl LinearOperator for DenseAdjacency {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.matrix() * x
    }
}

impl LinearOperator for Graph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        self.mul_dense(x)
    }
}

/// Where an embedding came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Eigen,
    LeftSingular,
    PowerIterate,
}

/// An `n × k` matrix with orthonormal columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Embedding {
    coords: DMatrix<f64>,
    provenance: Provenance,
}

impl Embedding {
    pub fn new(coords: DMatrix<f64>, provenance: Provenance) -> Result<Self> {
        let drift = orthonormality_error(&coords);
        if drift > ORTHONORMAL_TOL {
            return Err(Error::contract(format!(
                "embedding columns not orthonormal (‖UᵀU − I‖_F = {drift:e})"
            )));
        }
        Ok(Embedding { coords, provenance })
    }

    pub fn coords(&self) -> &DMatrix<f64> {
        &self.coords
    }

    pub fn into_coords(self) -> DMatrix<f64> {
        self.coords
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n(&self) -> usize {
        self.coords.nrows()
    }

    pub fn k(&self) -> usize {
        self.coords.ncols()
    }
}

/// Descending eigen- or singular values plus the gap after position `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumSummary {
    values: Vec<f64>,
    k: usize,
}

impl SpectrumSummary {
    /// `values` must be sorted in nonincreasing order.
    pub fn new(values: Vec<f64>, k: usize) -> Result<Self> {
        if k == 0 || k > values.len() {
            return Err(Error::param(format!("k = {k} out of range for {} values", values.len())));
        }
        if values.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::contract("spectrum must be sorted descending"));
        }
        Ok(SpectrumSummary { values, k })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `λ_k − λ_{k+1}`; zero when no `(k+1)`-th value exists.
    pub fn gap(&self) -> f64 {
        match self.values.get(self.k) {
            Some(&next) => (self.values[self.k - 1] - next).max(0.0),
            None => 0.0,
        }
    }

    /// `(λ_k − λ_{k+1}) / λ_1`.
    pub fn normalized_gap(&self) -> f64 {
        let top = self.values[0];
        if top <= 0.0 {
            return 0.0;
        }
        self.gap() / top
    }
}

/// `‖UᵀU − I‖_F`.
pub fn orthonormality_error(u: &DMatrix<f64>) -> f64 {
    let gram = u.transpose() * u;
    let k = gram.nrows();
    (gram - DMatrix::<f64>::identity(k, k)).norm()
}

fn check_symmetric(m: &DMatrix<f64>) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::Shape {
            expected: (m.nrows(), m.nrows()),
            found: (m.nrows(), m.ncols()),
        });
    }
    let scale = m.amax().max(1.0);
    let n = m.nrows();
    for i in 0..n {
        for j in (i + 1)..n {
            if (m[(i, j)] - m[(j, i)]).abs() > SYMMETRY_TOL * scale {
                return Err(Error::contract(format!("matrix not symmetric at ({i}, {j})")));
            }
        }
    }
    Ok(())
}

fn fix_column_signs(u: &mut DMatrix<f64>) {
    for mut col in u.column_iter_mut() {
        if let Some(&first) = col.iter().find(|x| x.abs() > SIGN_EPS) {
            if first < 0.0 {
                col.neg_mut();
            }
        }
    }
}

/// Indices of `values` sorted by decreasing value (stable for ties).
fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    idx
}

/// All eigenvalues of a symmetric matrix, descending.
pub fn symmetric_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut values: Vec<f64> = m.clone().symmetric_eigenvalues().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    values
}

/// Eigenvectors for the `k` algebraically largest eigenvalues.
///
/// Each returned column has its first nonzero coordinate positive.
pub fn top_k_eigenvectors(m: &DMatrix<f64>, k: usize) -> Result<(Embedding, SpectrumSummary)> {
    check_symmetric(m)?;
    let n = m.nrows();
    if k == 0 || k >= n {
        return Err(Error::param(format!("need 1 <= k < n, got k = {k}, n = {n}")));
    }
    let eig = m.clone().symmetric_eigen();
    let raw: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let order = descending_order(&raw);
    let mut u = DMatrix::zeros(n, k);
    for (c, &src) in order.iter().take(k).enumerate() {
        u.set_column(c, &eig.eigenvectors.column(src));
    }
    fix_column_signs(&mut u);
    let values = order.iter().map(|&i| raw[i]).collect();
    Ok((
        Embedding::new(u, Provenance::Eigen)?,
        SpectrumSummary::new(values, k)?,
    ))
}

/// Left singular vectors for the `k` largest singular values.
pub fn top_k_left_singular(m: &DMatrix<f64>, k: usize) -> Result<(Embedding, SpectrumSummary)> {
    let (n, cols) = m.shape();
    if k == 0 || k > n.min(cols) {
        return Err(Error::param(format!(
            "need 1 <= k <= min(n, m) = {}, got k = {k}",
            n.min(cols)
        )));
    }
    let svd = m.clone().svd(true, false);
    let left = svd.u.ok_or_else(|| Error::contract("SVD did not produce U"))?;
    let raw: Vec<f64> = svd.singular_values.iter().copied().collect();
    let order = descending_order(&raw);
    let mut u = DMatrix::zeros(n, k);
    for (c, &src) in order.iter().take(k).enumerate() {
        u.set_column(c, &left.column(src));
    }
    fix_column_signs(&mut u);
    let values = order.iter().map(|&i| raw[i]).collect();
    Ok((
        Embedding::new(u, Provenance::LeftSingular)?,
        SpectrumSummary::new(values, k)?,
    ))
}

/// Reduced QR with `diag(R) ≥ 0`; returns the orthonormal factor.
pub fn orthonormalize(y: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = y.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..q.ncols().min(r.nrows()) {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

/// Largest singular value.
pub fn spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    // The Gram matrix on the smaller side is enough for the top value.
    let gram = if m.nrows() <= m.ncols() {
        m * m.transpose()
    } else {
        m.transpose() * m
    };
    let top = gram
        .symmetric_eigenvalues()
        .iter()
        .copied()
        .fold(0.0_f64, f64::max);
    sqrt(top.max(0.0))
}

/// Spectral norm of a symmetric matrix via its eigenvalues.
pub fn symmetric_spectral_norm(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigenvalues()
        .iter()
        .fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

fn check_same_shape(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<()> {
    if u.shape() != v.shape() {
        return Err(Error::Shape {
            expected: u.shape(),
            found: v.shape(),
        });
    }
    Ok(())
}

/// `(I − X Xᵀ) U`, formed without the `n × n` projector.
fn complement_component(x: &DMatrix<f64>, u: &DMatrix<f64>) -> DMatrix<f64> {
    u - x * (x.transpose() * u)
}

fn largest_singular_value(w: &DMatrix<f64>) -> f64 {
    if w.is_empty() {
        return 0.0;
    }
    w.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0_f64, f64::max)
}

/// `‖UUᵀ − VVᵀ‖₂`, the sine of the largest principal angle.
pub fn subspace_distance(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(u, v)?;
    // For equal dimensions the projector difference has the same norm as
    // (I − VVᵀ)U, which keeps precision at small angles.
    Ok(largest_singular_value(&complement_component(v, u)).min(1.0))
}

/// `‖(I − VVᵀ) U‖_F`, i.e. the root-sum of squared sines of all principal angles.
pub fn subspace_distance_frobenius(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<f64> {
    check_same_shape(u, v)?;
    Ok(complement_component(v, u).norm())
}

/// `‖(I − X Xᵀ) U‖₂`.
pub fn residual_projection_norm(x: &DMatrix<f64>, u: &DMatrix<f64>) -> Result<f64> {
    if x.nrows() != u.nrows() {
        return Err(Error::Shape {
            expected: (u.nrows(), x.ncols()),
            found: x.shape(),
        });
    }
    Ok(largest_singular_value(&complement_component(x, u)))
}

/// Orthonormal `R` minimising `‖V − U R‖_F`, and that minimum.
pub fn procrustes_align(u: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    check_same_shape(u, v)?;
    let svd = (u.transpose() * v).svd(true, true);
    let (w, zt) = match (svd.u, svd.v_t) {
        (Some(w), Some(zt)) => (w, zt),
        _ => return Err(Error::contract("SVD did not produce both factors")),
    };
    let r = w * zt;
    let residual = (v - u * &r).norm();
    Ok((r, residual))
}
