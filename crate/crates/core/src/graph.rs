//! Undirected simple graphs, SBM sampling and node permutations.

use alloc::collections::VecDeque;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::rng::{self, DpRng, Stream};
use crate::{Error, Result};

/// Ground-truth community assignment with values in `0..k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Labels {
    values: Vec<usize>,
    k: usize,
}

impl Labels {
    pub fn new(values: Vec<usize>, k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::param(format!("label count k must be >= 2, got {k}")));
        }
        if let Some(bad) = values.iter().find(|&&v| v >= k) {
            return Err(Error::param(format!("label {bad} out of range for k = {k}")));
        }
        Ok(Labels { values, k })
    }

    /// Infers `k` as one past the largest label.
    pub fn from_values(values: Vec<usize>) -> Result<Self> {
        let k = values.iter().copied().max().map_or(0, |m| m + 1);
        Self::new(values, k)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &v in &self.values {
            counts[v] += 1;
        }
        counts
    }
}

/// Undirected simple graph on nodes `0..n`.
///
/// Edges are stored once as `(u, v)` with `u < v`, sorted. Neighbor lists are
/// kept alongside for sparse products.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
    neighbors: Vec<Vec<usize>>,
    labels: Option<Labels>,
}

impl Graph {
    /// Builds a graph, folding mirrored and duplicate pairs into one edge.
    ///
    /// Self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut canon = Vec::new();
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::param(format!("edge ({u}, {v}) out of range for n = {n}")));
            }
            if u == v {
                return Err(Error::param(format!("self-loop at node {u}")));
            }
            canon.push(if u < v { (u, v) } else { (v, u) });
        }
        canon.sort_unstable();
        canon.dedup();
        let mut neighbors = vec![Vec::new(); n];
        for &(u, v) in &canon {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Ok(Graph {
            n,
            edges: canon,
            neighbors,
            labels: None,
        })
    }

    pub fn with_labels(mut self, labels: Labels) -> Result<Self> {
        if labels.len() != self.n {
            return Err(Error::param(format!(
                "label vector has length {}, graph has {} nodes",
                labels.len(),
                self.n
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Number of nonzero entries of the adjacency matrix (ordered pairs).
    pub fn nonzero_entries(&self) -> usize {
        2 * self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.neighbors[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.n && self.neighbors[i].binary_search(&j).is_ok()
    }

    pub fn labels(&self) -> Option<&Labels> {
        self.labels.as_ref()
    }

    /// Edge density over the `n(n-1)/2` off-diagonal pairs.
    pub fn density(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.edges.len() as f64 / (self.n * (self.n - 1) / 2) as f64
    }

    pub fn to_dense(&self) -> DenseAdjacency {
        let mut m = DMatrix::zeros(self.n, self.n);
        for &(u, v) in &self.edges {
            m[(u, v)] = 1.0;
            m[(v, u)] = 1.0;
        }
        DenseAdjacency(m)
    }

    /// `A · X` using the neighbor lists.
    pub fn mul_dense(&self, x: &DMatrix<f64>) -> DMatrix<f64> {
        assert_eq!(x.nrows(), self.n, "row count must match node count");
        let cols = x.ncols();
        let mut out = DMatrix::zeros(self.n, cols);
        for c in 0..cols {
            let src = x.column(c);
            let mut dst = out.column_mut(c);
            for (i, list) in self.neighbors.iter().enumerate() {
                dst[i] = list.iter().map(|&j| src[j]).sum();
            }
        }
        out
    }

    /// Subgraph induced on `nodes`; node `nodes[a]` becomes node `a`.
    pub fn induced_subgraph(&self, nodes: &[usize]) -> Result<Self> {
        let mut index = vec![usize::MAX; self.n];
        for (a, &v) in nodes.iter().enumerate() {
            if v >= self.n {
                return Err(Error::param(format!("node {v} out of range")));
            }
            if index[v] != usize::MAX {
                return Err(Error::param(format!("node {v} listed twice")));
            }
            index[v] = a;
        }
        let edges = self.edges.iter().filter_map(|&(u, v)| {
            let (a, b) = (index[u], index[v]);
            (a != usize::MAX && b != usize::MAX).then_some((a, b))
        });
        let sub = Graph::from_edges(nodes.len(), edges)?;
        match &self.labels {
            Some(labels) => {
                let values = nodes.iter().map(|&v| labels.values[v]).collect();
                sub.with_labels(Labels::new(values, labels.k)?)
            }
            None => Ok(sub),
        }
    }

    /// Relabels nodes so the adjacency becomes `P A Pᵀ`: new node `a` is old
    /// node `perm[a]`. Labels travel with their nodes.
    pub fn permuted(&self, perm: &Permutation) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::param("permutation length differs from node count"));
        }
        let inv = perm.inverse();
        let edges = self.edges.iter().map(|&(u, v)| (inv.0[u], inv.0[v]));
        let g = Graph::from_edges(self.n, edges)?;
        match &self.labels {
            Some(labels) => {
                let values = perm.0.iter().map(|&src| labels.values[src]).collect();
                g.with_labels(Labels::new(values, labels.k)?)
            }
            None => Ok(g),
        }
    }
}

/// Dense symmetric adjacency matrix (0/1, or real-valued after a mechanism).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseAdjacency(DMatrix<f64>);

impl DenseAdjacency {
    /// Wraps a square matrix that is symmetric to exact equality.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::Shape {
                expected: (m.nrows(), m.nrows()),
                found: (m.nrows(), m.ncols()),
            });
        }
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if m[(i, j)] != m[(j, i)] {
                    return Err(Error::contract(format!("adjacency not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(DenseAdjacency(m))
    }

    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn nonzero_count(&self) -> usize {
        self.0.iter().filter(|&&x| x != 0.0).count()
    }

    pub fn has_zero_diagonal(&self) -> bool {
        (0..self.n()).all(|i| self.0[(i, i)] == 0.0)
    }

    /// `P M Pᵀ` with the same convention as [`Graph::permuted`].
    pub fn permuted(&self, perm: &Permutation) -> Self {
        let p = perm.as_slice();
        let n = self.n();
        DenseAdjacency(DMatrix::from_fn(n, n, |a, b| self.0[(p[a], p[b])]))
    }

    /// Reads a 0/1 matrix back as a graph; fails on non-binary entries.
    pub fn to_graph(&self) -> Result<Graph> {
        let n = self.n();
        let mut edges = Vec::new();
        for i in 0..n {
            if self.0[(i, i)] != 0.0 {
                return Err(Error::contract("nonzero diagonal"));
            }
            for j in (i + 1)..n {
                match self.0[(i, j)] {
                    x if x == 1.0 => edges.push((i, j)),
                    x if x == 0.0 => {}
                    _ => return Err(Error::contract("adjacency is not 0/1")),
                }
            }
        }
        Graph::from_edges(n, edges)
    }
}

/// A permutation of `0..n`; position `a` holds the source index placed there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn from_vec(values: Vec<usize>) -> Result<Self> {
        let mut seen = vec![false; values.len()];
        for &v in &values {
            if v >= values.len() || core::mem::replace(&mut seen[v], true) {
                return Err(Error::param("not a permutation"));
            }
        }
        Ok(Permutation(values))
    }

    /// Uniformly random permutation (Fisher–Yates).
    pub fn random(n: usize, rng: &mut DpRng) -> Self {
        let mut values: Vec<usize> = (0..n).collect();
        values.shuffle(rng);
        Permutation(values)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(a, &b)| a == b)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (a, &src) in self.0.iter().enumerate() {
            inv[src] = a;
        }
        Permutation(inv)
    }

    /// The permutation equivalent to applying `self` first and `next` second.
    pub fn then(&self, next: &Permutation) -> Self {
        Permutation(next.0.iter().map(|&a| self.0[a]).collect())
    }

    /// Maps per-position values back to source order: `out[perm[a]] = values[a]`.
    pub fn unapply<T: Copy + Default>(&self, values: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); values.len()];
        for (a, &src) in self.0.iter().enumerate() {
            out[src] = values[a];
        }
        out
    }
}

/// Stochastic block model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SbmParams {
    sizes: Vec<usize>,
    p: f64,
    q: f64,
}

impl SbmParams {
    pub fn new(sizes: Vec<usize>, p: f64, q: f64) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::param("SBM needs at least two communities"));
        }
        if sizes.contains(&0) {
            return Err(Error::param("SBM community sizes must be positive"));
        }
        if !(0.0..=1.0).contains(&q) || !(0.0..=1.0).contains(&p) || q >= p {
            return Err(Error::param(format!("SBM requires 0 <= q < p <= 1, got p = {p}, q = {q}")));
        }
        Ok(SbmParams { sizes, p, q })
    }

    /// `k` equal communities of `size` nodes each.
    pub fn equal(k: usize, size: usize, p: f64, q: f64) -> Result<Self> {
        Self::new(vec![size; k], p, q)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn k(&self) -> usize {
        self.sizes.len()
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn block_labels(&self) -> Vec<usize> {
        self.sizes
            .iter()
            .enumerate()
            .flat_map(|(b, &s)| core::iter::repeat_n(b, s))
            .collect()
    }

    /// Expected number of nonzero adjacency entries (twice the edge count).
    pub fn expected_nonzero_entries(&self) -> f64 {
        let n = self.n() as f64;
        let within: f64 = self.sizes.iter().map(|&s| (s * (s - 1) / 2) as f64).sum();
        let cross = n * (n - 1.0) / 2.0 - within;
        2.0 * (within * self.p + cross * self.q)
    }
}

/// Samples an SBM graph; labels are block memberships in block order.
pub fn sbm_sample(params: &SbmParams, seed: u64) -> Result<Graph> {
    let labels = params.block_labels();
    let n = labels.len();
    let mut rng = rng::stream(seed, Stream::Graph);
    let mut edges = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let prob = if labels[i] == labels[j] { params.p } else { params.q };
            if rng.random::<f64>() < prob {
                edges.push((i, j));
            }
        }
    }
    Graph::from_edges(n, edges)?.with_labels(Labels::new(labels, params.k())?)
}

/// Induced subgraph on the largest connected component.
///
/// Ties go to the component containing the smallest node id; nodes keep
/// their relative order.
pub fn largest_connected_component(g: &Graph) -> Result<Graph> {
    if g.n() == 0 {
        return Err(Error::param("graph is empty"));
    }
    let mut component = vec![usize::MAX; g.n()];
    let mut best: (usize, usize) = (0, 0);
    let mut queue = VecDeque::new();
    let mut next_id = 0;
    for start in 0..g.n() {
        if component[start] != usize::MAX {
            continue;
        }
        component[start] = next_id;
        queue.push_back(start);
        let mut size = 0;
        while let Some(u) = queue.pop_front() {
            size += 1;
            for &v in g.neighbors(u) {
                if component[v] == usize::MAX {
                    component[v] = next_id;
                    queue.push_back(v);
                }
            }
        }
        if size > best.1 {
            best = (next_id, size);
        }
        next_id += 1;
    }
    if next_id == 1 {
        return Ok(g.clone());
    }
    let nodes: Vec<usize> = (0..g.n()).filter(|&v| component[v] == best.0).collect();
    g.induced_subgraph(&nodes)
}

/// Uniformly random relabeling; returns the graph for `P A Pᵀ` and `π`.
pub fn permute_graph(g: &Graph, seed: u64) -> (Graph, Permutation) {
    let mut rng = rng::stream(seed, Stream::Permutation);
    let perm = Permutation::random(g.n(), &mut rng);
    let permuted = g.permuted(&perm).expect("permutation length matches by construction");
    (permuted, perm)
}

/// A named group of nodes, as listed in a circles file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Circle {
    pub name: String,
    pub members: Vec<usize>,
}

/// Builds a labeled graph from the `count` largest circles with the "drop"
/// overlap policy: nodes in more than one selected circle (or none) are
/// removed, the rest get their circle's rank as label (largest = 0).
///
/// Size ties are broken by the lexicographically smaller circle name.
pub fn select_circles_drop_policy(g: &Graph, circles: &[Circle], count: usize) -> Result<Graph> {
    if count < 2 {
        return Err(Error::param("need at least two circles"));
    }
    if circles.len() < count {
        return Err(Error::param(format!(
            "requested {count} circles but only {} are available",
            circles.len()
        )));
    }
    let mut order: Vec<&Circle> = circles.iter().collect();
    let size = |c: &Circle| {
        let mut m = c.members.clone();
        m.sort_unstable();
        m.dedup();
        m.len()
    };
    order.sort_by(|a, b| size(b).cmp(&size(a)).then_with(|| a.name.cmp(&b.name)));

    let mut membership: Vec<Option<usize>> = vec![None; g.n()];
    let mut multiple = vec![false; g.n()];
    for (rank, circle) in order.iter().take(count).enumerate() {
        for &v in &circle.members {
            if v >= g.n() {
                return Err(Error::param(format!("circle {} lists unknown node {v}", circle.name)));
            }
            match membership[v] {
                None => membership[v] = Some(rank),
                Some(r) if r == rank => {}
                Some(_) => multiple[v] = true,
            }
        }
    }
    let nodes: Vec<usize> = (0..g.n())
        .filter(|&v| membership[v].is_some() && !multiple[v])
        .collect();
    let values: Vec<usize> = nodes.iter().map(|&v| membership[v].unwrap_or(0)).collect();
    let unlabeled = Graph {
        labels: None,
        ..g.clone()
    };
    unlabeled
        .induced_subgraph(&nodes)?
        .with_labels(Labels::new(values, count)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::symmetric_eigenvalues;

    fn path(n: usize) -> Graph {
        Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).unwrap()
    }

    #[test]
    fn mirrored_pairs_fold_into_one_edge() {
        let g = Graph::from_edges(2, [(0, 1), (1, 0), (0, 1)]).unwrap();
        assert_eq!(g.edge_count(), 1);
        assert_eq!(g.nonzero_entries(), 2);
    }

    #[test]
    fn self_loops_rejected() {
        assert!(Graph::from_edges(2, [(1, 1)]).is_err());
        assert!(Graph::from_edges(2, [(0, 2)]).is_err());
    }

    #[test]
    fn degenerate_sbm_is_two_disjoint_edges() {
        let params = SbmParams::new(vec![2, 2], 1.0, 0.0).unwrap();
        let g = sbm_sample(&params, 9).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
        assert_eq!(g.labels().unwrap().as_slice(), &[0, 0, 1, 1]);
    }

    #[test]
    fn sbm_rejects_bad_probabilities() {
        assert!(SbmParams::new(vec![3, 3], 0.2, 0.2).is_err());
        assert!(SbmParams::new(vec![3, 3], 1.2, 0.2).is_err());
        assert!(SbmParams::new(vec![3], 0.5, 0.1).is_err());
        assert!(SbmParams::new(vec![3, 0], 0.5, 0.1).is_err());
    }

    #[test]
    fn expected_edge_counts_match_dataset_table() {
        let k3 = SbmParams::equal(3, 200, 0.5, 0.1).unwrap();
        assert!((k3.expected_nonzero_entries() - 83_700.0).abs() < 1e-6);
        // one published draw: 83,636 nonzero entries
        assert!((k3.expected_nonzero_entries() - 83_636.0).abs() / 83_636.0 < 0.005);

        let k10 = SbmParams::equal(10, 200, 0.4, 0.15).unwrap();
        assert!((k10.expected_nonzero_entries() - 699_200.0).abs() < 1e-6);
        assert!((k10.expected_nonzero_entries() - 698_486.0).abs() / 698_486.0 < 0.005);
    }

    #[test]
    fn sbm_draw_edge_count_near_expectation() {
        let params = SbmParams::equal(3, 200, 0.5, 0.1).unwrap();
        let g = sbm_sample(&params, 1).unwrap();
        let rel = (g.nonzero_entries() as f64 - params.expected_nonzero_entries()).abs()
            / params.expected_nonzero_entries();
        assert!(rel < 0.01, "relative deviation {rel}");
    }

    #[test]
    fn sbm_block_frequencies_within_four_sigma() {
        let params = SbmParams::new(vec![60, 80, 50], 0.45, 0.08).unwrap();
        for seed in 0..5 {
            let g = sbm_sample(&params, seed).unwrap();
            let labels = g.labels().unwrap().as_slice();
            let k = params.k();
            let mut hits = vec![vec![0usize; k]; k];
            for &(u, v) in g.edges() {
                let (a, b) = (labels[u].min(labels[v]), labels[u].max(labels[v]));
                hits[a][b] += 1;
            }
            for a in 0..k {
                for b in a..k {
                    let pairs = if a == b {
                        params.sizes()[a] * (params.sizes()[a] - 1) / 2
                    } else {
                        params.sizes()[a] * params.sizes()[b]
                    } as f64;
                    let prob = if a == b { params.p() } else { params.q() };
                    let freq = hits[a][b] as f64 / pairs;
                    let tol = 4.0 * (prob * (1.0 - prob) / pairs).sqrt();
                    assert!((freq - prob).abs() <= tol, "block ({a},{b}) freq {freq} vs {prob}");
                }
            }
        }
    }

    #[test]
    fn sbm_is_deterministic_per_seed() {
        let params = SbmParams::equal(2, 30, 0.5, 0.1).unwrap();
        assert_eq!(sbm_sample(&params, 3).unwrap(), sbm_sample(&params, 3).unwrap());
        assert_ne!(sbm_sample(&params, 3).unwrap(), sbm_sample(&params, 4).unwrap());
    }

    #[test]
    fn lcc_drops_isolated_node() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2)]).unwrap();
        let lcc = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.n(), 3);
        assert_eq!(lcc.edges(), &[(0, 1), (1, 2)]);
    }

    #[test]
    fn lcc_of_connected_graph_is_identity() {
        let g = path(6);
        assert_eq!(largest_connected_component(&g).unwrap(), g);
    }

    #[test]
    fn lcc_tie_prefers_smallest_node_id() {
        // component {5..9} is listed first in the edge list, {0..4} holds node 0
        let mut edges: Vec<(usize, usize)> = (6..10).map(|i| (i - 1, i)).collect();
        edges.extend((1..5).map(|i| (i - 1, i)));
        edges.push((0, 2));
        let g = Graph::from_edges(10, edges)
            .unwrap()
            .with_labels(Labels::from_values((0..10).map(|i| i / 5).collect()).unwrap())
            .unwrap();
        let lcc = largest_connected_component(&g).unwrap();
        assert_eq!(lcc.n(), 5);
        assert_eq!(lcc.edge_count(), 5);
        assert!(lcc.labels().unwrap().as_slice().iter().all(|&l| l == 0));
    }

    #[test]
    fn lcc_rejects_empty_graph() {
        let g = Graph::from_edges(0, []).unwrap();
        assert!(largest_connected_component(&g).is_err());
    }

    #[test]
    fn identity_permutation_leaves_graph_unchanged() {
        let g = path(5);
        assert_eq!(g.permuted(&Permutation::identity(5)).unwrap(), g);
    }

    #[test]
    fn permutation_preserves_degrees_and_spectrum() {
        let params = SbmParams::equal(3, 20, 0.5, 0.1).unwrap();
        let g = sbm_sample(&params, 11).unwrap();
        let (h, perm) = permute_graph(&g, 5);
        let mut dg: Vec<usize> = (0..g.n()).map(|i| g.degree(i)).collect();
        let mut dh: Vec<usize> = (0..h.n()).map(|i| h.degree(i)).collect();
        dg.sort_unstable();
        dh.sort_unstable();
        assert_eq!(dg, dh);

        let eg = symmetric_eigenvalues(g.to_dense().matrix());
        let eh = symmetric_eigenvalues(h.to_dense().matrix());
        for (a, b) in eg.iter().zip(&eh) {
            assert!((a - b).abs() <= 1e-9);
        }
        // adjacency equals P A Pᵀ and labels travel with nodes
        assert_eq!(h.to_dense(), g.to_dense().permuted(&perm));
        for a in 0..g.n() {
            assert_eq!(
                h.labels().unwrap().as_slice()[a],
                g.labels().unwrap().as_slice()[perm.as_slice()[a]]
            );
        }
    }

    #[test]
    fn permutations_compose() {
        let params = SbmParams::equal(2, 15, 0.6, 0.2).unwrap();
        let g = sbm_sample(&params, 2).unwrap();
        let (h1, p1) = permute_graph(&g, 1);
        let (h2, p2) = permute_graph(&h1, 2);
        assert_eq!(g.permuted(&p1.then(&p2)).unwrap(), h2);
        assert!(p1.then(&p1.inverse()).is_identity());
    }

    #[test]
    fn unapply_restores_source_order() {
        let perm = Permutation::from_vec(vec![2, 0, 1]).unwrap();
        assert_eq!(perm.unapply(&[10, 20, 30]), vec![20, 30, 10]);
        assert!(Permutation::from_vec(vec![0, 0]).is_err());
    }

    #[test]
    fn circles_split_a_path() {
        let g = path(4);
        let circles = [
            Circle { name: "a".into(), members: vec![0, 1] },
            Circle { name: "b".into(), members: vec![2, 3] },
        ];
        let out = select_circles_drop_policy(&g, &circles, 2).unwrap();
        assert_eq!(out.n(), 4);
        assert_eq!(out.labels().unwrap().as_slice(), &[0, 0, 1, 1]);
        assert_eq!(out.edge_count(), 3);
    }

    #[test]
    fn circles_drop_overlapping_nodes() {
        let g = path(5);
        let circles = [
            Circle { name: "a".into(), members: vec![0, 1, 2] },
            Circle { name: "b".into(), members: vec![2, 3, 4] },
        ];
        let out = select_circles_drop_policy(&g, &circles, 2).unwrap();
        assert_eq!(out.n(), 4);
        assert_eq!(out.labels().unwrap().as_slice(), &[0, 0, 1, 1]);
        // node 2 is gone, so the path breaks into two pieces
        assert_eq!(out.edges(), &[(0, 1), (2, 3)]);
    }

    #[test]
    fn circles_rank_by_size_then_name() {
        let g = Graph::from_edges(6, []).unwrap();
        let circles = [
            Circle { name: "z".into(), members: vec![0] },
            Circle { name: "m".into(), members: vec![1, 2] },
            Circle { name: "b".into(), members: vec![3, 4] },
            Circle { name: "a".into(), members: vec![5] },
        ];
        let out = select_circles_drop_policy(&g, &circles, 3).unwrap();
        // ranks: b (2, name b), m (2), a (1, beats z)
        assert_eq!(out.labels().unwrap().as_slice(), &[1, 1, 0, 0, 2]);
        assert!(select_circles_drop_policy(&g, &circles, 5).is_err());
    }
}
