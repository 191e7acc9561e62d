//! Spatial k-nearest-neighbour graph over riders and its Laplacian.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lp::DenseMatrix;
use crate::sparsity::Edge;

/// Default neighbour count for the rider graph.
pub const DEFAULT_K_NEIGHBORS: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GraphError {
    #[error("need at least two riders, got {0}")]
    TooFewRiders(usize),
    #[error("k_neighbors must be in 1..{n}, got {k}")]
    InvalidNeighborCount { k: usize, n: usize },
    #[error("non-finite position for rider {0}")]
    NonFinitePosition(usize),
    #[error("invalid edge ({0}, {1}) for {2} nodes")]
    InvalidEdge(usize, usize, usize),
}

/// Along-road / lateral coordinates in meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Position {
    pub s: f64,
    pub d: f64,
}

impl Position {
    pub fn new(s: f64, d: f64) -> Self {
        Self { s, d }
    }

    pub fn distance_sq(&self, other: &Position) -> f64 {
        let ds = self.s - other.s;
        let dd = self.d - other.d;
        ds * ds + dd * dd
    }

    pub fn distance(&self, other: &Position) -> f64 {
        self.distance_sq(other).sqrt()
    }
}

/// Snapshot of every rider's position at one instant.
#[derive(Debug, Clone, PartialEq)]
pub struct RiderPositions {
    pub time: f64,
    pub pos: Vec<Position>,
}

impl RiderPositions {
    pub fn new(time: f64, pos: Vec<Position>) -> Result<Self, GraphError> {
        if let Some(i) = pos.iter().position(|p| !p.s.is_finite() || !p.d.is_finite()) {
            return Err(GraphError::NonFinitePosition(i));
        }
        Ok(Self { time, pos })
    }

    pub fn len(&self) -> usize {
        self.pos.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pos.is_empty()
    }
}

/// Undirected simple graph with edges stored as `(i, j)`, `i < j`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborGraph {
    n: usize,
    edges: Vec<Edge>,
}

impl NeighborGraph {
    pub fn new(n: usize, edges: impl IntoIterator<Item = Edge>) -> Result<Self, GraphError> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if i == j || j >= n {
                return Err(GraphError::InvalidEdge(a, b, n));
            }
            set.insert((i, j));
        }
        Ok(Self {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n];
        for &(i, j) in &self.edges {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }

    /// Connected component label per node, labels numbered by first node.
    pub fn components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for &(i, j) in &self.edges {
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
        let mut label = vec![usize::MAX; self.n];
        let mut next = 0;
        let mut out = vec![0; self.n];
        for (i, slot) in out.iter_mut().enumerate() {
            let root = find(&mut parent, i);
            if label[root] == usize::MAX {
                label[root] = next;
                next += 1;
            }
            *slot = label[root];
        }
        out
    }

    pub fn component_count(&self) -> usize {
        self.components().iter().max().map_or(0, |m| m + 1)
    }

    pub fn is_connected(&self) -> bool {
        self.component_count() <= 1
    }
}

/// Connects every rider to its `k_neighbors` nearest riders (Euclidean,
/// ties to the lower index) and symmetrizes by union.
pub fn knn_graph(positions: &RiderPositions, k_neighbors: usize) -> Result<NeighborGraph, GraphError> {
    let n = positions.len();
    if n < 2 {
        return Err(GraphError::TooFewRiders(n));
    }
    if k_neighbors == 0 || k_neighbors >= n {
        return Err(GraphError::InvalidNeighborCount { k: k_neighbors, n });
    }
    let mut edges = Vec::with_capacity(n * k_neighbors);
    let mut order: Vec<(f64, usize)> = Vec::with_capacity(n - 1);
    for i in 0..n {
        order.clear();
        let pi = positions.pos[i];
        order.extend((0..n).filter(|&j| j != i).map(|j| (pi.distance_sq(&positions.pos[j]), j)));
        order.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        edges.extend(order[..k_neighbors].iter().map(|&(_, j)| (i, j)));
    }
    NeighborGraph::new(n, edges)
}

/// Laplacian: degree on the diagonal, −1 per edge.
pub fn laplacian(graph: &NeighborGraph) -> DenseMatrix {
    laplacian_from_edges(graph.node_count(), graph.edges())
}

pub(crate) fn laplacian_from_edges(n: usize, edges: &[Edge]) -> DenseMatrix {
    let mut l = DenseMatrix::zeros(n, n);
    for &(i, j) in edges {
        l[(i, i)] += 1.0;
        l[(j, j)] += 1.0;
        l[(i, j)] -= 1.0;
        l[(j, i)] -= 1.0;
    }
    l
}
