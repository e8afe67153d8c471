//! Weighted undirected interaction graphs and their Laplacians.

use std::collections::{BTreeSet, VecDeque};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Symmetric, zero-diagonal, nonnegative weight matrix of an undirected graph.
///
/// Vertices `i` and `j` are neighbors iff `weight(i, j) > 0`. Instances are
/// immutable once built, so they can be shared freely between simulation runs.
#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    weights: DMatrix<f64>,
}

impl Topology {
    /// Builds a topology on `n` vertices from an undirected edge list.
    ///
    /// Every `(i, j, w)` sets `a_ij = a_ji = w`. Self loops, repeated vertex
    /// pairs (in either orientation) and negative or non-finite weights are
    /// rejected. A zero weight is accepted but does not create an edge.
    pub fn new(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n == 0 {
            return Err(Error::EmptyTopology);
        }
        let mut weights = DMatrix::zeros(n, n);
        let mut seen = BTreeSet::new();
        for &(i, j, w) in edges {
            for index in [i, j] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::NegativeWeight { i, j, w });
            }
            if !seen.insert((i.min(j), i.max(j))) {
                return Err(Error::DuplicateEdge(i, j));
            }
            weights[(i, j)] = w;
            weights[(j, i)] = w;
        }
        Ok(Self { weights })
    }

    /// Wraps a dense weight matrix after checking the topology invariants exactly.
    pub fn from_weights(weights: DMatrix<f64>) -> Result<Self> {
        let n = weights.nrows();
        if n == 0 {
            return Err(Error::EmptyTopology);
        }
        if weights.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: weights.ncols(),
            });
        }
        for i in 0..n {
            for j in 0..n {
                let w = weights[(i, j)];
                let ok = w.is_finite() && w >= 0.0 && w == weights[(j, i)] && (i != j || w == 0.0);
                if !ok {
                    return Err(Error::InvalidWeightMatrix(i, j));
                }
            }
        }
        Ok(Self { weights })
    }

    /// Path `0 - 1 - ... - (n-1)` with a uniform edge weight.
    pub fn path(n: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i, weight)).collect();
        Self::new(n, &edges)
    }

    /// Cycle on `n >= 3` vertices with a uniform edge weight.
    pub fn cycle(n: usize, weight: f64) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "a cycle needs at least 3 vertices, got {n}"
            )));
        }
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, weight)).collect();
        Self::new(n, &edges)
    }

    /// Complete graph with a uniform edge weight.
    pub fn complete(n: usize, weight: f64) -> Result<Self> {
        let mut edges = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                edges.push((i, j, weight));
            }
        }
        Self::new(n, &edges)
    }

    /// Star with vertex 0 at the center.
    pub fn star(n: usize, weight: f64) -> Result<Self> {
        let edges: Vec<_> = (1..n).map(|i| (0, i, weight)).collect();
        Self::new(n, &edges)
    }

    pub fn n(&self) -> usize {
        self.weights.nrows()
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Neighbors of `i` with their edge weights, in increasing vertex order.
    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (0..self.n()).filter_map(move |j| {
            let w = self.weights[(i, j)];
            (w > 0.0).then_some((j, w))
        })
    }

    /// Edges `(i, j, w)` with `i < j` and `w > 0`, in lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                let w = self.weights[(i, j)];
                if w > 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    /// Breadth-first reachability from vertex 0 over positive-weight edges.
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::from([0]);
        visited[0] = true;
        let mut reached = 1;
        while let Some(v) = queue.pop_front() {
            for (u, _) in self.neighbors(v) {
                if !visited[u] {
                    visited[u] = true;
                    reached += 1;
                    queue.push_back(u);
                }
            }
        }
        reached == n
    }

    pub fn laplacian(&self) -> Laplacian {
        let n = self.n();
        let mut l = -self.weights.clone();
        for i in 0..n {
            let degree: f64 = (0..n)
                .filter(|&k| k != i)
                .map(|k| self.weights[(i, k)])
                .sum();
            l[(i, i)] = degree;
        }
        Laplacian(l)
    }

    /// Entrywise power `b_ij = a_ij^(2/(1+α))`.
    ///
    /// The spectrum of the transformed graph sets the decay rate of the
    /// disagreement energy under the edge-wise protocol.
    pub fn exponent_transform(&self, alpha: f64) -> Result<Topology> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        let p = 2.0 / (1.0 + alpha);
        let weights = self.weights.map(|w| if w > 0.0 { w.powf(p) } else { 0.0 });
        Ok(Topology { weights })
    }

    /// Relabels vertices so that old vertex `i` becomes `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Topology> {
        let n = self.n();
        if perm.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: perm.len(),
            });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument("not a permutation".into()));
            }
        }
        let mut weights = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                weights[(perm[i], perm[j])] = self.weights[(i, j)];
            }
        }
        Ok(Topology { weights })
    }
}

/// Graph Laplacian `L = D - A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(DMatrix<f64>);

impl Laplacian {
    pub fn n(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let v = &self.0 * DVector::from_column_slice(x);
        v.iter().copied().collect()
    }

    /// `xᵀ L x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let v = DVector::from_column_slice(x);
        v.dot(&(&self.0 * &v))
    }
}
