//! Minimum spanning trees with a deterministic tie-break.
//!
//! Candidate edges are ordered lexicographically by `(weight, smaller id,
//! larger id)` before Kruskal's sweep, so equal-weight inputs always yield the
//! same tree.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedEdge<T> {
    pub u: usize,
    pub v: usize,
    pub weight: T,
}

impl<T> WeightedEdge<T> {
    pub fn new(u: usize, v: usize, weight: T) -> Self {
        Self { u, v, weight }
    }

    /// Endpoints as `(smaller, larger)`.
    pub fn key(&self) -> (usize, usize) {
        (self.u.min(self.v), self.u.max(self.v))
    }
}

/// Union-find with path halving and union by size.
#[derive(Debug, Clone)]
pub struct DisjointSet {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl DisjointSet {
    pub fn new(n: usize) -> Self {
        Self { parent: (0..n).collect(), size: vec![1; n] }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns `true` when `a` and `b` were in different sets.
    pub fn union(&mut self, a: usize, b: usize) -> bool {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        true
    }
}

fn tie_break<T: Scalar>(a: &WeightedEdge<T>, b: &WeightedEdge<T>) -> Ordering {
    a.weight
        .partial_cmp(&b.weight)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a.key().cmp(&b.key()))
}

/// Kruskal over `n` vertices labelled `0..n`.
///
/// Fails on empty input, non-finite or negative weights, out-of-range
/// endpoints, or when the candidate edges do not connect all `n` vertices.
pub fn minimum_spanning_tree<T: Scalar>(
    n: usize,
    edges: &[WeightedEdge<T>],
) -> Result<Vec<WeightedEdge<T>>> {
    if n == 0 {
        return Err(Error::EmptyInput("minimum spanning tree of zero vertices".into()));
    }
    for e in edges {
        if e.u >= n || e.v >= n {
            return Err(Error::InvalidGraph(format!("edge ({}, {}) out of range", e.u, e.v)));
        }
        if !e.weight.is_finite() || e.weight < T::zero() {
            return Err(Error::InvalidGraph(format!(
                "edge ({}, {}) has invalid weight {}",
                e.u, e.v, e.weight
            )));
        }
    }
    let mut sorted: Vec<WeightedEdge<T>> = edges.to_vec();
    sorted.sort_by(tie_break);
    let mut dsu = DisjointSet::new(n);
    let mut tree = Vec::with_capacity(n.saturating_sub(1));
    for e in sorted {
        if e.u != e.v && dsu.union(e.u, e.v) {
            tree.push(e);
            if tree.len() + 1 == n {
                break;
            }
        }
    }
    if tree.len() + 1 != n {
        return Err(Error::InvalidGraph("candidate edges do not span all vertices".into()));
    }
    Ok(tree)
}

/// Euclidean MST of planar points over the complete graph.
pub fn euclidean_mst<T: Scalar>(points: &[[T; 2]]) -> Result<Vec<WeightedEdge<T>>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no points".into()));
    }
    let n = points.len();
    let mut edges = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            edges.push(WeightedEdge::new(i, j, euclid(points[i], points[j])));
        }
    }
    minimum_spanning_tree(n, &edges)
}

pub(crate) fn euclid<T: Scalar>(a: [T; 2], b: [T; 2]) -> T {
    (a[0] - b[0]).hypot(a[1] - b[1])
}
