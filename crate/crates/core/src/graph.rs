//! Source graphs, their line graphs, and the metrics defined on them.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mst::{euclid, DisjointSet};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Vertex<T> {
    pub id: u64,
    pub coord: Option<[T; 2]>,
}

/// Undirected edge between two vertex *positions* of the owning [`Graph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge<T> {
    pub id: u64,
    pub u: usize,
    pub v: usize,
    pub length: Option<T>,
    pub value: Option<T>,
}

/// An undirected simple graph whose edges carry lengths and observations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Graph<T> {
    vertices: Vec<Vertex<T>>,
    edges: Vec<Edge<T>>,
}

impl<T: Scalar> Graph<T> {
    /// Validates the structure and fills missing lengths from coordinates.
    pub fn new(vertices: Vec<Vertex<T>>, mut edges: Vec<Edge<T>>) -> Result<Self> {
        let n = vertices.len();
        let mut ids = HashSet::new();
        for v in &vertices {
            if !ids.insert(v.id) {
                return Err(Error::InvalidGraph(format!("duplicate vertex id {}", v.id)));
            }
            if let Some(c) = v.coord {
                if !(c[0].is_finite() && c[1].is_finite()) {
                    return Err(Error::InvalidGraph(format!("vertex {} has non-finite coordinates", v.id)));
                }
            }
        }
        let mut edge_ids = HashSet::new();
        let mut pairs = HashSet::new();
        for e in edges.iter_mut() {
            if !edge_ids.insert(e.id) {
                return Err(Error::InvalidGraph(format!("duplicate edge id {}", e.id)));
            }
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("edge {} has a dangling endpoint", e.id)));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("edge {} is a self-loop", e.id)));
            }
            if !pairs.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidGraph(format!("edge {} duplicates an existing vertex pair", e.id)));
            }
            if e.length.is_none() {
                if let (Some(a), Some(b)) = (vertices[e.u].coord, vertices[e.v].coord) {
                    e.length = Some(euclid(a, b));
                }
            }
            if let Some(l) = e.length {
                if !(l > T::zero() && l.is_finite()) {
                    return Err(Error::InvalidGraph(format!("edge {} has non-positive length {}", e.id, l)));
                }
            }
            if let Some(val) = e.value {
                if !val.is_finite() {
                    return Err(Error::InvalidGraph(format!("edge {} has a non-finite value", e.id)));
                }
            }
        }
        Ok(Self { vertices, edges })
    }

    pub fn vertices(&self) -> &[Vertex<T>] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge<T>] {
        &self.edges
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    /// Observation values in edge order, if every edge carries one.
    pub fn values(&self) -> Option<Vec<T>> {
        self.edges.iter().map(|e| e.value).collect()
    }

    /// Replaces the observation on every edge.
    pub fn set_values(&mut self, values: &[T]) -> Result<()> {
        if values.len() != self.edges.len() {
            return Err(Error::InvalidGraph(format!(
                "{} values for {} edges",
                values.len(),
                self.edges.len()
            )));
        }
        for (e, &v) in self.edges.iter_mut().zip(values) {
            e.value = Some(v);
        }
        Ok(())
    }

    pub fn is_connected(&self) -> bool {
        let pairs: Vec<_> = self.edges.iter().map(|e| (e.u, e.v)).collect();
        is_connected_indexed(self.n(), &pairs)
    }

    /// Midpoint of an edge, when both endpoints have coordinates.
    pub fn midpoint(&self, edge: usize) -> Option<[T; 2]> {
        let e = &self.edges[edge];
        let (a, b) = (self.vertices[e.u].coord?, self.vertices[e.v].coord?);
        let half = T::lit(0.5);
        Some([(a[0] + b[0]) * half, (a[1] + b[1]) * half])
    }
}

fn is_connected_indexed(n: usize, edges: &[(usize, usize)]) -> bool {
    if n <= 1 {
        return true;
    }
    let mut dsu = DisjointSet::new(n);
    let mut components = n;
    for &(a, b) in edges {
        if dsu.union(a, b) {
            components -= 1;
        }
    }
    components == 1
}

/// Connectivity of the subgraph made of `vertices` and the `edges` among them.
///
/// The empty set counts as connected. Edges touching a vertex outside the
/// subset are ignored.
pub fn is_connected(vertices: &[usize], edges: &[(usize, usize)]) -> bool {
    let index: BTreeMap<usize, usize> = vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let local: Vec<(usize, usize)> = edges
        .iter()
        .filter_map(|(a, b)| Some((*index.get(a)?, *index.get(b)?)))
        .collect();
    is_connected_indexed(index.len(), &local)
}

/// How distances between line-graph vertices are measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MetricMode {
    /// Euclidean distance between vertex coordinates.
    Coordinate,
    /// Path length: adjacent vertices are `(l_k + l_l) / 2` apart.
    PathLength,
}

/// A vertex of the line graph; either the image of a source edge or a
/// directly supplied station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineVertex<T> {
    pub id: u64,
    pub source_edge: Option<usize>,
    pub coord: Option<[T; 2]>,
    pub length: Option<T>,
    pub value: Option<T>,
}

/// Line graph: one vertex per source edge, adjacent when the source edges
/// share exactly one endpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LineGraph<T> {
    vertices: Vec<LineVertex<T>>,
    adjacency: Vec<Vec<usize>>,
}

/// Builds the line graph of a connected source graph with at least 3 edges.
pub fn build_line_graph<T: Scalar>(graph: &Graph<T>) -> Result<LineGraph<T>> {
    if graph.m() < 3 {
        return Err(Error::GraphTooSmall { edges: graph.m() });
    }
    if !graph.is_connected() {
        return Err(Error::SourceDisconnected);
    }
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); graph.n()];
    for (k, e) in graph.edges().iter().enumerate() {
        incident[e.u].push(k);
        incident[e.v].push(k);
    }
    let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); graph.m()];
    // simple graph: two distinct edges share at most one endpoint
    for edges_at_vertex in &incident {
        for (i, &a) in edges_at_vertex.iter().enumerate() {
            for &b in &edges_at_vertex[i + 1..] {
                adjacency[a].insert(b);
                adjacency[b].insert(a);
            }
        }
    }
    let vertices = graph
        .edges()
        .iter()
        .enumerate()
        .map(|(k, e)| LineVertex {
            id: e.id,
            source_edge: Some(k),
            coord: graph.midpoint(k),
            length: e.length,
            value: e.value,
        })
        .collect();
    Ok(LineGraph {
        vertices,
        adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
    })
}

impl<T: Scalar> LineGraph<T> {
    /// Line graph supplied directly, e.g. monitoring stations and their links.
    ///
    /// `links` are pairs of vertex positions. The result must be connected.
    pub fn from_parts(vertices: Vec<LineVertex<T>>, links: &[(usize, usize)]) -> Result<Self> {
        let m = vertices.len();
        if m < 3 {
            return Err(Error::GraphTooSmall { edges: m });
        }
        let mut ids = HashSet::new();
        for v in &vertices {
            if !ids.insert(v.id) {
                return Err(Error::InvalidGraph(format!("duplicate station id {}", v.id)));
            }
            if let Some(l) = v.length {
                if !(l > T::zero() && l.is_finite()) {
                    return Err(Error::InvalidGraph(format!("station {} has non-positive length", v.id)));
                }
            }
        }
        let mut adjacency: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); m];
        for &(a, b) in links {
            if a >= m || b >= m {
                return Err(Error::InvalidGraph(format!("link ({a}, {b}) out of range")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("link ({a}, {b}) is a self-loop")));
            }
            if !adjacency[a].insert(b) {
                return Err(Error::InvalidGraph(format!("duplicate link ({a}, {b})")));
            }
            adjacency[b].insert(a);
        }
        let lg = LineGraph {
            vertices,
            adjacency: adjacency.into_iter().map(|s| s.into_iter().collect()).collect(),
        };
        if !lg.is_connected() {
            return Err(Error::LineGraphDisconnected);
        }
        Ok(lg)
    }

    pub fn m(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[LineVertex<T>] {
        &self.vertices
    }

    /// Sorted neighbours of `k`.
    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    pub fn is_adjacent(&self, k: usize, l: usize) -> bool {
        self.adjacency[k].binary_search(&l).is_ok()
    }

    /// Edge list as `(smaller, larger)` pairs in ascending order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (k, nb) in self.adjacency.iter().enumerate() {
            out.extend(nb.iter().filter(|&&l| l > k).map(|&l| (k, l)));
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        is_connected_indexed(self.m(), &self.edges())
    }

    pub fn values(&self) -> Option<Vec<T>> {
        self.vertices.iter().map(|v| v.value).collect()
    }

    /// Distance between two distinct vertices under `mode`.
    ///
    /// Path-length distances between non-adjacent vertices are shortest paths
    /// over adjacent-pair base distances.
    pub fn distance(&self, k: usize, l: usize, mode: MetricMode) -> Result<T> {
        MetricProvider::new(self, mode)?.distance(k, l)
    }
}

/// Validated access to the distances of a line graph.
#[derive(Debug, Clone)]
pub struct MetricProvider<'a, T> {
    lg: &'a LineGraph<T>,
    mode: MetricMode,
    floor: T,
}

impl<'a, T: Scalar> MetricProvider<'a, T> {
    pub fn new(lg: &'a LineGraph<T>, mode: MetricMode) -> Result<Self> {
        let floor = match mode {
            MetricMode::Coordinate => {
                let coords = lg
                    .vertices
                    .iter()
                    .map(|v| v.coord)
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| Error::MetricUnavailable("coordinates missing".into()))?;
                let mut lo = [T::infinity(); 2];
                let mut hi = [T::neg_infinity(); 2];
                for c in &coords {
                    for d in 0..2 {
                        lo[d] = lo[d].min(c[d]);
                        hi[d] = hi[d].max(c[d]);
                    }
                }
                let diameter = (hi[0] - lo[0]).hypot(hi[1] - lo[1]);
                if !(diameter > T::zero()) {
                    return Err(Error::DegenerateDistance("all vertices share one location".into()));
                }
                diameter * T::lit(1e-9)
            }
            MetricMode::PathLength => {
                if lg.vertices.iter().any(|v| v.length.is_none()) {
                    return Err(Error::MetricUnavailable("edge lengths missing".into()));
                }
                T::zero()
            }
        };
        Ok(Self { lg, mode, floor })
    }

    pub fn mode(&self) -> MetricMode {
        self.mode
    }

    pub fn line_graph(&self) -> &'a LineGraph<T> {
        self.lg
    }

    /// Euclidean distance with the duplicate-location floor applied.
    pub fn euclidean(&self, k: usize, l: usize) -> T {
        let (a, b) = (self.lg.vertices[k].coord, self.lg.vertices[l].coord);
        euclid(a.expect("validated"), b.expect("validated")).max(self.floor)
    }

    /// `(l_k + l_l) / 2`, the base distance of an adjacent pair.
    pub fn base_path(&self, k: usize, l: usize) -> T {
        let (a, b) = (self.lg.vertices[k].length, self.lg.vertices[l].length);
        (a.expect("validated") + b.expect("validated")) * T::lit(0.5)
    }

    /// Distance of an existing line-graph edge.
    pub fn edge_length(&self, k: usize, l: usize) -> T {
        match self.mode {
            MetricMode::Coordinate => self.euclidean(k, l),
            MetricMode::PathLength => self.base_path(k, l),
        }
    }

    pub fn distance(&self, k: usize, l: usize) -> Result<T> {
        let m = self.lg.m();
        if k >= m || l >= m {
            return Err(Error::InvalidGraph(format!("vertex index out of range ({k}, {l})")));
        }
        if k == l {
            return Err(Error::DegenerateDistance(format!("distance of vertex {k} to itself")));
        }
        match self.mode {
            MetricMode::Coordinate => Ok(self.euclidean(k, l)),
            MetricMode::PathLength => {
                if self.lg.is_adjacent(k, l) {
                    return Ok(self.base_path(k, l));
                }
                // search from the smaller id so the result is exactly symmetric
                let (a, b) = (k.min(l), k.max(l));
                let adj = self.weighted_adjacency();
                shortest_paths(&adj, a, &[b])[0].ok_or(Error::DisconnectedInMetric(k, l))
            }
        }
    }

    /// Neighbour maps carrying edge lengths under this metric.
    pub fn weighted_adjacency(&self) -> Vec<BTreeMap<usize, T>> {
        (0..self.lg.m())
            .map(|k| self.lg.neighbors(k).iter().map(|&l| (l, self.edge_length(k, l))).collect())
            .collect()
    }
}

#[derive(PartialEq)]
struct HeapItem<T>(T, usize);

impl<T: PartialOrd> Eq for HeapItem<T> {}

impl<T: PartialOrd> Ord for HeapItem<T> {
    fn cmp(&self, other: &Self) -> Ordering {
        // min-heap on distance, then on vertex
        other
            .0
            .partial_cmp(&self.0)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.1.cmp(&self.1))
    }
}

impl<T: PartialOrd> PartialOrd for HeapItem<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Dijkstra from `source`, stopping once every target is settled.
pub(crate) fn shortest_paths<T: Scalar>(
    adjacency: &[BTreeMap<usize, T>],
    source: usize,
    targets: &[usize],
) -> Vec<Option<T>> {
    let n = adjacency.len();
    let mut dist: Vec<Option<T>> = vec![None; n];
    let mut settled = vec![false; n];
    let mut remaining: BTreeSet<usize> = targets.iter().copied().collect();
    let mut heap = BinaryHeap::new();
    dist[source] = Some(T::zero());
    heap.push(HeapItem(T::zero(), source));
    while let Some(HeapItem(d, u)) = heap.pop() {
        if settled[u] {
            continue;
        }
        settled[u] = true;
        remaining.remove(&u);
        if remaining.is_empty() {
            break;
        }
        for (&v, &w) in &adjacency[u] {
            let cand = d + w;
            if !settled[v] && dist[v].is_none_or(|cur| cand < cur) {
                dist[v] = Some(cand);
                heap.push(HeapItem(cand, v));
            }
        }
    }
    targets.iter().map(|&t| if settled[t] { dist[t] } else { None }).collect()
}
