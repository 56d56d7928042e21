use std::collections::VecDeque;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;

use crate::error::Result;
use crate::graph::{Edge, Graph, Vertex};
use crate::rng::{substream, Stream};

/// Value every edge starts from.
pub const FLOW_BASE: f64 = 9.0;
/// Values a picked cluster can take.
pub const FLOW_LEVELS: [f64; 3] = [12.0, 15.0, 18.0];

const VERTICES: usize = 80;
const CLUSTERS: usize = 7;
const RAISED_TARGET: usize = 30;
const MAX_DEGREE: usize = 3;

/// Synthetic river network with a cluster-wise flow signal.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowFixture {
    /// 80-vertex tree; edge values hold the clean flow.
    pub graph: Graph<f64>,
    /// Cluster label of each edge.
    pub clusters: Vec<usize>,
    pub values: Vec<f64>,
}

/// Builds the flow fixture from the fixture substream of `seed`.
///
/// The tree is a random recursive tree: vertex `i` hangs off a uniformly
/// chosen earlier vertex of degree below three, one random step away from it.
/// Edges are split into seven contiguous clusters by growing seven
/// breadth-first searches in turn. Clusters are then picked at random and set
/// to a value drawn from {12, 15, 18}, so the flow is constant on each
/// cluster, until more than 30 edges exceed the base value 9.
pub fn generate_flow_fixture(seed: u64) -> Result<FlowFixture> {
    let mut rng = substream(seed, Stream::Fixture, &[]);

    let mut coords = vec![[0.0f64, 0.0]];
    let mut edges = Vec::with_capacity(VERTICES - 1);
    let mut degree = vec![0usize; VERTICES];
    for i in 1..VERTICES {
        // river confluences: no vertex joins more than three reaches
        let open: Vec<usize> = (0..i).filter(|&v| degree[v] < MAX_DEGREE).collect();
        let parent = open[rng.random_range(0..open.len())];
        degree[parent] += 1;
        degree[i] += 1;
        let angle = rng.random_range(0.0..std::f64::consts::TAU);
        let step = rng.random_range(0.5..1.5);
        let p = coords[parent];
        coords.push([p[0] + step * angle.cos(), p[1] + step * angle.sin()]);
        edges.push((parent, i));
    }
    let m = edges.len();

    let mut incident = vec![Vec::new(); VERTICES];
    for (k, &(u, v)) in edges.iter().enumerate() {
        incident[u].push(k);
        incident[v].push(k);
    }
    let mut seeds: Vec<usize> = (0..m).collect();
    seeds.shuffle(&mut rng);
    let mut clusters = vec![usize::MAX; m];
    let mut frontiers: Vec<VecDeque<usize>> = Vec::with_capacity(CLUSTERS);
    for (c, &s) in seeds[..CLUSTERS].iter().enumerate() {
        clusters[s] = c;
        frontiers.push(VecDeque::from([s]));
    }
    let mut claimed = CLUSTERS;
    let mut pending: Vec<VecDeque<usize>> = vec![VecDeque::new(); CLUSTERS];
    while claimed < m {
        let mut progressed = false;
        for c in 0..CLUSTERS {
            // Claim one new edge for cluster c, expanding its frontier as needed.
            loop {
                if let Some(k) = pending[c].pop_front() {
                    if clusters[k] == usize::MAX {
                        clusters[k] = c;
                        claimed += 1;
                        frontiers[c].push_back(k);
                        progressed = true;
                        break;
                    }
                    continue;
                }
                let Some(k) = frontiers[c].pop_front() else { break };
                let (u, v) = edges[k];
                pending[c].extend(incident[u].iter().chain(&incident[v]).filter(|&&l| clusters[l] == usize::MAX));
            }
        }
        if !progressed {
            break;
        }
    }

    let mut values = vec![FLOW_BASE; m];
    while values.iter().filter(|&&v| v > FLOW_BASE).count() <= RAISED_TARGET {
        let c = rng.random_range(0..CLUSTERS);
        let level = *FLOW_LEVELS.choose(&mut rng).expect("non-empty level set");
        for k in (0..m).filter(|&k| clusters[k] == c) {
            values[k] = level;
        }
    }

    let vertices = coords.iter().enumerate().map(|(i, &c)| Vertex { id: i as u64, coord: Some(c) }).collect();
    let edges = edges
        .iter()
        .zip(&values)
        .enumerate()
        .map(|(k, (&(u, v), &val))| Edge { id: k as u64, u, v, length: None, value: Some(val) })
        .collect();
    Ok(FlowFixture { graph: Graph::new(vertices, edges)?, clusters, values })
}
