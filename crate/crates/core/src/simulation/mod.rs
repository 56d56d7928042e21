//! Simulation protocol: test fields, random networks, edge embeddings, noise,
//! Monte Carlo metrics and the river-flow fixture.

mod experiment;
mod fields;
mod flow;
mod metrics;

pub use experiment::{run_experiment, Embedding, ExperimentConfig, ExperimentReport, ReportRow};
pub use fields::TestField;
pub use flow::{generate_flow_fixture, FlowFixture, FLOW_BASE, FLOW_LEVELS};
pub use metrics::{compute_metrics, MetricsReport};

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, Vertex};
use crate::mst::euclidean_mst;
use crate::rng::{substream, Stream};

/// Euclidean minimum spanning tree of `n` uniform points in the unit square.
///
/// Vertices are drawn from the graph substream of `seed` at index `index`.
pub fn sample_network(n: usize, seed: u64, index: u64) -> Result<Graph<f64>> {
    if n < 3 {
        return Err(Error::InvalidConfig(format!("a random network needs at least 3 vertices, got {n}")));
    }
    let mut rng = substream(seed, Stream::Graph, &[index]);
    let points: Vec<[f64; 2]> = (0..n).map(|_| [rng.random::<f64>(), rng.random::<f64>()]).collect();
    let tree = euclidean_mst(&points)?;
    let vertices = points.iter().enumerate().map(|(i, &c)| Vertex { id: i as u64, coord: Some(c) }).collect();
    let edges = tree
        .iter()
        .enumerate()
        .map(|(i, e)| Edge { id: i as u64, u: e.u, v: e.v, length: Some(e.weight), value: None })
        .collect();
    Graph::new(vertices, edges)
}

fn endpoints(graph: &Graph<f64>, edge: usize) -> Result<([f64; 2], [f64; 2])> {
    let e = &graph.edges()[edge];
    match (graph.vertices()[e.u].coord, graph.vertices()[e.v].coord) {
        (Some(a), Some(b)) => Ok((a, b)),
        _ => Err(Error::MetricUnavailable(format!("edge {} lacks endpoint coordinates", e.id))),
    }
}

/// Field value at each edge midpoint.
pub fn embed_pointwise(field: &TestField, graph: &Graph<f64>) -> Result<Vec<f64>> {
    (0..graph.m())
        .map(|k| {
            let (a, b) = endpoints(graph, k)?;
            Ok(field.eval((a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0))
        })
        .collect()
}

/// Mean of the field over `samples` equally spaced points along each edge,
/// endpoints included.
pub fn embed_edge_average(field: &TestField, graph: &Graph<f64>, samples: usize) -> Result<Vec<f64>> {
    if samples < 2 {
        return Err(Error::InvalidConfig(format!("edge averaging needs at least 2 samples, got {samples}")));
    }
    let last = (samples - 1) as f64;
    (0..graph.m())
        .map(|k| {
            let (a, b) = endpoints(graph, k)?;
            let total: f64 = (0..samples)
                .map(|h| {
                    let t = h as f64 / last;
                    field.eval(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]))
                })
                .sum();
            Ok(total / samples as f64)
        })
        .collect()
}

/// Sample standard deviation with denominator `m - 1`.
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Truth rescaled to unit sample variance plus its noisy observation.
#[derive(Debug, Clone, PartialEq)]
pub struct NoisySignal {
    pub truth: Vec<f64>,
    pub noisy: Vec<f64>,
    pub sigma: f64,
}

/// Rescales `values` to unit sample variance and adds N(0, 1/snr²) noise.
///
/// Only the scale changes; the mean is kept.
pub fn add_noise(values: &[f64], snr: f64, seed: u64, indices: &[u64]) -> Result<NoisySignal> {
    if !(snr > 0.0 && snr.is_finite()) {
        return Err(Error::InvalidConfig(format!("SNR must be positive, got {snr}")));
    }
    if values.len() < 2 {
        return Err(Error::CannotNormalize("fewer than two values".into()));
    }
    let sd = sample_sd(values);
    if !(sd > 0.0 && sd.is_finite()) {
        return Err(Error::CannotNormalize("the true signal is constant".into()));
    }
    let truth: Vec<f64> = values.iter().map(|v| v / sd).collect();
    let sigma = 1.0 / snr;
    let noisy = add_gaussian(&truth, sigma, seed, indices);
    Ok(NoisySignal { truth, noisy, sigma })
}

/// Adds iid N(0, σ²) noise from the noise substream.
pub fn add_gaussian(values: &[f64], sigma: f64, seed: u64, indices: &[u64]) -> Vec<f64> {
    let mut rng = substream(seed, Stream::Noise, indices);
    let normal = Normal::new(0.0, sigma).expect("sigma is finite and non-negative");
    values.iter().map(|v| v + normal.sample(&mut rng)).collect()
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::graph::is_connected;

    fn single_edge(a: [f64; 2], b: [f64; 2]) -> Graph<f64> {
        Graph::new(
            vec![Vertex { id: 0, coord: Some(a) }, Vertex { id: 1, coord: Some(b) }],
            vec![Edge { id: 0, u: 0, v: 1, length: None, value: None }],
        )
        .unwrap()
    }

    #[test]
    fn networks_are_spanning_trees() {
        let g = sample_network(100, 3, 0).unwrap();
        assert_eq!(g.m(), 99);
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert!(is_connected(&(0..100).collect::<Vec<_>>(), &pairs));
        assert_eq!(g, sample_network(100, 3, 0).unwrap());
        assert_ne!(g, sample_network(100, 3, 1).unwrap());
        assert!(sample_network(2, 3, 0).is_err());
    }

    #[test]
    fn three_point_network_drops_longest_pair() {
        let g = sample_network(3, 11, 0).unwrap();
        let pts: Vec<[f64; 2]> = g.vertices().iter().map(|v| v.coord.unwrap()).collect();
        let mut pairs = [(0, 1), (0, 2), (1, 2)];
        pairs.sort_by(|a, b| {
            let da = crate::mst::euclid(pts[a.0], pts[a.1]);
            let db = crate::mst::euclid(pts[b.0], pts[b.1]);
            da.partial_cmp(&db).unwrap()
        });
        let mut got: Vec<_> = g.edges().iter().map(|e| (e.u.min(e.v), e.u.max(e.v))).collect();
        got.sort();
        let mut want = pairs[..2].to_vec();
        want.sort();
        assert_eq!(got, want);
    }

    #[test]
    fn embeddings_on_simple_fields() {
        let g = single_edge([0.0, 0.0], [1.0, 0.0]);
        let x = TestField::custom("x", |x, _| x);
        assert_eq!(embed_pointwise(&x, &g).unwrap(), vec![0.5]);
        assert_abs_diff_eq!(embed_edge_average(&x, &g, 100).unwrap()[0], 0.5, epsilon = 1e-12);
        let step = TestField::custom("step", |x, _| if x > 0.5 { 1.0 } else { 0.0 });
        assert_abs_diff_eq!(embed_edge_average(&step, &g, 10).unwrap()[0], 0.5, epsilon = 1e-15);
        let c = TestField::custom("c", |_, _| 2.5);
        assert_eq!(embed_edge_average(&c, &g, 7).unwrap(), vec![2.5]);
        assert!(embed_edge_average(&c, &g, 1).is_err());
    }

    #[test]
    fn blocks_midpoint_matches_direct_lookup() {
        let g = sample_network(30, 5, 0).unwrap();
        let vals = embed_pointwise(&TestField::Blocks, &g).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let mid = g.midpoint(k).unwrap();
            assert_eq!(*v, TestField::Blocks.eval(mid[0], mid[1]));
        }
    }

    #[test]
    fn linear_field_edge_average_equals_midpoint() {
        let g = sample_network(50, 9, 0).unwrap();
        let f = TestField::custom("plane", |x, y| 3.0 * x - 2.0 * y + 0.5);
        let a = embed_pointwise(&f, &g).unwrap();
        let b = embed_edge_average(&f, &g, 100).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_abs_diff_eq!(x, y, epsilon = 1e-12);
        }
    }

    #[test]
    fn noise_normalisation() {
        let vals = [1.0, 2.0, 4.0, 8.0];
        let s = add_noise(&vals, 5.0, 1, &[0]).unwrap();
        assert_abs_diff_eq!(s.sigma, 0.2, epsilon = 1e-15);
        assert_abs_diff_eq!(sample_sd(&s.truth), 1.0, epsilon = 1e-12);
        assert_eq!(s, add_noise(&vals, 5.0, 1, &[0]).unwrap());
        assert!(matches!(add_noise(&[3.0; 4], 5.0, 1, &[0]), Err(Error::CannotNormalize(_))));
    }

    #[test]
    fn noise_variance_at_snr_three() {
        let zeros = vec![0.0; 1_000_000];
        let noisy = add_gaussian(&zeros, 1.0 / 3.0, 2, &[0]);
        let var = noisy.iter().map(|v| v * v).sum::<f64>() / noisy.len() as f64;
        assert!((var * 9.0 - 1.0).abs() < 0.01, "variance {var}");
    }
}
