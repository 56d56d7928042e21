//! Reference computations shared by the integration tests. Nothing here calls
//! into the closed-form shrinkage code of the crate.

#![allow(dead_code)]

use edge_lifting::analysis::{reconstruct_subset, squared_error};
use edge_lifting::graph::{Edge, Graph, Vertex};
use edge_lifting::{build_line_graph, forward, LiftingConfig, LineGraph};

const SQRT_2PI: f64 = 2.506_628_274_631_000_7;

fn phi(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

fn upper_tail(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

/// Quasi-Cauchy prior density, evaluated directly.
pub fn prior_density(u: f64) -> f64 {
    let a = u.abs();
    (1.0 - a * upper_tail(a) / phi(a)) / SQRT_2PI
}

/// Grid over which posteriors are integrated.
struct Grid {
    lo: f64,
    h: f64,
    n: usize,
}

impl Grid {
    fn new(z: f64) -> Self {
        let h = 1e-4;
        let lo = -12.0;
        let hi = z.abs() + 12.0;
        Grid { lo, h, n: ((hi - lo) / h).ceil() as usize }
    }

    fn at(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.h
    }
}

/// Posterior median of the mean under prior `(1 - w) δ₀ + w γ` after one
/// N(μ, 1) observation `z`, by trapezoid integration of the posterior.
pub fn posterior_median_by_quadrature(z: f64, w: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let x = z.abs();
    let grid = Grid::new(x);
    // zero lies on the grid since lo and h are both multiples of 1e-4
    let zero = (-grid.lo / grid.h).round() as usize;
    let dens: Vec<f64> = (0..=grid.n).map(|i| w * prior_density(grid.at(i)) * phi(x - grid.at(i))).collect();
    let mut cum = vec![0.0; grid.n + 1];
    for i in 1..=grid.n {
        cum[i] = cum[i - 1] + 0.5 * grid.h * (dens[i - 1] + dens[i]);
    }
    let atom = (1.0 - w) * phi(x);
    let total = cum[grid.n] + atom;
    let half = 0.5 * total;
    if cum[zero] + atom >= half {
        return 0.0;
    }
    let target = half - atom;
    let j = cum.partition_point(|&c| c < target).max(1);
    // solve the trapezoid piece exactly: density is linear across the cell
    let (d0, d1) = (dens[j - 1], dens[j]);
    let need = target - cum[j - 1];
    let slope = (d1 - d0) / grid.h;
    let t = if slope.abs() < 1e-14 { need / d0 } else { ((d0 * d0 + 2.0 * slope * need).sqrt() - d0) / slope };
    (grid.at(j - 1) + t).copysign(z)
}

/// Marginal density of an observation with prior mean drawn from `γ`.
pub fn marginal_by_quadrature(x: f64) -> f64 {
    let grid = Grid::new(x);
    let mut s = 0.0;
    for i in 0..=grid.n {
        let wgt = if i == 0 || i == grid.n { 0.5 } else { 1.0 };
        let u = grid.at(i);
        s += wgt * prior_density(u) * phi(x - u);
    }
    s * grid.h
}

/// Mixing weight maximizing the marginal likelihood over `[lo, 1]`, by
/// golden-section search on the log-likelihood.
pub fn weight_by_likelihood(x: &[f64], lo: f64) -> f64 {
    let g: Vec<f64> = x.iter().map(|&v| marginal_by_quadrature(v)).collect();
    let f: Vec<f64> = x.iter().map(|&v| phi(v)).collect();
    let loglik = |w: f64| -> f64 { g.iter().zip(&f).map(|(gi, fi)| ((1.0 - w) * fi + w * gi).ln()).sum() };
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo.ln(), 0.0f64);
    for _ in 0..200 {
        let c = b - ratio * (b - a);
        let d = a + ratio * (b - a);
        if loglik(c.exp()) > loglik(d.exp()) {
            b = d;
        } else {
            a = c;
        }
    }
    (0.5 * (a + b)).exp()
}

/// Smallest reconstruction error over every choice of `k` details.
pub fn best_subset_ise(truth: &[f64], lg: &LineGraph<f64>, config: &LiftingConfig, k: usize) -> f64 {
    let (coeffs, record) = forward(truth, lg, config).unwrap();
    let n = coeffs.details.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize != k {
            continue;
        }
        let keep: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        let g = reconstruct_subset(&coeffs, &record, &keep).unwrap();
        best = best.min(squared_error(&g, truth));
    }
    best
}

/// Source graph with coordinates from explicit points and vertex pairs.
pub fn planar_graph(points: &[[f64; 2]], pairs: &[(usize, usize)]) -> Graph<f64> {
    let vertices = points.iter().enumerate().map(|(i, &c)| Vertex { id: i as u64, coord: Some(c) }).collect();
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(k, &(u, v))| Edge { id: k as u64, u, v, length: None, value: None })
        .collect();
    Graph::new(vertices, edges).unwrap()
}

/// Six-edge tree: two three-edge branches meeting at the origin.
pub fn six_edge_tree() -> LineGraph<f64> {
    let pts = [[0.0, 0.0], [1.0, 0.2], [2.1, 0.1], [2.9, 0.6], [-1.0, 0.1], [-1.8, -0.5], [-2.7, -0.4]];
    build_line_graph(&planar_graph(&pts, &[(0, 1), (1, 2), (2, 3), (0, 4), (4, 5), (5, 6)])).unwrap()
}

/// Median of a sample.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64
}

/// Prints one criterion line and reports whether it passed.
pub fn report(criterion: u32, name: &str, pass: bool, detail: &str) -> bool {
    println!("criterion {criterion:>2} [{}] {name}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}
