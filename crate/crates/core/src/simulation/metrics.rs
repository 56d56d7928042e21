use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Monte Carlo estimation quality over a graphs × replications grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub amse: f64,
    pub variance: f64,
    pub bias2: f64,
    /// Spread of the per-run mean squared errors.
    pub mse_sd: f64,
    pub graphs: usize,
    pub replications: usize,
}

/// AMSE, variance and squared bias.
///
/// `estimates[q][r]` is the estimate on graph `q` from replication `r`;
/// `truths[q]` is the truth on graph `q`. Every cell must be present.
pub fn compute_metrics(estimates: &[Vec<Vec<f64>>], truths: &[Vec<f64>]) -> Result<MetricsReport> {
    if estimates.is_empty() || estimates.len() != truths.len() {
        return Err(Error::IncompleteGrid(format!("{} estimate rows for {} truths", estimates.len(), truths.len())));
    }
    let r = estimates[0].len();
    if r == 0 {
        return Err(Error::IncompleteGrid("no replications".into()));
    }
    let (mut sq, mut var, mut bias, mut cells) = (0.0, 0.0, 0.0, 0usize);
    let mut run_mse = Vec::with_capacity(estimates.len() * r);
    for (q, (runs, truth)) in estimates.iter().zip(truths).enumerate() {
        if runs.len() != r {
            return Err(Error::IncompleteGrid(format!("graph {q} has {} replications, expected {r}", runs.len())));
        }
        let m = truth.len();
        if let Some(bad) = runs.iter().position(|g| g.len() != m) {
            return Err(Error::IncompleteGrid(format!("graph {q} replication {bad} has the wrong length")));
        }
        for k in 0..m {
            let mean = runs.iter().map(|g| g[k]).sum::<f64>() / r as f64;
            var += runs.iter().map(|g| (g[k] - mean).powi(2)).sum::<f64>();
            sq += runs.iter().map(|g| (g[k] - truth[k]).powi(2)).sum::<f64>();
            bias += r as f64 * (mean - truth[k]).powi(2);
        }
        cells += r * m;
        run_mse.extend(runs.iter().map(|g| g.iter().zip(truth).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / m as f64));
    }
    let n = cells as f64;
    let mean_mse = run_mse.iter().sum::<f64>() / run_mse.len() as f64;
    let mse_sd = if run_mse.len() > 1 {
        (run_mse.iter().map(|v| (v - mean_mse).powi(2)).sum::<f64>() / (run_mse.len() - 1) as f64).sqrt()
    } else {
        0.0
    };
    Ok(MetricsReport {
        amse: sq / n,
        variance: var / n,
        bias2: bias / n,
        mse_sd,
        graphs: estimates.len(),
        replications: r,
    })
}
