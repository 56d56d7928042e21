use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{add_noise, compute_metrics, embed_edge_average, embed_pointwise, sample_network, MetricsReport, TestField};
use crate::error::{Error, Result};
use crate::graph::{build_line_graph, Graph};
use crate::lifting::{LiftingConfig, Variant};
use crate::rng::{derive_seed, Stream};
use crate::shrinkage::{denoise, ShrinkageConfig};

/// How a planar field is turned into one value per edge.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Embedding {
    Pointwise,
    EdgeAverage,
}

impl Embedding {
    pub fn name(self) -> &'static str {
        match self {
            Embedding::Pointwise => "pointwise",
            Embedding::EdgeAverage => "edge-average",
        }
    }
}

/// Parameters of a graphs × noise replications study.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    /// Vertices per random network; each has `n - 1` edges.
    pub n: usize,
    pub graphs: usize,
    pub replications: usize,
    pub snrs: Vec<f64>,
    pub embedding: Embedding,
    /// Samples per edge for edge averaging.
    pub samples: usize,
    pub variants: Vec<Variant>,
    pub fields: Vec<TestField>,
    pub shrinkage: ShrinkageConfig,
    pub seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            n: 100,
            graphs: 50,
            replications: 100,
            snrs: vec![3.0, 5.0, 7.0],
            embedding: Embedding::Pointwise,
            samples: 100,
            variants: Variant::all(),
            fields: TestField::builtin(),
            shrinkage: ShrinkageConfig::default(),
            seed: 1,
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.graphs == 0 || self.replications == 0 || self.n < 4 {
            return Err(Error::InvalidConfig("graphs and replications must be positive and n at least 4".into()));
        }
        if self.snrs.is_empty() || self.snrs.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidConfig("SNR values must be positive".into()));
        }
        if self.variants.is_empty() || self.fields.is_empty() {
            return Err(Error::InvalidConfig("at least one variant and one field are required".into()));
        }
        if self.embedding == Embedding::EdgeAverage && self.samples < 2 {
            return Err(Error::InvalidConfig("edge averaging needs at least 2 samples".into()));
        }
        Ok(())
    }

    fn embed(&self, field: &TestField, graph: &Graph<f64>) -> Result<Vec<f64>> {
        match self.embedding {
            Embedding::Pointwise => embed_pointwise(field, graph),
            Embedding::EdgeAverage => embed_edge_average(field, graph, self.samples),
        }
    }
}

/// Metrics for one (variant, field, SNR) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub variant: String,
    pub field: String,
    pub snr: f64,
    pub embedding: Embedding,
    pub metrics: MetricsReport,
    /// Mean squared error of each run, graph-major.
    pub run_mse: Vec<f64>,
    /// Noise variance of the observations, `1/SNR²`.
    pub noise_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ReportRow>,
}

impl ExperimentReport {
    pub fn row(&self, variant: &str, field: &str, snr: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.variant == variant && r.field == field && r.snr == snr)
    }

    /// One line per (variant, field, SNR, metric).
    pub fn to_long_csv(&self) -> String {
        let mut out = String::from("variant,function,snr,embedding,metric,value\n");
        for r in &self.rows {
            for (name, v) in
                [("amse", r.metrics.amse), ("var", r.metrics.variance), ("bias2", r.metrics.bias2), ("mse_sd", r.metrics.mse_sd)]
            {
                let _ = writeln!(out, "{},{},{},{},{name},{v:.17e}", r.variant, r.field, r.snr, r.embedding.name());
            }
        }
        out
    }

    /// Variants down, functions across, one block per SNR.
    pub fn to_table_csv(&self, metric: &str) -> Result<String> {
        let pick = |r: &ReportRow| match metric {
            "amse" => Ok(r.metrics.amse),
            "var" => Ok(r.metrics.variance),
            "bias2" => Ok(r.metrics.bias2),
            other => Err(Error::InvalidConfig(format!("unknown metric '{other}' (expected amse, var or bias2)"))),
        };
        let mut fields: Vec<&str> = Vec::new();
        let mut variants: Vec<&str> = Vec::new();
        let mut snrs: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !fields.contains(&r.field.as_str()) {
                fields.push(&r.field);
            }
            if !variants.contains(&r.variant.as_str()) {
                variants.push(&r.variant);
            }
            if !snrs.contains(&r.snr) {
                snrs.push(r.snr);
            }
        }
        let mut out = format!("snr,variant,{}\n", fields.join(","));
        for &snr in &snrs {
            for &v in &variants {
                let _ = write!(out, "{snr},{v}");
                for &f in &fields {
                    match self.row(v, f, snr) {
                        Some(r) => {
                            let _ = write!(out, ",{:.6}", pick(r)?);
                        }
                        None => out.push(','),
                    }
                }
                out.push('\n');
            }
        }
        Ok(out)
    }
}

/// Runs the full grid and summarizes each (variant, field, SNR) cell.
///
/// Graph `q` comes from the graph substream at index `q`; the noise of
/// replication `r` depends only on `(q, field, snr, r)`, so every variant sees
/// the same noisy data.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let graphs: Vec<Graph<f64>> =
        (0..config.graphs).map(|q| sample_network(config.n, config.seed, q as u64)).collect::<Result<_>>()?;
    let line_graphs = graphs.iter().map(build_line_graph).collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    for (fi, field) in config.fields.iter().enumerate() {
        let raw: Vec<Vec<f64>> = graphs.iter().map(|g| config.embed(field, g)).collect::<Result<_>>()?;
        for (si, &snr) in config.snrs.iter().enumerate() {
            // [q][r] -> (truth, noisy)
            let cells: Vec<(usize, usize)> =
                (0..config.graphs).flat_map(|q| (0..config.replications).map(move |r| (q, r))).collect();
            let signals = cells
                .par_iter()
                .map(|&(q, r)| add_noise(&raw[q], snr, config.seed, &[q as u64, fi as u64, si as u64, r as u64]))
                .collect::<Result<Vec<_>>>()?;
            let truths: Vec<Vec<f64>> =
                (0..config.graphs).map(|q| signals[q * config.replications].truth.clone()).collect();
            for variant in &config.variants {
                let estimates = cells
                    .par_iter()
                    .zip(&signals)
                    .map(|(&(q, _), s)| {
                        let lift = LiftingConfig::new(*variant)
                            .with_seed(derive_seed(config.seed, Stream::TieBreak, &[q as u64]));
                        denoise(&s.noisy, &line_graphs[q], &lift, &config.shrinkage).map(|d| d.estimates)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let grid: Vec<Vec<Vec<f64>>> =
                    estimates.chunks(config.replications).map(|c| c.to_vec()).collect();
                let metrics = compute_metrics(&grid, &truths)?;
                let run_mse = cells
                    .iter()
                    .zip(&estimates)
                    .map(|(&(q, _), e)| {
                        e.iter().zip(&truths[q]).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / e.len() as f64
                    })
                    .collect();
                rows.push(ReportRow {
                    variant: variant.acronym(),
                    field: field.name().to_string(),
                    snr,
                    embedding: config.embedding,
                    metrics,
                    run_mse,
                    noise_variance: 1.0 / (snr * snr),
                });
            }
        }
    }
    Ok(ExperimentReport { rows })
}
