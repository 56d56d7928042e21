//! Noise estimation, empirical-Bayes thresholding and the denoisers built on
//! the lifting transform.

pub mod quasi_cauchy;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::detail_row_norms;
use crate::error::{Error, Result};
use crate::graph::LineGraph;
use crate::lifting::{
    assign_artificial_levels, default_level_count, forward, forward_with_trajectory, inverse, CoefficientSet,
    LiftingConfig, LiftingRecord,
};
use crate::rng::{substream, Stream};

/// Consistency constant of the MAD for Gaussian data.
pub const MAD_CONSTANT: f64 = 0.6745;

/// How a standardized detail is shrunk once the mixing weight is known.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    #[default]
    PosteriorMedian,
    /// Keep-or-kill at the posterior-median threshold.
    Hard,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShrinkageConfig {
    /// Coarsest artificial levels left untouched.
    pub keep_coarsest: usize,
    /// Number of artificial levels; `None` picks `max(3, ⌊log₂ m⌋)`.
    pub levels: Option<usize>,
    pub rule: ThresholdRule,
    /// Divide each detail by the norm of its dual wavelet before estimating
    /// the noise and thresholding, so white noise gives unit-variance details.
    pub normalize: bool,
    /// Known noise standard deviation; `None` estimates it by MAD.
    pub noise_sd: Option<f64>,
}

impl Default for ShrinkageConfig {
    fn default() -> Self {
        Self { keep_coarsest: 2, levels: None, rule: ThresholdRule::PosteriorMedian, normalize: true, noise_sd: None }
    }
}

impl ShrinkageConfig {
    fn level_count(&self, m: usize) -> usize {
        self.levels.unwrap_or_else(|| default_level_count(m))
    }

    pub fn validate(&self, level_count: usize) -> Result<()> {
        if self.keep_coarsest >= level_count {
            return Err(Error::InvalidConfig(format!(
                "keep_coarsest = {} must be below the level count {level_count}",
                self.keep_coarsest
            )));
        }
        Ok(())
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.partial_cmp(b).expect("finite values"));
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Median absolute deviation of the finest-level (level 0) details over 0.6745.
pub fn estimate_sigma_mad(details: &[f64], levels: &[usize]) -> Result<f64> {
    let mut finest: Vec<f64> = details.iter().zip(levels).filter(|(_, &l)| l == 0).map(|(&d, _)| d).collect();
    if finest.len() < 3 {
        return Err(Error::InsufficientCoefficients(format!(
            "the finest level holds {} details; at least 3 are needed",
            finest.len()
        )));
    }
    if finest.iter().any(|d| !d.is_finite()) {
        return Err(Error::InsufficientCoefficients("non-finite finest-level detail".into()));
    }
    let centre = median(&mut finest);
    let mut dev: Vec<f64> = finest.iter().map(|d| (d - centre).abs()).collect();
    let sigma = median(&mut dev) / MAD_CONSTANT;
    if !(sigma > 0.0) {
        return Err(Error::InsufficientCoefficients("finest-level details have zero spread".into()));
    }
    Ok(sigma)
}

/// Outcome of thresholding one set of details.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Thresholded {
    pub details: Vec<f64>,
    /// Fitted mixing weight ν̂.
    pub weight: f64,
    /// Whether the weight fit failed and 0.5 was used.
    pub fallback: bool,
}

/// Empirical-Bayes shrinkage of the details outside the `keep_coarsest`
/// coarsest levels.
///
/// Thresholded details are standardized by `sigma`, ν̂ is fit once over all of
/// them, each is replaced by its posterior median (or hard-thresholded), and
/// the result is rescaled.
pub fn ebayes_threshold(
    details: &[f64],
    sigma: f64,
    levels: &[usize],
    level_count: usize,
    config: &ShrinkageConfig,
) -> Result<Thresholded> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig(format!("noise level must be positive, got {sigma}")));
    }
    if details.len() != levels.len() {
        return Err(Error::InvalidConfig("one level label per detail is required".into()));
    }
    config.validate(level_count)?;
    let cutoff = level_count - config.keep_coarsest;
    let active: Vec<usize> = (0..details.len()).filter(|&i| levels[i] < cutoff).collect();
    let z: Vec<f64> = active.iter().map(|&i| details[i] / sigma).collect();
    let mut out = details.to_vec();
    if z.is_empty() {
        return Ok(Thresholded { details: out, weight: 1.0, fallback: false });
    }
    let (weight, fallback) = match quasi_cauchy::estimate_weight(&z) {
        Some(w) => (w, false),
        None => {
            log::warn!("mixing-weight fit failed on {} coefficients; using 0.5", z.len());
            (0.5, true)
        }
    };
    let threshold = quasi_cauchy::threshold_from_weight(weight);
    for (&i, &zi) in active.iter().zip(&z) {
        let shrunk = match config.rule {
            ThresholdRule::PosteriorMedian => quasi_cauchy::posterior_median(zi, weight),
            ThresholdRule::Hard if zi.abs() > threshold => zi,
            ThresholdRule::Hard => 0.0,
        };
        out[i] = shrunk * sigma;
    }
    Ok(Thresholded { details: out, weight, fallback })
}

/// Result of one denoising pass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenoiseResult {
    /// Estimates by line-graph vertex (edge) index.
    pub estimates: Vec<f64>,
    pub sigma: f64,
    pub weight: f64,
    /// Forward coefficients of the noisy signal, with levels.
    pub coefficients: CoefficientSet<f64>,
    /// Details after shrinkage, in removal order.
    pub shrunk: Vec<f64>,
    /// Dual-wavelet norms used for standardization (all ones when disabled).
    pub dual_norms: Vec<f64>,
    pub level_count: usize,
}

fn denoise_record(
    mut coefficients: CoefficientSet<f64>,
    record: &LiftingRecord<f64>,
    shrink: &ShrinkageConfig,
) -> Result<DenoiseResult> {
    let level_count = shrink.level_count(record.m);
    let levels = assign_artificial_levels(&coefficients.scales, level_count)?;
    coefficients.levels = Some(levels.clone());
    let dual_norms = if shrink.normalize {
        detail_row_norms(record)?
    } else {
        vec![1.0; coefficients.details.len()]
    };
    let standardized: Vec<f64> = coefficients.details.iter().zip(&dual_norms).map(|(d, n)| d / n).collect();
    let sigma = match shrink.noise_sd {
        Some(s) => s,
        None => estimate_sigma_mad(&standardized, &levels)?,
    };
    let th = ebayes_threshold(&standardized, sigma, &levels, level_count, shrink)?;
    let shrunk: Vec<f64> = th.details.iter().zip(&dual_norms).map(|(d, n)| d * n).collect();
    let mut kept = coefficients.clone();
    kept.details.clone_from(&shrunk);
    let estimates = inverse(&kept, record)?;
    Ok(DenoiseResult { estimates, sigma, weight: th.weight, coefficients, shrunk, dual_norms, level_count })
}

/// Forward transform, MAD noise estimate, empirical-Bayes shrinkage, inverse.
pub fn denoise(
    values: &[f64],
    lg: &LineGraph<f64>,
    config: &LiftingConfig,
    shrink: &ShrinkageConfig,
) -> Result<DenoiseResult> {
    let (coeffs, record) = forward(values, lg, config)?;
    denoise_record(coeffs, &record, shrink)
}

/// [`denoise`] along a fixed removal order.
pub fn denoise_with_trajectory(
    values: &[f64],
    lg: &LineGraph<f64>,
    config: &LiftingConfig,
    shrink: &ShrinkageConfig,
    trajectory: &[usize],
) -> Result<DenoiseResult> {
    let (coeffs, record) = forward_with_trajectory(values, lg, config, trajectory)?;
    denoise_record(coeffs, &record, shrink)
}

/// Averaged estimate over several removal orders.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NltResult {
    pub estimates: Vec<f64>,
    pub trajectories: Vec<Vec<usize>>,
    pub runs: Vec<DenoiseResult>,
}

/// Uniform random permutation of `0..m` for trajectory `index`.
pub fn random_trajectory(m: usize, seed: u64, index: u64) -> Vec<usize> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(&mut substream(seed, Stream::Trajectory, &[index]));
    order
}

/// Denoises along each given trajectory and averages the estimates.
pub fn nlt_denoise_with_trajectories(
    values: &[f64],
    lg: &LineGraph<f64>,
    config: &LiftingConfig,
    shrink: &ShrinkageConfig,
    trajectories: Vec<Vec<usize>>,
) -> Result<NltResult> {
    if trajectories.is_empty() {
        return Err(Error::InvalidConfig("at least one trajectory is required".into()));
    }
    let runs: Vec<DenoiseResult> = trajectories
        .par_iter()
        .map(|t| denoise_with_trajectory(values, lg, config, shrink, t))
        .collect::<Result<_>>()?;
    let p = runs.len() as f64;
    let estimates = (0..values.len()).map(|k| runs.iter().map(|r| r.estimates[k]).sum::<f64>() / p).collect();
    Ok(NltResult { estimates, trajectories, runs })
}

/// Nondecimated denoiser over `p` random trajectories drawn from `seed`.
pub fn nlt_denoise(
    values: &[f64],
    lg: &LineGraph<f64>,
    config: &LiftingConfig,
    shrink: &ShrinkageConfig,
    p: usize,
    seed: u64,
) -> Result<NltResult> {
    let trajectories = (0..p as u64).map(|i| random_trajectory(lg.m(), seed, i)).collect();
    nlt_denoise_with_trajectories(values, lg, config, shrink, trajectories)
}
