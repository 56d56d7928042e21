//! Lifting one coefficient at a time on a line graph.
//!
//! The forward transform repeatedly removes the live vertex with the smallest
//! integral, predicts its value from its neighbours, updates the neighbours'
//! integrals and scaling coefficients, and relinks the neighbourhood so the
//! remaining structure stays connected. Every stage is archived in a
//! [`LiftingRecord`], which is all [`inverse`] needs.

mod config;
mod engine;
mod inverse;
mod levels;

pub use config::{IntegralScheme, LiftingConfig, PredictionScheme, Variant};
pub use engine::{
    forward, forward_from_integrals, forward_with_trajectory, init_integrals, predict_weights,
    LiftingState, SplitRule,
};
pub use inverse::inverse;
pub use levels::{assign_artificial_levels, default_level_count};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Relative tolerance under which two integrals count as tied in the split.
pub const TIE_TOLERANCE: f64 = 1e-10;

/// One archived split/predict/update/relink stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingStage<T> {
    /// Number of live vertices before this stage (`m` for the first).
    pub stage: usize,
    pub removed: usize,
    /// Neighbours of the removed vertex, ascending.
    pub neighbors: Vec<usize>,
    /// Prediction filter, aligned with `neighbors`.
    pub prediction: Vec<T>,
    /// Update filter, aligned with `neighbors`.
    pub update: Vec<T>,
    /// Integral of the removed vertex at removal; the scale of its detail.
    pub integral: T,
    /// Edges that already joined pairs of neighbours.
    pub neighbor_links: Vec<(usize, usize)>,
    /// Edges inserted by the relink step.
    pub added_edges: Vec<(usize, usize)>,
}

impl<T: Scalar> LiftingStage<T> {
    /// Edges deleted together with the removed vertex.
    pub fn removed_edges(&self) -> Vec<(usize, usize)> {
        self.neighbors
            .iter()
            .map(|&s| (self.removed.min(s), self.removed.max(s)))
            .collect()
    }
}

/// Everything needed to invert a forward transform or replay it on new data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftingRecord<T> {
    pub m: usize,
    pub config: LiftingConfig,
    pub stages: Vec<LiftingStage<T>>,
    pub initial_integrals: Vec<T>,
    pub final_integrals: Vec<T>,
    /// Surviving scaling ids, ascending.
    pub survivors: Vec<usize>,
}

impl<T: Scalar> LiftingRecord<T> {
    pub fn removal_order(&self) -> Vec<usize> {
        self.stages.iter().map(|s| s.removed).collect()
    }

    pub fn scales(&self) -> Vec<T> {
        self.stages.iter().map(|s| s.integral).collect()
    }

    /// Applies the recorded linear transform to another signal.
    ///
    /// Filters depend only on the graph and removal order, so this equals a
    /// fresh forward pass along the same trajectory.
    pub fn transform(&self, values: &[T]) -> Result<CoefficientSet<T>> {
        if values.len() != self.m {
            return Err(Error::RecordMismatch(format!(
                "{} values for a record over {} vertices",
                values.len(),
                self.m
            )));
        }
        let mut c = values.to_vec();
        let mut details = Vec::with_capacity(self.stages.len());
        for st in &self.stages {
            let pred: T = st.neighbors.iter().zip(&st.prediction).map(|(&s, &a)| a * c[s]).sum();
            let d = c[st.removed] - pred;
            for (&s, &b) in st.neighbors.iter().zip(&st.update) {
                c[s] += b * d;
            }
            details.push(d);
        }
        Ok(CoefficientSet {
            detail_ids: self.removal_order(),
            details,
            scales: self.scales(),
            scaling_ids: self.survivors.clone(),
            scaling: self.survivors.iter().map(|&s| c[s]).collect(),
            levels: None,
        })
    }

    /// Fraction of update-filter entries inside `(0, 1/2]`.
    pub fn fraction_update_le_half(&self) -> f64 {
        let (mut hit, mut total) = (0usize, 0usize);
        for b in self.stages.iter().flat_map(|s| &s.update) {
            total += 1;
            if *b <= T::lit(0.5) {
                hit += 1;
            }
        }
        if total == 0 {
            1.0
        } else {
            hit as f64 / total as f64
        }
    }
}

/// Detail and scaling coefficients of one forward transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientSet<T> {
    /// Removed ids in removal order.
    pub detail_ids: Vec<usize>,
    pub details: Vec<T>,
    /// Scale (integral at removal) of each detail.
    pub scales: Vec<T>,
    /// Surviving ids, ascending.
    pub scaling_ids: Vec<usize>,
    pub scaling: Vec<T>,
    /// Artificial level of each detail, `0` = finest.
    pub levels: Option<Vec<usize>>,
}

impl<T: Scalar> CoefficientSet<T> {
    pub fn m(&self) -> usize {
        self.detail_ids.len() + self.scaling_ids.len()
    }

    /// Coefficients laid out by vertex id.
    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.m()];
        for (&k, &d) in self.detail_ids.iter().zip(&self.details) {
            out[k] = d;
        }
        for (&k, &c) in self.scaling_ids.iter().zip(&self.scaling) {
            out[k] = c;
        }
        out
    }

    /// Coefficients in matrix order: details by removal, then scaling ids.
    pub fn to_ordered(&self) -> Vec<T> {
        self.details.iter().chain(&self.scaling).copied().collect()
    }

    /// Labels every detail with an artificial level.
    pub fn assign_levels(&mut self, level_count: usize) -> Result<()> {
        self.levels = Some(assign_artificial_levels(&self.scales, level_count)?);
        Ok(())
    }
}
