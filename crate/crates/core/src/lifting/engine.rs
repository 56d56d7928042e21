use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{
    CoefficientSet, IntegralScheme, LiftingConfig, LiftingRecord, LiftingStage, PredictionScheme,
    TIE_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::graph::{is_connected, shortest_paths, LineGraph, MetricMode, MetricProvider};
use crate::mst::{minimum_spanning_tree, WeightedEdge};
use crate::rng::{substream, Stream};
use crate::scalar::Scalar;

/// Initial integral of every vertex under `scheme`.
pub fn init_integrals<T: Scalar>(metric: &MetricProvider<'_, T>, scheme: IntegralScheme) -> Result<Vec<T>> {
    let lg = metric.line_graph();
    (0..lg.m())
        .map(|k| {
            let nb = lg.neighbors(k);
            if nb.is_empty() {
                return Err(Error::DegenerateLineGraph(k));
            }
            let total: T = nb.iter().map(|&s| metric.edge_length(k, s)).sum();
            Ok(match scheme {
                IntegralScheme::Sum => total,
                IntegralScheme::Average => total / T::from_usize(2 * nb.len()).expect("small count"),
                IntegralScheme::Delta => T::one(),
            })
        })
        .collect()
}

/// Prediction filter for a vertex whose neighbours lie at `distances`.
pub fn predict_weights<T: Scalar>(distances: &[T], scheme: PredictionScheme) -> Result<Vec<T>> {
    if distances.is_empty() {
        return Err(Error::DegenerateLineGraph(usize::MAX));
    }
    match scheme {
        PredictionScheme::MovingAverage => {
            let w = T::one() / T::from_usize(distances.len()).expect("small count");
            Ok(vec![w; distances.len()])
        }
        PredictionScheme::InverseDistance => {
            if let Some(d) = distances.iter().find(|d| !(**d > T::zero() && d.is_finite())) {
                return Err(Error::DegenerateDistance(format!("neighbour distance {d}")));
            }
            let inv: Vec<T> = distances.iter().map(|&d| d.recip()).collect();
            let total: T = inv.iter().copied().sum();
            Ok(inv.into_iter().map(|x| x / total).collect())
        }
    }
}

/// How the vertex to remove is chosen at each stage.
#[derive(Debug, Clone)]
pub enum SplitRule<'t> {
    /// Smallest live integral; ties broken by the seeded generator.
    MinIntegral,
    /// Fixed removal order.
    Trajectory(&'t [usize]),
}

/// Mutable state of a transform in progress.
#[derive(Debug, Clone)]
pub struct LiftingState<'a, T> {
    metric: MetricProvider<'a, T>,
    config: LiftingConfig,
    coeffs: Vec<T>,
    integrals: Vec<T>,
    initial_integrals: Vec<T>,
    active: Vec<bool>,
    live: usize,
    adjacency: Vec<BTreeMap<usize, T>>,
    stages: Vec<LiftingStage<T>>,
    details: Vec<T>,
}

impl<'a, T: Scalar> LiftingState<'a, T> {
    /// Starts a transform with the configured initial integrals.
    pub fn new(values: &[T], lg: &'a LineGraph<T>, config: LiftingConfig) -> Result<Self> {
        let metric = MetricProvider::new(lg, config.metric)?;
        let integrals = init_integrals(&metric, config.integral)?;
        Self::with_integrals(values, metric, config, integrals)
    }

    /// Starts a transform from caller-supplied initial integrals.
    pub fn with_integrals(
        values: &[T],
        metric: MetricProvider<'a, T>,
        config: LiftingConfig,
        integrals: Vec<T>,
    ) -> Result<Self> {
        let lg = metric.line_graph();
        let m = lg.m();
        config.validate(m)?;
        if values.len() != m {
            return Err(Error::InvalidConfig(format!("{} values for {m} line-graph vertices", values.len())));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidConfig(format!("non-finite input value {v}")));
        }
        if integrals.len() != m || integrals.iter().any(|i| !(*i > T::zero() && i.is_finite())) {
            return Err(Error::InvalidConfig("initial integrals must be positive, one per vertex".into()));
        }
        if !lg.is_connected() {
            return Err(Error::LineGraphDisconnected);
        }
        let adjacency = metric.weighted_adjacency();
        Ok(Self {
            metric,
            config,
            coeffs: values.to_vec(),
            initial_integrals: integrals.clone(),
            integrals,
            active: vec![true; m],
            live: m,
            adjacency,
            stages: Vec::new(),
            details: Vec::new(),
        })
    }

    pub fn live_count(&self) -> usize {
        self.live
    }

    pub fn is_live(&self, k: usize) -> bool {
        self.active.get(k).copied().unwrap_or(false)
    }

    pub fn integrals(&self) -> &[T] {
        &self.integrals
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coeffs
    }

    /// Current neighbours of `k` with their distances.
    pub fn neighbors(&self, k: usize) -> &BTreeMap<usize, T> {
        &self.adjacency[k]
    }

    pub fn is_finished(&self) -> bool {
        self.live <= self.config.stopping_time
    }

    /// Live ids whose integral is within the tie tolerance of the minimum.
    pub fn minimum_set(&self) -> Vec<usize> {
        let min = (0..self.integrals.len())
            .filter(|&k| self.active[k])
            .map(|k| self.integrals[k])
            .fold(T::infinity(), T::min);
        let bound = min * (T::one() + T::lit(TIE_TOLERANCE));
        (0..self.integrals.len())
            .filter(|&k| self.active[k] && self.integrals[k] <= bound)
            .collect()
    }

    fn select_min(&self, rng: &mut ChaCha8Rng) -> usize {
        let ties = self.minimum_set();
        if ties.len() == 1 {
            ties[0]
        } else {
            ties[rng.random_range(0..ties.len())]
        }
    }

    /// Removes `k`: predict, update, relink. Returns the detail coefficient.
    pub fn lift_stage(&mut self, k: usize) -> Result<T> {
        if !self.is_live(k) {
            return Err(Error::InvalidTrajectory(format!("vertex {k} is not live")));
        }
        let stage = self.live;
        if self.adjacency[k].is_empty() {
            return Err(Error::IsolatedVertex { vertex: k, stage });
        }
        let (neighbors, distances): (Vec<usize>, Vec<T>) =
            self.adjacency[k].iter().map(|(&s, &d)| (s, d)).unzip();
        let prediction = predict_weights(&distances, self.config.prediction)?;

        let estimate: T = neighbors.iter().zip(&prediction).map(|(&s, &a)| a * self.coeffs[s]).sum();
        let detail = self.coeffs[k] - estimate;

        let removed_integral = self.integrals[k];
        for (&s, &a) in neighbors.iter().zip(&prediction) {
            self.integrals[s] += a * removed_integral;
        }
        let norm: T = neighbors.iter().map(|&s| self.integrals[s] * self.integrals[s]).sum();
        debug_assert!(norm > T::zero());
        let update: Vec<T> = neighbors
            .iter()
            .map(|&s| self.integrals[s] * removed_integral / norm)
            .collect();
        for (&s, &b) in neighbors.iter().zip(&update) {
            self.coeffs[s] += b * detail;
        }

        let (neighbor_links, added_edges) = self.relink(k, &neighbors)?;

        self.active[k] = false;
        self.live -= 1;
        self.details.push(detail);
        self.stages.push(LiftingStage {
            stage,
            removed: k,
            neighbors,
            prediction,
            update,
            integral: removed_integral,
            neighbor_links,
            added_edges,
        });
        Ok(detail)
    }

    /// Drops `k` and its edges; reconnects its neighbourhood with a minimum
    /// spanning tree when the surviving links among neighbours do not.
    fn relink(&mut self, k: usize, neighbors: &[usize]) -> Result<(Vec<(usize, usize)>, Vec<(usize, usize)>)> {
        let mut links = Vec::new();
        for (i, &a) in neighbors.iter().enumerate() {
            for &b in &neighbors[i + 1..] {
                if self.adjacency[a].contains_key(&b) {
                    links.push((a, b));
                }
            }
        }
        let mut added = Vec::new();
        if !is_connected(neighbors, &links) {
            let pairwise = self.neighbor_distances(neighbors)?;
            let candidates: Vec<WeightedEdge<T>> = pairwise
                .iter()
                .map(|&((i, j), d)| WeightedEdge::new(i, j, d))
                .collect();
            let tree = minimum_spanning_tree(neighbors.len(), &candidates)?;
            let mut new_edges = BTreeMap::new();
            for e in tree {
                let (a, b) = (neighbors[e.u], neighbors[e.v]);
                if !self.adjacency[a].contains_key(&b) {
                    new_edges.insert((a.min(b), a.max(b)), e.weight);
                }
            }
            for ((a, b), d) in new_edges {
                self.adjacency[a].insert(b, d);
                self.adjacency[b].insert(a, d);
                added.push((a, b));
            }
        }
        for &s in neighbors {
            self.adjacency[s].remove(&k);
        }
        self.adjacency[k].clear();
        Ok((links, added))
    }

    /// Pairwise distances among `neighbors` (local indices), measured in the
    /// structure that still contains the vertex being removed.
    fn neighbor_distances(&self, neighbors: &[usize]) -> Result<Vec<((usize, usize), T)>> {
        let mut out = Vec::with_capacity(neighbors.len() * (neighbors.len() - 1) / 2);
        match self.metric.mode() {
            MetricMode::Coordinate => {
                for i in 0..neighbors.len() {
                    for j in (i + 1)..neighbors.len() {
                        out.push(((i, j), self.metric.euclidean(neighbors[i], neighbors[j])));
                    }
                }
            }
            MetricMode::PathLength => {
                for i in 0..neighbors.len() {
                    let targets = &neighbors[i + 1..];
                    let found = shortest_paths(&self.adjacency, neighbors[i], targets);
                    for (off, d) in found.into_iter().enumerate() {
                        let j = i + 1 + off;
                        let d = d.ok_or(Error::DisconnectedInMetric(neighbors[i], neighbors[j]))?;
                        out.push(((i, j), d));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Runs stages until only the stopping-time number of vertices remain.
    pub fn run(&mut self, split: SplitRule<'_>) -> Result<()> {
        let removals = self.live - self.config.stopping_time;
        match split {
            SplitRule::MinIntegral => {
                let mut rng = substream(self.config.seed, Stream::TieBreak, &[]);
                while !self.is_finished() {
                    let k = self.select_min(&mut rng);
                    self.lift_stage(k)?;
                }
            }
            SplitRule::Trajectory(order) => {
                validate_trajectory(order, self.active.len(), removals)?;
                for &k in &order[..removals] {
                    self.lift_stage(k)?;
                }
            }
        }
        Ok(())
    }

    /// Packs the state into coefficients and a record. Meant for a finished
    /// run; before that the record covers only the stages done so far.
    pub fn finish_partial(self) -> (CoefficientSet<T>, LiftingRecord<T>) {
        self.finish()
    }

    /// Packs the finished state into coefficients and a record.
    pub fn finish(self) -> (CoefficientSet<T>, LiftingRecord<T>) {
        let survivors: Vec<usize> = (0..self.active.len()).filter(|&k| self.active[k]).collect();
        let coeffs = CoefficientSet {
            detail_ids: self.stages.iter().map(|s| s.removed).collect(),
            details: self.details,
            scales: self.stages.iter().map(|s| s.integral).collect(),
            scaling_ids: survivors.clone(),
            scaling: survivors.iter().map(|&s| self.coeffs[s]).collect(),
            levels: None,
        };
        let record = LiftingRecord {
            m: self.active.len(),
            config: self.config,
            stages: self.stages,
            initial_integrals: self.initial_integrals,
            final_integrals: self.integrals,
            survivors,
        };
        (coeffs, record)
    }
}

fn validate_trajectory(order: &[usize], m: usize, removals: usize) -> Result<()> {
    if order.len() < removals || order.len() > m {
        return Err(Error::InvalidTrajectory(format!(
            "length {} outside [{removals}, {m}]",
            order.len()
        )));
    }
    let mut seen = vec![false; m];
    for &k in order {
        if k >= m {
            return Err(Error::InvalidTrajectory(format!("id {k} out of range")));
        }
        if std::mem::replace(&mut seen[k], true) {
            return Err(Error::InvalidTrajectory(format!("id {k} repeated")));
        }
    }
    Ok(())
}

/// Forward transform with the minimum-integral split.
pub fn forward<T: Scalar>(
    values: &[T],
    lg: &LineGraph<T>,
    config: &LiftingConfig,
) -> Result<(CoefficientSet<T>, LiftingRecord<T>)> {
    let mut state = LiftingState::new(values, lg, *config)?;
    state.run(SplitRule::MinIntegral)?;
    Ok(state.finish())
}

/// Forward transform removing vertices in the order given by `trajectory`.
///
/// Only the first `m - stopping_time` entries are used; the list may be a
/// full permutation.
pub fn forward_with_trajectory<T: Scalar>(
    values: &[T],
    lg: &LineGraph<T>,
    config: &LiftingConfig,
    trajectory: &[usize],
) -> Result<(CoefficientSet<T>, LiftingRecord<T>)> {
    let mut state = LiftingState::new(values, lg, *config)?;
    state.run(SplitRule::Trajectory(trajectory))?;
    Ok(state.finish())
}

/// Forward transform from explicit initial integrals.
pub fn forward_from_integrals<T: Scalar>(
    values: &[T],
    lg: &LineGraph<T>,
    config: &LiftingConfig,
    integrals: Vec<T>,
    split: SplitRule<'_>,
) -> Result<(CoefficientSet<T>, LiftingRecord<T>)> {
    let metric = MetricProvider::new(lg, config.metric)?;
    let mut state = LiftingState::with_integrals(values, metric, *config, integrals)?;
    state.run(split)?;
    Ok(state.finish())
}
