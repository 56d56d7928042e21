use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::MetricMode;

/// Initial integral of each line-graph vertex.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum IntegralScheme {
    /// Sum of distances to the neighbours.
    Sum,
    /// Half the mean distance to the neighbours.
    Average,
    /// All ones.
    Delta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PredictionScheme {
    /// Normalised inverse distances.
    InverseDistance,
    /// Equal weights.
    MovingAverage,
}

/// One of the twelve named transform variants, e.g. `LG-Aid-c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variant {
    pub integral: IntegralScheme,
    pub prediction: PredictionScheme,
    pub metric: MetricMode,
}

impl Variant {
    pub const fn new(integral: IntegralScheme, prediction: PredictionScheme, metric: MetricMode) -> Self {
        Self { integral, prediction, metric }
    }

    /// All variants, coordinate ones first.
    pub fn all() -> Vec<Variant> {
        let mut out = Vec::with_capacity(12);
        for metric in [MetricMode::Coordinate, MetricMode::PathLength] {
            for prediction in [PredictionScheme::InverseDistance, PredictionScheme::MovingAverage] {
                for integral in [IntegralScheme::Sum, IntegralScheme::Average, IntegralScheme::Delta] {
                    out.push(Variant::new(integral, prediction, metric));
                }
            }
        }
        out
    }

    pub fn acronym(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let i = match self.integral {
            IntegralScheme::Sum => "S",
            IntegralScheme::Average => "A",
            IntegralScheme::Delta => "D",
        };
        let p = match self.prediction {
            PredictionScheme::InverseDistance => "id",
            PredictionScheme::MovingAverage => "nw",
        };
        let m = match self.metric {
            MetricMode::Coordinate => "c",
            MetricMode::PathLength => "p",
        };
        write!(f, "LG-{i}{p}-{m}")
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::all()
            .into_iter()
            .find(|v| v.to_string() == s)
            .ok_or_else(|| {
                let names: Vec<String> = Variant::all().iter().map(|v| v.to_string()).collect();
                Error::UnknownVariant(s.to_string(), names.join(", "))
            })
    }
}

/// Parameters of one forward transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftingConfig {
    pub integral: IntegralScheme,
    pub prediction: PredictionScheme,
    pub metric: MetricMode,
    /// Number of scaling coefficients left when lifting stops.
    pub stopping_time: usize,
    /// Seed for breaking ties between equal minimum integrals.
    pub seed: u64,
}

impl LiftingConfig {
    pub fn new(variant: Variant) -> Self {
        Self {
            integral: variant.integral,
            prediction: variant.prediction,
            metric: variant.metric,
            stopping_time: 2,
            seed: 0,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_stopping_time(mut self, tau: usize) -> Self {
        self.stopping_time = tau;
        self
    }

    pub fn variant(&self) -> Variant {
        Variant::new(self.integral, self.prediction, self.metric)
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.stopping_time < 2 {
            return Err(Error::InvalidConfig(format!(
                "stopping time {} must be at least 2",
                self.stopping_time
            )));
        }
        if self.stopping_time >= m {
            return Err(Error::InvalidConfig(format!(
                "stopping time {} must be below the {m} line-graph vertices",
                self.stopping_time
            )));
        }
        Ok(())
    }
}

impl Default for LiftingConfig {
    fn default() -> Self {
        Self::new(Variant::new(IntegralScheme::Average, PredictionScheme::InverseDistance, MetricMode::Coordinate))
    }
}
