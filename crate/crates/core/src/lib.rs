//! Second-generation wavelets for signals observed on the edges of a network.
//!
//! Edge observations are moved onto the vertices of the line graph, where a
//! lifting transform removes one coefficient at a time. The crate covers the
//! transform and its exact inverse ([`lifting`]), matrix diagnostics
//! ([`analysis`]), empirical-Bayes denoising ([`shrinkage`]), the simulation
//! protocol ([`simulation`]) and text/JSON file formats ([`io`]).
//!
//! Core types are generic over the scalar type; the `*64` aliases below pin
//! them to `f64`, which is what the simulation and I/O layers use.

pub mod analysis;
pub mod error;
pub mod graph;
pub mod io;
pub mod lifting;
pub mod mst;
pub mod rng;
pub mod scalar;
pub mod shrinkage;
pub mod simulation;

pub use error::{Error, Result};
pub use graph::{build_line_graph, is_connected, Graph, LineGraph, MetricMode, MetricProvider};
pub use lifting::{
    forward, forward_with_trajectory, inverse, CoefficientSet, IntegralScheme, LiftingConfig,
    LiftingRecord, LiftingStage, PredictionScheme, Variant,
};
pub use scalar::Scalar;

pub type Graph64 = Graph<f64>;
pub type LineGraph64 = LineGraph<f64>;
pub type CoefficientSet64 = CoefficientSet<f64>;
pub type LiftingRecord64 = LiftingRecord<f64>;
pub type Graph32 = Graph<f32>;
pub type LineGraph32 = LineGraph<f32>;
