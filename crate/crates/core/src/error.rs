use thiserror::Error;

/// Everything that can go wrong in the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("graph too small: {edges} edges, need at least 3")]
    GraphTooSmall { edges: usize },
    #[error("source graph disconnected")]
    SourceDisconnected,
    #[error("line graph disconnected")]
    LineGraphDisconnected,
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("metric inputs unavailable: {0}")]
    MetricUnavailable(String),
    #[error("vertices {0} and {1} are disconnected in metric")]
    DisconnectedInMetric(usize, usize),
    #[error("degenerate line graph: vertex {0} has no neighbours")]
    DegenerateLineGraph(usize),
    #[error("degenerate distance: {0}")]
    DegenerateDistance(String),
    #[error("isolated vertex {vertex} at stage {stage}")]
    IsolatedVertex { vertex: usize, stage: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid trajectory: {0}")]
    InvalidTrajectory(String),
    #[error("coefficients do not match lifting record: {0}")]
    RecordMismatch(String),
    #[error("unknown variant `{0}`; expected one of: {1}")]
    UnknownVariant(String, String),
    #[error("transform not invertible")]
    NotInvertible,
    #[error("insufficient coefficients: {0}")]
    InsufficientCoefficients(String),
    #[error("cannot normalize: {0}")]
    CannotNormalize(String),
    #[error("incomplete result grid: {0}")]
    IncompleteGrid(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("serialization error: {0}")]
    Serde(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable category, used for CLI exit reporting.
    pub fn category(&self) -> &'static str {
        match self {
            Error::GraphTooSmall { .. }
            | Error::SourceDisconnected
            | Error::LineGraphDisconnected
            | Error::InvalidGraph(_) => "graph",
            Error::MetricUnavailable(_)
            | Error::DisconnectedInMetric(..)
            | Error::DegenerateDistance(_)
            | Error::DegenerateLineGraph(_) => "metric",
            Error::IsolatedVertex { .. } | Error::NotInvertible | Error::RecordMismatch(_) => {
                "transform"
            }
            Error::InvalidConfig(_)
            | Error::InvalidTrajectory(_)
            | Error::UnknownVariant(..) => "config",
            Error::InsufficientCoefficients(_)
            | Error::CannotNormalize(_)
            | Error::IncompleteGrid(_)
            | Error::EmptyInput(_) => "data",
            Error::Parse { .. } | Error::Serde(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
