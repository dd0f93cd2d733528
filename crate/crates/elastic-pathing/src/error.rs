use thiserror::Error;

use crate::map::NodeId;

/// Errors produced by graph construction, trace handling and the pathing engine.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed OSM XML at line {line}, column {col}: {message}")]
    OsmParse {
        line: u32,
        col: u32,
        message: String,
    },

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("unknown way id {0}")]
    UnknownWay(i64),

    #[error("no graph node within {max_m} m of ({lat}, {lon})")]
    NoNearbyNode { lat: f64, lon: f64, max_m: f64 },

    #[error("timestamps not strictly increasing at sample {index}")]
    NonMonotonicTimestamps { index: usize },

    #[error("trace too short: {got} samples, need at least {need}")]
    TraceTooShort { got: usize, need: usize },

    #[error("zero variance in {0}, correlation undefined")]
    ZeroVariance(&'static str),

    #[error("calculated distance must be positive, got {0}")]
    NonPositiveCalcDist(f64),

    #[error("route nodes {from} -> {to} are not adjacent in the graph")]
    RouteNotConnected { from: NodeId, to: NodeId },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid {what}: {value}")]
    InvalidValue { what: &'static str, value: String },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
