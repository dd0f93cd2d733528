//! Reconstruct a vehicle's route and destination from nothing but a
//! starting coordinate and a timestamped speed trace.
//!
//! The trace is fitted elastically onto an OpenStreetMap-derived road
//! graph: integrated distance is matched against road geometry, stops
//! are matched to intersections, turns to speeds slow enough to make
//! them, and every stretch or compression needed to reconcile the two
//! is charged to a candidate's error. A best-first search expands the
//! cheapest candidate until no unexplored one could beat the best
//! complete path by the configured margin.
//!
//! The crate is organized by pipeline stage:
//!
//! - [`map`]: OSM XML parsing, the immutable road graph, turn geometry
//!   and path counting.
//! - [`trace`]: speed/GPS ingestion, trip splitting and behavior
//!   features.
//! - [`kinematics`]: safe turn radius and turn feasibility.
//! - [`pathing`]: the elastic pathing search itself.
//! - [`routing`]: optional rerank of top candidates against shortest
//!   routes.
//! - [`eval`]: synthetic ground truth, the naive baseline, accuracy
//!   histograms, batch drivers and GeoJSON export.
//!
//! The `examples/` directory holds one runnable program per major
//! capability; start with `grid_recovery`.

pub mod error;
pub mod eval;
pub mod geo;
pub mod kinematics;
pub mod map;
pub mod pathing;
pub mod routing;
pub mod trace;
pub mod units;

pub use error::{Error, Result};
