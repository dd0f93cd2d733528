//! Shared fixtures for integration tests: planar graph construction
//! from meter coordinates and an exhaustive search oracle.

#![allow(dead_code)]

use elastic_pathing::geo::EARTH_RADIUS_M;
use elastic_pathing::map::{HighwayClass, NodeId, RoadGraph, RoadNode, RoadWay, WayId};
use elastic_pathing::pathing::{goto_branch, CandidatePath, PathingConfig};
use elastic_pathing::trace::{SpeedSample, SpeedTrace, TraceSource};

pub const ORIGIN_LAT: f64 = 40.5;
pub const ORIGIN_LON: f64 = -74.45;

const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

/// Place a node `x` meters east and `y` meters north of the origin.
pub fn node_at(id: i64, x: f64, y: f64) -> RoadNode {
    RoadNode {
        id: NodeId(id),
        lat: ORIGIN_LAT + y / M_PER_DEG,
        lon: ORIGIN_LON + x / (M_PER_DEG * (ORIGIN_LAT as f64).to_radians().cos()),
    }
}

pub struct WaySpec {
    pub id: i64,
    pub nodes: Vec<i64>,
    pub class: HighwayClass,
    pub one_way: bool,
    pub lanes: u32,
}

pub fn way(id: i64, nodes: &[i64]) -> WaySpec {
    WaySpec {
        id,
        nodes: nodes.to_vec(),
        class: HighwayClass::Residential,
        one_way: false,
        lanes: 1,
    }
}

pub fn build_graph(nodes: Vec<RoadNode>, ways: Vec<WaySpec>) -> RoadGraph {
    let road_ways = ways
        .into_iter()
        .map(|w| RoadWay {
            id: WayId(w.id),
            node_sequence: w.nodes.into_iter().map(NodeId).collect(),
            max_speed: w.class.default_speed(),
            lanes: w.lanes,
            one_way: w.one_way,
            highway_class: w.class,
        })
        .collect();
    RoadGraph::build(nodes, road_ways)
}

/// 1 Hz trace from a plain speed series.
pub fn trace_of(vs: &[f64]) -> SpeedTrace {
    let samples = vs
        .iter()
        .enumerate()
        .map(|(i, &v)| SpeedSample { t: i as f64, v })
        .collect();
    SpeedTrace::new(samples, TraceSource::Speedometer)
}

/// Exhaustive-search oracle: expand every candidate breadth-first with
/// no error-based prioritization, no termination margin and no
/// eviction, and report the minimum complete error. Panics if the walk
/// space exceeds `max_expansions`, so tests stay desk-sized.
pub fn exhaustive_min_error(
    graph: &RoadGraph,
    start: NodeId,
    trace: &SpeedTrace,
    cfg: &PathingConfig,
    max_expansions: usize,
) -> Option<f64> {
    let mut queue = std::collections::VecDeque::new();
    queue.push_back(CandidatePath::new_at_start(start));
    let mut best: Option<f64> = None;
    let mut expansions = 0usize;
    while let Some(path) = queue.pop_front() {
        expansions += 1;
        assert!(
            expansions <= max_expansions,
            "oracle expansion budget exceeded ({max_expansions})"
        );
        for child in goto_branch(path, trace, graph, cfg) {
            if child.complete {
                best = Some(match best {
                    Some(b) => b.min(child.error),
                    None => child.error,
                });
            } else {
                queue.push_back(child);
            }
        }
    }
    best
}
