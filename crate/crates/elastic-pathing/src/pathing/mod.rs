//! The elastic pathing search.
//!
//! A speed trace is fitted onto candidate road paths by matching
//! features one way: a vehicle stop needs an intersection, and a turn
//! needs a speed slow enough to make it. Where integrated trace
//! distance and road geometry disagree at a feature, the trace is
//! compressed or stretched to reconcile them and the adjustment is
//! charged to the path's error. Reconciled positions are pinned as
//! landmarks and cannot move afterwards.

mod branch;
mod engine;

pub use branch::{goto_branch, reconcile_stop, reconcile_turn};
pub use engine::elastic_pathing;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geo::interpolate;
use crate::kinematics::TurnModelParams;
use crate::map::{Adjacency, NodeId, RoadGraph, RoadWay, WayId};
use crate::trace::STOP_SPEED_MPS;

/// A pinned match between the trace and the road: this node was
/// reached exactly at this trace sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Landmark {
    pub node: NodeId,
    pub trace_index: usize,
    /// Road distance from the path start at pin time, meters.
    pub distance_along_path: f64,
}

/// The partially traversed edge a path is currently on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EdgePos {
    pub to: NodeId,
    pub way: WayId,
    pub length: f64,
    pub covered: f64,
}

/// One route hypothesis: a walk through the graph, its landmarks, and
/// the accumulated stretch/compress error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidatePath {
    /// Nodes reached so far, starting at the trip start.
    pub nodes: Vec<NodeId>,
    /// `ways[i]` carries the segment `nodes[i] -> nodes[i+1]`.
    pub ways: Vec<WayId>,
    /// Lengths of the walked segments, meters.
    pub seg_lens: Vec<f64>,
    pub landmarks: Vec<Landmark>,
    /// Next trace sample to consume.
    pub cursor: usize,
    /// Trace distance integrated since the last landmark.
    pub calc_distance: f64,
    /// Road distance covered since the last landmark.
    pub predicted_distance: f64,
    /// Total stretch/compress applied, meters. The ranking key.
    pub error: f64,
    pub complete: bool,
    /// Creation order; ties in error break on it.
    pub seq: u64,
    /// Edge currently being traversed, if between nodes.
    pub edge: Option<EdgePos>,
    walked_len: f64,
}

impl CandidatePath {
    /// A fresh path standing at the trip start, pinned there.
    pub fn new_at_start(start: NodeId) -> Self {
        Self {
            nodes: vec![start],
            ways: Vec::new(),
            seg_lens: Vec::new(),
            landmarks: vec![Landmark {
                node: start,
                trace_index: 0,
                distance_along_path: 0.0,
            }],
            cursor: 0,
            calc_distance: 0.0,
            predicted_distance: 0.0,
            error: 0.0,
            complete: false,
            seq: 0,
            edge: None,
            walked_len: 0.0,
        }
    }

    pub fn last_node(&self) -> NodeId {
        *self.nodes.last().expect("walk never empty")
    }

    pub fn prev_node(&self) -> Option<NodeId> {
        if self.nodes.len() >= 2 {
            Some(self.nodes[self.nodes.len() - 2])
        } else {
            None
        }
    }

    /// Road distance of the current position from the path start.
    pub fn position(&self) -> f64 {
        self.walked_len + self.edge.map_or(0.0, |e| e.covered)
    }

    /// Total road length of the hypothesized route so far.
    pub fn route_length(&self) -> f64 {
        self.position()
    }

    pub(crate) fn last_landmark(&self) -> &Landmark {
        self.landmarks.last().expect("start is always pinned")
    }

    /// Would arriving at `adj.to` via `adj.way` repeat an earlier
    /// arrival? Blocks trivial oscillation loops while still allowing
    /// a node to be re-crossed via a different street.
    pub(crate) fn would_revisit(&self, adj: &Adjacency) -> bool {
        (1..self.nodes.len())
            .any(|i| self.nodes[i] == adj.to && self.ways[i - 1] == adj.way)
    }

    pub(crate) fn enter_edge(&mut self, adj: Adjacency, covered: f64) {
        self.edge = Some(EdgePos {
            to: adj.to,
            way: adj.way,
            length: adj.length_m,
            covered,
        });
    }

    /// Integrate one trace step along the current edge.
    pub(crate) fn advance(&mut self, step: f64) {
        let e = self.edge.as_mut().expect("advance requires an edge");
        e.covered += step;
        self.calc_distance += step;
        self.predicted_distance += step;
    }

    /// Finish the current edge: its target joins the walk.
    pub(crate) fn arrive(&mut self) {
        let e = self.edge.take().expect("arrive requires an edge");
        self.nodes.push(e.to);
        self.ways.push(e.way);
        self.seg_lens.push(e.length);
        self.walked_len += e.length;
    }

    /// Append a whole segment (used when a stop is stretched forward
    /// through pass-through nodes).
    pub(crate) fn append_segment(&mut self, adj: Adjacency) {
        self.nodes.push(adj.to);
        self.ways.push(adj.way);
        self.seg_lens.push(adj.length_m);
        self.walked_len += adj.length_m;
    }

    /// Cut the walk back so `nodes[k]` is its head again.
    pub(crate) fn truncate_walk_to(&mut self, k: usize) {
        self.nodes.truncate(k + 1);
        self.ways.truncate(k);
        self.seg_lens.truncate(k);
        self.walked_len = self.seg_lens.iter().sum();
        self.edge = None;
        self.predicted_distance = self.position() - self.last_landmark().distance_along_path;
    }

    /// Pin at `node`, recording the current cursor. Re-pinning the same
    /// node at the same cursor is a no-op.
    pub fn pin(&mut self, node: NodeId) {
        self.pin_at(node, self.cursor);
    }

    pub(crate) fn pin_at(&mut self, node: NodeId, trace_index: usize) {
        if let Some(last) = self.landmarks.last() {
            if last.node == node && last.trace_index == trace_index {
                self.calc_distance = 0.0;
                self.predicted_distance = 0.0;
                return;
            }
            debug_assert!(
                trace_index > last.trace_index,
                "landmark indices must strictly increase ({} -> {})",
                last.trace_index,
                trace_index
            );
        }
        self.landmarks.push(Landmark {
            node,
            trace_index,
            distance_along_path: self.position(),
        });
        self.calc_distance = 0.0;
        self.predicted_distance = 0.0;
    }

    /// Final position, interpolated along the last partial edge when
    /// the trace ended mid-segment. Returns `(lat, lon)`.
    pub fn endpoint(&self, graph: &RoadGraph) -> Result<(f64, f64)> {
        match &self.edge {
            Some(e) if e.length > 0.0 => {
                let a = graph.node(self.last_node())?;
                let b = graph.node(e.to)?;
                let frac = (e.covered / e.length).clamp(0.0, 1.0);
                Ok(interpolate(a.lat, a.lon, b.lat, b.lon, frac))
            }
            _ => {
                let n = graph.node(self.last_node())?;
                Ok((n.lat, n.lon))
            }
        }
    }
}

/// Tuning parameters of the search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathingConfig {
    /// Termination slack: keep exploring while the best partial error
    /// is below `delta` times the best complete error. Must be > 1.
    pub delta: f64,
    /// Tolerated excess over a way's speed limit (20 mph by default);
    /// a sample above limit + slack kills the path.
    pub speed_slack: f64,
    /// How many samples the cursor may rewind or advance when
    /// reconciling a too-fast turn.
    pub rewind_window: usize,
    /// Cap on any single stretch/compress, meters.
    pub max_adjust: f64,
    /// Cap on live partial paths; the worst are evicted beyond it.
    pub max_partials: usize,
    /// Speeds below this count as stopped.
    pub zero_speed: f64,
    /// Apply the speed-limit rule at all. Disabled by the
    /// `--no-speed-limits` ablation.
    pub enforce_speed_limit: bool,
    pub turn_params: TurnModelParams,
}

impl Default for PathingConfig {
    fn default() -> Self {
        Self {
            delta: 1.1,
            speed_slack: 8.94,
            rewind_window: 5,
            max_adjust: 150.0,
            max_partials: 100_000,
            zero_speed: STOP_SPEED_MPS,
            enforce_speed_limit: true,
            turn_params: TurnModelParams::default(),
        }
    }
}

impl PathingConfig {
    /// How close to an intersection node a stopped vehicle may be and
    /// still count as at it: room for the road's lanes plus a car
    /// waiting ahead.
    pub fn intersection_tolerance(&self, lanes: u32) -> f64 {
        lanes as f64 * self.turn_params.lane_width + self.turn_params.car_offset
    }
}

/// Is this sample speed acceptable on `way`? Strictly more than
/// limit + slack is not.
pub fn within_speed_limit(v: f64, way: &RoadWay, slack: f64) -> bool {
    v <= way.max_speed + slack
}

/// Ranked complete paths plus diagnostics from one search run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathingOutcome {
    /// Complete paths in ascending error order, all within `delta`
    /// of the best.
    pub completes: Vec<CandidatePath>,
    /// Candidate paths ever created.
    pub explored_count: u64,
    /// True when `max_partials` forced evictions.
    pub truncated: bool,
}

impl PathingOutcome {
    pub fn best(&self) -> Option<&CandidatePath> {
        self.completes.first()
    }
}
