//! Synthetic ground-truth generation: grid maps and simulated drives.
//!
//! The simulator honors the same physical restrictions the search
//! assumes: vehicles stop at junctions, slow below the safe turn speed
//! before turning, and cruise below the way's speed limit. A trace
//! simulated over a route therefore fits that route with zero (or
//! near-zero) error, which is what makes recovery measurable.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{GpsFix, EARTH_RADIUS_M};
use crate::kinematics::{intersection_turn_radius, max_turn_speed, TurnModelParams};
use crate::map::{
    turn_geometry, HighwayClass, NodeId, RoadGraph, RoadNode, RoadWay, WayId,
};
use crate::trace::{SpeedSample, SpeedTrace, TraceSource};

/// Meters per degree of latitude.
const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

/// Fraction of the safe turn speed the simulated driver actually
/// carries through a turn; keeps crossing samples comfortably feasible.
const TURN_SPEED_MARGIN: f64 = 0.85;

/// Layout of a synthetic grid map.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    /// Nodes per side.
    pub n: usize,
    /// Street spacing, meters.
    pub spacing_m: f64,
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub street_class: HighwayClass,
    /// Optional highway along row 0 with sparse ramp connections.
    pub spine: Option<SpineSpec>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpineSpec {
    pub class: HighwayClass,
    pub lanes: u32,
    /// A ramp connects the spine to the street mesh every this many
    /// columns.
    pub ramp_interval: usize,
}

impl Default for SpineSpec {
    fn default() -> Self {
        Self { class: HighwayClass::Trunk, lanes: 2, ramp_interval: 3 }
    }
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            n: 10,
            spacing_m: 150.0,
            origin_lat: 40.5,
            origin_lon: -74.45,
            street_class: HighwayClass::Residential,
            spine: None,
        }
    }
}

impl GridSpec {
    pub fn node_id(&self, row: usize, col: usize) -> NodeId {
        NodeId((row * self.n + col + 1) as i64)
    }

    pub fn ramp_cols(&self) -> Vec<usize> {
        match &self.spine {
            Some(s) => (0..self.n).step_by(s.ramp_interval.max(1)).collect(),
            None => Vec::new(),
        }
    }
}

/// Build an n-by-n planar grid of two-way streets around the
/// configured origin. Row and column spacing is held to the requested
/// meters by scaling longitude steps per row with latitude.
pub fn make_grid_map(spec: &GridSpec) -> RoadGraph {
    let n = spec.n;
    let dlat = spec.spacing_m / M_PER_DEG;
    let lat_of = |r: usize| spec.origin_lat + r as f64 * dlat;
    let lon_of = |r: usize, c: usize| {
        spec.origin_lon + c as f64 * spec.spacing_m / (M_PER_DEG * lat_of(r).to_radians().cos())
    };

    let ramp_cols = spec.ramp_cols();
    let has_spine = spec.spine.is_some();
    let row0_exists = |c: usize| !has_spine || ramp_cols.contains(&c);

    let mut nodes = Vec::new();
    for r in 0..n {
        for c in 0..n {
            if r == 0 && !row0_exists(c) {
                continue;
            }
            nodes.push(RoadNode {
                id: spec.node_id(r, c),
                lat: lat_of(r),
                lon: lon_of(r, c),
            });
        }
    }

    let street = |id: i64, seq: Vec<NodeId>| RoadWay {
        id: WayId(id),
        node_sequence: seq,
        max_speed: spec.street_class.default_speed(),
        lanes: 1,
        one_way: false,
        highway_class: spec.street_class,
    };

    let mut ways = Vec::new();
    // Column ways first (way ids 1..=n) so that north/south arms come
    // first in every adjacency list.
    for c in 0..n {
        let first_row = if row0_exists(c) { 0 } else { 1 };
        let seq: Vec<NodeId> = (first_row..n).map(|r| spec.node_id(r, c)).collect();
        if seq.len() >= 2 {
            ways.push(street((c + 1) as i64, seq));
        }
    }
    // Row ways (way ids n+1..=2n); row 0 becomes the spine when asked.
    for r in 0..n {
        if r == 0 {
            if let Some(sp) = &spec.spine {
                let seq: Vec<NodeId> = ramp_cols.iter().map(|&c| spec.node_id(0, c)).collect();
                if seq.len() >= 2 {
                    ways.push(RoadWay {
                        id: WayId((n + 1) as i64),
                        node_sequence: seq,
                        max_speed: sp.class.default_speed(),
                        lanes: sp.lanes,
                        one_way: false,
                        highway_class: sp.class,
                    });
                }
                continue;
            }
        }
        let seq: Vec<NodeId> = (0..n).map(|c| spec.node_id(r, c)).collect();
        ways.push(street((n + 1 + r) as i64, seq));
    }

    RoadGraph::build(nodes, ways)
}

/// Driving style of the synthetic driver.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DriveProfile {
    /// Preferred cruise speed, m/s; capped by each way's limit.
    pub cruise_speed: f64,
    /// m/s^2.
    pub accel: f64,
    /// m/s^2.
    pub decel: f64,
    pub stop_probability_at_junction: f64,
    /// Dwell at each stop, seconds.
    pub stop_duration: f64,
}

impl Default for DriveProfile {
    fn default() -> Self {
        Self {
            cruise_speed: 26.0,
            accel: 2.0,
            decel: 2.5,
            stop_probability_at_junction: 0.6,
            stop_duration: 12.0,
        }
    }
}

struct NodeConstraint {
    /// Road distance of the node from the route start.
    pos: f64,
    /// Highest speed allowed when crossing, m/s.
    cap: f64,
    /// Full stop with this dwell, seconds.
    stop: Option<f64>,
}

/// Drive `route` and record a 1 Hz speed trace.
///
/// Returns the trace and the true destination (the route's last node).
/// Junction stops are drawn per `profile.stop_probability_at_junction`
/// from the seeded generator, so identical seeds reproduce identical
/// traces.
pub fn simulate_drive(
    graph: &RoadGraph,
    route: &[NodeId],
    profile: &DriveProfile,
    seed: u64,
    turn_params: &TurnModelParams,
) -> Result<(SpeedTrace, GpsFix)> {
    if route.len() < 2 {
        return Err(Error::EmptyInput("route"));
    }
    // Resolve segments; every consecutive pair must be adjacent.
    let mut seg_len = Vec::with_capacity(route.len() - 1);
    let mut seg_limit = Vec::with_capacity(route.len() - 1);
    for w in route.windows(2) {
        let adj = graph
            .segment_way(w[0], w[1])
            .ok_or(Error::RouteNotConnected { from: w[0], to: w[1] })?;
        seg_len.push(adj.length_m);
        seg_limit.push(graph.way(adj.way)?.max_speed);
    }
    let mut node_pos = vec![0.0];
    for len in &seg_len {
        node_pos.push(node_pos.last().unwrap() + len);
    }
    let total = *node_pos.last().unwrap();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut constraints: Vec<NodeConstraint> = Vec::new();
    for k in 1..route.len() - 1 {
        let turn = turn_geometry(graph, route[k - 1], route[k], route[k + 1])?;
        let turn_cap = intersection_turn_radius(turn.entry_width_x, turn.exit_width_y, turn.alpha)
            .map(|r| max_turn_speed(r, turn_params) * TURN_SPEED_MARGIN)
            .unwrap_or(f64::INFINITY);
        // Slow down before entering a slower road.
        let entry_cap = profile.cruise_speed.min(seg_limit[k]);
        let is_junction = graph.onward_degree(route[k], Some(route[k - 1])) >= 2;
        let stop = if is_junction && rng.gen_bool(profile.stop_probability_at_junction) {
            Some(profile.stop_duration)
        } else {
            None
        };
        constraints.push(NodeConstraint {
            pos: node_pos[k],
            cap: turn_cap.min(entry_cap),
            stop,
        });
    }
    // The destination is always a stop.
    constraints.push(NodeConstraint { pos: total, cap: 0.0, stop: Some(1.0) });

    // Forward-simulate at 1 Hz. Samples carry the speed over the
    // second that ends at their timestamp, matching how the pathing
    // engine integrates distance.
    let mut samples = vec![SpeedSample { t: 0.0, v: 0.0 }];
    let mut t = 0.0;
    let mut s = 0.0;
    let mut v: f64 = 0.0;
    let mut seg = 0usize;
    let mut next_constraint = 0usize;

    while s < total - 1e-9 {
        while seg + 1 < seg_len.len() && s >= node_pos[seg + 1] - 1e-9 {
            seg += 1;
        }
        let cruise = profile.cruise_speed.min(seg_limit[seg]);
        let mut v_next = (v + profile.accel).min(cruise);
        // Braking envelopes toward upcoming constraints.
        let mut stop_at: Option<&NodeConstraint> = None;
        for c in &constraints[next_constraint..] {
            let d = c.pos - s;
            if d < -1e-9 {
                continue;
            }
            let target = if c.stop.is_some() { 0.0 } else { c.cap };
            if target.is_finite() {
                let envelope = (target * target + 2.0 * profile.decel * d).sqrt();
                v_next = v_next.min(envelope);
            }
            if c.stop.is_some() && stop_at.is_none() {
                stop_at = Some(c);
            }
            if c.stop.is_some() {
                break; // nothing beyond the next stop matters yet
            }
        }
        // A step that would cross a constraint node must not exceed the
        // crossing cap itself: the engine checks the sample value.
        for c in &constraints[next_constraint..] {
            let d = c.pos - s;
            if d < -1e-9 {
                continue;
            }
            if d <= v_next + 1e-9 {
                let target = if c.stop.is_some() { d.max(0.0) } else { c.cap };
                v_next = v_next.min(target.max(0.0));
            }
            if c.pos - s > v_next {
                break;
            }
        }
        if let Some(c) = stop_at {
            let d = c.pos - s;
            if d <= v_next + 1e-9 {
                v_next = d.max(0.0); // land exactly on the stop node
            }
        }
        v_next = v_next.max(0.0);
        if v_next < 0.05 && s < total - 1e-9 {
            // Never wedge short of the goal on numeric dust.
            v_next = (profile.accel).min(total - s);
        }

        t += 1.0;
        s += v_next;
        v = v_next;
        samples.push(SpeedSample { t, v: v_next });

        // Consume constraints we have reached.
        while next_constraint < constraints.len() {
            let c = &constraints[next_constraint];
            if s >= c.pos - 1e-6 {
                if let Some(dwell) = c.stop {
                    if s <= c.pos + 1e-6 {
                        v = 0.0;
                        for _ in 0..dwell.round().max(1.0) as usize {
                            t += 1.0;
                            samples.push(SpeedSample { t, v: 0.0 });
                        }
                    }
                }
                next_constraint += 1;
            } else {
                break;
            }
        }
    }
    // Hold the destination stop for one extra sample.
    if samples.last().map(|x| x.v) != Some(0.0) {
        t += 1.0;
        samples.push(SpeedSample { t, v: 0.0 });
    }

    let dest = graph.node(*route.last().unwrap())?;
    let truth = GpsFix::new(t, dest.lat, dest.lon);
    Ok((SpeedTrace::new(samples, TraceSource::Speedometer), truth))
}

/// A simulated trip: the true route, its trace, and the destination.
#[derive(Debug, Clone)]
pub struct SyntheticTrip {
    pub route: Vec<NodeId>,
    pub trace: SpeedTrace,
    pub truth: GpsFix,
}

/// Random walk route that never revisits a node and prefers to keep
/// straight, which is how streets are actually driven.
pub fn random_walk_route(
    graph: &RoadGraph,
    rng: &mut ChaCha8Rng,
    start: NodeId,
    len_edges: usize,
) -> Vec<NodeId> {
    let mut route = vec![start];
    let mut prev: Option<NodeId> = None;
    for _ in 0..len_edges {
        let at = *route.last().unwrap();
        let out: Vec<_> = graph
            .filtered_neighbors(at, prev)
            .into_iter()
            .filter(|a| !route.contains(&a.to))
            .collect();
        if out.is_empty() {
            break;
        }
        let straight = prev.and_then(|p| {
            out.iter()
                .find(|a| {
                    turn_geometry(graph, p, at, a.to)
                        .map(|t| t.alpha > 3.0)
                        .unwrap_or(false)
                })
                .copied()
        });
        let choice = match straight {
            Some(st) if rng.gen_bool(0.55) => st,
            _ => out[rng.gen_range(0..out.len())],
        };
        prev = Some(at);
        route.push(choice.to);
    }
    route
}

/// Commute-shaped route on a spine grid: a short approach down a ramp
/// near the western end, the highway run out to its terminus ramp, and
/// a short residential tail. The shape mirrors a bedroom-community
/// commute and gives the trace a distinctive fast leg.
pub fn commute_route(spec: &GridSpec, rng: &mut ChaCha8Rng) -> Vec<NodeId> {
    let ramps = spec.ramp_cols();
    assert!(ramps.len() >= 2, "commute routes need a spine with ramps");
    // Enter at one of the two westernmost ramps, leave at the terminus.
    let entry = ramps[rng.gen_range(0..2.min(ramps.len() - 1))];
    let exit = *ramps.last().unwrap();

    let mut route = Vec::new();
    let approach_rows = rng.gen_range(1..=2usize);
    for r in (1..=approach_rows).rev() {
        route.push(spec.node_id(r, entry));
    }
    route.push(spec.node_id(0, entry));
    for &c in ramps.iter().filter(|&&c| c > entry) {
        route.push(spec.node_id(0, c));
    }
    // Tail: up the terminus ramp, then at most one more edge.
    route.push(spec.node_id(1, exit));
    if rng.gen_bool(0.7) {
        if rng.gen_bool(0.6) {
            route.push(spec.node_id(2, exit));
        } else if exit > 0 {
            route.push(spec.node_id(1, exit - 1));
        }
    }
    route
}

/// Generate `k` deterministic trips on the grid. With a spine present
/// the mix leans toward commute-shaped routes; otherwise all trips are
/// local random walks.
pub fn generate_synthetic_trips(
    graph: &RoadGraph,
    spec: &GridSpec,
    k: usize,
    seed: u64,
    profile: &DriveProfile,
    turn_params: &TurnModelParams,
) -> Result<Vec<SyntheticTrip>> {
    let mut trips = Vec::with_capacity(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0usize;
    while trips.len() < k {
        attempts += 1;
        if attempts > k * 50 {
            return Err(Error::EmptyInput("could not generate enough valid trips"));
        }
        let commute = spec.spine.is_some() && rng.gen_bool(0.7);
        let route = if commute {
            commute_route(spec, &mut rng)
        } else {
            let min_row = if spec.spine.is_some() { 1 } else { 0 };
            let start = spec.node_id(
                rng.gen_range(min_row..spec.n),
                rng.gen_range(0..spec.n),
            );
            let len = rng.gen_range(8..=14);
            random_walk_route(graph, &mut rng, start, len)
        };
        if route.len() < 3 {
            continue;
        }
        let trip_seed = seed.wrapping_add(trips.len() as u64 * 7919);
        match simulate_drive(graph, &route, profile, trip_seed, turn_params) {
            Ok((trace, truth)) => trips.push(SyntheticTrip { route, trace, truth }),
            Err(_) => continue,
        }
    }
    Ok(trips)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geo::haversine_deg;
    use crate::trace::STOP_SPEED_MPS;

    #[test]
    fn two_by_two_grid_shape() {
        let spec = GridSpec { n: 2, ..GridSpec::default() };
        let g = make_grid_map(&spec);
        assert_eq!(g.node_count(), 4);
        let edges: usize = g.nodes().map(|n| g.outgoing(n.id).len()).sum();
        assert_eq!(edges / 2, 4); // two-way: each edge counted twice
    }

    #[test]
    fn five_by_five_degrees() {
        let spec = GridSpec { n: 5, ..GridSpec::default() };
        let g = make_grid_map(&spec);
        for node in g.nodes() {
            let d = g.outgoing(node.id).len();
            assert!((2..=4).contains(&d), "degree {d}");
        }
    }

    #[test]
    fn segment_lengths_match_spacing() {
        let spec = GridSpec { n: 5, ..GridSpec::default() };
        let g = make_grid_map(&spec);
        for node in g.nodes() {
            for adj in g.outgoing(node.id) {
                let rel = (adj.length_m - spec.spacing_m).abs() / spec.spacing_m;
                assert!(rel < 0.001, "length {} off by {rel}", adj.length_m);
            }
        }
        // and they really are haversine distances of the coordinates
        for node in g.nodes() {
            for adj in g.outgoing(node.id) {
                let b = g.node(adj.to).unwrap();
                let d = haversine_deg(node.lat, node.lon, b.lat, b.lon);
                assert!((d - adj.length_m).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn spine_grid_has_sparse_ramps() {
        let spec = GridSpec {
            spine: Some(SpineSpec::default()),
            ..GridSpec::default()
        };
        let g = make_grid_map(&spec);
        // Spine nodes exist only at ramp columns.
        assert!(g.contains_node(spec.node_id(0, 0)));
        assert!(g.contains_node(spec.node_id(0, 3)));
        assert!(!g.contains_node(spec.node_id(0, 1)));
        // Spine segments span the ramp interval.
        let adj = g.segment_way(spec.node_id(0, 0), spec.node_id(0, 3)).unwrap();
        assert!((adj.length_m - 450.0).abs() < 1.0);
    }

    fn default_sim() -> (RoadGraph, GridSpec) {
        let spec = GridSpec::default();
        (make_grid_map(&spec), spec)
    }

    #[test]
    fn one_segment_route_integrates_to_length() {
        let (g, spec) = default_sim();
        let route = vec![spec.node_id(0, 0), spec.node_id(0, 1)];
        let profile = DriveProfile::default();
        let (trace, truth) = simulate_drive(&g, &route, &profile, 1, &TurnModelParams::default())
            .unwrap();
        let dist = trace.total_distance();
        assert!((dist - 150.0).abs() < 2.0, "dist {dist}");
        let end = g.node(spec.node_id(0, 1)).unwrap();
        assert_eq!((truth.lat, truth.lon), (end.lat, end.lon));
    }

    #[test]
    fn speeds_never_exceed_way_limits() {
        let (g, spec) = default_sim();
        let route: Vec<NodeId> = (0..6).map(|c| spec.node_id(2, c)).collect();
        let profile = DriveProfile::default();
        let (trace, _) =
            simulate_drive(&g, &route, &profile, 42, &TurnModelParams::default()).unwrap();
        let limit = HighwayClass::Residential.default_speed();
        for s in &trace.samples {
            assert!(s.v <= limit + 1e-9, "sample {} over limit", s.v);
        }
    }

    #[test]
    fn stop_probability_one_stops_at_every_junction() {
        let (g, spec) = default_sim();
        let route: Vec<NodeId> = (0..5).map(|c| spec.node_id(2, c)).collect();
        let profile = DriveProfile {
            stop_probability_at_junction: 1.0,
            ..DriveProfile::default()
        };
        let (trace, _) =
            simulate_drive(&g, &route, &profile, 7, &TurnModelParams::default()).unwrap();
        let zero_runs = trace
            .samples
            .windows(2)
            .filter(|w| w[0].v >= STOP_SPEED_MPS && w[1].v < STOP_SPEED_MPS)
            .count();
        // 3 interior junctions plus the destination stop
        assert!(zero_runs >= 4, "only {zero_runs} stops");
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let (g, spec) = default_sim();
        let route: Vec<NodeId> = (0..5).map(|c| spec.node_id(3, c)).collect();
        let profile = DriveProfile::default();
        let p = TurnModelParams::default();
        let a = simulate_drive(&g, &route, &profile, 99, &p).unwrap();
        let b = simulate_drive(&g, &route, &profile, 99, &p).unwrap();
        assert_eq!(a.0.samples, b.0.samples);
    }

    #[test]
    fn disconnected_route_is_rejected() {
        let (g, spec) = default_sim();
        let route = vec![spec.node_id(0, 0), spec.node_id(5, 5)];
        assert!(simulate_drive(
            &g,
            &route,
            &DriveProfile::default(),
            1,
            &TurnModelParams::default()
        )
        .is_err());
    }
}
