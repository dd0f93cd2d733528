//! Road network model: an immutable, query-efficient graph built from
//! OpenStreetMap data, with turn geometry and bounded path counting.

mod osm;

pub use osm::{parse_osm, parse_osm_file, parse_maxspeed_tag, HighwayFilter, OsmParseResult};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine_deg, local_xy};

/// Lane width assumed when computing junction geometry, meters.
pub const DEFAULT_LANE_WIDTH_M: f64 = 3.65;

/// Opaque identifier of a road node.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct NodeId(pub i64);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Opaque identifier of a road way.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub struct WayId(pub i64);

impl fmt::Display for WayId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Drivable road categories retained in the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HighwayClass {
    Motorway,
    Trunk,
    Primary,
    Secondary,
    Tertiary,
    Unclassified,
    Residential,
    Service,
    MotorwayLink,
    TrunkLink,
    PrimaryLink,
    SecondaryLink,
    TertiaryLink,
    LivingStreet,
}

impl HighwayClass {
    /// Parse an OSM `highway=` tag value. Returns `None` for classes
    /// outside the drivable allow-list (footways, cycleways, rail, ...).
    pub fn from_tag(value: &str) -> Option<Self> {
        use HighwayClass::*;
        Some(match value {
            "motorway" => Motorway,
            "trunk" => Trunk,
            "primary" => Primary,
            "secondary" => Secondary,
            "tertiary" => Tertiary,
            "unclassified" => Unclassified,
            "residential" => Residential,
            "service" => Service,
            "motorway_link" => MotorwayLink,
            "trunk_link" => TrunkLink,
            "primary_link" => PrimaryLink,
            "secondary_link" => SecondaryLink,
            "tertiary_link" => TertiaryLink,
            "living_street" => LivingStreet,
            _ => return None,
        })
    }

    /// Fallback speed limit in m/s for ways with no usable `maxspeed`
    /// tag. Link roads inherit the limit of their parent class.
    pub fn default_speed(self) -> f64 {
        use HighwayClass::*;
        match self {
            Motorway | MotorwayLink => 29.06,
            Trunk | TrunkLink => 24.59,
            Primary | PrimaryLink => 20.12,
            Secondary | SecondaryLink => 17.88,
            Tertiary | TertiaryLink => 15.65,
            Unclassified | Residential | Service | LivingStreet => 11.18,
        }
    }
}

/// A node: a coordinate point referenced by ways.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoadNode {
    pub id: NodeId,
    pub lat: f64,
    pub lon: f64,
}

/// A road: an ordered node sequence with resolved attributes. After
/// graph construction `max_speed` is never absent.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoadWay {
    pub id: WayId,
    pub node_sequence: Vec<NodeId>,
    /// Resolved speed limit, m/s. Always > 0.
    pub max_speed: f64,
    pub lanes: u32,
    pub one_way: bool,
    pub highway_class: HighwayClass,
}

/// One outgoing adjacency entry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Adjacency {
    pub to: NodeId,
    pub way: WayId,
    pub length_m: f64,
}

/// Immutable routable road network. Safe to share across threads once
/// built; all queries take `&self`.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct RoadGraph {
    nodes: BTreeMap<NodeId, RoadNode>,
    ways: BTreeMap<WayId, RoadWay>,
    adjacency: BTreeMap<NodeId, Vec<Adjacency>>,
}

impl RoadGraph {
    /// Build a graph from already-filtered nodes and ways. Ways are
    /// wired in ascending id order so adjacency lists are deterministic.
    /// One-way ways contribute directed entries only.
    pub fn build(nodes: Vec<RoadNode>, ways: Vec<RoadWay>) -> Self {
        let mut g = RoadGraph::default();
        for n in nodes {
            g.nodes.insert(n.id, n);
        }
        let mut sorted: Vec<RoadWay> = ways;
        sorted.sort_by_key(|w| w.id);
        for w in sorted {
            g.insert_way(w);
        }
        g
    }

    fn insert_way(&mut self, way: RoadWay) {
        for pair in way.node_sequence.windows(2) {
            let (a, b) = (pair[0], pair[1]);
            let (na, nb) = (self.nodes[&a], self.nodes[&b]);
            let len = haversine_deg(na.lat, na.lon, nb.lat, nb.lon);
            self.adjacency.entry(a).or_default().push(Adjacency {
                to: b,
                way: way.id,
                length_m: len,
            });
            if !way.one_way {
                self.adjacency.entry(b).or_default().push(Adjacency {
                    to: a,
                    way: way.id,
                    length_m: len,
                });
            }
        }
        self.ways.insert(way.id, way);
    }

    pub fn node(&self, id: NodeId) -> Result<&RoadNode> {
        self.nodes.get(&id).ok_or(Error::UnknownNode(id))
    }

    pub fn way(&self, id: WayId) -> Result<&RoadWay> {
        self.ways.get(&id).ok_or(Error::UnknownWay(id.0))
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.nodes.contains_key(&id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn way_count(&self) -> usize {
        self.ways.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = &RoadNode> {
        self.nodes.values()
    }

    pub fn ways(&self) -> impl Iterator<Item = &RoadWay> {
        self.ways.values()
    }

    /// All outgoing adjacency entries of `at`, without any filtering.
    /// Unknown nodes yield an empty slice.
    pub fn outgoing(&self, at: NodeId) -> &[Adjacency] {
        self.adjacency.get(&at).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Outgoing edges from `at`. When `arrived_from` is given, the
    /// immediate back-edge is excluded so searches cannot U-turn in
    /// place.
    pub fn neighbors(&self, at: NodeId, arrived_from: Option<NodeId>) -> Result<Vec<Adjacency>> {
        if !self.contains_node(at) {
            return Err(Error::UnknownNode(at));
        }
        Ok(self.filtered_neighbors(at, arrived_from))
    }

    /// Same as [`neighbors`](Self::neighbors) but infallible; used on
    /// ids already validated against the graph.
    pub(crate) fn filtered_neighbors(
        &self,
        at: NodeId,
        arrived_from: Option<NodeId>,
    ) -> Vec<Adjacency> {
        self.outgoing(at)
            .iter()
            .filter(|adj| Some(adj.to) != arrived_from)
            .copied()
            .collect()
    }

    /// Number of onward choices at `node` seen by a vehicle that
    /// arrived from `arrived_from`. Two or more makes it a junction.
    pub(crate) fn onward_degree(&self, node: NodeId, arrived_from: Option<NodeId>) -> usize {
        self.outgoing(node)
            .iter()
            .filter(|adj| Some(adj.to) != arrived_from)
            .count()
    }

    /// The way carrying the directed segment `from -> to`, if any.
    pub fn segment_way(&self, from: NodeId, to: NodeId) -> Option<&Adjacency> {
        self.outgoing(from).iter().find(|adj| adj.to == to)
    }

    /// The graph node nearest to `(lat, lon)` within `max_m` meters.
    pub fn nearest_node(&self, lat: f64, lon: f64, max_m: f64) -> Result<NodeId> {
        let mut best: Option<(f64, NodeId)> = None;
        for n in self.nodes.values() {
            let d = haversine_deg(lat, lon, n.lat, n.lon);
            if d <= max_m && best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, n.id));
            }
        }
        best.map(|(_, id)| id)
            .ok_or(Error::NoNearbyNode { lat, lon, max_m })
    }
}

/// Geometry of one turn: the interior angle at a junction plus the
/// widths of the entry and exit roads.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TurnDescriptor {
    /// Interior angle at the junction, radians in (0, pi]. pi means
    /// straight continuation ("no turn").
    pub alpha: f64,
    pub entry_width_x: f64,
    pub exit_width_y: f64,
    pub at_node: NodeId,
}

/// Angles within this of pi collapse to "straight".
pub const STRAIGHT_ALPHA_EPS: f64 = 1e-9;

/// Compute the turn descriptor for traveling `prev -> junction -> next`.
///
/// The angle is measured between the two segments on a local planar
/// projection about the junction; widths are lane count times the
/// standard lane width of the respective ways.
pub fn turn_geometry(
    graph: &RoadGraph,
    prev: NodeId,
    junction: NodeId,
    next: NodeId,
) -> Result<TurnDescriptor> {
    let entry = graph
        .segment_way(prev, junction)
        .ok_or(Error::UnknownNode(prev))?;
    let exit = graph
        .segment_way(junction, next)
        .ok_or(Error::UnknownNode(next))?;

    let j = graph.node(junction)?;
    let p = graph.node(prev)?;
    let n = graph.node(next)?;

    let (px, py) = local_xy(j.lat, j.lon, p.lat, p.lon);
    let (nx, ny) = local_xy(j.lat, j.lon, n.lat, n.lon);

    let dot = px * nx + py * ny;
    let norm = (px * px + py * py).sqrt() * (nx * nx + ny * ny).sqrt();
    let mut alpha = (dot / norm).clamp(-1.0, 1.0).acos();
    if alpha >= std::f64::consts::PI - STRAIGHT_ALPHA_EPS {
        alpha = std::f64::consts::PI;
    }

    let entry_lanes = graph.way(entry.way)?.lanes;
    let exit_lanes = graph.way(exit.way)?.lanes;
    Ok(TurnDescriptor {
        alpha,
        entry_width_x: entry_lanes as f64 * DEFAULT_LANE_WIDTH_M,
        exit_width_y: exit_lanes as f64 * DEFAULT_LANE_WIDTH_M,
        at_node: junction,
    })
}

/// Resolved speed limit of a way in m/s. Limits are resolved at parse
/// time, so this is a plain accessor kept for API symmetry.
pub fn effective_max_speed(way: &RoadWay) -> f64 {
    way.max_speed
}

/// Convenience: the default-table speed for an untagged way of `class`.
pub fn default_speed_for(class: HighwayClass) -> f64 {
    class.default_speed()
}

/// Result of [`count_paths_within_distance`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCount {
    pub count: u64,
    /// True when the configured cap was hit and counting stopped.
    pub capped: bool,
}

/// Default cap on counted paths; bounds runtime on dense maps where
/// the count grows exponentially with radius.
pub const DEFAULT_PATH_COUNT_CAP: u64 = 10_000_000;

/// Count distinct maximal simple paths from `start`. A path ends (and
/// is counted) when its cumulative length first meets or exceeds
/// `radius`, or when it has no unvisited neighbor to extend to.
pub fn count_paths_within_distance(
    graph: &RoadGraph,
    start: NodeId,
    radius: f64,
    cap: u64,
) -> Result<PathCount> {
    if !graph.contains_node(start) {
        return Err(Error::UnknownNode(start));
    }
    let mut visited = std::collections::HashSet::new();
    visited.insert(start);
    let mut count = 0u64;
    let capped = dfs_count(graph, start, 0.0, radius, cap, &mut visited, &mut count);
    Ok(PathCount { count, capped })
}

fn dfs_count(
    graph: &RoadGraph,
    at: NodeId,
    cum: f64,
    radius: f64,
    cap: u64,
    visited: &mut std::collections::HashSet<NodeId>,
    count: &mut u64,
) -> bool {
    if *count >= cap {
        return true;
    }
    if cum >= radius {
        *count += 1;
        return false;
    }
    let mut extended = false;
    let mut capped = false;
    for adj in graph.outgoing(at) {
        if visited.contains(&adj.to) {
            continue;
        }
        extended = true;
        visited.insert(adj.to);
        capped |= dfs_count(graph, adj.to, cum + adj.length_m, radius, cap, visited, count);
        visited.remove(&adj.to);
        if capped {
            return true;
        }
    }
    if !extended {
        // Dead end inside the radius still terminates one maximal path.
        *count += 1;
    }
    capped
}
