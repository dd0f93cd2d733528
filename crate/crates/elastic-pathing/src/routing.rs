//! Optional rerank of top candidates by comparing trip length against
//! the shortest-route distance to each candidate's endpoint.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use ordered_float::OrderedFloat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::haversine_deg;
use crate::map::{NodeId, RoadGraph};
use crate::pathing::{CandidatePath, PathingOutcome};

/// Weights of the combined score. `beta` weighs the path-fit error
/// term, `omega` the routing-agreement term; they must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoutingScoreParams {
    pub beta: f64,
    pub omega: f64,
    pub top_k: usize,
}

impl Default for RoutingScoreParams {
    fn default() -> Self {
        Self { beta: 0.5, omega: 0.5, top_k: 10 }
    }
}

impl RoutingScoreParams {
    /// Build from `beta` alone; `omega` is its complement.
    pub fn with_beta(beta: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&beta) {
            return Err(Error::InvalidValue { what: "beta", value: beta.to_string() });
        }
        Ok(Self { beta, omega: 1.0 - beta, top_k: 10 })
    }

    pub fn validate(&self) -> Result<()> {
        if (self.beta + self.omega - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidValue {
                what: "beta + omega",
                value: format!("{}", self.beta + self.omega),
            });
        }
        Ok(())
    }
}

/// A candidate with its routing comparison attached.
#[derive(Debug, Clone, Serialize)]
pub struct ScoredCandidate {
    pub path: CandidatePath,
    /// Trip distance integrated from the speed trace, meters.
    pub calc_dist: f64,
    /// Shortest-route distance start -> endpoint, when one exists.
    pub routing_dist: Option<f64>,
    /// Combined score in [0, 1]; larger is better.
    pub comb_score: f64,
}

/// Distance-optimal route between two graph nodes, respecting one-way
/// edges, found with A* under the haversine heuristic (admissible:
/// road length is never shorter than the great-circle distance).
/// Returns `None` when `to` is unreachable.
pub fn shortest_route(
    graph: &RoadGraph,
    from: NodeId,
    to: NodeId,
) -> Result<Option<(Vec<NodeId>, f64)>> {
    let goal = *graph.node(to)?;
    graph.node(from)?;
    if from == to {
        return Ok(Some((vec![from], 0.0)));
    }

    let h = |n: NodeId| -> f64 {
        let node = graph.node(n).expect("expanded nodes exist");
        haversine_deg(node.lat, node.lon, goal.lat, goal.lon)
    };

    let mut dist: HashMap<NodeId, f64> = HashMap::new();
    let mut prev: HashMap<NodeId, NodeId> = HashMap::new();
    // Min-heap on (f, g, node); the node id breaks ties deterministically.
    let mut heap: BinaryHeap<Reverse<(OrderedFloat<f64>, OrderedFloat<f64>, NodeId)>> =
        BinaryHeap::new();

    dist.insert(from, 0.0);
    heap.push(Reverse((OrderedFloat(h(from)), OrderedFloat(0.0), from)));

    while let Some(Reverse((_, OrderedFloat(g), node))) = heap.pop() {
        if node == to {
            let mut route = vec![to];
            let mut cur = to;
            while let Some(&p) = prev.get(&cur) {
                route.push(p);
                cur = p;
            }
            route.reverse();
            return Ok(Some((route, g)));
        }
        if g > dist.get(&node).copied().unwrap_or(f64::INFINITY) {
            continue; // stale entry
        }
        for adj in graph.outgoing(node) {
            let ng = g + adj.length_m;
            if ng < dist.get(&adj.to).copied().unwrap_or(f64::INFINITY) {
                dist.insert(adj.to, ng);
                prev.insert(adj.to, node);
                heap.push(Reverse((OrderedFloat(ng + h(adj.to)), OrderedFloat(ng), adj.to)));
            }
        }
    }
    Ok(None)
}

/// Blend path-fit error with routing agreement into a score in [0, 1].
///
/// Three cases on the routing distance: shorter than the trip distance
/// uses the plain ratio; longer clamps at twice the trip distance and
/// scores the proportional excess symmetrically; absent leaves the
/// routing factor out entirely (and the error term unweighted).
pub fn combined_score(
    error: f64,
    max_error: f64,
    calc_dist: f64,
    routing_dist: Option<f64>,
    p: &RoutingScoreParams,
) -> Result<f64> {
    if calc_dist <= 0.0 {
        return Err(Error::NonPositiveCalcDist(calc_dist));
    }
    p.validate()?;

    // With all top candidates at zero error the ratio is 0/0; perfect
    // paths get full credit.
    let error_term = if max_error > 0.0 {
        (max_error - error) / max_error
    } else {
        1.0
    };

    Ok(match routing_dist {
        None => error_term,
        Some(rd) if rd < calc_dist => p.beta * error_term + p.omega * (rd / calc_dist),
        Some(rd) => {
            let rd = rd.min(2.0 * calc_dist);
            let ratio2 = 1.0 - (rd - calc_dist) / calc_dist;
            p.beta * error_term + p.omega * ratio2
        }
    })
}

/// Rescore the `top_k` lowest-error completes against shortest routes
/// from `start` to their endpoints and return them best first.
pub fn rerank_top_k(
    outcome: &PathingOutcome,
    graph: &RoadGraph,
    start: NodeId,
    calc_dist: f64,
    p: &RoutingScoreParams,
) -> Result<Vec<ScoredCandidate>> {
    if outcome.completes.is_empty() {
        return Err(Error::EmptyInput("pathing outcome"));
    }
    let top: Vec<&CandidatePath> =
        outcome.completes.iter().take(p.top_k.max(1)).collect();
    let max_error = top
        .iter()
        .map(|c| c.error)
        .fold(0.0_f64, f64::max);

    let mut scored = Vec::with_capacity(top.len());
    for path in top {
        let routing_dist = shortest_route(graph, start, path.last_node())?
            .map(|(_, len)| len);
        let comb_score = combined_score(path.error, max_error, calc_dist, routing_dist, p)?;
        scored.push(ScoredCandidate {
            path: path.clone(),
            calc_dist,
            routing_dist,
            comb_score,
        });
    }
    // Descending score; input (error) order breaks ties.
    scored.sort_by(|a, b| {
        OrderedFloat(b.comb_score)
            .cmp(&OrderedFloat(a.comb_score))
            .then(a.path.seq.cmp(&b.path.seq))
    });
    Ok(scored)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{HighwayClass, RoadNode, RoadWay, WayId};

    /// 3x3 grid, 100 m spacing, ids are row*3+col.
    fn grid3() -> RoadGraph {
        let (lat0, lon0) = (40.5, -74.45);
        let dlat = 0.000899;
        let dlon = 0.001182;
        let mut nodes = Vec::new();
        for r in 0..3 {
            for c in 0..3 {
                nodes.push(RoadNode {
                    id: NodeId((r * 3 + c) as i64),
                    lat: lat0 + r as f64 * dlat,
                    lon: lon0 + c as f64 * dlon,
                });
            }
        }
        let mut ways = Vec::new();
        let mut mk = |id: i64, seq: Vec<i64>| {
            ways.push(RoadWay {
                id: WayId(id),
                node_sequence: seq.into_iter().map(NodeId).collect(),
                max_speed: 11.18,
                lanes: 1,
                one_way: false,
                highway_class: HighwayClass::Residential,
            })
        };
        for r in 0..3i64 {
            mk(r + 1, vec![r * 3, r * 3 + 1, r * 3 + 2]);
        }
        for c in 0..3i64 {
            mk(c + 4, vec![c, c + 3, c + 6]);
        }
        RoadGraph::build(nodes, ways)
    }

    #[test]
    fn route_to_self_is_empty() {
        let g = grid3();
        let (route, len) = shortest_route(&g, NodeId(0), NodeId(0)).unwrap().unwrap();
        assert_eq!(len, 0.0);
        assert!(route.len() <= 1);
    }

    #[test]
    fn corner_to_corner_is_manhattan() {
        let g = grid3();
        let (route, len) = shortest_route(&g, NodeId(0), NodeId(8)).unwrap().unwrap();
        // Brute-force oracle: enumerate all simple paths.
        let best = brute_force_shortest(&g, NodeId(0), NodeId(8));
        assert!((len - best).abs() < 1e-6, "a* {len} vs brute {best}");
        assert_eq!(*route.first().unwrap(), NodeId(0));
        assert_eq!(*route.last().unwrap(), NodeId(8));
        // 4 edges of ~100 m each
        assert!((len - 400.0).abs() < 2.0, "len {len}");
    }

    fn brute_force_shortest(g: &RoadGraph, from: NodeId, to: NodeId) -> f64 {
        fn rec(
            g: &RoadGraph,
            at: NodeId,
            to: NodeId,
            len: f64,
            seen: &mut Vec<NodeId>,
            best: &mut f64,
        ) {
            if len >= *best {
                return;
            }
            if at == to {
                *best = len;
                return;
            }
            for adj in g.outgoing(at) {
                if seen.contains(&adj.to) {
                    continue;
                }
                seen.push(adj.to);
                rec(g, adj.to, to, len + adj.length_m, seen, best);
                seen.pop();
            }
        }
        let mut best = f64::INFINITY;
        rec(g, from, to, 0.0, &mut vec![from], &mut best);
        best
    }

    #[test]
    fn disconnected_target_is_none() {
        let mut nodes = vec![
            RoadNode { id: NodeId(1), lat: 40.5, lon: -74.45 },
            RoadNode { id: NodeId(2), lat: 40.5, lon: -74.449 },
        ];
        nodes.push(RoadNode { id: NodeId(3), lat: 40.6, lon: -74.4 });
        nodes.push(RoadNode { id: NodeId(4), lat: 40.6, lon: -74.399 });
        let mk = |id: i64, a: i64, b: i64| RoadWay {
            id: WayId(id),
            node_sequence: vec![NodeId(a), NodeId(b)],
            max_speed: 11.18,
            lanes: 1,
            one_way: false,
            highway_class: HighwayClass::Residential,
        };
        let g = RoadGraph::build(nodes, vec![mk(1, 1, 2), mk(2, 3, 4)]);
        assert!(shortest_route(&g, NodeId(1), NodeId(3)).unwrap().is_none());
    }

    #[test]
    fn one_way_is_respected() {
        let nodes = vec![
            RoadNode { id: NodeId(1), lat: 40.5, lon: -74.45 },
            RoadNode { id: NodeId(2), lat: 40.5, lon: -74.449 },
        ];
        let way = RoadWay {
            id: WayId(1),
            node_sequence: vec![NodeId(1), NodeId(2)],
            max_speed: 11.18,
            lanes: 1,
            one_way: true,
            highway_class: HighwayClass::Residential,
        };
        let g = RoadGraph::build(nodes, vec![way]);
        assert!(shortest_route(&g, NodeId(1), NodeId(2)).unwrap().is_some());
        assert!(shortest_route(&g, NodeId(2), NodeId(1)).unwrap().is_none());
    }

    #[test]
    fn perfect_candidate_scores_one() {
        let p = RoutingScoreParams::default();
        let s = combined_score(0.0, 100.0, 1000.0, Some(1000.0), &p).unwrap();
        assert!((s - 1.0).abs() < 1e-12);
    }

    #[test]
    fn worst_candidate_scores_zero() {
        let p = RoutingScoreParams::default();
        let s = combined_score(100.0, 100.0, 1000.0, Some(2000.0), &p).unwrap();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn short_route_case_arithmetic() {
        let p = RoutingScoreParams::default();
        let s = combined_score(50.0, 100.0, 1000.0, Some(800.0), &p).unwrap();
        assert!((s - 0.65).abs() < 1e-9, "s = {s}");
    }

    #[test]
    fn absent_routing_uses_error_term_alone() {
        let p = RoutingScoreParams::default();
        let s = combined_score(25.0, 100.0, 1000.0, None, &p).unwrap();
        assert!((s - 0.75).abs() < 1e-12);
    }

    #[test]
    fn zero_max_error_gives_full_error_credit() {
        let p = RoutingScoreParams::default();
        let s = combined_score(0.0, 0.0, 1000.0, Some(500.0), &p).unwrap();
        assert!((s - (0.5 + 0.5 * 0.5)).abs() < 1e-12);
    }

    #[test]
    fn continuity_at_the_case_boundary() {
        let p = RoutingScoreParams::default();
        let below = combined_score(30.0, 100.0, 1000.0, Some(1000.0 - 1e-9), &p).unwrap();
        let above = combined_score(30.0, 100.0, 1000.0, Some(1000.0 + 1e-9), &p).unwrap();
        assert!((below - above).abs() < 1e-9);
    }

    #[test]
    fn nonpositive_calc_dist_is_an_error() {
        let p = RoutingScoreParams::default();
        assert!(combined_score(0.0, 1.0, 0.0, None, &p).is_err());
    }
}
