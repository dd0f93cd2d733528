//! Best-first search over candidate paths.

use std::collections::BTreeMap;

use ordered_float::OrderedFloat;

use crate::error::{Error, Result};
use crate::map::{NodeId, RoadGraph};
use crate::pathing::{goto_branch, CandidatePath, PathingConfig, PathingOutcome};
use crate::trace::SpeedTrace;

/// Fit `trace` onto the graph starting at `start`.
///
/// Partial paths are expanded cheapest-error first; exploration stops
/// once no remaining partial could complete within `delta` times the
/// best complete error. Because error never decreases along a path,
/// the cheapest returned complete is globally minimal.
pub fn elastic_pathing(
    graph: &RoadGraph,
    start: NodeId,
    trace: &SpeedTrace,
    cfg: &PathingConfig,
) -> Result<PathingOutcome> {
    if !graph.contains_node(start) {
        return Err(Error::UnknownNode(start));
    }
    if trace.is_empty() {
        return Err(Error::EmptyInput("speed trace"));
    }

    let mut created: u64 = 1;
    let mut truncated = false;
    let mut partial: BTreeMap<(OrderedFloat<f64>, u64), CandidatePath> = BTreeMap::new();
    let mut completes: Vec<CandidatePath> = Vec::new();
    let mut best_complete = f64::INFINITY;

    let root = CandidatePath::new_at_start(start);
    partial.insert((OrderedFloat(root.error), root.seq), root);

    while let Some((&key, _)) = partial.first_key_value() {
        if !completes.is_empty() && key.0 .0 >= cfg.delta * best_complete {
            break;
        }
        let popped = partial.remove(&key).expect("peeked key present");
        for mut child in goto_branch(popped, trace, graph, cfg) {
            child.seq = created;
            created += 1;
            if child.complete {
                best_complete = best_complete.min(child.error);
                completes.push(child);
            } else {
                partial.insert((OrderedFloat(child.error), child.seq), child);
            }
        }
        while partial.len() > cfg.max_partials {
            partial.pop_last();
            truncated = true;
        }
    }

    completes.sort_by(|a, b| {
        (OrderedFloat(a.error), a.seq).cmp(&(OrderedFloat(b.error), b.seq))
    });
    if let Some(best) = completes.first().map(|p| p.error) {
        completes.retain(|p| p.error == best || p.error < cfg.delta * best);
    }

    Ok(PathingOutcome { completes, explored_count: created, truncated })
}
