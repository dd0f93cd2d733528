//! Advancing a single candidate path until it needs to branch.

use crate::kinematics::can_make_turn;
use crate::map::{turn_geometry, Adjacency, RoadGraph, TurnDescriptor};
use crate::pathing::{within_speed_limit, CandidatePath, PathingConfig};
use crate::trace::SpeedTrace;

/// Advance `path` sample by sample until a feature forces a decision,
/// and return every way the path can continue.
///
/// Outcomes per feature:
/// - intersection reached: one child per outgoing edge whose turn the
///   current speed permits; too-fast turns are reconciled by rewinding
///   (compress) or advancing (stretch) the cursor to a slow-enough
///   sample, charging the moved distance to the error.
/// - zero-speed run: skipped to its end; if the position is not at an
///   intersection the stop is reconciled by pulling the path back or
///   pushing it forward to the nearest one.
/// - a sample exceeding the way's limit plus slack kills the path.
/// - samples exhausted: the path is complete.
pub fn goto_branch(
    mut path: CandidatePath,
    trace: &SpeedTrace,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    let n = trace.len();
    loop {
        if path.edge.is_none() {
            // Standing at a node: pick the next edge or branch.
            let at = path.last_node();
            let from = path.prev_node();
            let out = graph.filtered_neighbors(at, from);
            match out.len() {
                0 => return finish_or_drop(path, trace, cfg),
                1 => {
                    if path.would_revisit(&out[0]) {
                        return finish_or_drop(path, trace, cfg);
                    }
                    path.enter_edge(out[0], 0.0);
                }
                _ => {
                    // Consume a stop spent parked on the landmark
                    // before branching with the first moving sample.
                    if path.cursor < n
                        && trace.samples[path.cursor].v < cfg.zero_speed
                        && path.predicted_distance == 0.0
                    {
                        path.cursor = zero_run_end(trace, path.cursor, cfg.zero_speed);
                    }
                    if path.cursor >= n {
                        path.complete = true;
                        return vec![path];
                    }
                    let i = path.cursor;
                    return branch_at_junction(path, &out, i, 0.0, false, trace, graph, cfg);
                }
            }
            continue;
        }

        if path.cursor >= n {
            path.complete = true;
            return vec![path];
        }
        let v = trace.samples[path.cursor].v;

        if v < cfg.zero_speed {
            let run_end = zero_run_end(trace, path.cursor, cfg.zero_speed);
            path.cursor = run_end;
            if run_end >= n {
                path.complete = true;
                return vec![path];
            }
            if path.predicted_distance == 0.0 {
                continue; // still parked at the last landmark
            }
            return handle_stop(path, graph, cfg);
        }

        let way_id = path.edge.as_ref().expect("on an edge").way;
        let way = graph.way(way_id).expect("edge way exists");
        if cfg.enforce_speed_limit && !within_speed_limit(v, way, cfg.speed_slack) {
            return Vec::new();
        }

        let step = v * trace.dt(path.cursor);
        path.advance(step);
        path.cursor += 1;

        // The step may cross one or more node boundaries.
        while let Some(edge) = path.edge {
            if edge.covered < edge.length {
                break;
            }
            let overshoot = edge.covered - edge.length;
            path.arrive();
            let at = path.last_node();
            let from = path.prev_node();
            let out = graph.filtered_neighbors(at, from);
            match out.len() {
                0 => return finish_or_drop(path, trace, cfg),
                1 => {
                    if path.would_revisit(&out[0]) {
                        return finish_or_drop(path, trace, cfg);
                    }
                    path.enter_edge(out[0], overshoot);
                }
                _ => {
                    let i = path.cursor - 1; // the sample that crossed
                    return branch_at_junction(
                        path, &out, i, overshoot, true, trace, graph, cfg,
                    );
                }
            }
        }
    }
}

/// Dead end or blocked continuation: complete if only stop samples
/// remain, otherwise the hypothesis is impossible.
fn finish_or_drop(
    mut path: CandidatePath,
    trace: &SpeedTrace,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    let run_end = zero_run_end(trace, path.cursor, cfg.zero_speed);
    if run_end >= trace.len() {
        path.cursor = trace.len();
        path.complete = true;
        vec![path]
    } else {
        Vec::new()
    }
}

/// First index at or after `i` whose speed is at or above `thresh`.
fn zero_run_end(trace: &SpeedTrace, i: usize, thresh: f64) -> usize {
    let mut k = i;
    while k < trace.len() && trace.samples[k].v < thresh {
        k += 1;
    }
    k
}

/// Expand a path standing at (or crossing) a junction into children.
///
/// `i` is the deciding sample; `consumed` says whether sample `i` was
/// already integrated (mid-motion crossing, with `overshoot` meters
/// carried past the node) or is still pending (standing start).
#[allow(clippy::too_many_arguments)]
fn branch_at_junction(
    path: CandidatePath,
    out: &[Adjacency],
    i: usize,
    overshoot: f64,
    consumed: bool,
    trace: &SpeedTrace,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    let junction = path.last_node();
    let prev = path.prev_node();
    let v = trace.samples[i].v;
    let mut children = Vec::new();

    for adj in out {
        if path.would_revisit(adj) {
            continue;
        }
        let turn: Option<TurnDescriptor> = prev.map(|p| {
            turn_geometry(graph, p, junction, adj.to)
                .expect("walked and adjacent segments exist")
        });
        let feasible = turn
            .as_ref()
            .map_or(true, |t| can_make_turn(v, t, &cfg.turn_params));

        if feasible {
            let mut child = path.clone();
            child.pin_at(junction, i);
            if consumed {
                child.enter_edge(*adj, overshoot);
                child.calc_distance = overshoot;
                child.predicted_distance = overshoot;
            } else {
                child.enter_edge(*adj, 0.0);
            }
            children.push(child);
            continue;
        }

        let turn = turn.expect("infeasible implies a real turn");
        children.extend(reconcile_turn(&path, trace, &turn, adj, i, cfg));
    }
    children
}

/// The two cursor-moving fixes for a turn taken too fast: rewind to the
/// most recent slow-enough sample (compress) and advance to the next
/// one (stretch). Either may be infeasible within the window or the
/// adjustment cap.
pub fn reconcile_turn(
    path: &CandidatePath,
    trace: &SpeedTrace,
    turn: &TurnDescriptor,
    onto: &Adjacency,
    i: usize,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    let junction = turn.at_node;
    let mut variants = Vec::new();

    // Compress: the junction was really reached at an earlier sample.
    let lm_floor = path.last_landmark().trace_index;
    let lo = (i.saturating_sub(cfg.rewind_window)).max(lm_floor + 1);
    for j in (lo..i).rev() {
        if can_make_turn(trace.samples[j].v, turn, &cfg.turn_params) {
            let d = compress_distance(trace, j, i);
            if d <= cfg.max_adjust {
                let mut child = path.clone();
                child.error += d;
                child.pin_at(junction, j);
                child.cursor = j + 1;
                child.enter_edge(*onto, 0.0);
                variants.push(child);
            }
            break;
        }
    }

    // Stretch: wait at the junction for a later slow-enough sample.
    let hi = (i + cfg.rewind_window).min(trace.len().saturating_sub(1));
    for j in (i + 1)..=hi {
        if can_make_turn(trace.samples[j].v, turn, &cfg.turn_params) {
            let d = stretch_distance(trace, i, j);
            if d <= cfg.max_adjust {
                let mut child = path.clone();
                child.error += d;
                child.pin_at(junction, j);
                child.cursor = j + 1;
                child.enter_edge(*onto, 0.0);
                variants.push(child);
            }
            break;
        }
    }
    variants
}

/// Distance uncounted when the cursor rewinds from `i` to `j`.
fn compress_distance(trace: &SpeedTrace, j: usize, i: usize) -> f64 {
    (j..i)
        .map(|k| trace.samples[k].v * (trace.samples[k + 1].t - trace.samples[k].t))
        .sum()
}

/// Distance attributed to samples consumed while waiting at the
/// junction as the cursor advances from `i` to `j`.
fn stretch_distance(trace: &SpeedTrace, i: usize, j: usize) -> f64 {
    ((i + 1)..=j).map(|k| trace.samples[k].v * trace.dt(k)).sum()
}

/// A stop happened away from any intersection. Within tolerance the
/// position snaps to the nearest one for free; beyond it the path is
/// pulled back (compress) or pushed forward (stretch) to the nearest
/// intersection, charging the moved distance. The cursor never moves.
pub fn reconcile_stop(
    path: CandidatePath,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    handle_stop(path, graph, cfg)
}

fn handle_stop(
    path: CandidatePath,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Vec<CandidatePath> {
    let edge = path.edge.expect("stop reconciliation happens mid-edge");
    let lanes = graph.way(edge.way).map(|w| w.lanes).unwrap_or(1);
    let tol = cfg.intersection_tolerance(lanes);

    let behind = find_junction_behind(&path, graph, cfg);
    let ahead = find_junction_ahead(&path, graph, cfg);

    // Close enough to count as stopped at the intersection itself.
    let d_back = behind.as_ref().map(|b| b.distance);
    let d_fwd = ahead.as_ref().map(|a| a.distance);
    let near_back = d_back.is_some_and(|d| d <= tol);
    let near_fwd = d_fwd.is_some_and(|d| d <= tol);
    if near_back || near_fwd {
        let go_back = near_back && (!near_fwd || d_back.unwrap() <= d_fwd.unwrap());
        let mut p = path;
        if go_back {
            apply_pull_back(&mut p, behind.unwrap(), 0.0);
        } else {
            apply_push_forward(&mut p, ahead.unwrap(), 0.0);
        }
        return vec![p];
    }

    let mut variants = Vec::new();
    if let Some(b) = behind {
        let mut child = path.clone();
        let d = b.distance;
        apply_pull_back(&mut child, b, d);
        variants.push(child);
    }
    if let Some(a) = ahead {
        let mut child = path.clone();
        let d = a.distance;
        apply_push_forward(&mut child, a, d);
        variants.push(child);
    }
    variants
}

struct BackTarget {
    walk_index: usize,
    distance: f64,
}

struct ForwardTarget {
    /// Segments to append, ending at the junction node.
    chain: Vec<Adjacency>,
    distance: f64,
}

/// Nearest intersection behind along the walked route, without
/// crossing the last landmark or exceeding the adjustment cap.
fn find_junction_behind(
    path: &CandidatePath,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Option<BackTarget> {
    let max_back = path.predicted_distance.min(cfg.max_adjust);
    let mut d = path.edge.map_or(0.0, |e| e.covered);
    for k in (0..path.nodes.len()).rev() {
        if d > max_back {
            return None;
        }
        // Junction test excludes the arm the vehicle traveled: the
        // inbound arm for visited nodes, the outbound one at the start.
        let exclude = if k > 0 {
            Some(path.nodes[k - 1])
        } else if path.nodes.len() > 1 {
            Some(path.nodes[1])
        } else {
            path.edge.map(|e| e.to)
        };
        if graph.onward_degree(path.nodes[k], exclude) >= 2 {
            return Some(BackTarget { walk_index: k, distance: d });
        }
        if k > 0 {
            d += path.seg_lens[k - 1];
        }
    }
    None
}

/// Nearest intersection ahead along the current way, following
/// pass-through nodes, within the adjustment cap.
fn find_junction_ahead(
    path: &CandidatePath,
    graph: &RoadGraph,
    cfg: &PathingConfig,
) -> Option<ForwardTarget> {
    let edge = path.edge?;
    let mut chain: Vec<Adjacency> = vec![Adjacency {
        to: edge.to,
        way: edge.way,
        length_m: edge.length,
    }];
    let mut d = edge.length - edge.covered;
    let mut from = path.last_node();
    let mut cur = edge.to;
    loop {
        if d > cfg.max_adjust {
            return None;
        }
        let out = graph.filtered_neighbors(cur, Some(from));
        match out.len() {
            0 => return None, // dead end, no intersection this way
            1 => {
                let next = out[0];
                // Repeating an arrival would loop forever.
                let repeats = path.would_revisit(&next)
                    || chain.iter().any(|c| c.to == next.to && c.way == next.way);
                if repeats {
                    return None;
                }
                d += next.length_m;
                from = cur;
                cur = next.to;
                chain.push(next);
            }
            _ => return Some(ForwardTarget { chain, distance: d }),
        }
    }
}

fn apply_pull_back(path: &mut CandidatePath, target: BackTarget, error: f64) {
    path.error += error;
    path.truncate_walk_to(target.walk_index);
    let node = path.last_node();
    path.pin_at(node, path.cursor);
}

fn apply_push_forward(path: &mut CandidatePath, target: ForwardTarget, error: f64) {
    path.error += error;
    // The first chain element is the edge already being traversed.
    path.arrive();
    for adj in target.chain.into_iter().skip(1) {
        path.append_segment(adj);
    }
    path.predicted_distance =
        path.position() - path.last_landmark().distance_along_path;
    let node = path.last_node();
    path.pin_at(node, path.cursor);
}
