//! Evaluation harness: naive baseline, destination-error reporting,
//! synthetic end-to-end runs and batch drivers.

mod geojson;
mod synth;

pub use geojson::export_geojson;
pub use synth::{
    commute_route, generate_synthetic_trips, make_grid_map, random_walk_route, simulate_drive,
    DriveProfile, GridSpec, SpineSpec, SyntheticTrip,
};

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine, GpsFix};
use crate::map::{NodeId, RoadGraph};
use crate::pathing::{elastic_pathing, CandidatePath, PathingConfig};
use crate::routing::{rerank_top_k, RoutingScoreParams};
use crate::trace::SpeedTrace;

/// Estimation method behind an [`EvalRecord`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "elastic")]
    Elastic,
    #[serde(rename = "elastic+routing")]
    ElasticRouting,
    #[serde(rename = "naive")]
    Naive,
}

/// Outcome of estimating one trace.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRecord {
    pub trace_id: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub true_destination: Option<GpsFix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimated_destination: Option<GpsFix>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub destination_error: Option<f64>,
    pub runtime_s: f64,
    pub explored_count: u64,
    pub method: Method,
}

/// Haversine distance between an estimate and the truth, meters.
pub fn destination_error(estimated: &GpsFix, truth: &GpsFix) -> f64 {
    haversine(estimated, truth)
}

/// Width of each bounded histogram bin, meters.
pub const BIN_WIDTH_M: f64 = 250.0;
/// Errors at or above this land in the overflow bin.
pub const OVERFLOW_M: f64 = 3250.0;
/// 13 bounded bins plus overflow.
pub const BIN_COUNT: usize = 14;

/// Destination-error distribution over a batch: 13 intervals of 250 m
/// spanning [0, 3250) plus an overflow bin. Boundary values land in
/// the upper bin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorHistogram {
    pub bins: Vec<u64>,
    pub total: u64,
    pub percents: Vec<f64>,
}

impl ErrorHistogram {
    pub fn from_errors<I: IntoIterator<Item = f64>>(errors: I) -> Result<Self> {
        let mut bins = vec![0u64; BIN_COUNT];
        let mut total = 0u64;
        for e in errors {
            let idx = ((e / BIN_WIDTH_M).floor() as usize).min(BIN_COUNT - 1);
            bins[idx] += 1;
            total += 1;
        }
        if total == 0 {
            return Err(Error::EmptyInput("no destination errors to bin"));
        }
        let percents = bins
            .iter()
            .map(|&c| 100.0 * c as f64 / total as f64)
            .collect();
        Ok(Self { bins, total, percents })
    }

    /// Fraction of errors below `limit_m` (a bin boundary).
    pub fn rate_within(&self, limit_m: f64) -> f64 {
        let upto = ((limit_m / BIN_WIDTH_M).round() as usize).min(BIN_COUNT);
        let hits: u64 = self.bins[..upto].iter().sum();
        hits as f64 / self.total as f64
    }
}

/// Bin the destination errors of `records`; records without a known
/// truth are skipped.
pub fn bin_report(records: &[EvalRecord]) -> Result<ErrorHistogram> {
    if records.is_empty() {
        return Err(Error::EmptyInput("records"));
    }
    ErrorHistogram::from_errors(records.iter().filter_map(|r| r.destination_error))
}

/// Baseline estimator: integrate the trace distance and take a
/// uniformly random choice at every intersection (the back-edge
/// excluded). Deterministic for a fixed seed.
pub fn naive_guess(
    graph: &RoadGraph,
    start: NodeId,
    trace: &SpeedTrace,
    seed: u64,
) -> Result<CandidatePath> {
    if !graph.contains_node(start) {
        return Err(Error::UnknownNode(start));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: f64 = (1..trace.len())
        .filter(|&i| trace.samples[i].v >= crate::trace::STOP_SPEED_MPS)
        .map(|i| trace.samples[i].v * trace.dt(i))
        .sum();

    let mut path = CandidatePath::new_at_start(start);
    loop {
        let at = path.last_node();
        let prev = path.prev_node();
        let out = graph.filtered_neighbors(at, prev);
        if out.is_empty() {
            break; // dead end before the distance is consumed
        }
        let adj = if out.len() == 1 {
            out[0]
        } else {
            out[rng.gen_range(0..out.len())]
        };
        if remaining < adj.length_m {
            path.enter_edge(adj, remaining);
            break;
        }
        remaining -= adj.length_m;
        path.append_segment(adj);
    }
    path.cursor = trace.len();
    path.complete = true;
    Ok(path)
}

/// One unit of batch work.
#[derive(Debug, Clone)]
pub struct BatchJob {
    pub id: String,
    pub start: NodeId,
    pub trace: SpeedTrace,
    pub truth: Option<GpsFix>,
}

/// Batch estimation settings.
#[derive(Debug, Clone)]
pub struct BatchOptions {
    pub cfg: PathingConfig,
    /// Rerank the top candidates against shortest routes when set.
    pub routing: Option<RoutingScoreParams>,
    pub workers: usize,
}

impl Default for BatchOptions {
    fn default() -> Self {
        Self { cfg: PathingConfig::default(), routing: None, workers: 1 }
    }
}

/// Run elastic pathing over every job, distributing across workers.
/// Records come back in input order regardless of completion order.
pub fn run_batch(graph: &RoadGraph, jobs: &[BatchJob], opts: &BatchOptions) -> Vec<EvalRecord> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.workers.max(1))
        .build()
        .expect("worker pool");
    pool.install(|| {
        use rayon::prelude::*;
        jobs.par_iter().map(|job| evaluate_one(graph, job, opts)).collect()
    })
}

fn evaluate_one(graph: &RoadGraph, job: &BatchJob, opts: &BatchOptions) -> EvalRecord {
    let started = Instant::now();
    let (estimated, explored, method) =
        match elastic_pathing(graph, job.start, &job.trace, &opts.cfg) {
            Ok(outcome) => {
                let explored = outcome.explored_count;
                let calc_dist = job.trace.total_distance();
                let (best, method) = match &opts.routing {
                    Some(p) if !outcome.completes.is_empty() && calc_dist > 0.0 => {
                        let reranked = rerank_top_k(&outcome, graph, job.start, calc_dist, p)
                            .expect("rerank of non-empty outcome");
                        (Some(reranked[0].path.clone()), Method::ElasticRouting)
                    }
                    Some(_) => (outcome.best().cloned(), Method::ElasticRouting),
                    None => (outcome.best().cloned(), Method::Elastic),
                };
                let end = best.and_then(|p| p.endpoint(graph).ok());
                (end, explored, method)
            }
            Err(_) => (None, 0, Method::Elastic),
        };

    let t_end = job.trace.samples.last().map(|s| s.t).unwrap_or(0.0);
    let estimated_destination = estimated.map(|(lat, lon)| GpsFix::new(t_end, lat, lon));
    let dest_err = match (&estimated_destination, &job.truth) {
        (Some(e), Some(t)) => Some(destination_error(e, t)),
        _ => None,
    };
    EvalRecord {
        trace_id: job.id.clone(),
        true_destination: job.truth,
        estimated_destination,
        destination_error: dest_err,
        runtime_s: started.elapsed().as_secs_f64(),
        explored_count: explored,
        method,
    }
}

/// Spread of the naive baseline's within-250 m rate over repeated runs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NaiveSummary {
    pub repeats: usize,
    pub within_250m_min: f64,
    pub within_250m_avg: f64,
    pub within_250m_max: f64,
}

/// The report written by batch and synthetic evaluations.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub records: Vec<EvalRecord>,
    pub histogram: ErrorHistogram,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub naive_baseline: Option<NaiveSummary>,
}

/// Settings of a synthetic end-to-end evaluation.
#[derive(Debug, Clone)]
pub struct SyntheticEvalOptions {
    pub grid: GridSpec,
    pub trips: usize,
    pub seed: u64,
    pub profile: DriveProfile,
    pub cfg: PathingConfig,
    pub routing: Option<RoutingScoreParams>,
    /// Naive-baseline repetitions; 0 skips the baseline.
    pub naive_repeats: usize,
    pub workers: usize,
}

impl Default for SyntheticEvalOptions {
    fn default() -> Self {
        Self {
            grid: GridSpec {
                spine: Some(SpineSpec::default()),
                ..GridSpec::default()
            },
            trips: 50,
            seed: 1,
            profile: DriveProfile::default(),
            cfg: PathingConfig::default(),
            routing: None,
            naive_repeats: 10,
            workers: 1,
        }
    }
}

/// Simulate trips on a synthetic grid, recover each from its start and
/// speed trace alone, and report destination errors.
pub fn eval_synthetic(opts: &SyntheticEvalOptions) -> Result<Report> {
    let graph = make_grid_map(&opts.grid);
    let trips = generate_synthetic_trips(
        &graph,
        &opts.grid,
        opts.trips,
        opts.seed,
        &opts.profile,
        &opts.cfg.turn_params,
    )?;

    let jobs: Vec<BatchJob> = trips
        .iter()
        .enumerate()
        .map(|(i, trip)| BatchJob {
            id: format!("synthetic-{i:03}"),
            start: trip.route[0],
            trace: trip.trace.clone(),
            truth: Some(trip.truth),
        })
        .collect();
    let batch_opts = BatchOptions {
        cfg: opts.cfg,
        routing: opts.routing,
        workers: opts.workers,
    };
    let records = run_batch(&graph, &jobs, &batch_opts);
    let histogram = bin_report(&records)?;

    let naive_baseline = if opts.naive_repeats > 0 {
        let mut rates = Vec::with_capacity(opts.naive_repeats);
        for rep in 0..opts.naive_repeats {
            let mut hits = 0usize;
            for (i, trip) in trips.iter().enumerate() {
                let seed = opts
                    .seed
                    .wrapping_add(0x9e37_79b9)
                    .wrapping_add((rep * trips.len() + i) as u64);
                let guess = naive_guess(&graph, trip.route[0], &trip.trace, seed)?;
                let (lat, lon) = guess.endpoint(&graph)?;
                let est = GpsFix::new(trip.truth.t, lat, lon);
                if destination_error(&est, &trip.truth) < 250.0 {
                    hits += 1;
                }
            }
            rates.push(hits as f64 / trips.len() as f64);
        }
        let min = rates.iter().copied().fold(f64::INFINITY, f64::min);
        let max = rates.iter().copied().fold(0.0_f64, f64::max);
        let avg = rates.iter().sum::<f64>() / rates.len() as f64;
        Some(NaiveSummary {
            repeats: opts.naive_repeats,
            within_250m_min: min,
            within_250m_avg: avg,
            within_250m_max: max,
        })
    } else {
        None
    };

    Ok(Report { records, histogram, naive_baseline })
}
