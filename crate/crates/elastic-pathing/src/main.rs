//! Command-line front end. All logic lives in the library; this binary
//! only parses arguments, loads files and prints results.

use std::fs::File;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use elastic_pathing::eval::{
    bin_report, export_geojson, eval_synthetic, naive_guess, run_batch, BatchJob, BatchOptions,
    GridSpec, Report, SpineSpec, SyntheticEvalOptions,
};
use elastic_pathing::geo::GpsFix;
use elastic_pathing::map::{
    count_paths_within_distance, parse_osm_file, HighwayFilter, NodeId, RoadGraph,
    DEFAULT_PATH_COUNT_CAP,
};
use elastic_pathing::pathing::{elastic_pathing, PathingConfig};
use elastic_pathing::routing::{rerank_top_k, RoutingScoreParams};
use elastic_pathing::trace::{
    gps_to_speed, read_gps_csv, read_speed_csv, split_trips, write_speed_csv, SpeedTrace,
};

/// Snap lat/lon starts to the nearest graph node within this range.
const START_SNAP_M: f64 = 100.0;

#[derive(Parser)]
#[command(name = "elastic-pathing", version, about = "Route and destination estimation from speed traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit one speed trace onto a map from a start position.
    Path(PathArgs),
    /// Estimate a directory of traces and write a report.
    Batch(BatchArgs),
    /// Simulate trips on a synthetic grid and measure recovery.
    EvalSynthetic(EvalSyntheticArgs),
    /// Count distinct paths reachable within a road distance.
    CountPaths(CountPathsArgs),
    /// Convert a GPS track to a speed trace.
    Gps2speed(Gps2SpeedArgs),
    /// Split a recording into trips.
    Split(SplitArgs),
}

#[derive(Args)]
struct PathArgs {
    #[arg(long, value_name = "FILE.osm")]
    map: PathBuf,
    #[arg(long, value_name = "FILE.csv")]
    trace: PathBuf,
    /// Start as "LAT,LON" or a bare node id.
    #[arg(long)]
    start: String,
    #[arg(long, default_value_t = 1.1)]
    delta: f64,
    /// Rerank the top candidates against shortest-route distances.
    #[arg(long)]
    routing: bool,
    /// Weight of the path-fit error in the combined score.
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
    /// Disable the speed-limit pruning rule.
    #[arg(long)]
    no_speed_limits: bool,
    /// Write the result as GeoJSON here.
    #[arg(long, value_name = "OUT.json")]
    geojson: Option<PathBuf>,
}

#[derive(Args)]
struct BatchArgs {
    #[arg(long, value_name = "FILE.osm")]
    map: PathBuf,
    /// Directory of speed CSVs, one trip each.
    #[arg(long, value_name = "DIR")]
    traces: PathBuf,
    /// CSV mapping trace file names to starts:
    /// `trace,lat,lon[,dest_lat,dest_lon]`.
    #[arg(long, value_name = "FILE.csv")]
    starts: PathBuf,
    #[arg(long, value_name = "report.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Seed for the optional naive baseline.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also run the naive baseline this many times per trace.
    #[arg(long, default_value_t = 0)]
    naive_repeats: usize,
    #[arg(long)]
    routing: bool,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Args)]
struct EvalSyntheticArgs {
    /// Grid side length in nodes.
    #[arg(long, default_value_t = 10)]
    grid: usize,
    /// Street spacing, meters.
    #[arg(long, default_value_t = 150.0)]
    spacing: f64,
    #[arg(long, default_value_t = 50)]
    trips: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_name = "report.json")]
    out: PathBuf,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Naive-baseline repetitions (0 disables).
    #[arg(long, default_value_t = 10)]
    repeats: usize,
    /// Junction stop probability of the simulated driver.
    #[arg(long, default_value_t = 0.6)]
    stop_probability: f64,
    /// Build a plain grid without the highway spine.
    #[arg(long)]
    no_spine: bool,
    #[arg(long)]
    routing: bool,
    #[arg(long, default_value_t = 0.5)]
    beta: f64,
}

#[derive(Args)]
struct CountPathsArgs {
    #[arg(long, value_name = "FILE.osm")]
    map: PathBuf,
    #[arg(long)]
    start: String,
    #[arg(long, value_name = "METERS")]
    radius: f64,
    #[arg(long, default_value_t = DEFAULT_PATH_COUNT_CAP)]
    cap: u64,
}

#[derive(Args)]
struct Gps2SpeedArgs {
    #[arg(long = "in", value_name = "gps.csv")]
    input: PathBuf,
    #[arg(long, value_name = "speed.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long = "in", value_name = "speed.csv")]
    input: PathBuf,
    #[arg(long, value_name = "DIR")]
    outdir: PathBuf,
    /// Zero-speed run length that separates trips, seconds.
    #[arg(long, default_value_t = 300.0)]
    stop_split: f64,
    /// Timestamp gap that separates trips, seconds.
    #[arg(long, default_value_t = 5.0)]
    gap_split: f64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Path(args) => cmd_path(args),
        Command::Batch(args) => cmd_batch(args),
        Command::EvalSynthetic(args) => cmd_eval_synthetic(args),
        Command::CountPaths(args) => cmd_count_paths(args),
        Command::Gps2speed(args) => cmd_gps2speed(args),
        Command::Split(args) => cmd_split(args),
    }
}

fn load_graph(path: &Path) -> Result<RoadGraph> {
    let parsed = parse_osm_file(path, &HighwayFilter::default())
        .with_context(|| format!("parsing {}", path.display()))?;
    if parsed.ways_missing_nodes > 0 {
        eprintln!(
            "warning: dropped {} way(s) referencing missing nodes",
            parsed.ways_missing_nodes
        );
    }
    Ok(parsed.graph)
}

fn resolve_start(graph: &RoadGraph, spec: &str) -> Result<NodeId> {
    if let Ok(id) = spec.parse::<i64>() {
        let id = NodeId(id);
        if graph.contains_node(id) {
            return Ok(id);
        }
        bail!("node id {id} not in graph");
    }
    let (lat, lon) = parse_lat_lon(spec)?;
    Ok(graph.nearest_node(lat, lon, START_SNAP_M)?)
}

fn parse_lat_lon(spec: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        bail!("expected LAT,LON, got {spec:?}");
    }
    Ok((parts[0].parse()?, parts[1].parse()?))
}

fn cmd_path(args: PathArgs) -> Result<()> {
    let graph = load_graph(&args.map)?;
    let start = resolve_start(&graph, &args.start)?;
    let trace = read_speed_csv(File::open(&args.trace)?)?;

    let cfg = PathingConfig {
        delta: args.delta,
        enforce_speed_limit: !args.no_speed_limits,
        ..PathingConfig::default()
    };
    let outcome = elastic_pathing(&graph, start, &trace, &cfg)?;

    if outcome.completes.is_empty() {
        println!("no complete path found ({} candidates explored)", outcome.explored_count);
    } else if args.routing {
        let params = RoutingScoreParams::with_beta(args.beta)?;
        let calc_dist = trace.total_distance();
        let scored = rerank_top_k(&outcome, &graph, start, calc_dist, &params)?;
        println!("rank  comb_score  error_m   endpoint");
        for (i, s) in scored.iter().enumerate() {
            let (lat, lon) = s.path.endpoint(&graph)?;
            println!(
                "{:>4}  {:>10.4}  {:>8.1}  {:.6},{:.6}",
                i + 1,
                s.comb_score,
                s.path.error,
                lat,
                lon
            );
        }
    } else {
        println!("rank  error_m   endpoint");
        for (i, path) in outcome.completes.iter().enumerate() {
            let (lat, lon) = path.endpoint(&graph)?;
            println!("{:>4}  {:>8.1}  {:.6},{:.6}", i + 1, path.error, lat, lon);
        }
    }

    if let Some(out) = args.geojson {
        let doc = export_geojson(&graph, start, &outcome, None)?;
        serde_json::to_writer_pretty(File::create(&out)?, &doc)?;
        println!("wrote {}", out.display());
    }
    Ok(())
}

#[derive(serde::Deserialize)]
struct StartRow {
    trace: String,
    lat: f64,
    lon: f64,
    dest_lat: Option<f64>,
    dest_lon: Option<f64>,
}

fn cmd_batch(args: BatchArgs) -> Result<()> {
    let graph = load_graph(&args.map)?;

    let mut starts: Vec<StartRow> = Vec::new();
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .from_reader(File::open(&args.starts)?);
    for row in rdr.deserialize() {
        starts.push(row?);
    }

    let mut jobs = Vec::new();
    for row in &starts {
        let path = args.traces.join(&row.trace);
        let trace = read_speed_csv(File::open(&path).with_context(|| path.display().to_string())?)?;
        let start = graph.nearest_node(row.lat, row.lon, START_SNAP_M)?;
        let truth = match (row.dest_lat, row.dest_lon) {
            (Some(lat), Some(lon)) => Some(GpsFix::new(0.0, lat, lon)),
            _ => None,
        };
        jobs.push(BatchJob { id: row.trace.clone(), start, trace, truth });
    }
    if jobs.is_empty() {
        bail!("no traces listed in {}", args.starts.display());
    }

    let opts = BatchOptions {
        cfg: PathingConfig::default(),
        routing: if args.routing {
            Some(RoutingScoreParams::with_beta(args.beta)?)
        } else {
            None
        },
        workers: args.workers,
    };
    let mut records = run_batch(&graph, &jobs, &opts);

    if args.naive_repeats > 0 {
        for (i, job) in jobs.iter().enumerate() {
            let seed = args.seed.wrapping_add(i as u64);
            let guess = naive_guess(&graph, job.start, &job.trace, seed)?;
            let (lat, lon) = guess.endpoint(&graph)?;
            let est = GpsFix::new(0.0, lat, lon);
            records.push(elastic_pathing::eval::EvalRecord {
                trace_id: format!("{}#naive", job.id),
                true_destination: job.truth,
                estimated_destination: Some(est),
                destination_error: job
                    .truth
                    .map(|t| elastic_pathing::eval::destination_error(&est, &t)),
                runtime_s: 0.0,
                explored_count: 0,
                method: elastic_pathing::eval::Method::Naive,
            });
        }
    }

    let histogram = bin_report(&records).unwrap_or(elastic_pathing::eval::ErrorHistogram {
        bins: vec![0; 14],
        total: 0,
        percents: vec![0.0; 14],
    });
    let report = Report { records, histogram, naive_baseline: None };
    serde_json::to_writer_pretty(File::create(&args.out)?, &report)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_eval_synthetic(args: EvalSyntheticArgs) -> Result<()> {
    let mut grid = GridSpec {
        n: args.grid,
        spacing_m: args.spacing,
        spine: if args.no_spine { None } else { Some(SpineSpec::default()) },
        ..GridSpec::default()
    };
    if args.grid < 4 {
        grid.spine = None; // too small for ramps
    }
    let opts = SyntheticEvalOptions {
        grid,
        trips: args.trips,
        seed: args.seed,
        profile: elastic_pathing::eval::DriveProfile {
            stop_probability_at_junction: args.stop_probability,
            ..Default::default()
        },
        routing: if args.routing {
            Some(RoutingScoreParams::with_beta(args.beta)?)
        } else {
            None
        },
        naive_repeats: args.repeats,
        workers: args.workers,
        ..Default::default()
    };
    let report = eval_synthetic(&opts)?;

    let within_250 = report.histogram.rate_within(250.0);
    println!("trips: {}", report.records.len());
    println!("within 250 m: {:.1}%", within_250 * 100.0);
    if let Some(n) = &report.naive_baseline {
        println!(
            "naive within 250 m over {} repeats: min {:.1}% avg {:.1}% max {:.1}%",
            n.repeats,
            n.within_250m_min * 100.0,
            n.within_250m_avg * 100.0,
            n.within_250m_max * 100.0
        );
    }
    serde_json::to_writer_pretty(File::create(&args.out)?, &report)?;
    println!("wrote {}", args.out.display());
    Ok(())
}

fn cmd_count_paths(args: CountPathsArgs) -> Result<()> {
    let graph = load_graph(&args.map)?;
    let start = resolve_start(&graph, &args.start)?;
    let result = count_paths_within_distance(&graph, start, args.radius, args.cap)?;
    let record = serde_json::json!({
        "start_node": start.0,
        "radius_m": args.radius,
        "path_count": result.count,
        "capped": result.capped,
    });
    println!("{record}");
    Ok(())
}

fn cmd_gps2speed(args: Gps2SpeedArgs) -> Result<()> {
    let fixes = read_gps_csv(File::open(&args.input)?)?;
    let trace = gps_to_speed(&fixes)?;
    write_speed_csv(File::create(&args.out)?, &trace)?;
    println!("wrote {} ({} samples)", args.out.display(), trace.len());
    Ok(())
}

fn cmd_split(args: SplitArgs) -> Result<()> {
    let trace: SpeedTrace = read_speed_csv(File::open(&args.input)?)?;
    let trips = split_trips(&trace, args.stop_split, args.gap_split);
    std::fs::create_dir_all(&args.outdir)?;
    let stem = args
        .input
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "trip".into());
    for (i, trip) in trips.iter().enumerate() {
        let path = args.outdir.join(format!("{stem}_{i:03}.csv"));
        write_speed_csv(File::create(&path)?, trip)?;
    }
    println!("wrote {} trip(s) to {}", trips.len(), args.outdir.display());
    Ok(())
}
