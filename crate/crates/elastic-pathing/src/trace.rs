//! Speed-trace ingestion: GPS-to-speed conversion, trip splitting and
//! driver-behavior feature extraction.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geo::{haversine, GpsFix};

/// Speeds below this are treated as stopped (about 1 mph). GPS-derived
/// speeds jitter above true zero, so an exact-zero test is too strict.
pub const STOP_SPEED_MPS: f64 = 0.45;

/// Braking intervals must drop by at least this much (10 mph) to count
/// as a braking event.
pub const BRAKING_DROP_MPS: f64 = 4.47;

/// Trips shorter than this are discarded by [`split_trips`].
pub const MIN_TRIP_SECONDS: f64 = 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedSample {
    /// Epoch seconds.
    pub t: f64,
    /// Speed, m/s, never negative.
    pub v: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceSource {
    Speedometer,
    GpsDerived,
}

/// Ordered speed samples for one recording or trip; the algorithm's
/// only observation stream. Timestamps are strictly increasing with a
/// nominal 1 s spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpeedTrace {
    pub samples: Vec<SpeedSample>,
    pub source: TraceSource,
}

impl SpeedTrace {
    pub fn new(samples: Vec<SpeedSample>, source: TraceSource) -> Self {
        Self { samples, source }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Time step attributed to sample `i`: the gap back to its
    /// predecessor. Sample 0 carries no distance of its own.
    pub fn dt(&self, i: usize) -> f64 {
        if i == 0 || i >= self.samples.len() {
            0.0
        } else {
            self.samples[i].t - self.samples[i - 1].t
        }
    }

    /// Total distance by rectangle integration (v_i times the interval
    /// ending at sample i). Matches how GPS-derived speeds were formed,
    /// so re-integration reproduces the source track length.
    pub fn total_distance(&self) -> f64 {
        (1..self.samples.len())
            .map(|i| self.samples[i].v * self.dt(i))
            .sum()
    }

    pub fn duration(&self) -> f64 {
        match (self.samples.first(), self.samples.last()) {
            (Some(a), Some(b)) => b.t - a.t,
            _ => 0.0,
        }
    }
}

/// Per-trip driving style summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BehaviorFeatures {
    pub avg_speed: f64,
    pub avg_braking_decel: f64,
    pub braking_events: usize,
    pub stops: usize,
}

/// Convert a GPS track to instantaneous speeds: each sample divides the
/// haversine distance from the previous fix by the elapsed time.
pub fn gps_to_speed(track: &[GpsFix]) -> Result<SpeedTrace> {
    if track.len() < 2 {
        return Err(Error::TraceTooShort { got: track.len(), need: 2 });
    }
    let mut samples = Vec::with_capacity(track.len());
    samples.push(SpeedSample { t: track[0].t, v: 0.0 });
    for i in 1..track.len() {
        let dt = track[i].t - track[i - 1].t;
        if dt <= 0.0 {
            return Err(Error::NonMonotonicTimestamps { index: i });
        }
        let d = haversine(&track[i - 1], &track[i]);
        samples.push(SpeedSample { t: track[i].t, v: d / dt });
    }
    Ok(SpeedTrace::new(samples, TraceSource::GpsDerived))
}

/// Split a recording into trips.
///
/// A trip boundary is a zero-speed run lasting more than `stop_split`
/// seconds, or a timestamp gap larger than `gap_split` seconds.
/// Leading/trailing zero padding is trimmed to at most one zero sample
/// per end, and trips shorter than 180 s are discarded.
pub fn split_trips(trace: &SpeedTrace, stop_split: f64, gap_split: f64) -> Vec<SpeedTrace> {
    let s = &trace.samples;
    if s.is_empty() {
        return Vec::new();
    }

    // Cut at timestamp gaps first.
    let mut chunks: Vec<(usize, usize)> = Vec::new(); // inclusive ranges
    let mut begin = 0usize;
    for i in 1..s.len() {
        if s[i].t - s[i - 1].t > gap_split {
            chunks.push((begin, i - 1));
            begin = i;
        }
    }
    chunks.push((begin, s.len() - 1));

    // Cut each chunk at long zero-speed runs. The left piece keeps the
    // run's first zero sample, the right piece its last; the middle of
    // the run is discarded.
    let mut pieces: Vec<(usize, usize)> = Vec::new();
    for (lo, hi) in chunks {
        let mut start = lo;
        let mut i = lo;
        while i <= hi {
            if s[i].v < STOP_SPEED_MPS {
                let run_start = i;
                while i + 1 <= hi && s[i + 1].v < STOP_SPEED_MPS {
                    i += 1;
                }
                let run_end = i;
                if s[run_end].t - s[run_start].t > stop_split {
                    pieces.push((start, run_start));
                    start = run_end;
                }
            }
            i += 1;
        }
        pieces.push((start, hi));
    }

    // Trim zero padding and enforce the minimum duration.
    let mut trips = Vec::new();
    for (lo, hi) in pieces {
        let Some(first_move) = (lo..=hi).find(|&i| s[i].v >= STOP_SPEED_MPS) else {
            continue; // no motion at all
        };
        let last_move = (lo..=hi).rev().find(|&i| s[i].v >= STOP_SPEED_MPS).unwrap();
        let t_lo = first_move.saturating_sub(1).max(lo);
        let t_hi = (last_move + 1).min(hi);
        if s[t_hi].t - s[t_lo].t < MIN_TRIP_SECONDS {
            continue;
        }
        trips.push(SpeedTrace::new(s[t_lo..=t_hi].to_vec(), trace.source));
    }
    trips
}

/// Extract behavior features from a single trip.
///
/// Braking events are maximal monotonically non-increasing speed runs
/// with a total drop of at least 10 mph; their per-run mean
/// decelerations are averaged. Stops count maximal zero-speed runs,
/// with the trip's start and end always counting as stops.
pub fn behavior_features(trace: &SpeedTrace) -> Result<BehaviorFeatures> {
    let s = &trace.samples;
    if s.len() < 2 {
        return Err(Error::TraceTooShort { got: s.len(), need: 2 });
    }

    let avg_speed = s.iter().map(|x| x.v).sum::<f64>() / s.len() as f64;

    let mut braking_events = 0usize;
    let mut decel_sum = 0.0;
    let mut run_start = 0usize;
    for i in 1..=s.len() {
        let continues = i < s.len() && s[i].v <= s[i - 1].v;
        if !continues {
            let run_end = i - 1;
            if run_end > run_start {
                let drop = s[run_start].v - s[run_end].v;
                let dur = s[run_end].t - s[run_start].t;
                if drop >= BRAKING_DROP_MPS && dur > 0.0 {
                    braking_events += 1;
                    decel_sum += drop / dur;
                }
            }
            run_start = i;
        }
    }
    let avg_braking_decel = if braking_events > 0 {
        decel_sum / braking_events as f64
    } else {
        0.0
    };

    let mut stops = 0usize;
    let mut in_zero = false;
    for sample in s {
        let stopped = sample.v < STOP_SPEED_MPS;
        if stopped && !in_zero {
            stops += 1;
        }
        in_zero = stopped;
    }
    if s[0].v >= STOP_SPEED_MPS {
        stops += 1; // the departure stop precedes the recording
    }
    if s[s.len() - 1].v >= STOP_SPEED_MPS {
        stops += 1; // the arrival stop follows it
    }

    Ok(BehaviorFeatures { avg_speed, avg_braking_decel, braking_events, stops })
}

/// Squared Pearson correlation of two equally long series.
pub fn linear_correlation(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::TraceTooShort { got: xs.len().min(ys.len()), need: 2 });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("xs"));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("ys"));
    }
    Ok((sxy * sxy) / (sxx * syy))
}

// ---------------------------------------------------------------------------
// CSV input/output. Speed CSV: header `t,v_mps`; GPS CSV: `t,lat,lon`.

pub fn read_speed_csv<R: Read>(reader: R) -> Result<SpeedTrace> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut samples = Vec::new();
    for record in rdr.deserialize() {
        let row: SpeedCsvRow = record?;
        samples.push(SpeedSample { t: row.t, v: row.v_mps });
    }
    for i in 1..samples.len() {
        if samples[i].t <= samples[i - 1].t {
            return Err(Error::NonMonotonicTimestamps { index: i });
        }
    }
    Ok(SpeedTrace::new(samples, TraceSource::Speedometer))
}

pub fn write_speed_csv<W: Write>(writer: W, trace: &SpeedTrace) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(writer);
    wtr.write_record(["t", "v_mps"])?;
    for s in &trace.samples {
        wtr.write_record([format_num(s.t), format_num(s.v)])?;
    }
    wtr.flush()?;
    Ok(())
}

pub fn read_gps_csv<R: Read>(reader: R) -> Result<Vec<GpsFix>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut fixes = Vec::new();
    for record in rdr.deserialize() {
        let row: GpsCsvRow = record?;
        fixes.push(GpsFix::new(row.t, row.lat, row.lon));
    }
    Ok(fixes)
}

fn format_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

#[derive(Deserialize)]
struct SpeedCsvRow {
    t: f64,
    v_mps: f64,
}

#[derive(Deserialize)]
struct GpsCsvRow {
    t: f64,
    lat: f64,
    lon: f64,
}
