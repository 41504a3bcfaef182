use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::TerminationReason;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Eval,
}

/// One CSV row. Field order is the column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub phase: Phase,
    /// Cumulative distance as a percentage of one lap.
    pub distance_pct: f64,
    /// Cumulative distance over simulated time.
    pub avg_speed_kmh: f64,
    pub episodic_reward: f64,
    pub collision_count: u32,
    pub termination_reason: TerminationReason,
    pub traffic_count: usize,
    pub steps: u64,
}

pub const CSV_HEADER: [&str; 9] = [
    "episode",
    "phase",
    "distance_pct",
    "avg_speed_kmh",
    "episodic_reward",
    "collision_count",
    "termination_reason",
    "traffic_count",
    "steps",
];

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::format("records csv", format!("{other:?}")),
    }
}

pub fn write_records(path: &Path, records: &[EpisodeRecord]) -> Result<()> {
    write_records_to(std::fs::File::create(path)?, records)
}

pub fn write_records_to(writer: impl std::io::Write, records: &[EpisodeRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if records.is_empty() {
        w.write_record(CSV_HEADER).map_err(csv_err)?;
    }
    for r in records {
        w.serialize(r).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records(path: &Path) -> Result<Vec<EpisodeRecord>> {
    if !path.exists() {
        return Err(Error::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).map_err(csv_err)?;
    let header = r.headers().map_err(csv_err)?;
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::format("records csv", format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

/// Exponential moving average: `y_0 = x_0`, `y_t = f y_{t-1} + (1 - f) x_t`.
pub fn smooth(series: &[f64], factor: f64) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&factor) {
        return Err(Error::OutOfDomain {
            what: "smoothing factor",
            value: factor,
        });
    }
    let (&first, rest) = series.split_first().ok_or(Error::Empty("series to smooth"))?;
    let mut out = Vec::with_capacity(series.len());
    out.push(first);
    let mut y = first;
    for &x in rest {
        y = factor * y + (1.0 - factor) * x;
        out.push(y);
    }
    Ok(out)
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}
