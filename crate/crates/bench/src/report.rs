//! CSV records, JSON-lines span logs and summary statistics.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use splitkit::ExecutionSpan;

use crate::runner::BenchRecord;
use crate::BenchError;

pub const CSV_HEADER: &str = "bench,policy,workers,size,run,wall_ns,steals,splits,consumed";

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_field(text: &str) -> String {
    if text.contains([',', '"', '\n']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

pub fn write_csv(path: &Path, records: &[BenchRecord]) -> Result<(), BenchError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{CSV_HEADER}")?;
        for r in records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                r.bench,
                csv_field(&r.policy),
                r.workers,
                r.size,
                r.run,
                r.wall_ns,
                r.steals,
                r.splits,
                r.consumed.map(|c| c.to_string()).unwrap_or_default()
            )?;
        }
        out.flush()
    };
    write().map_err(io_error(path))
}

pub fn write_spans(path: &Path, spans: &[ExecutionSpan]) -> Result<(), BenchError> {
    let file = File::create(path).map_err(io_error(path))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        for span in spans {
            serde_json::to_writer(&mut out, span)?;
            out.write_all(b"\n")?;
        }
        out.flush()
    };
    write().map_err(io_error(path))
}

/// Reads a span log; blank lines are skipped, anything else must be a span.
pub fn read_spans(path: &Path) -> Result<Vec<ExecutionSpan>, BenchError> {
    let file = File::open(path).map_err(io_error(path))?;
    let mut spans = Vec::new();
    for (index, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_error(path))?;
        if line.trim().is_empty() {
            continue;
        }
        let span = serde_json::from_str(&line).map_err(|e| BenchError::Log {
            path: path.to_path_buf(),
            line: index + 1,
            message: e.to_string(),
        })?;
        spans.push(span);
    }
    Ok(spans)
}

pub fn median(values: &[u64]) -> Option<f64> {
    let mut sorted = values.to_vec();
    sorted.sort_unstable();
    let n = sorted.len();
    match n {
        0 => None,
        _ if n % 2 == 1 => Some(sorted[n / 2] as f64),
        _ => Some((sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0),
    }
}

/// One-line human summary of a batch of runs.
pub fn summary(records: &[BenchRecord]) -> String {
    let Some(first) = records.first() else {
        return "no runs".to_string();
    };
    let wall: Vec<u64> = records.iter().map(|r| r.wall_ns).collect();
    let steals: Vec<u64> = records.iter().map(|r| r.steals).collect();
    let ms = median(&wall).unwrap_or(0.0) / 1e6;
    format!(
        "{} {} workers={} size={} runs={}: median {:.3} ms, median steals {}",
        first.bench,
        first.policy,
        first.workers,
        first.size,
        records.len(),
        ms,
        median(&steals).unwrap_or(0.0)
    )
}
