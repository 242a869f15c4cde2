use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde_json::json;

use crate::engine::{Strategy, TaskRecord};
use crate::error::{Error, Result};
use crate::lsh::LshIndex;
use crate::metrics::MetricsReport;
use crate::scalar::Scalar;
use crate::table::ReuseTable;
use crate::workload::{ObjectClass, Task};

pub const RECORDS_CSV_HEADER: &str = "strategy,trial,task_id,release_time,transit_seconds,\
queue_seconds,compute_seconds,completion_time,correctness,hits,misses";

fn to_pretty<T: serde::Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Usage(format!("serialize: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Pretty JSON with a trailing newline. Field order follows the struct,
/// so equal reports serialize to equal bytes.
pub fn report_json(report: &MetricsReport) -> Result<String> {
    to_pretty(report)
}

/// One row per task per trial; floats print in shortest-roundtrip form.
pub fn records_csv(strategy: Strategy, trials: &[Vec<TaskRecord>]) -> String {
    let mut out = String::from(RECORDS_CSV_HEADER);
    out.push('\n');
    for (trial, records) in trials.iter().enumerate() {
        for r in records {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                strategy.label(),
                trial,
                r.task_id,
                r.release_time,
                r.transit_seconds,
                r.queue_seconds,
                r.compute_seconds,
                r.completion_time,
                r.correctness_fraction,
                r.hits,
                r.misses
            )
            .expect("writing to a String cannot fail");
        }
    }
    out
}

pub fn catalog_jsonl<S: Scalar>(catalog: &[ObjectClass<S>]) -> Result<String> {
    let mut out = String::new();
    for class in catalog {
        let line = serde_json::to_string(class)
            .map_err(|e| Error::Usage(format!("serialize: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn workload_jsonl<S: Scalar>(tasks: &[Task<S>]) -> Result<String> {
    let mut out = String::new();
    for task in tasks {
        let line =
            serde_json::to_string(task).map_err(|e| Error::Usage(format!("serialize: {e}")))?;
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}

pub fn hyperplanes_json<S: Scalar>(index: &LshIndex<S>) -> Result<String> {
    to_pretty(&json!({
        "num_tables": index.params().num_tables,
        "signature_bits": index.params().signature_bits,
        "dimension": index.params().dimension,
        "hyperplanes": index.hyperplanes(),
    }))
}

/// Final table state: entries sorted by id plus the lifetime counters.
pub fn table_snapshot_json<S: Scalar>(table: &ReuseTable<S>) -> Result<String> {
    to_pretty(&json!({
        "capacity": table.capacity(),
        "similarity_threshold": table.similarity_threshold(),
        "len": table.len(),
        "store_count": table.store_count(),
        "eviction_count": table.eviction_count(),
        "lookup_count": table.lookup_count(),
        "candidates_scanned": table.candidates_scanned(),
        "entries": table.snapshot(),
    }))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    fs::write(path, text)?;
    Ok(())
}
