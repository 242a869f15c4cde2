use serde::{Deserialize, Serialize};

use crate::engine::{Strategy, TaskRecord};
use crate::error::{Error, Result};
use crate::workload::WorkloadConfig;

/// Mean response time: completion minus release, averaged over tasks.
pub fn completion_time(records: &[TaskRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Usage("completion_time of no records".into()));
    }
    let total: f64 = records
        .iter()
        .map(|r| r.completion_time - r.release_time)
        .sum();
    Ok(total / records.len() as f64)
}

/// Mean server-side time: queueing plus compute, averaged over tasks.
pub fn computation_time(records: &[TaskRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Usage("computation_time of no records".into()));
    }
    let total: f64 = records
        .iter()
        .map(|r| r.queue_seconds + r.compute_seconds)
        .sum();
    Ok(total / records.len() as f64)
}

/// Mean per-task fraction of segments matching the oracle labels.
pub fn correctness_rate(records: &[TaskRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Usage("correctness_rate of no records".into()));
    }
    let total: f64 = records.iter().map(|r| r.correctness_fraction).sum();
    Ok(total / records.len() as f64)
}

/// Total hits over total lookups; 0 when no lookups happened (strategies
/// without a reuse table).
pub fn reuse_hit_rate(records: &[TaskRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Usage("reuse_hit_rate of no records".into()));
    }
    let hits: u64 = records.iter().map(|r| r.hits).sum();
    let misses: u64 = records.iter().map(|r| r.misses).sum();
    if hits + misses == 0 {
        return Ok(0.0);
    }
    Ok(hits as f64 / (hits + misses) as f64)
}

/// Fraction of edge compute time the reuse run saved on the identical
/// workload: 1 - sum(reuse compute) / sum(baseline compute), clamped at 0.
pub fn completion_gain(
    reuse_records: &[TaskRecord],
    edge_baseline_records: &[TaskRecord],
) -> Result<f64> {
    if reuse_records.is_empty() || edge_baseline_records.is_empty() {
        return Err(Error::Usage("completion_gain of no records".into()));
    }
    if reuse_records.len() != edge_baseline_records.len() {
        return Err(Error::Usage(format!(
            "workload fingerprint mismatch: {} vs {} records",
            reuse_records.len(),
            edge_baseline_records.len()
        )));
    }
    for (a, b) in reuse_records.iter().zip(edge_baseline_records) {
        if a.task_id != b.task_id || a.release_time.to_bits() != b.release_time.to_bits() {
            return Err(Error::Usage(format!(
                "workload fingerprint mismatch at task {}: the record sets come \
                 from different workloads",
                a.task_id
            )));
        }
    }
    let reuse_total: f64 = reuse_records.iter().map(|r| r.compute_seconds).sum();
    let baseline_total: f64 = edge_baseline_records
        .iter()
        .map(|r| r.compute_seconds)
        .sum();
    if baseline_total <= 0.0 {
        return Err(Error::Usage(
            "completion_gain baseline has zero compute time".into(),
        ));
    }
    Ok((1.0 - reuse_total / baseline_total).max(0.0))
}

/// Nearest-rank percentile: the ceil(p * n)-th smallest value.
pub fn percentile(values: &[f64], p: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Usage("percentile of no values".into()));
    }
    if !(0.0..=1.0).contains(&p) || p == 0.0 {
        return Err(Error::Usage(format!("percentile level {p} outside (0, 1]")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let rank = (p * sorted.len() as f64).ceil() as usize;
    Ok(sorted[rank.max(1) - 1])
}

/// One trial's metric values plus the raw compute total the gain
/// computation needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialMetrics {
    pub trial: u32,
    pub completion_time: f64,
    pub computation_time: f64,
    pub output_correctness: f64,
    pub reuse_hit_rate: f64,
    pub completion_gain: f64,
    pub redundancy_rate: f64,
    pub total_compute_seconds: f64,
}

/// Aggregated experiment result.
///
/// The headline fields (`mean_completion_time`, `mean_computation_time`,
/// the rates, the gain) are 90th-percentile values across the per-trial
/// means listed in `per_trial`. The `pooled_*` fields are 90th-percentile
/// values over individual tasks pooled across trials.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub strategy: Strategy,
    pub num_tasks: usize,
    pub trials: u32,
    pub master_seed: u64,
    pub redundancy_rate: f64,
    pub mean_completion_time: f64,
    pub mean_computation_time: f64,
    pub output_correctness: f64,
    pub reuse_hit_rate: f64,
    pub completion_gain: f64,
    pub pooled_completion_time_p90: f64,
    pub pooled_computation_time_p90: f64,
    pub per_trial: Vec<TrialMetrics>,
    /// Workload settings echo; part of the comparison fingerprint.
    pub workload_config: WorkloadConfig,
}
