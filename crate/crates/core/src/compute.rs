use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::table::{LookupOutcome, ReuseTable};
use crate::workload::Task;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ServerRole {
    #[serde(rename = "CLOUD")]
    Cloud,
    #[serde(rename = "EDGE")]
    Edge,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ServerProfile {
    pub name: ServerRole,
    pub compute_time_per_segment: f64,
    /// Simultaneous segment executions; segments run in ceil(m / slots)
    /// rounds of one segment-time each.
    pub parallel_slots: usize,
}

impl ServerProfile {
    pub fn default_cloud() -> Self {
        ServerProfile {
            name: ServerRole::Cloud,
            compute_time_per_segment: 0.003,
            parallel_slots: 64,
        }
    }

    pub fn default_edge() -> Self {
        ServerProfile {
            name: ServerRole::Edge,
            compute_time_per_segment: 0.005,
            parallel_slots: 1,
        }
    }

    pub fn validate(&self, field: &str) -> Result<()> {
        if !self.compute_time_per_segment.is_finite() || self.compute_time_per_segment <= 0.0 {
            return Err(Error::Config(format!(
                "{field}.compute_time_per_segment must be > 0 (got {})",
                self.compute_time_per_segment
            )));
        }
        if self.parallel_slots < 1 {
            return Err(Error::Config(format!(
                "{field}.parallel_slots must be >= 1"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Provenance {
    Scratch,
    Reused,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutput {
    /// One label per segment, in segment order.
    pub labels: Vec<u32>,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ReuseStats {
    pub hits: u64,
    pub misses: u64,
}

fn slot_rounds(segments: usize, slots: usize) -> usize {
    segments.div_ceil(slots)
}

/// Computes every segment from scratch. The stand-in detector is exact,
/// so the labels are the truth labels and double as the oracle.
pub fn execute_from_scratch<S: Scalar>(task: &Task<S>, profile: &ServerProfile) -> (TaskOutput, f64) {
    let m = task.segments.len();
    let labels = task.segments.iter().map(|s| s.truth_label).collect();
    let compute_seconds =
        slot_rounds(m, profile.parallel_slots) as f64 * profile.compute_time_per_segment;
    (
        TaskOutput {
            labels,
            provenance: vec![Provenance::Scratch; m],
        },
        compute_seconds,
    )
}

/// Looks up every segment in the reuse table: hits reuse the stored label
/// at lookup cost only, misses compute from scratch and store the result.
/// Total cost is m lookups plus ceil(misses / slots) scratch rounds.
pub fn execute_with_reuse<S: Scalar>(
    task: &Task<S>,
    table: &mut ReuseTable<S>,
    profile: &ServerProfile,
    lookup_seconds: f64,
) -> Result<(TaskOutput, f64, ReuseStats)> {
    let m = task.segments.len();
    let mut labels = Vec::with_capacity(m);
    let mut provenance = Vec::with_capacity(m);
    let mut stats = ReuseStats::default();
    for segment in &task.segments {
        let result = table.lookup(&segment.features)?;
        match result.outcome {
            LookupOutcome::Hit => {
                let id = result.matched_entry.expect("hit carries an entry id");
                let label = table.entry(id).expect("hit entry is live").output_label;
                labels.push(label);
                provenance.push(Provenance::Reused);
                stats.hits += 1;
            }
            LookupOutcome::Miss => {
                table.store(&segment.features, segment.truth_label)?;
                labels.push(segment.truth_label);
                provenance.push(Provenance::Scratch);
                stats.misses += 1;
            }
        }
    }
    let compute_seconds = m as f64 * lookup_seconds
        + slot_rounds(stats.misses as usize, profile.parallel_slots) as f64
            * profile.compute_time_per_segment;
    Ok((TaskOutput { labels, provenance }, compute_seconds, stats))
}

/// Fraction of segments whose label matches the truth label.
pub fn assess_correctness<S>(output: &TaskOutput, task: &Task<S>) -> Result<f64> {
    let m = task.segments.len();
    if output.labels.len() != m || output.provenance.len() != m {
        return Err(Error::Usage(format!(
            "output carries {} labels but the task has {m} segments",
            output.labels.len()
        )));
    }
    let correct = output
        .labels
        .iter()
        .zip(&task.segments)
        .filter(|(label, segment)| **label == segment.truth_label)
        .count();
    Ok(correct as f64 / m as f64)
}
