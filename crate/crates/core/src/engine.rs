use serde::{Deserialize, Serialize};

use crate::compute::{
    assess_correctness, execute_from_scratch, execute_with_reuse, ReuseStats, ServerProfile,
    ServerRole,
};
use crate::error::{Error, Result};
use crate::lsh::LshParams;
use crate::metrics::{
    completion_gain, completion_time, computation_time, correctness_rate, percentile,
    reuse_hit_rate, MetricsReport, TrialMetrics,
};
use crate::network::PathProfile;
use crate::rng::mix_seed;
use crate::scalar::Scalar;
use crate::table::ReuseTable;
use crate::workload::{
    build_catalog, generate_workload, measure_redundancy_rate, ObjectClass, Task, WorkloadConfig,
};

const CATALOG_STREAM: u64 = 1;
const WORKLOAD_STREAM: u64 = 2;
const LSH_STREAM: u64 = 3;

/// Where tasks execute and whether the edge consults its reuse table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Strategy {
    #[serde(rename = "CLOUD_ONLY")]
    CloudOnly,
    #[serde(rename = "EDGE_ONLY")]
    EdgeOnly,
    #[serde(rename = "EDGE_REUSE")]
    EdgeReuse,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::CloudOnly, Strategy::EdgeOnly, Strategy::EdgeReuse];

    pub fn label(self) -> &'static str {
        match self {
            Strategy::CloudOnly => "CLOUD_ONLY",
            Strategy::EdgeOnly => "EDGE_ONLY",
            Strategy::EdgeReuse => "EDGE_REUSE",
        }
    }
}

/// One experiment: workload shape, both servers, both network paths,
/// reuse-table settings, the strategy under test, and seeding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub workload_config: WorkloadConfig,
    pub cloud_profile: ServerProfile,
    pub edge_profile: ServerProfile,
    pub cloud_path: PathProfile,
    pub edge_path: PathProfile,
    pub lsh_params: LshParams,
    pub table_capacity: usize,
    pub similarity_threshold: f64,
    /// Reuse-table probe cost per segment, charged on hits and misses.
    pub lookup_seconds: f64,
    /// Size of the label payload returned per segment.
    pub response_bytes_per_segment: u64,
    pub strategy: Strategy,
    pub trials: u32,
    pub master_seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.workload_config.validate()?;
        self.cloud_profile.validate("cloud_profile")?;
        self.edge_profile.validate("edge_profile")?;
        if self.cloud_profile.name != ServerRole::Cloud {
            return Err(Error::Config(
                "cloud_profile.name must be \"CLOUD\"".into(),
            ));
        }
        if self.edge_profile.name != ServerRole::Edge {
            return Err(Error::Config("edge_profile.name must be \"EDGE\"".into()));
        }
        if self.cloud_profile.compute_time_per_segment > self.edge_profile.compute_time_per_segment
        {
            return Err(Error::Config(format!(
                "cloud_profile.compute_time_per_segment ({}) must not exceed the edge's ({})",
                self.cloud_profile.compute_time_per_segment,
                self.edge_profile.compute_time_per_segment
            )));
        }
        self.cloud_path.validate("cloud_path")?;
        self.edge_path.validate("edge_path")?;
        self.lsh_params.validate()?;
        if self.table_capacity < 1 {
            return Err(Error::Config("table_capacity must be >= 1".into()));
        }
        if !(0.0..=2.0).contains(&self.similarity_threshold) {
            return Err(Error::Config(format!(
                "similarity_threshold must lie in [0, 2] (got {})",
                self.similarity_threshold
            )));
        }
        if !self.lookup_seconds.is_finite() || self.lookup_seconds < 0.0 {
            return Err(Error::Config(format!(
                "lookup_seconds must be >= 0 (got {})",
                self.lookup_seconds
            )));
        }
        if self.trials < 1 {
            return Err(Error::Config("trials must be >= 1".into()));
        }
        Ok(())
    }
}

/// Timing and accounting for one task.
///
/// completion_time always equals release_time + transit_seconds +
/// queue_seconds + compute_seconds, summed left to right, so the
/// decomposition can be checked bit for bit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskRecord {
    pub task_id: u64,
    pub release_time: f64,
    pub completion_time: f64,
    pub compute_seconds: f64,
    pub transit_seconds: f64,
    pub queue_seconds: f64,
    pub correctness_fraction: f64,
    pub hits: u64,
    pub misses: u64,
}

/// One trial's records plus the inputs that produced them, for audit
/// dumps and cross-checks.
#[derive(Debug, Clone)]
pub struct TrialArtifacts<S: Scalar> {
    pub trial_index: u32,
    pub records: Vec<TaskRecord>,
    pub redundancy_rate: f64,
    pub catalog: Vec<ObjectClass<S>>,
    pub tasks: Vec<Task<S>>,
    /// Final reuse table; None unless the strategy was EDGE_REUSE.
    pub table: Option<ReuseTable<S>>,
}

pub fn trial_seed(master_seed: u64, trial_index: u32) -> u64 {
    mix_seed(master_seed, trial_index as u64)
}

/// Runs one trial and keeps everything it built.
///
/// The catalog, workload, and LSH hyperplanes draw from separate streams
/// of the trial seed, and the strategy never touches seeding, so all
/// three strategies see the identical task stream at a given
/// (master_seed, trial_index).
pub fn run_trial_full<S: Scalar>(
    scenario: &Scenario,
    trial_index: u32,
) -> Result<TrialArtifacts<S>> {
    scenario.validate()?;
    let seed = trial_seed(scenario.master_seed, trial_index);

    let catalog = build_catalog::<S>(
        scenario.workload_config.catalog_size,
        scenario.lsh_params.dimension,
        mix_seed(seed, CATALOG_STREAM),
    )?;
    let mut workload_config = scenario.workload_config.clone();
    workload_config.seed = mix_seed(seed, WORKLOAD_STREAM);
    let tasks = generate_workload(&workload_config, &catalog)?;
    let redundancy_rate = measure_redundancy_rate(&tasks)?;

    let (profile, path) = match scenario.strategy {
        Strategy::CloudOnly => (&scenario.cloud_profile, &scenario.cloud_path),
        Strategy::EdgeOnly | Strategy::EdgeReuse => (&scenario.edge_profile, &scenario.edge_path),
    };
    let mut table = if scenario.strategy == Strategy::EdgeReuse {
        let mut lsh_params = scenario.lsh_params;
        lsh_params.seed = mix_seed(seed, LSH_STREAM);
        Some(ReuseTable::new(
            scenario.table_capacity,
            lsh_params,
            scenario.similarity_threshold,
        )?)
    } else {
        None
    };

    let mut slot_free = vec![0.0_f64; profile.parallel_slots];
    let mut records = Vec::with_capacity(tasks.len());
    for task in &tasks {
        let response_bytes = scenario.response_bytes_per_segment * task.segments.len() as u64;
        let transit = path.round_trip(task.input_size, response_bytes);
        let arrival = task.release_time + path.one_way_delay(task.input_size);

        let (output, compute, stats) = if let Some(tbl) = table.as_mut() {
            execute_with_reuse(task, tbl, profile, scenario.lookup_seconds)?
        } else {
            let (output, compute) = execute_from_scratch(task, profile);
            (output, compute, ReuseStats::default())
        };

        // min_by keeps the first minimum, so equally free slots fill in
        // index order and the schedule is deterministic.
        let (slot, _) = slot_free
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap())
            .expect("server has at least one slot");
        let start = arrival.max(slot_free[slot]);
        let queue = start - arrival;
        slot_free[slot] = start + compute;

        let correctness = assess_correctness(&output, task)?;
        records.push(TaskRecord {
            task_id: task.task_id,
            release_time: task.release_time,
            completion_time: task.release_time + transit + queue + compute,
            compute_seconds: compute,
            transit_seconds: transit,
            queue_seconds: queue,
            correctness_fraction: correctness,
            hits: stats.hits,
            misses: stats.misses,
        });
    }

    if let Some(tbl) = &table {
        let misses: u64 = records.iter().map(|r| r.misses).sum();
        debug_assert_eq!(misses, tbl.store_count());
    }

    Ok(TrialArtifacts {
        trial_index,
        records,
        redundancy_rate,
        catalog,
        tasks,
        table,
    })
}

pub fn run_trial<S: Scalar>(scenario: &Scenario, trial_index: u32) -> Result<Vec<TaskRecord>> {
    Ok(run_trial_full::<S>(scenario, trial_index)?.records)
}

/// Runs every trial and aggregates the 90th percentile across per-trial
/// values. EDGE_REUSE trials also run an EDGE_ONLY pass on the same trial
/// seed to price the compute the table saved; other strategies report a
/// gain of 0.
pub fn run_experiment<S: Scalar>(scenario: &Scenario) -> Result<MetricsReport> {
    scenario.validate()?;
    let mut per_trial: Vec<TrialMetrics> = Vec::with_capacity(scenario.trials as usize);
    let mut pooled_completion = Vec::new();
    let mut pooled_computation = Vec::new();
    for trial in 0..scenario.trials {
        let artifacts = run_trial_full::<S>(scenario, trial)?;
        let records = &artifacts.records;
        let gain = if scenario.strategy == Strategy::EdgeReuse {
            let mut baseline = scenario.clone();
            baseline.strategy = Strategy::EdgeOnly;
            let baseline_records = run_trial::<S>(&baseline, trial)?;
            completion_gain(records, &baseline_records)?
        } else {
            0.0
        };
        per_trial.push(TrialMetrics {
            trial,
            completion_time: completion_time(records)?,
            computation_time: computation_time(records)?,
            output_correctness: correctness_rate(records)?,
            reuse_hit_rate: reuse_hit_rate(records)?,
            completion_gain: gain,
            redundancy_rate: artifacts.redundancy_rate,
            total_compute_seconds: records.iter().map(|r| r.compute_seconds).sum(),
        });
        for r in records {
            pooled_completion.push(r.completion_time - r.release_time);
            pooled_computation.push(r.queue_seconds + r.compute_seconds);
        }
    }

    let p90 = |pick: fn(&TrialMetrics) -> f64, trials: &[TrialMetrics]| -> Result<f64> {
        let values: Vec<f64> = trials.iter().map(pick).collect();
        percentile(&values, 0.9)
    };
    Ok(MetricsReport {
        strategy: scenario.strategy,
        num_tasks: scenario.workload_config.num_tasks,
        trials: scenario.trials,
        master_seed: scenario.master_seed,
        redundancy_rate: p90(|t| t.redundancy_rate, &per_trial)?,
        mean_completion_time: p90(|t| t.completion_time, &per_trial)?,
        mean_computation_time: p90(|t| t.computation_time, &per_trial)?,
        output_correctness: p90(|t| t.output_correctness, &per_trial)?,
        reuse_hit_rate: p90(|t| t.reuse_hit_rate, &per_trial)?,
        completion_gain: p90(|t| t.completion_gain, &per_trial)?,
        pooled_completion_time_p90: percentile(&pooled_completion, 0.9)?,
        pooled_computation_time_p90: percentile(&pooled_computation, 0.9)?,
        per_trial,
        workload_config: scenario.workload_config.clone(),
    })
}
