use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use log::info;
use serde::Serialize;
use sha2::{Digest, Sha256};

use reuse_sim::engine::{
    run_experiment, run_trial, run_trial_full, Scenario, Strategy, TaskRecord,
};
use reuse_sim::metrics::{percentile, MetricsReport};
use reuse_sim::report::{
    catalog_jsonl, hyperplanes_json, records_csv, report_json, table_snapshot_json,
    workload_jsonl, write_text,
};
use reuse_sim::scenario::ScenarioFile;
use reuse_sim::{Error, Result};

/// Deterministic simulator of computation reuse at the network edge.
///
/// Set RUST_LOG=info for progress output.
#[derive(Parser)]
#[command(name = "reuse-sim", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every strategy listed in the scenario and write reports
    Run {
        /// Scenario JSON; "{}" runs the default experiment
        scenario: PathBuf,
        /// Output directory for reports, records, and the manifest
        #[arg(long)]
        out: PathBuf,
        /// Also dump per-trial catalogs, workloads, table snapshots, and
        /// hyperplanes under <out>/audit
        #[arg(long)]
        audit: bool,
    },
    /// Rerun the scenario for each value of one parameter
    Sweep {
        scenario: PathBuf,
        /// One of: num_tasks, duplicate_probability, table_capacity,
        /// similarity_threshold
        #[arg(long)]
        axis: String,
        /// Comma-separated values, e.g. 10,20,30
        #[arg(long)]
        values: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare two saved reports that share a workload
    Compare {
        /// Report whose compute savings are priced (usually EDGE_REUSE)
        candidate: PathBuf,
        /// Baseline report from the identical workload (usually EDGE_ONLY)
        baseline: PathBuf,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run {
            scenario,
            out,
            audit,
        } => cmd_run(&scenario, &out, audit),
        Command::Sweep {
            scenario,
            axis,
            values,
            out,
        } => cmd_sweep(&scenario, &axis, &values, &out),
        Command::Compare {
            candidate,
            baseline,
        } => cmd_compare(&candidate, &baseline),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => ExitCode::from(3),
                Error::Config(_) | Error::Usage(_) => ExitCode::from(2),
            }
        }
    }
}

fn load_scenario(path: &Path) -> Result<ScenarioFile> {
    let text = fs::read_to_string(path)?;
    ScenarioFile::from_json(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

fn load_report(path: &Path) -> Result<MetricsReport> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: not a report file: {e}", path.display())))
}

fn collect_trials(scenario: &Scenario) -> Result<Vec<Vec<TaskRecord>>> {
    (0..scenario.trials)
        .map(|t| run_trial::<f64>(scenario, t))
        .collect()
}

#[derive(Serialize)]
struct SweepSpec {
    axis: String,
    values: Vec<String>,
}

#[derive(Serialize)]
struct ManifestEntry {
    path: String,
    sha256: String,
}

#[derive(Serialize)]
struct RunManifest {
    scenario_path: String,
    out_dir: String,
    master_seed: u64,
    tool_version: String,
    sweep: Option<SweepSpec>,
    files: Vec<ManifestEntry>,
}

/// Collects written files and their checksums, then seals the manifest.
struct OutputSet {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputSet {
    fn new(root: &Path) -> OutputSet {
        OutputSet {
            root: root.to_path_buf(),
            entries: Vec::new(),
        }
    }

    fn write(&mut self, rel: &str, text: &str) -> Result<()> {
        write_text(&self.root.join(rel), text)?;
        let mut hasher = Sha256::new();
        hasher.update(text.as_bytes());
        self.entries.push(ManifestEntry {
            path: rel.to_string(),
            sha256: format!("{:x}", hasher.finalize()),
        });
        Ok(())
    }

    fn finish(
        mut self,
        scenario_path: &Path,
        master_seed: u64,
        sweep: Option<SweepSpec>,
    ) -> Result<usize> {
        self.entries.sort_by(|a, b| a.path.cmp(&b.path));
        let manifest = RunManifest {
            scenario_path: scenario_path.display().to_string(),
            out_dir: self.root.display().to_string(),
            master_seed,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            sweep,
            files: self.entries,
        };
        let mut text = serde_json::to_string_pretty(&manifest)
            .map_err(|e| Error::Usage(format!("serialize manifest: {e}")))?;
        text.push('\n');
        write_text(&self.root.join("manifest.json"), &text)?;
        Ok(manifest.files.len() + 1)
    }
}

fn run_one(outputs: &mut OutputSet, scenario: &Scenario, subdir: &str) -> Result<MetricsReport> {
    let label = scenario.strategy.label();
    info!(
        "running {label} for {} tasks x {} trials",
        scenario.workload_config.num_tasks, scenario.trials
    );
    let report = run_experiment::<f64>(scenario)?;
    outputs.write(
        &format!("{subdir}report_{label}.json"),
        &report_json(&report)?,
    )?;
    let trials = collect_trials(scenario)?;
    outputs.write(
        &format!("{subdir}records_{label}.csv"),
        &records_csv(scenario.strategy, &trials),
    )?;
    Ok(report)
}

fn cmd_run(scenario_path: &Path, out: &Path, audit: bool) -> Result<()> {
    let file = load_scenario(scenario_path)?;
    let scenarios = file.resolve()?;
    let mut outputs = OutputSet::new(out);
    for scenario in &scenarios {
        let report = run_one(&mut outputs, scenario, "")?;
        println!(
            "{:<11} completion {:.6} s  computation {:.6} s  correctness {:.4}  \
             hit_rate {:.4}  gain {:.4}",
            scenario.strategy.label(),
            report.mean_completion_time,
            report.mean_computation_time,
            report.output_correctness,
            report.reuse_hit_rate,
            report.completion_gain
        );
    }
    if audit {
        let audit_scenario = scenarios
            .iter()
            .find(|s| s.strategy == Strategy::EdgeReuse)
            .unwrap_or(&scenarios[0]);
        for trial in 0..audit_scenario.trials {
            let artifacts = run_trial_full::<f64>(audit_scenario, trial)?;
            outputs.write(
                &format!("audit/catalog_t{trial}.jsonl"),
                &catalog_jsonl(&artifacts.catalog)?,
            )?;
            outputs.write(
                &format!("audit/workload_t{trial}.jsonl"),
                &workload_jsonl(&artifacts.tasks)?,
            )?;
            if let Some(table) = &artifacts.table {
                outputs.write(
                    &format!("audit/hyperplanes_t{trial}.json"),
                    &hyperplanes_json(table.index())?,
                )?;
                outputs.write(
                    &format!("audit/table_t{trial}.json"),
                    &table_snapshot_json(table)?,
                )?;
            }
        }
    }
    let count = outputs.finish(scenario_path, file.master_seed, None)?;
    println!("wrote {count} files to {}", out.display());
    Ok(())
}

#[derive(Clone, Copy)]
enum Axis {
    NumTasks,
    DuplicateProbability,
    TableCapacity,
    SimilarityThreshold,
}

impl Axis {
    fn parse(name: &str) -> Result<Axis> {
        match name {
            "num_tasks" => Ok(Axis::NumTasks),
            "duplicate_probability" => Ok(Axis::DuplicateProbability),
            "table_capacity" => Ok(Axis::TableCapacity),
            "similarity_threshold" => Ok(Axis::SimilarityThreshold),
            _ => Err(Error::Usage(format!(
                "unknown sweep axis {name:?}; valid axes: num_tasks, \
                 duplicate_probability, table_capacity, similarity_threshold"
            ))),
        }
    }

    fn apply(self, file: &mut ScenarioFile, token: &str) -> Result<()> {
        match self {
            Axis::NumTasks => file.workload_config.num_tasks = parse_count(token, "num_tasks")?,
            Axis::TableCapacity => file.table_capacity = parse_count(token, "table_capacity")?,
            Axis::DuplicateProbability => {
                file.workload_config.duplicate_probability =
                    parse_real(token, "duplicate_probability")?
            }
            Axis::SimilarityThreshold => {
                file.similarity_threshold = parse_real(token, "similarity_threshold")?
            }
        }
        Ok(())
    }
}

fn parse_count(token: &str, axis: &str) -> Result<usize> {
    token
        .parse()
        .map_err(|_| Error::Usage(format!("{axis} value {token:?} is not a whole number")))
}

fn parse_real(token: &str, axis: &str) -> Result<f64> {
    token
        .parse()
        .map_err(|_| Error::Usage(format!("{axis} value {token:?} is not a number")))
}

fn split_values(values: &str) -> Result<Vec<String>> {
    let tokens: Vec<String> = values
        .split(',')
        .map(|t| t.trim().to_string())
        .collect();
    if tokens.iter().any(String::is_empty) {
        return Err(Error::Usage(format!(
            "values list {values:?} contains an empty entry"
        )));
    }
    for (i, t) in tokens.iter().enumerate() {
        if tokens[..i].contains(t) {
            return Err(Error::Usage(format!("values list repeats {t:?}")));
        }
    }
    Ok(tokens)
}

const SWEEP_METRICS: [(&str, fn(&MetricsReport) -> f64); 6] = [
    ("redundancy_rate", |r| r.redundancy_rate),
    ("completion_time", |r| r.mean_completion_time),
    ("computation_time", |r| r.mean_computation_time),
    ("output_correctness", |r| r.output_correctness),
    ("reuse_hit_rate", |r| r.reuse_hit_rate),
    ("completion_gain", |r| r.completion_gain),
];

fn cmd_sweep(scenario_path: &Path, axis_name: &str, values: &str, out: &Path) -> Result<()> {
    let base = load_scenario(scenario_path)?;
    let axis = Axis::parse(axis_name)?;
    let tokens = split_values(values)?;
    let mut outputs = OutputSet::new(out);

    let mut rows: Vec<(String, Vec<MetricsReport>)> = Vec::with_capacity(tokens.len());
    for token in &tokens {
        let mut file = base.clone();
        axis.apply(&mut file, token)?;
        let mut reports = Vec::new();
        for scenario in file.resolve()? {
            reports.push(run_one(
                &mut outputs,
                &scenario,
                &format!("{axis_name}_{token}/"),
            )?);
        }
        rows.push((token.clone(), reports));
    }

    let mut tidy = String::from("axis,value,strategy,metric,result\n");
    for (token, reports) in &rows {
        for report in reports {
            for (metric, pick) in SWEEP_METRICS {
                writeln!(
                    tidy,
                    "{axis_name},{token},{},{metric},{}",
                    report.strategy.label(),
                    pick(report)
                )
                .expect("writing to a String cannot fail");
            }
        }
    }
    outputs.write("sweep.csv", &tidy)?;

    for (metric, pick) in SWEEP_METRICS {
        let mut wide = String::from("value");
        for strategy in &base.strategies {
            wide.push(',');
            wide.push_str(strategy.label());
        }
        wide.push('\n');
        for (token, reports) in &rows {
            wide.push_str(token);
            for report in reports {
                write!(wide, ",{}", pick(report)).expect("writing to a String cannot fail");
            }
            wide.push('\n');
        }
        outputs.write(&format!("series_{metric}.csv"), &wide)?;
    }

    let count = outputs.finish(
        scenario_path,
        base.master_seed,
        Some(SweepSpec {
            axis: axis_name.to_string(),
            values: tokens,
        }),
    )?;
    println!("wrote {count} files to {}", out.display());
    Ok(())
}

fn cmd_compare(candidate: &Path, baseline: &Path) -> Result<()> {
    let a = load_report(candidate)?;
    let b = load_report(baseline)?;
    if a.master_seed != b.master_seed
        || a.trials != b.trials
        || a.num_tasks != b.num_tasks
        || a.workload_config != b.workload_config
    {
        return Err(Error::Config(
            "workload fingerprint mismatch: the reports were built from different \
             scenarios (check master_seed, trials, and workload_config)"
                .into(),
        ));
    }
    if a.per_trial.len() != b.per_trial.len() || a.per_trial.is_empty() {
        return Err(Error::Config(
            "the reports carry different trial counts".into(),
        ));
    }
    let mut gains = Vec::with_capacity(a.per_trial.len());
    for (x, y) in a.per_trial.iter().zip(&b.per_trial) {
        if y.total_compute_seconds <= 0.0 {
            return Err(Error::Config(format!(
                "baseline trial {} has zero compute time",
                y.trial
            )));
        }
        gains.push((1.0 - x.total_compute_seconds / y.total_compute_seconds).max(0.0));
    }
    let gain = percentile(&gains, 0.9)?;

    println!(
        "workload: master_seed {}  trials {}  num_tasks {}",
        a.master_seed, a.trials, a.num_tasks
    );
    println!(
        "{:<22} {:>14} {:>14}",
        "metric",
        a.strategy.label(),
        b.strategy.label()
    );
    let table: [(&str, fn(&MetricsReport) -> f64); 5] = [
        ("completion_time", |r| r.mean_completion_time),
        ("computation_time", |r| r.mean_computation_time),
        ("output_correctness", |r| r.output_correctness),
        ("reuse_hit_rate", |r| r.reuse_hit_rate),
        ("redundancy_rate", |r| r.redundancy_rate),
    ];
    for (name, pick) in table {
        println!("{:<22} {:>14.6} {:>14.6}", name, pick(&a), pick(&b));
    }
    println!("{:<22} {:>14.6}", "completion_gain", gain);
    Ok(())
}
