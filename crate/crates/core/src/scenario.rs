use serde::{Deserialize, Serialize};

use crate::compute::ServerProfile;
use crate::engine::{Scenario, Strategy};
use crate::error::{Error, Result};
use crate::lsh::LshParams;
use crate::network::PathProfile;
use crate::workload::WorkloadConfig;

/// On-disk scenario schema.
///
/// Every field is optional and falls back to the default experiment.
/// `workload_config` and `lsh_params` accept partial objects; a server
/// profile or path, once present, must be spelled out in full.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScenarioFile {
    pub workload_config: WorkloadConfig,
    pub cloud_profile: ServerProfile,
    pub edge_profile: ServerProfile,
    pub cloud_path: PathProfile,
    pub edge_path: PathProfile,
    pub lsh_params: LshParams,
    pub table_capacity: usize,
    pub similarity_threshold: f64,
    pub lookup_seconds: f64,
    pub response_bytes_per_segment: u64,
    /// Strategies to run, each as its own experiment on shared seeds.
    pub strategies: Vec<Strategy>,
    pub trials: u32,
    pub master_seed: u64,
}

impl Default for ScenarioFile {
    fn default() -> Self {
        ScenarioFile {
            workload_config: WorkloadConfig::default(),
            cloud_profile: ServerProfile::default_cloud(),
            edge_profile: ServerProfile::default_edge(),
            cloud_path: PathProfile::default_cloud_path(),
            edge_path: PathProfile::default_edge_path(),
            lsh_params: LshParams::default(),
            table_capacity: 50,
            similarity_threshold: 0.15,
            lookup_seconds: 5e-5,
            response_bytes_per_segment: 64,
            strategies: Strategy::ALL.to_vec(),
            trials: 10,
            master_seed: 42,
        }
    }
}

impl ScenarioFile {
    pub fn from_json(text: &str) -> Result<Self> {
        let file: ScenarioFile = serde_json::from_str(text)
            .map_err(|e| Error::Config(format!("scenario JSON: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn validate(&self) -> Result<()> {
        if self.strategies.is_empty() {
            return Err(Error::Config(
                "strategies must list at least one strategy".into(),
            ));
        }
        for (i, s) in self.strategies.iter().enumerate() {
            if self.strategies[..i].contains(s) {
                return Err(Error::Config(format!(
                    "strategies lists {} twice",
                    s.label()
                )));
            }
        }
        for strategy in &self.strategies {
            self.scenario_for(*strategy).validate()?;
        }
        Ok(())
    }

    pub fn scenario_for(&self, strategy: Strategy) -> Scenario {
        Scenario {
            workload_config: self.workload_config.clone(),
            cloud_profile: self.cloud_profile,
            edge_profile: self.edge_profile,
            cloud_path: self.cloud_path,
            edge_path: self.edge_path,
            lsh_params: self.lsh_params,
            table_capacity: self.table_capacity,
            similarity_threshold: self.similarity_threshold,
            lookup_seconds: self.lookup_seconds,
            response_bytes_per_segment: self.response_bytes_per_segment,
            strategy,
            trials: self.trials,
            master_seed: self.master_seed,
        }
    }

    /// One validated Scenario per listed strategy, in file order.
    pub fn resolve(&self) -> Result<Vec<Scenario>> {
        self.validate()?;
        Ok(self
            .strategies
            .iter()
            .map(|s| self.scenario_for(*s))
            .collect())
    }
}
