use serde::{Deserialize, Serialize};

use langevin_gauss::experiments::{ExperimentConfig, Resolved};
use langevin_gauss::model::ProblemDoc;

/// Everything needed to reproduce a run. Only `wall_clock` varies between reruns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub problem: ProblemDoc,
    /// Effective config: the file's keys with the command-line seed and override folded in.
    pub config: ExperimentConfig,
    pub resolved: Resolved,
    pub seed: u64,
    pub out_dir: String,
    pub tool_version: String,
    pub outputs: Vec<String>,
    pub wall_clock: WallClock,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WallClock {
    pub started_unix: u64,
    pub elapsed_seconds: f64,
}

impl RunManifest {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
