// SPDX-License-Identifier: MIT OR Apache-2.0

//! Optional TOML configuration. Command-line flags override file values.
//!
//! ```toml
//! k = 15
//! beta = 1
//! rule = "optimal-fallback"
//! profile = "standard"            # or a table with custom weights
//! sweep_k = [15, 30, 45, 60]
//! depth = 3
//!
//! [detector]
//! neighborhood = 10
//! sigma = 3.0
//! estimator = "mean"
//!
//! [synth]
//! length = 200
//! noise = 1.0
//! seed = 7
//! base = { kind = "constant", level = 0.0 }
//! events = [{ time = 50, kind = "spike", magnitude = 8.0 }]
//! ```

use std::path::Path;

use serde::Deserialize;
use softed_core::detectors::{Estimator, SyntheticSpec};
use softed_core::nab::ApplicationProfile;
use softed_core::softed::ConsumptionRule;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum ProfileSetting {
    Named(String),
    Custom {
        #[serde(default = "custom_name")]
        name: String,
        weight_tp: f64,
        weight_fp: f64,
        weight_fn: f64,
    },
}

fn custom_name() -> String {
    "custom".to_string()
}

impl ProfileSetting {
    pub fn resolve(&self) -> CliResult<ApplicationProfile> {
        Ok(match self {
            ProfileSetting::Named(name) => ApplicationProfile::by_name(name)?,
            ProfileSetting::Custom {
                name,
                weight_tp,
                weight_fp,
                weight_fn,
            } => ApplicationProfile::new(name.clone(), *weight_tp, *weight_fp, *weight_fn)?,
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DetectorSection {
    pub neighborhood: Option<usize>,
    pub sigma: Option<f64>,
    pub estimator: Option<Estimator>,
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub k: Option<f64>,
    pub beta: Option<f64>,
    pub rule: Option<ConsumptionRule>,
    pub profile: Option<ProfileSetting>,
    pub sweep_k: Option<Vec<f64>>,
    /// Ranking rows compared by `batch`.
    pub depth: Option<usize>,
    #[serde(default)]
    pub detector: DetectorSection,
    pub synth: Option<SyntheticSpec>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        toml::from_str(&text).map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
    }
}

/// Reads a synthetic series recipe from TOML, or JSON when the file ends in `.json`.
pub fn load_synthetic_spec(path: &Path) -> CliResult<SyntheticSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::validation(format!("{}: {e}", path.display())))
}
