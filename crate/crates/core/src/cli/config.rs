use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::classical::Branch;
use crate::error::{Error, Result};
use crate::scan::{ScanSpec, SystemKind, DEFAULT_CHECKPOINT_EVERY};

fn default_checkpoint_every() -> usize {
    DEFAULT_CHECKPOINT_EVERY
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<String>,
    #[serde(default)]
    pub overwrite: bool,
    /// Also write the packed binary mirror.
    #[serde(default)]
    pub binary: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    /// Keep a `<name>.ckpt` checkpoint next to the outputs.
    #[serde(default)]
    pub checkpoint: bool,
    #[serde(default = "default_checkpoint_every")]
    pub checkpoint_every: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            output_dir: None,
            overwrite: false,
            binary: false,
            workers: None,
            checkpoint: false,
            checkpoint_every: DEFAULT_CHECKPOINT_EVERY,
        }
    }
}

fn default_count() -> usize {
    500
}

/// Classical trajectories from random starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub system: SystemKind,
    #[serde(default = "default_count")]
    pub starts: usize,
    #[serde(default = "default_count")]
    pub kicks: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_kick_strength")]
    pub kick_strength: f64,
    #[serde(default = "default_one")]
    pub inertia: f64,
    #[serde(default = "default_j_r")]
    pub j_r: f64,
    #[serde(default)]
    pub branch: Branch,
}

fn default_alpha() -> f64 {
    std::f64::consts::FRAC_PI_2
}
fn default_beta() -> f64 {
    3.0
}
fn default_kick_strength() -> f64 {
    0.9
}
fn default_one() -> f64 {
    1.0
}
fn default_j_r() -> f64 {
    9.0
}

impl PhaseSpec {
    pub fn new(system: SystemKind) -> Self {
        PhaseSpec {
            system,
            starts: default_count(),
            kicks: default_count(),
            seed: 0,
            alpha: default_alpha(),
            beta: default_beta(),
            kick_strength: default_kick_strength(),
            inertia: default_one(),
            j_r: default_j_r(),
            branch: Branch::default(),
        }
    }
}

/// Run configuration: `[run]` plus named `[scans.<name>]` and `[phase.<name>]` tables.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub scans: BTreeMap<String, ScanSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub phase: BTreeMap<String, PhaseSpec>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string().trim().replace('\n', " ")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}
