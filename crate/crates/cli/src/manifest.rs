//! Run manifests: everything needed to regenerate a command's outputs.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use outage_cr::config::Config;
use serde::{Deserialize, Serialize};

/// The command and its options beyond the shared configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum CommandSpec {
    OutageCapacity { sweep: Option<Sweep> },
    CrCapacity { oracle: bool },
    Simulate,
}

/// `param=start:stop:step`, inclusive of `stop` up to rounding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    Eta,
    Power,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::Eta => "eta",
            SweepParam::Power => "power",
        }
    }
}

impl std::str::FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let (name, range) = s.split_once('=').ok_or("expected param=start:stop:step")?;
        let param = match name.trim() {
            "eta" => SweepParam::Eta,
            "power" => SweepParam::Power,
            other => return Err(format!("cannot sweep `{other}`; use eta or power")),
        };
        let parts: Vec<f64> = range
            .split(':')
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<std::result::Result<_, _>>()?;
        let [start, stop, step] = parts[..] else {
            return Err("expected start:stop:step".into());
        };
        if !(step > 0.0 && step.is_finite() && start.is_finite() && stop >= start) {
            return Err("need finite start <= stop and step > 0".into());
        }
        Ok(Sweep { param, start, stop, step })
    }
}

impl Sweep {
    pub fn values(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub timestamp: String,
    pub seed: Option<u64>,
    pub command: CommandSpec,
    /// Fully resolved configuration, flag overrides applied.
    pub config: Config,
    /// Output file name to contents.
    pub outputs: BTreeMap<String, String>,
}

impl RunManifest {
    pub fn new(command: CommandSpec, config: Config, outputs: BTreeMap<String, String>) -> Self {
        Self {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            timestamp: chrono::Utc::now().to_rfc3339(),
            seed: config.seed,
            command,
            config,
            outputs,
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing manifest {}", path.display()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, serde_json::to_string_pretty(self)? + "\n").with_context(|| format!("writing {}", path.display()))
    }
}
