//! Run configuration: a JSON document, rejected on unknown keys.

use std::path::{Path, PathBuf};

use fracreg::fields::Grid;
use fracreg::flow::FlowConfig;
use fracreg::fraccalc::{FracOrder, Side};
use fracreg::optimize::OptimConfig;
use fracreg::verify::VerifyConfig;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub dims: [usize; 3],
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec { lo: [0.0; 3], hi: [15.0; 3], dims: [16; 3] }
    }
}

impl GridSpec {
    pub fn build(&self) -> Result<Grid, CliError> {
        let bounds = std::array::from_fn(|a| (self.lo[a], self.hi[a]));
        Grid::new(bounds, self.dims).map_err(|e| CliError::Config(format!("grid: {e}")))
    }
}

/// Ground-truth velocity for `synth`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthSpec {
    /// Coefficients are drawn uniformly from `[-amplitude, amplitude]`.
    pub amplitude: f64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec { amplitude: 0.3 }
    }
}

/// File locations; relative paths resolve against the config file's directory,
/// unset ones default to names inside the output directory.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Paths {
    pub template: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub velocity: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub alpha: f64,
    pub side: Side,
    pub horizon: f64,
    pub time_nodes: usize,
    pub k_modes: usize,
    pub margin: usize,
    pub seed: u64,
    pub flow: FlowConfig,
    pub optimizer: OptimConfig,
    pub synth: SynthSpec,
    pub verify: VerifyConfig,
    pub paths: Paths,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            grid: GridSpec::default(),
            alpha: 2.6,
            side: Side::Left,
            horizon: 1.0,
            time_nodes: 3,
            k_modes: 2,
            margin: 2,
            seed: 0,
            flow: FlowConfig::default(),
            optimizer: OptimConfig::default(),
            synth: SynthSpec::default(),
            verify: VerifyConfig::default(),
            paths: Paths::default(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    /// Reads and parses `path`, resolving relative paths against its directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        let mut cfg = RunConfig::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.paths.template, &mut cfg.paths.target, &mut cfg.paths.velocity]
            .into_iter()
            .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    /// Checks every field that does not depend on input files.
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        self.grid.build()?;
        if FracOrder::new(self.alpha).is_err() {
            return bad(format!("alpha {} must be positive", self.alpha));
        }
        if !(self.horizon.is_finite() && self.horizon > 0.0) {
            return bad(format!("horizon {} must be positive", self.horizon));
        }
        if self.time_nodes < 2 {
            return bad(format!("time_nodes {} must be at least 2", self.time_nodes));
        }
        if self.k_modes < 1 {
            return bad("k_modes must be at least 1".into());
        }
        if !(self.synth.amplitude.is_finite() && self.synth.amplitude >= 0.0) {
            return bad(format!("synth.amplitude {} must be non-negative", self.synth.amplitude));
        }
        self.flow.validated().map_err(|e| CliError::Config(format!("flow: {e}")))?;
        self.optimizer.validate().map_err(|e| CliError::Config(format!("optimizer: {e}")))?;
        Ok(())
    }

    pub fn order(&self) -> Result<FracOrder, CliError> {
        FracOrder::new(self.alpha).map_err(|e| CliError::Config(format!("alpha: {e}")))
    }

    pub fn path_or(&self, set: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
        set.clone().unwrap_or_else(|| out.join(name))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        assert_eq!(RunConfig::parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(RunConfig::parse(r#"{"alpah": 2.6}"#).is_err());
        assert!(RunConfig::parse(r#"{"optimizer": {"max_iter": 3}}"#).is_err());
        assert!(RunConfig::parse(r#"{"flow": {"steps": 3}}"#).is_err());
    }

    #[test]
    fn roundtrip() {
        let cfg = RunConfig { alpha: 2.7, side: Side::Right, ..RunConfig::default() };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let cfg = RunConfig { time_nodes: 1, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
        let cfg = RunConfig { grid: GridSpec { dims: [2, 16, 16], ..GridSpec::default() }, ..RunConfig::default() };
        assert!(cfg.validate().is_err());
    }
}
