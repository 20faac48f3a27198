//! JSON configuration: a flat document whose keys are the field names of
//! `MarketParams`, `RunConfig` and `SweepConfig`. Missing keys take the
//! model's default parameterization; unknown keys are rejected.

use std::fs;
use std::path::{Path, PathBuf};

use herding_core::{MarketParams64, RunConfig64, SweepConfig64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error(transparent)]
    Invalid(#[from] herding_core::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub num_agents: usize,
    pub step_size: f64,
    pub threshold_diffusion: f64,
    pub kick_strength: f64,
    pub herding: f64,
    pub reinject_lo: f64,
    pub reinject_hi: f64,
    pub drift: f64,
    pub exo_volatility: f64,
    pub seed: u64,
    pub steps_per_day: usize,
    pub days_per_year: usize,

    pub horizon_years: usize,
    pub burn_in_years: usize,
    pub record_step_level: bool,

    pub c_values: Vec<f64>,
    pub runs_per_value: usize,
    /// Defaults to `seed`.
    pub base_seed: Option<u64>,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let run = RunConfig64::default();
        let sweep = SweepConfig64::default();
        let p = run.params;
        Self {
            num_agents: p.num_agents,
            step_size: p.step_size,
            threshold_diffusion: p.threshold_diffusion,
            kick_strength: p.kick_strength,
            herding: p.herding,
            reinject_lo: p.reinject_lo,
            reinject_hi: p.reinject_hi,
            drift: p.drift,
            exo_volatility: p.exo_volatility,
            seed: p.seed,
            steps_per_day: p.steps_per_day,
            days_per_year: p.days_per_year,
            horizon_years: run.horizon_years,
            burn_in_years: run.burn_in_years,
            record_step_level: run.record_step_level,
            c_values: sweep.c_values,
            runs_per_value: sweep.runs_per_value,
            base_seed: None,
        }
    }
}

/// Fully populated configuration for any command.
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedConfig {
    pub run: RunConfig64,
    pub sweep: SweepConfig64,
}

impl ConfigFile {
    pub fn resolve(&self) -> Result<LoadedConfig, ConfigError> {
        let params = MarketParams64 {
            num_agents: self.num_agents,
            step_size: self.step_size,
            threshold_diffusion: self.threshold_diffusion,
            kick_strength: self.kick_strength,
            herding: self.herding,
            reinject_lo: self.reinject_lo,
            reinject_hi: self.reinject_hi,
            drift: self.drift,
            exo_volatility: self.exo_volatility,
            seed: self.seed,
            steps_per_day: self.steps_per_day,
            days_per_year: self.days_per_year,
        };
        let run = RunConfig64 {
            params,
            horizon_years: self.horizon_years,
            burn_in_years: self.burn_in_years,
            record_step_level: self.record_step_level,
        };
        let sweep = SweepConfig64 {
            c_values: self.c_values.clone(),
            runs_per_value: self.runs_per_value,
            base_seed: self.base_seed.unwrap_or(self.seed),
        };
        run.validate()?;
        sweep.validate()?;
        Ok(LoadedConfig { run, sweep })
    }
}

pub fn parse_config(text: &str) -> Result<LoadedConfig, ConfigError> {
    let file: ConfigFile = serde_json::from_str(text)?;
    file.resolve()
}

pub fn load_config(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let cfg = parse_config("{}").unwrap();
        let p = cfg.run.params;
        assert_eq!(p.num_agents, 1000);
        assert_eq!(p.step_size, 0.000004);
        assert_eq!(p.threshold_diffusion, 0.2);
        assert_eq!(p.kick_strength, 0.2);
        assert_eq!(p.herding, 100.0);
        assert_eq!((p.reinject_lo, p.reinject_hi), (0.05, 0.25));
        assert_eq!((p.drift, p.exo_volatility), (0.0, 1.0));
        assert_eq!((p.steps_per_day, p.days_per_year), (10, 252));
        assert_eq!((cfg.run.horizon_years, cfg.run.burn_in_years), (40, 10));
        assert_eq!(cfg.sweep.c_values.len(), 21);
        assert_eq!(cfg.sweep.runs_per_value, 20);
        assert_eq!(cfg.sweep.base_seed, p.seed);
    }

    #[test]
    fn negative_kick_is_rejected_by_name() {
        let err = parse_config(r#"{"kick_strength": -1}"#).unwrap_err();
        assert!(err.to_string().contains("kick_strength"), "{err}");
    }

    #[test]
    fn odd_population_is_rejected() {
        let err = parse_config(r#"{"num_agents": 1001}"#).unwrap_err();
        assert!(err.to_string().contains("num_agents"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(matches!(
            parse_config(r#"{"kapa": 0.1}"#),
            Err(ConfigError::Parse(_))
        ));
    }

    #[test]
    fn explicit_base_seed_overrides_seed() {
        let cfg = parse_config(r#"{"seed": 5, "base_seed": 9, "c_values": [0, 10]}"#).unwrap();
        assert_eq!(cfg.run.params.seed, 5);
        assert_eq!(cfg.sweep.base_seed, 9);
        assert_eq!(cfg.sweep.c_values, vec![0.0, 10.0]);
    }

    #[test]
    fn missing_file_reports_path() {
        let err = load_config(Path::new("/nonexistent/cfg.json")).unwrap_err();
        assert!(err.to_string().contains("/nonexistent/cfg.json"));
    }
}
