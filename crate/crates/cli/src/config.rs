use std::path::Path;

use ddkit::simulate::{log_spaced, RunConfig};
use ddkit::tolerance::{ERROR_CEILING, ERROR_FLOOR};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Optional JSON config. Every field has a default; unknown keys are an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub bath_dim: usize,
    pub norm_bound: f64,
    pub seeds: Vec<u64>,
    pub t_min: f64,
    pub t_max: f64,
    pub t_points: usize,
    pub tau_min: f64,
    pub tau_max: f64,
    pub tau_points: usize,
    pub error_floor: f64,
    pub error_ceiling: f64,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            bath_dim: 4,
            norm_bound: 1.0,
            seeds: (0..8).collect(),
            t_min: 0.02,
            t_max: 0.6,
            t_points: 12,
            tau_min: 1e-3,
            tau_max: 0.05,
            tau_points: 12,
            error_floor: ERROR_FLOOR,
            error_ceiling: ERROR_CEILING,
        }
    }
}

fn grid(min: f64, max: f64, points: usize, what: &str) -> Result<Vec<f64>, CliError> {
    if !(min > 0.0 && max > min && points >= 2 && max.is_finite()) {
        return Err(CliError::Precondition(format!("{what} grid needs 0 < min < max and at least 2 points")));
    }
    Ok(log_spaced(min, max, points))
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Parse { path: path.to_path_buf(), message: e.to_string() })
    }

    pub fn run_config(&self) -> Result<RunConfig, CliError> {
        let run = RunConfig {
            t_grid: grid(self.t_min, self.t_max, self.t_points, "time")?,
            seeds: self.seeds.clone(),
            error_floor: self.error_floor,
            error_ceiling: self.error_ceiling,
        };
        run.validate()?;
        Ok(run)
    }

    pub fn tau_grid(&self) -> Result<Vec<f64>, CliError> {
        grid(self.tau_min, self.tau_max, self.tau_points, "pulse duration")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_config_fills_defaults() {
        let c: Config = serde_json::from_str(r#"{"seeds": [1, 2, 3], "t_points": 6}"#).unwrap();
        assert_eq!(c.seeds, vec![1, 2, 3]);
        assert_eq!(c.t_points, 6);
        assert_eq!(c.bath_dim, 4);
        assert_eq!(c.run_config().unwrap().t_grid.len(), 6);
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(serde_json::from_str::<Config>(r#"{"seed": [1]}"#).is_err());
    }

    #[test]
    fn bad_grid_rejected() {
        let c = Config { t_min: 0.5, t_max: 0.1, ..Config::default() };
        assert!(matches!(c.run_config(), Err(CliError::Precondition(_))));
    }
}
