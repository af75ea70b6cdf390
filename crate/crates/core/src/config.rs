//! Numeric defaults, loaded from the checked-in `config/defaults.toml`.

use serde::{Deserialize, Serialize};

const DEFAULTS: &str = include_str!("../config/defaults.toml");

/// Environment variable that overrides the braid and loop grid sizes.
pub const GRID_ENV: &str = "SINGFORGE_GRID";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub braid_samples: usize,
    pub loop_samples: usize,
    pub leading_check_samples: usize,
    pub nice_grid: usize,
    pub critical_seed_grid: usize,
    pub max_refinements: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToleranceConfig {
    pub endpoint: f64,
    pub witness_defect: f64,
    pub ladder: f64,
    pub projection_residual: f64,
    pub root_residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub max_freq_cap: usize,
    pub newton_steps: usize,
    pub refine_seeds: usize,
    pub max_k: u32,
    pub max_power_scan: u32,
    pub factor_degree_cap: usize,
    pub primes: Vec<u64>,
    pub max_sign_choices: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Config {
    pub grid: GridConfig,
    pub tolerance: ToleranceConfig,
    pub search: SearchConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot parse configuration: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

impl Default for Config {
    fn default() -> Self {
        Config::from_toml(DEFAULTS).expect("bundled defaults are valid")
    }
}

/// The bundled defaults, parsed once.
pub fn defaults() -> &'static Config {
    static CELL: std::sync::OnceLock<Config> = std::sync::OnceLock::new();
    CELL.get_or_init(Config::default)
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let cfg: Config = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Defaults with the `SINGFORGE_GRID` override applied, if set.
    pub fn from_env() -> Result<Self, ConfigError> {
        let mut cfg = Config::default();
        if let Ok(v) = std::env::var(GRID_ENV) {
            let n: usize = v
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{GRID_ENV}={v} is not a grid size")))?;
            cfg.set_grid(n)?;
        }
        Ok(cfg)
    }

    /// Sets the braid and loop sample counts.
    pub fn set_grid(&mut self, n: usize) -> Result<(), ConfigError> {
        if n < 16 || n % 2 != 0 {
            return Err(ConfigError::Invalid(format!(
                "grid size {n} must be even and at least 16"
            )));
        }
        self.grid.braid_samples = n;
        self.grid.loop_samples = n;
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let g = &self.grid;
        for (name, v) in [
            ("braid_samples", g.braid_samples),
            ("loop_samples", g.loop_samples),
            ("leading_check_samples", g.leading_check_samples),
            ("nice_grid", g.nice_grid),
            ("critical_seed_grid", g.critical_seed_grid),
        ] {
            if v < 8 || v % 2 != 0 {
                return Err(ConfigError::Invalid(format!(
                    "grid.{name} = {v} must be even and at least 8"
                )));
            }
        }
        let t = &self.tolerance;
        for (name, v) in [
            ("endpoint", t.endpoint),
            ("witness_defect", t.witness_defect),
            ("ladder", t.ladder),
            ("projection_residual", t.projection_residual),
            ("root_residual", t.root_residual),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(ConfigError::Invalid(format!(
                    "tolerance.{name} = {v} must be positive"
                )));
            }
        }
        if self.search.primes.iter().any(|&p| p < 3) {
            return Err(ConfigError::Invalid("search.primes must be odd primes".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_parse() {
        let c = Config::default();
        assert_eq!(c.grid.braid_samples, 1024);
        assert_eq!(c.grid.leading_check_samples, 4096);
        assert_eq!(c.search.max_freq_cap, 512);
    }

    #[test]
    fn rejects_odd_grid() {
        let mut c = Config::default();
        assert!(c.set_grid(1023).is_err());
        assert!(c.set_grid(2048).is_ok());
        assert_eq!(c.grid.loop_samples, 2048);
    }
}
