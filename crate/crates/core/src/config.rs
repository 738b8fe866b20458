//! Run-wide settings shared by the command line and the acceptance suite.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("tol must be positive and finite, got {0}")]
    Tolerance(f64),
    #[error("precision must be at least 64 bits, got {0}")]
    Precision(u64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalConfig {
    pub tol: f64,
    /// Bits of fixed-point precision for phase reduction modulo `2π`.
    pub precision: u64,
    pub seed: u64,
    pub format: OutputFormat,
}

impl Default for GlobalConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            precision: 256,
            seed: 20_240_601,
            format: OutputFormat::Json,
        }
    }
}

impl GlobalConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(ConfigError::Tolerance(self.tol));
        }
        if self.precision < 64 {
            return Err(ConfigError::Precision(self.precision));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = GlobalConfig::default();
        assert_eq!(c.tol, 1e-9);
        assert_eq!(c.precision, 256);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn rejects_bad_values() {
        let c = GlobalConfig {
            tol: 0.0,
            ..GlobalConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::Tolerance(0.0)));
        let c = GlobalConfig {
            precision: 32,
            ..GlobalConfig::default()
        };
        assert_eq!(c.validate(), Err(ConfigError::Precision(32)));
    }
}
