//! Run-wide numerical settings and the TOML config file that seeds them.

use std::path::Path;

use serde::Deserialize;

use crate::UsageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Json,
    Csv,
}

/// Settings shared by every subcommand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunConfig {
    /// Lattice and Newton tolerance.
    pub tolerance: f64,
    pub ode_rel_tol: f64,
    /// Path clearance around singular points; `None` picks `0.05 · min(1, Im τ)`.
    pub clearance: Option<f64>,
    pub newton_max_iter: usize,
    /// Truncation target for the theta series.
    pub series_tol: f64,
    pub output_format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            tolerance: 1e-10,
            ode_rel_tol: 1e-10,
            clearance: None,
            newton_max_iter: 50,
            series_tol: f64::EPSILON,
            output_format: OutputFormat::Json,
        }
    }
}

/// Contents of a `--config` file. Every key is optional.
///
/// ```toml
/// tolerance = 1e-10
/// ode_rel_tol = 1e-11
/// clearance = 0.04
/// newton_max_iter = 80
/// series_tol = 1e-16
/// output_format = "csv"
/// ```
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub tolerance: Option<f64>,
    pub ode_rel_tol: Option<f64>,
    pub clearance: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub series_tol: Option<f64>,
    pub output_format: Option<OutputFormat>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self, UsageError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| UsageError(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| UsageError(format!("bad config {}: {e}", path.display())))
    }

    /// Fills the unset fields of `self` from `lower`.
    pub fn or(self, lower: ConfigFile) -> ConfigFile {
        ConfigFile {
            tolerance: self.tolerance.or(lower.tolerance),
            ode_rel_tol: self.ode_rel_tol.or(lower.ode_rel_tol),
            clearance: self.clearance.or(lower.clearance),
            newton_max_iter: self.newton_max_iter.or(lower.newton_max_iter),
            series_tol: self.series_tol.or(lower.series_tol),
            output_format: self.output_format.or(lower.output_format),
        }
    }
}

impl RunConfig {
    pub fn from_layers(layers: ConfigFile) -> Result<Self, UsageError> {
        let d = RunConfig::default();
        let cfg = RunConfig {
            tolerance: layers.tolerance.unwrap_or(d.tolerance),
            ode_rel_tol: layers.ode_rel_tol.unwrap_or(d.ode_rel_tol),
            clearance: layers.clearance.or(d.clearance),
            newton_max_iter: layers.newton_max_iter.unwrap_or(d.newton_max_iter),
            series_tol: layers.series_tol.unwrap_or(d.series_tol),
            output_format: layers.output_format.unwrap_or(d.output_format),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), UsageError> {
        let positive = [
            ("tolerance", Some(self.tolerance)),
            ("ode_rel_tol", Some(self.ode_rel_tol)),
            ("series_tol", Some(self.series_tol)),
            ("clearance", self.clearance),
        ];
        for (name, v) in positive {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(UsageError(format!("{name} must be positive, got {v}")));
                }
            }
        }
        if self.newton_max_iter == 0 {
            return Err(UsageError("newton_max_iter must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_layer_wins() {
        let flags = ConfigFile {
            tolerance: Some(1e-8),
            ..Default::default()
        };
        let file: ConfigFile = toml::from_str("tolerance = 1e-6\nnewton_max_iter = 7").unwrap();
        let cfg = RunConfig::from_layers(flags.or(file)).unwrap();
        assert_eq!(cfg.tolerance, 1e-8);
        assert_eq!(cfg.newton_max_iter, 7);
        assert_eq!(cfg.ode_rel_tol, 1e-10);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(toml::from_str::<ConfigFile>("tolerence = 1e-6").is_err());
        let bad = ConfigFile {
            ode_rel_tol: Some(0.0),
            ..Default::default()
        };
        assert!(RunConfig::from_layers(bad).is_err());
        let bad = ConfigFile {
            newton_max_iter: Some(0),
            ..Default::default()
        };
        assert!(RunConfig::from_layers(bad).is_err());
    }
}
