//! JSON run configuration. Every field is optional so that command-line
//! flags can fill in or override what a recipe file leaves out.

use std::path::Path;

use serde::Deserialize;
use vrabi::experiments::{Observable, SweepAxis};
use vrabi::{ModelParams, SystemKind};

use crate::CliError;

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamOverrides {
    pub g1: Option<f64>,
    pub g2: Option<f64>,
    pub delta_cap: Option<f64>,
    pub delta_small: Option<f64>,
    pub kappa_a: Option<f64>,
    pub kappa_b: Option<f64>,
}

impl ParamOverrides {
    pub fn merge(&self, over: &ParamOverrides) -> ParamOverrides {
        ParamOverrides {
            g1: over.g1.or(self.g1),
            g2: over.g2.or(self.g2),
            delta_cap: over.delta_cap.or(self.delta_cap),
            delta_small: over.delta_small.or(self.delta_small),
            kappa_a: over.kappa_a.or(self.kappa_a),
            kappa_b: over.kappa_b.or(self.kappa_b),
        }
    }

    /// Fills unset fields from [`ModelParams::default`].
    pub fn resolve(&self) -> ModelParams {
        let d = ModelParams::default();
        ModelParams {
            g1: self.g1.unwrap_or(d.g1),
            g2: self.g2.unwrap_or(d.g2),
            delta_cap: self.delta_cap.unwrap_or(d.delta_cap),
            delta_small: self.delta_small.unwrap_or(d.delta_small),
            kappa_a: self.kappa_a.unwrap_or(d.kappa_a),
            kappa_b: self.kappa_b.unwrap_or(d.kappa_b),
        }
    }
}

/// An explicit list or an inclusive `start..=stop` range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    Values(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CliError> {
        match self {
            GridSpec::Values(v) => Ok(v.clone()),
            GridSpec::Range { start, stop, step } => {
                if !(step.is_finite() && *step != 0.0 && (stop - start) / step >= 0.0) {
                    return Err(CliError::Config(format!("grid step {step} does not lead from {start} to {stop}")));
                }
                let n = ((stop - start) / step).round() as usize;
                Ok((0..=n).map(|k| start + k as f64 * step).collect())
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub name: Option<String>,
    pub kind: Option<SystemKind>,
    #[serde(default, alias = "params")]
    pub fixed: ParamOverrides,
    pub axis: Option<SweepAxis>,
    pub grid: Option<GridSpec>,
    pub horizon: Option<f64>,
    pub observable: Option<Observable>,
    pub output_step: Option<f64>,
    /// End of the first window for damping ratios.
    pub window_split: Option<f64>,
    pub interval: Option<(f64, f64)>,
    pub coarse_step: Option<f64>,
    pub fine_step: Option<f64>,
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<RunConfig, CliError> {
        let Some(path) = path else {
            return Ok(RunConfig::default());
        };
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn kind(&self) -> SystemKind {
        self.kind.unwrap_or(SystemKind::BimodalIdentical)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file_values() {
        let file = ParamOverrides { g2: Some(2.0), delta_cap: Some(-5.0), ..Default::default() };
        let flags = ParamOverrides { g2: Some(1.5), ..Default::default() };
        let p = file.merge(&flags).resolve();
        assert_eq!((p.g2, p.delta_cap, p.g1), (1.5, -5.0, 1.0));
    }

    #[test]
    fn grid_ranges_are_inclusive() {
        let g = GridSpec::Range { start: 2.5, stop: 4.5, step: 0.05 }.values().unwrap();
        assert_eq!(g.len(), 41);
        assert!((g[40] - 4.5).abs() < 1e-12);
        assert!(GridSpec::Range { start: 1.0, stop: 0.0, step: 0.1 }.values().is_err());
    }

    #[test]
    fn parses_recipe_and_rejects_typos() {
        let c: RunConfig = serde_json::from_str(
            r#"{"kind":"bimodal_identical","fixed":{"g2":1.5},"axis":"delta_small","grid":{"start":1,"stop":2,"step":0.5},"observable":{"type":"two_photon_probability"}}"#,
        )
        .unwrap();
        assert_eq!(c.grid.unwrap().values().unwrap(), vec![1.0, 1.5, 2.0]);
        assert!(serde_json::from_str::<RunConfig>(r#"{"horizn": 3}"#).is_err());
    }
}
