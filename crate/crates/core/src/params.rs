//! Model parameters. Every frequency and rate is measured in units of the
//! first coupling constant `g1`, and time in units of `1/g1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The two physical arrangements of the two-atom system.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SystemKind {
    /// Identical atoms coupled to two cavity modes `a` and `b`.
    BimodalIdentical,
    /// Atoms with distinct transition frequencies coupled to one mode `a`.
    SingleModeNonidentical,
}

impl SystemKind {
    pub const ALL: [SystemKind; 2] = [SystemKind::BimodalIdentical, SystemKind::SingleModeNonidentical];

    pub fn mode_count(self) -> usize {
        match self {
            SystemKind::BimodalIdentical => 2,
            SystemKind::SingleModeNonidentical => 1,
        }
    }
}

impl std::fmt::Display for SystemKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SystemKind::BimodalIdentical => "bimodal_identical",
            SystemKind::SingleModeNonidentical => "single_mode_nonidentical",
        })
    }
}

/// Closed state spaces: pure-state amplitudes or density matrices with photon loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sector {
    Unitary,
    Dissipative,
}

/// Couplings, detunings and cavity decay constants.
///
/// For the bimodal system `delta_cap = w0 - wa` and `delta_small = w0 - wb`;
/// for the single-mode system `delta_cap = w1 - w` and `delta_small = w2 - w`.
/// `kappa_b` is ignored by the single-mode system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub g1: f64,
    pub g2: f64,
    pub delta_cap: f64,
    pub delta_small: f64,
    #[serde(default)]
    pub kappa_a: f64,
    #[serde(default)]
    pub kappa_b: f64,
}

impl Default for ModelParams {
    /// The parameter point of the bimodal headline run.
    fn default() -> Self {
        ModelParams { g1: 1.0, g2: 1.5, delta_cap: -5.0, delta_small: 3.5, kappa_a: 0.0, kappa_b: 0.0 }
    }
}

impl ModelParams {
    pub fn new(g1: f64, g2: f64, delta_cap: f64, delta_small: f64) -> Self {
        ModelParams { g1, g2, delta_cap, delta_small, kappa_a: 0.0, kappa_b: 0.0 }
    }

    pub fn with_kappa(mut self, kappa_a: f64, kappa_b: f64) -> Self {
        self.kappa_a = kappa_a;
        self.kappa_b = kappa_b;
        self
    }

    pub fn with_delta_small(mut self, delta_small: f64) -> Self {
        self.delta_small = delta_small;
        self
    }

    pub fn with_delta_cap(mut self, delta_cap: f64) -> Self {
        self.delta_cap = delta_cap;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.g1, self.g2, self.delta_cap, self.delta_small, self.kappa_a, self.kappa_b];
        if all.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config(format!("non-finite parameter in {self:?}")));
        }
        if self.g1 <= 0.0 || self.g2 <= 0.0 {
            return Err(Error::Config(format!("couplings must be positive (g1 = {}, g2 = {})", self.g1, self.g2)));
        }
        if self.kappa_a < 0.0 || self.kappa_b < 0.0 {
            return Err(Error::Config(format!(
                "decay rates must be non-negative (kappa_a = {}, kappa_b = {})",
                self.kappa_a, self.kappa_b
            )));
        }
        Ok(())
    }

    /// Rescales dimensioned inputs so that `g1 == 1`.
    pub fn normalized(&self) -> ModelParams {
        let s = self.g1;
        ModelParams {
            g1: 1.0,
            g2: self.g2 / s,
            delta_cap: self.delta_cap / s,
            delta_small: self.delta_small / s,
            kappa_a: self.kappa_a / s,
            kappa_b: self.kappa_b / s,
        }
    }

    pub fn max_coupling(&self) -> f64 {
        self.g1.max(self.g2)
    }

    /// Both detunings exceed five times the larger coupling.
    pub fn is_dispersive(&self) -> bool {
        let g = 5.0 * self.max_coupling();
        self.delta_cap.abs() >= g && self.delta_small.abs() >= g
    }
}
