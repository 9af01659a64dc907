//! Long-range integration of the eigenfunction equation.
//!
//! Prüfer runs integrate in ξ with the phase stored as `ψ = θ − ξ`, which
//! keeps the state slowly varying once `V` is small.

pub(crate) mod bc;
mod dopri;
mod prufer;
pub(crate) mod trajectory;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use bc::{basis_superposition, find_minimal_growth_bc, MinimalGrowth, BC_TOLERANCE, SCAN_POINTS};
pub use dopri::{DenseStep, Dopri5, Tolerances, MIN_STEP};
pub use prufer::{
    integrate_direct, integrate_modified_prufer, integrate_prufer, integrate_prufer_capture, Capture,
    ModifiedPruferSolver, PairSample, PairSolver, PruferSolver,
};
pub use trajectory::{l2_growth, wronskian, GrowthFit, States, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    #[default]
    DormandPrince54,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegrationConfig {
    pub rtol: f64,
    pub atol: f64,
    pub max_step: f64,
    /// ξ-spacing of captured samples.
    pub stride: f64,
    pub method: Method,
}

impl Default for IntegrationConfig {
    fn default() -> Self {
        IntegrationConfig { rtol: 1e-10, atol: 1e-12, max_step: 0.2, stride: 0.05, method: Method::DormandPrince54 }
    }
}

impl IntegrationConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::InvalidParameter { field, reason: format!("must be positive, got {v}") })
            }
        };
        positive("rtol", self.rtol)?;
        positive("atol", self.atol)?;
        positive("max_step", self.max_step)?;
        positive("stride", self.stride)?;
        if self.max_step > 0.5 {
            return Err(Error::InvalidParameter {
                field: "max_step",
                reason: format!("must not exceed 0.5, got {}", self.max_step),
            });
        }
        Ok(())
    }

    /// Same settings with both tolerances scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        IntegrationConfig { rtol: self.rtol * factor, atol: self.atol * factor, ..*self }
    }

    pub(crate) fn tolerances(&self) -> Tolerances {
        Tolerances { rtol: self.rtol, atol: self.atol, max_step: self.max_step }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        assert!(IntegrationConfig::default().validate().is_ok());
        let bad = IntegrationConfig { max_step: 0.6, ..Default::default() };
        assert!(bad.validate().is_err());
        let bad = IntegrationConfig { rtol: 0.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }
}
