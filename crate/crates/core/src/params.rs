use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Physical parameters of the memory system: viscosity `eta`, kernel
/// strength `kappa`, kernel decay rate `lambda`, and spectral shift `nu`.
///
/// The slow eigenvalue branch of the coupled operator accumulates at
/// `-nu0` with `nu0 = kappa/eta + lambda`; every shifted-system operation
/// requires `nu < nu0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    pub eta: f64,
    pub kappa: f64,
    pub lambda: f64,
    #[serde(default)]
    pub nu: f64,
}

impl PhysicalParams {
    pub fn new(eta: f64, kappa: f64, lambda: f64, nu: f64) -> Result<Self> {
        let p = PhysicalParams { eta, kappa, lambda, nu };
        p.validate()?;
        Ok(p)
    }

    /// Unshifted parameters (`nu = 0`).
    pub fn unshifted(eta: f64, kappa: f64, lambda: f64) -> Result<Self> {
        Self::new(eta, kappa, lambda, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::InvalidParams(format!("eta must be positive, got {}", self.eta)));
        }
        if !(self.kappa > 0.0 && self.kappa.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "kappa must be positive, got {}",
                self.kappa
            )));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "lambda must be positive, got {}",
                self.lambda
            )));
        }
        if !(self.nu >= 0.0 && self.nu.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "nu must be nonnegative, got {}",
                self.nu
            )));
        }
        if self.nu >= self.nu0() {
            return Err(Error::InvalidParams(format!(
                "nu = {} must lie below the accumulation point nu0 = {}",
                self.nu,
                self.nu0()
            )));
        }
        Ok(())
    }

    /// Accumulation point of the slow eigenvalue branch, `nu0 = kappa/eta + lambda`.
    pub fn nu0(&self) -> f64 {
        self.kappa / self.eta + self.lambda
    }

    /// Effective steady-state viscosity `eta + kappa/lambda`.
    pub fn effective_viscosity(&self) -> f64 {
        self.eta + self.kappa / self.lambda
    }
}
