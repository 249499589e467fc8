use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{dot, squared_distance};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum KernelSpec {
    /// `(x·y + 1)^p`
    Polynomial { p: u32 },
    /// `exp(−‖x − y‖² / 2σ²)`
    Rbf { sigma: f64 },
    /// `tanh(κ x·y − δ)`
    #[serde(rename = "tanh_kernel")]
    Tanh { kappa: f64, delta: f64 },
}

impl KernelSpec {
    /// RBF with the default width `σ = √(dim / 2)`.
    pub fn default_rbf(dim: usize) -> Self {
        KernelSpec::Rbf {
            sigma: (dim as f64 / 2.0).sqrt(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Polynomial { p } if p == 0 => {
                Err(Error::Config("polynomial degree must be >= 1".into()))
            }
            KernelSpec::Rbf { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::Config(format!("rbf sigma must be > 0, got {sigma}")))
            }
            KernelSpec::Tanh { kappa, delta } if !(kappa.is_finite() && delta.is_finite()) => {
                Err(Error::Config("tanh kernel parameters must be finite".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        check_dim("kernel", x.len(), y.len())?;
        Ok(self.eval_unchecked(x, y))
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        match *self {
            KernelSpec::Polynomial { p } => (dot(x, y) + 1.0).powi(p as i32),
            KernelSpec::Rbf { sigma } => (-squared_distance(x, y) / (2.0 * sigma * sigma)).exp(),
            KernelSpec::Tanh { kappa, delta } => (kappa * dot(x, y) - delta).tanh(),
        }
    }
}

pub fn kernel_eval(spec: &KernelSpec, x: &[f64], y: &[f64]) -> Result<f64> {
    spec.eval(x, y)
}
