use serde::{Deserialize, Serialize};

use super::config::{LossKind, Variant};
use super::params::AutoEncoderParams;
use crate::error::{check_dim, Error, Result};
use crate::math::{dot, SeededRng, Vector};

/// Per-sample reconstruction error.
///
/// Squared: `Σ (xᵢ − rᵢ)²`. Cross-entropy:
/// `−Σ [xᵢ ln rᵢ + (1 − xᵢ) ln(1 − rᵢ)]`, defined for targets in `[0, 1]`
/// and reconstructions in the open interval `(0, 1)`.
pub fn reconstruction_loss(kind: LossKind, x: &[f64], x_rec: &[f64]) -> Result<f64> {
    check_dim("reconstruction_loss", x.len(), x_rec.len())?;
    match kind {
        LossKind::Squared => {
            let mut acc = 0.0;
            for (a, b) in x.iter().zip(x_rec) {
                let d = a - b;
                acc += d * d;
            }
            Ok(acc)
        }
        LossKind::CrossEntropy => {
            let mut acc = 0.0;
            for (i, (&t, &r)) in x.iter().zip(x_rec).enumerate() {
                if !(r > 0.0 && r < 1.0) {
                    return Err(Error::Domain(format!(
                        "cross-entropy needs reconstructions in (0,1); component {i} is {r}"
                    )));
                }
                if !(0.0..=1.0).contains(&t) {
                    return Err(Error::Domain(format!(
                        "cross-entropy needs targets in [0,1]; component {i} is {t}"
                    )));
                }
                acc -= t * r.ln() + (1.0 - t) * (1.0 - r).ln();
            }
            Ok(acc)
        }
    }
}

/// `∂loss/∂rᵢ` for one component.
#[inline]
pub(crate) fn loss_derivative(kind: LossKind, target: f64, rec: f64) -> f64 {
    match kind {
        LossKind::Squared => 2.0 * (rec - target),
        LossKind::CrossEntropy => (1.0 - target) / (1.0 - rec) - target / rec,
    }
}

/// Squared Frobenius norm of the encoder Jacobian, in closed form:
/// `Σᵢ f′(hᵢ)² Σⱼ Wᵢⱼ²`, where `f′` is written in terms of the hidden output.
pub fn contractive_penalty(params: &AutoEncoderParams, h: &[f64]) -> Result<f64> {
    check_dim("contractive_penalty", params.hidden(), h.len())?;
    let mut acc = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        let row = params.weights.row(i);
        let s = params.activation.derivative_from_output(hi);
        acc += s * s * dot(row, row);
    }
    Ok(acc)
}

/// Objective value split into its summands; `total = reconstruction + λ·penalty`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ObjectiveValue {
    pub total: f64,
    pub reconstruction: f64,
    pub penalty: f64,
}

impl ObjectiveValue {
    pub(crate) fn compose(variant: &Variant, reconstruction: f64, penalty: f64) -> Self {
        let total = if variant.kind.uses_penalty() {
            reconstruction + variant.lambda * penalty
        } else {
            reconstruction
        };
        ObjectiveValue {
            total,
            reconstruction,
            penalty,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.total.is_finite() && self.reconstruction.is_finite() && self.penalty.is_finite()
    }
}

/// Intermediate values of one forward pass, reused by backpropagation.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCache {
    /// Encoder input: the corrupted sample, or the clean one when the variant
    /// does not corrupt.
    pub corrupted: Vector,
    pub hidden: Vector,
    pub reconstruction: Vector,
}

/// Evaluates one sample's objective, drawing corruption from `rng`.
///
/// The reconstruction target is always the clean `x`. For CAE and CDAE the
/// penalty is taken at the hidden code of the encoder input, so CDAE
/// penalizes the Jacobian at the corrupted point.
pub fn objective(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    x: &[f64],
    rng: &mut SeededRng,
) -> Result<(ObjectiveValue, ForwardCache)> {
    check_dim("objective", params.visible(), x.len())?;
    let corrupted = if variant.kind.uses_corruption() {
        variant.corruption.corrupt(x, rng)?
    } else {
        Vector::from(x.to_vec())
    };
    objective_with_input(variant, params, loss, x, corrupted)
}

/// [`objective`] with the encoder input fixed by the caller.
pub fn objective_with_input(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    x: &[f64],
    corrupted: Vector,
) -> Result<(ObjectiveValue, ForwardCache)> {
    check_dim("objective", params.visible(), x.len())?;
    check_dim("objective input", params.visible(), corrupted.dim())?;
    let hidden = params.encode(&corrupted)?;
    let reconstruction = params.decode(&hidden)?;
    let rec = reconstruction_loss(loss, x, &reconstruction)?;
    let penalty = if variant.kind.uses_penalty() {
        contractive_penalty(params, &hidden)?
    } else {
        0.0
    };
    Ok((
        ObjectiveValue::compose(variant, rec, penalty),
        ForwardCache {
            corrupted,
            hidden,
            reconstruction,
        },
    ))
}
