use serde::{Deserialize, Serialize};

use super::Vector;

/// Elementwise squashing nonlinearity shared by the encoder and decoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Sigmoid,
    Tanh,
}

impl Activation {
    #[inline]
    pub fn apply_scalar(self, z: f64) -> f64 {
        match self {
            Activation::Sigmoid => 1.0 / (1.0 + (-z).exp()),
            Activation::Tanh => z.tanh(),
        }
    }

    /// Derivative with respect to the pre-activation, written in terms of
    /// the output `h`: `h(1-h)` for sigmoid, `(1+h)(1-h)` for tanh.
    #[inline]
    pub fn derivative_from_output(self, h: f64) -> f64 {
        match self {
            Activation::Sigmoid => h * (1.0 - h),
            Activation::Tanh => (1.0 + h) * (1.0 - h),
        }
    }

    /// Second derivative with respect to the pre-activation, again in terms
    /// of the output: `d/dz [h(1-h)] = h(1-h)(1-2h)` and
    /// `d/dz [(1+h)(1-h)] = -2h(1+h)(1-h)`.
    #[inline]
    pub fn second_derivative_from_output(self, h: f64) -> f64 {
        let d = self.derivative_from_output(h);
        match self {
            Activation::Sigmoid => d * (1.0 - 2.0 * h),
            Activation::Tanh => -2.0 * h * d,
        }
    }

    pub fn apply(self, z: &[f64]) -> Vector {
        z.iter().map(|&v| self.apply_scalar(v)).collect()
    }

    pub fn apply_in_place(self, z: &mut [f64]) {
        for v in z {
            *v = self.apply_scalar(*v);
        }
    }

    pub fn prime_from_output(self, h: &[f64]) -> Vector {
        h.iter().map(|&v| self.derivative_from_output(v)).collect()
    }

    /// Open interval that bounds the activation's outputs.
    pub fn range(self) -> (f64, f64) {
        match self {
            Activation::Sigmoid => (0.0, 1.0),
            Activation::Tanh => (-1.0, 1.0),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Tanh => "tanh",
        }
    }
}

/// Elementwise activation of `z`.
pub fn activate(kind: Activation, z: &[f64]) -> Vector {
    kind.apply(z)
}

/// Elementwise activation derivative evaluated from outputs `h`.
pub fn activate_prime_from_output(kind: Activation, h: &[f64]) -> Vector {
    kind.prime_from_output(h)
}
