use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::math::{init_weights, Activation, Matrix, SeededRng, Vector};

/// Tied-weight autoencoder layer: `h = f(Wx + b)`, `x_rec = f(Wᵀh + c)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AutoEncoderParams {
    /// `d_h × d_v`, shared by encoder and (transposed) decoder.
    pub weights: Matrix,
    pub hidden_bias: Vector,
    pub output_bias: Vector,
    pub activation: Activation,
}

impl AutoEncoderParams {
    /// Uniform fan-in/fan-out weights, zero biases.
    pub fn init(
        visible: usize,
        hidden: usize,
        activation: Activation,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        Ok(AutoEncoderParams {
            weights: init_weights(hidden, visible, rng)?,
            hidden_bias: Vector::zeros(hidden),
            output_bias: Vector::zeros(visible),
            activation,
        })
    }

    pub fn zeros(visible: usize, hidden: usize, activation: Activation) -> Self {
        AutoEncoderParams {
            weights: Matrix::zeros(hidden, visible),
            hidden_bias: Vector::zeros(hidden),
            output_bias: Vector::zeros(visible),
            activation,
        }
    }

    pub fn new(
        weights: Matrix,
        hidden_bias: Vector,
        output_bias: Vector,
        activation: Activation,
    ) -> Result<Self> {
        let p = AutoEncoderParams {
            weights,
            hidden_bias,
            output_bias,
            activation,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_dim("hidden bias", self.hidden(), self.hidden_bias.dim())?;
        check_dim("output bias", self.visible(), self.output_bias.dim())?;
        if !self.is_finite() {
            return Err(Error::Domain("non-finite autoencoder parameters".into()));
        }
        Ok(())
    }

    pub fn visible(&self) -> usize {
        self.weights.cols()
    }

    pub fn hidden(&self) -> usize {
        self.weights.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.weights.is_finite() && self.hidden_bias.is_finite() && self.output_bias.is_finite()
    }

    pub fn encode(&self, x: &[f64]) -> Result<Vector> {
        check_dim("encode", self.visible(), x.len())?;
        let mut h = vec![0.0; self.hidden()];
        self.encode_into(x, &mut h);
        Ok(h.into())
    }

    pub fn decode(&self, h: &[f64]) -> Result<Vector> {
        check_dim("decode", self.hidden(), h.len())?;
        let mut r = vec![0.0; self.visible()];
        self.decode_into(h, &mut r);
        Ok(r.into())
    }

    pub(crate) fn encode_into(&self, x: &[f64], h: &mut [f64]) {
        self.weights.matvec_into(x, h);
        for (v, b) in h.iter_mut().zip(self.hidden_bias.iter()) {
            *v += b;
        }
        self.activation.apply_in_place(h);
    }

    pub(crate) fn decode_into(&self, h: &[f64], r: &mut [f64]) {
        self.weights.matvec_transposed_into(h, r);
        for (v, c) in r.iter_mut().zip(self.output_bias.iter()) {
            *v += c;
        }
        self.activation.apply_in_place(r);
    }
}

/// `f(Wx + b)`
pub fn encode(params: &AutoEncoderParams, x: &[f64]) -> Result<Vector> {
    params.encode(x)
}

/// `f(Wᵀh + c)`
pub fn decode(params: &AutoEncoderParams, h: &[f64]) -> Result<Vector> {
    params.decode(h)
}
