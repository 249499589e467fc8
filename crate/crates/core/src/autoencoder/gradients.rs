//! Analytic backpropagation for the four objectives.
//!
//! Per sample, with encoder input `x̃`, target `x`, `h = f(Wx̃ + b)`,
//! `r = f(Wᵀh + c)` and `s(·) = f′` written in terms of the output:
//!
//! ```text
//! δoutⱼ = ∂ℓ/∂rⱼ · s(rⱼ)                    ∂/∂c = δout
//! δhidᵢ = s(hᵢ) · Σⱼ Wᵢⱼ δoutⱼ               ∂/∂b = δhid
//!       + λ · 2 s(hᵢ) s′(hᵢ) ‖Wᵢ‖²          (penalty through hᵢ)
//! ∂/∂Wᵢⱼ = hᵢ δoutⱼ + δhidᵢ x̃ⱼ               (decoder + encoder paths)
//!        + λ · 2 s(hᵢ)² Wᵢⱼ                  (penalty, direct)
//! ```
//!
//! The minibatch is split into fixed-size chunks evaluated in parallel and
//! summed in chunk order, so results do not depend on the thread count.

use rayon::prelude::*;

use super::config::{LossKind, Variant};
use super::objective::{loss_derivative, reconstruction_loss, ObjectiveValue};
use super::params::AutoEncoderParams;
use crate::error::{check_dim, Error, Result};
use crate::math::{axpy, dot, Matrix, SeededRng, Vector};

const CHUNK: usize = 16;

/// Gradients of the minibatch-mean objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Matrix,
    pub hidden_bias: Vector,
    pub output_bias: Vector,
    /// Mean objective over the minibatch at the current parameters.
    pub loss: ObjectiveValue,
}

/// Corrupts each sample (in order) and returns the mean-objective gradients.
pub fn gradients<X: AsRef<[f64]> + Sync>(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    minibatch: &[X],
    rng: &mut SeededRng,
) -> Result<Gradients> {
    let inputs = corrupt_batch(variant, minibatch, rng)?;
    gradients_at(variant, params, loss, minibatch, &inputs)
}

pub(crate) fn corrupt_batch<X: AsRef<[f64]>>(
    variant: &Variant,
    minibatch: &[X],
    rng: &mut SeededRng,
) -> Result<Vec<Vector>> {
    minibatch
        .iter()
        .map(|x| {
            if variant.kind.uses_corruption() {
                variant.corruption.corrupt(x.as_ref(), rng)
            } else {
                Ok(Vector::from(x.as_ref().to_vec()))
            }
        })
        .collect()
}

struct Partial {
    weights: Matrix,
    hidden_bias: Vec<f64>,
    output_bias: Vec<f64>,
    /// Σₙ s(hₙᵢ)², the coefficient of the direct penalty term.
    penalty_rows: Vec<f64>,
    reconstruction: f64,
    penalty: f64,
}

impl Partial {
    fn zeros(params: &AutoEncoderParams) -> Self {
        Partial {
            weights: Matrix::zeros(params.hidden(), params.visible()),
            hidden_bias: vec![0.0; params.hidden()],
            output_bias: vec![0.0; params.visible()],
            penalty_rows: vec![0.0; params.hidden()],
            reconstruction: 0.0,
            penalty: 0.0,
        }
    }

    fn add(&mut self, other: &Partial) {
        axpy(1.0, other.weights.as_slice(), self.weights.as_mut_slice());
        axpy(1.0, &other.hidden_bias, &mut self.hidden_bias);
        axpy(1.0, &other.output_bias, &mut self.output_bias);
        axpy(1.0, &other.penalty_rows, &mut self.penalty_rows);
        self.reconstruction += other.reconstruction;
        self.penalty += other.penalty;
    }
}

/// Gradients with the encoder inputs supplied by the caller (no randomness).
pub fn gradients_at<X: AsRef<[f64]> + Sync, Y: AsRef<[f64]> + Sync>(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    targets: &[X],
    inputs: &[Y],
) -> Result<Gradients> {
    if targets.is_empty() {
        return Err(Error::EmptyBatch);
    }
    check_dim("gradients inputs", targets.len(), inputs.len())?;
    for (x, xt) in targets.iter().zip(inputs) {
        check_dim("gradients target", params.visible(), x.as_ref().len())?;
        check_dim("gradients input", params.visible(), xt.as_ref().len())?;
    }

    let row_norms: Vec<f64> = (0..params.hidden())
        .map(|i| {
            let row = params.weights.row(i);
            dot(row, row)
        })
        .collect();

    let indices: Vec<usize> = (0..targets.len()).collect();
    let partials: Vec<Result<Partial>> = indices
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Partial::zeros(params);
            let mut scratch = Scratch::new(params);
            for &n in chunk {
                accumulate_sample(
                    variant,
                    params,
                    loss,
                    &row_norms,
                    targets[n].as_ref(),
                    inputs[n].as_ref(),
                    &mut scratch,
                    &mut acc,
                )?;
            }
            Ok(acc)
        })
        .collect();

    let mut total = Partial::zeros(params);
    for p in partials {
        total.add(&p?);
    }

    let scale = 1.0 / targets.len() as f64;
    let mut weights = total.weights;
    if variant.kind.uses_penalty() {
        for (i, &coef) in total.penalty_rows.iter().enumerate() {
            let c = 2.0 * variant.lambda * coef;
            let row = weights.row_mut(i);
            let w_row = params.weights.row(i);
            axpy(c, w_row, row);
        }
    }
    for v in weights.as_mut_slice() {
        *v *= scale;
    }
    let hidden_bias: Vector = total.hidden_bias.iter().map(|v| v * scale).collect();
    let output_bias: Vector = total.output_bias.iter().map(|v| v * scale).collect();
    let loss_value = ObjectiveValue::compose(
        variant,
        total.reconstruction * scale,
        total.penalty * scale,
    );

    Ok(Gradients {
        weights,
        hidden_bias,
        output_bias,
        loss: loss_value,
    })
}

struct Scratch {
    hidden: Vec<f64>,
    rec: Vec<f64>,
    delta_out: Vec<f64>,
    delta_hid: Vec<f64>,
}

impl Scratch {
    fn new(params: &AutoEncoderParams) -> Self {
        Scratch {
            hidden: vec![0.0; params.hidden()],
            rec: vec![0.0; params.visible()],
            delta_out: vec![0.0; params.visible()],
            delta_hid: vec![0.0; params.hidden()],
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn accumulate_sample(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    row_norms: &[f64],
    target: &[f64],
    input: &[f64],
    s: &mut Scratch,
    acc: &mut Partial,
) -> Result<()> {
    let act = params.activation;
    params.encode_into(input, &mut s.hidden);
    params.decode_into(&s.hidden, &mut s.rec);
    acc.reconstruction += reconstruction_loss(loss, target, &s.rec)?;

    for j in 0..s.rec.len() {
        let r = s.rec[j];
        s.delta_out[j] = loss_derivative(loss, target[j], r) * act.derivative_from_output(r);
    }
    axpy(1.0, &s.delta_out, &mut acc.output_bias);

    let penalized = variant.kind.uses_penalty();
    for i in 0..s.hidden.len() {
        let h = s.hidden[i];
        let slope = act.derivative_from_output(h);
        let back = dot(params.weights.row(i), &s.delta_out);
        let mut delta = back * slope;
        if penalized {
            let curvature = act.second_derivative_from_output(h);
            delta += variant.lambda * 2.0 * slope * curvature * row_norms[i];
            acc.penalty += slope * slope * row_norms[i];
            acc.penalty_rows[i] += slope * slope;
        }
        s.delta_hid[i] = delta;
    }
    axpy(1.0, &s.delta_hid, &mut acc.hidden_bias);

    for i in 0..s.hidden.len() {
        let row = acc.weights.row_mut(i);
        let h = s.hidden[i];
        let d = s.delta_hid[i];
        for ((g, &dout), &xin) in row.iter_mut().zip(&s.delta_out).zip(input) {
            *g += h * dout + d * xin;
        }
    }
    Ok(())
}
