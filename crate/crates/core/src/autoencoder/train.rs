use serde::{Deserialize, Serialize};

use super::config::{TrainConfig, Variant};
use super::gradients::{corrupt_batch, gradients_at};
use super::params::AutoEncoderParams;
use crate::error::{check_dim, Error, Result};
use crate::math::{Activation, SeededRng, Vector};

/// Loss summary of a training run.
///
/// `total`, `reconstruction` and `penalty` are the means over the final
/// epoch; `trace` holds each epoch's mean total, evaluated batch by batch
/// before the corresponding update.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct LossReport {
    pub total: f64,
    pub reconstruction: f64,
    pub penalty: f64,
    pub trace: Vec<f64>,
}

/// Initializes a `visible → hidden` layer from `cfg.seed` and trains it.
pub fn train<X: AsRef<[f64]> + Sync>(
    variant: &Variant,
    data: &[X],
    hidden: usize,
    activation: Activation,
    cfg: &TrainConfig,
) -> Result<(AutoEncoderParams, LossReport)> {
    let visible = data
        .first()
        .map(|x| x.as_ref().len())
        .ok_or_else(|| Error::Data("training set is empty".into()))?;
    let mut rng = SeededRng::new(cfg.seed);
    let params = AutoEncoderParams::init(visible, hidden, activation, &mut rng)?;
    train_from(variant, params, data, cfg, &mut rng)
}

/// Minibatch SGD from the given starting point.
///
/// Each epoch shuffles the sample order with `rng`; corruption is drawn from
/// the same generator, sequentially, before each batch's gradient pass.
pub fn train_from<X: AsRef<[f64]> + Sync>(
    variant: &Variant,
    mut params: AutoEncoderParams,
    data: &[X],
    cfg: &TrainConfig,
    rng: &mut SeededRng,
) -> Result<(AutoEncoderParams, LossReport)> {
    variant.validate()?;
    params.validate()?;
    if data.is_empty() {
        return Err(Error::Data("training set is empty".into()));
    }
    cfg.validate(data.len())?;
    for x in data {
        check_dim("training sample", params.visible(), x.as_ref().len())?;
    }

    let frozen: Option<Vec<Vector>> = if !cfg.resample_noise && variant.kind.uses_corruption() {
        Some(corrupt_batch(variant, data, rng)?)
    } else {
        None
    };

    let mut report = LossReport::default();
    let mut order: Vec<usize> = (0..data.len()).collect();
    for epoch in 0..cfg.epochs {
        rng.shuffle(&mut order);
        let mut sum_total = 0.0;
        let mut sum_rec = 0.0;
        let mut sum_pen = 0.0;
        for batch in order.chunks(cfg.batch_size) {
            let targets: Vec<&[f64]> = batch.iter().map(|&n| data[n].as_ref()).collect();
            let inputs = match &frozen {
                Some(all) => batch.iter().map(|&n| all[n].clone()).collect(),
                None => corrupt_batch(variant, &targets, rng)?,
            };
            let grads = gradients_at(variant, &params, cfg.loss, &targets, &inputs).map_err(
                |e| match e {
                    Error::Domain(message) => Error::Training { epoch, message },
                    other => other,
                },
            )?;
            if !grads.loss.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: format!("non-finite loss {}", grads.loss.total),
                });
            }
            let weight = batch.len() as f64;
            sum_total += grads.loss.total * weight;
            sum_rec += grads.loss.reconstruction * weight;
            sum_pen += grads.loss.penalty * weight;

            let lr = cfg.learning_rate;
            params.weights.axpy(-lr, &grads.weights)?;
            params.hidden_bias.axpy(-lr, &grads.hidden_bias)?;
            params.output_bias.axpy(-lr, &grads.output_bias)?;
            if !params.is_finite() {
                return Err(Error::Training {
                    epoch,
                    message: "parameters became non-finite".into(),
                });
            }
        }
        let n = data.len() as f64;
        report.total = sum_total / n;
        report.reconstruction = sum_rec / n;
        report.penalty = sum_pen / n;
        report.trace.push(report.total);
    }
    if variant.kind.uses_penalty() {
        report.total = report.reconstruction + variant.lambda * report.penalty;
    }
    Ok((params, report))
}
