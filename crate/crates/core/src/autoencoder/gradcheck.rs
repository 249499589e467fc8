//! Central finite-difference audit of the analytic gradients.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::config::{LossKind, Variant, VariantKind};
use super::gradients::{gradients_at, Gradients};
use super::objective::{objective_with_input, ObjectiveValue};
use super::params::AutoEncoderParams;
use crate::corruption::CorruptionSpec;
use crate::error::{Error, Result};
use crate::math::{Activation, Matrix, SeededRng, Vector};

/// Gradient magnitudes below this are compared in absolute terms.
pub const SCALE_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "param", rename_all = "snake_case")]
pub enum ParamSlot {
    Weight { row: usize, col: usize },
    HiddenBias { index: usize },
    OutputBias { index: usize },
}

impl fmt::Display for ParamSlot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSlot::Weight { row, col } => write!(f, "W[{row}][{col}]"),
            ParamSlot::HiddenBias { index } => write!(f, "b[{index}]"),
            ParamSlot::OutputBias { index } => write!(f, "c[{index}]"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub slot: ParamSlot,
    pub analytic: f64,
    pub numeric: f64,
    pub relative_error: f64,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(SCALE_FLOOR)
}

fn mean_objective<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    targets: &[X],
    inputs: &[Y],
) -> Result<f64> {
    let mut acc = 0.0;
    for (x, xt) in targets.iter().zip(inputs) {
        let input = Vector::from(xt.as_ref().to_vec());
        let (value, _): (ObjectiveValue, _) =
            objective_with_input(variant, params, loss, x.as_ref(), input)?;
        acc += value.total;
    }
    Ok(acc / targets.len() as f64)
}

/// Central differences of the minibatch-mean objective with the encoder
/// inputs held fixed.
pub fn finite_difference_gradients<X: AsRef<[f64]>, Y: AsRef<[f64]>>(
    variant: &Variant,
    params: &AutoEncoderParams,
    loss: LossKind,
    targets: &[X],
    inputs: &[Y],
    step: f64,
) -> Result<Gradients> {
    if targets.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut probe = params.clone();
    let mut central = |get: &mut dyn FnMut(&mut AutoEncoderParams) -> &mut f64| -> Result<f64> {
        let original = *get(&mut probe);
        *get(&mut probe) = original + step;
        let plus = mean_objective(variant, &probe, loss, targets, inputs)?;
        *get(&mut probe) = original - step;
        let minus = mean_objective(variant, &probe, loss, targets, inputs)?;
        *get(&mut probe) = original;
        Ok((plus - minus) / (2.0 * step))
    };

    let (rows, cols) = params.weights.shape();
    let mut weights = Matrix::zeros(rows, cols);
    for i in 0..rows {
        for j in 0..cols {
            let g = central(&mut |p| &mut p.weights.as_mut_slice()[i * cols + j])?;
            weights.set(i, j, g);
        }
    }
    let mut hidden_bias = Vector::zeros(rows);
    for i in 0..rows {
        hidden_bias[i] = central(&mut |p| &mut p.hidden_bias[i])?;
    }
    let mut output_bias = Vector::zeros(cols);
    for j in 0..cols {
        output_bias[j] = central(&mut |p| &mut p.output_bias[j])?;
    }
    let total = mean_objective(variant, params, loss, targets, inputs)?;
    Ok(Gradients {
        weights,
        hidden_bias,
        output_bias,
        loss: ObjectiveValue {
            total,
            ..ObjectiveValue::default()
        },
    })
}

/// Worst coordinate-wise disagreement between two gradient sets.
pub fn compare(analytic: &Gradients, numeric: &Gradients) -> Discrepancy {
    let mut worst = Discrepancy {
        slot: ParamSlot::OutputBias { index: 0 },
        analytic: 0.0,
        numeric: 0.0,
        relative_error: -1.0,
    };
    let mut consider = |slot: ParamSlot, a: f64, n: f64| {
        let e = relative_error(a, n);
        // NaN compares false; route it to the top explicitly.
        if e > worst.relative_error || e.is_nan() && !worst.relative_error.is_nan() {
            worst = Discrepancy {
                slot,
                analytic: a,
                numeric: n,
                relative_error: if e.is_nan() { f64::INFINITY } else { e },
            };
        }
    };
    let cols = analytic.weights.cols();
    for (k, (&a, &n)) in analytic
        .weights
        .as_slice()
        .iter()
        .zip(numeric.weights.as_slice())
        .enumerate()
    {
        consider(ParamSlot::Weight { row: k / cols, col: k % cols }, a, n);
    }
    for (index, (&a, &n)) in analytic.hidden_bias.iter().zip(numeric.hidden_bias.iter()).enumerate() {
        consider(ParamSlot::HiddenBias { index }, a, n);
    }
    for (index, (&a, &n)) in analytic.output_bias.iter().zip(numeric.output_bias.iter()).enumerate() {
        consider(ParamSlot::OutputBias { index }, a, n);
    }
    worst
}

/// A randomly drawn, frozen gradient-check problem.
#[derive(Debug, Clone)]
pub struct GradCheckInstance {
    pub variant: Variant,
    pub params: AutoEncoderParams,
    pub loss: LossKind,
    pub targets: Vec<Vector>,
    pub inputs: Vec<Vector>,
}

impl GradCheckInstance {
    /// Draws parameters, targets in `(0.05, 0.95)` and one frozen corruption
    /// per sample. Cross-entropy with tanh needs reconstructions in `(0, 1)`,
    /// so that case uses small weights and an output bias near 1.
    pub fn random(
        kind: VariantKind,
        activation: Activation,
        loss: LossKind,
        visible: usize,
        hidden: usize,
        batch: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let variant = match kind {
            VariantKind::Ae => Variant::ae(),
            VariantKind::Dae => Variant::dae(CorruptionSpec::Gaussian { sigma: 0.3 }),
            VariantKind::Cae => Variant::cae(0.1),
            VariantKind::Cdae => Variant::cdae(0.1, CorruptionSpec::Gaussian { sigma: 0.3 }),
        };
        let positive_outputs = activation == Activation::Tanh && loss == LossKind::CrossEntropy;
        let (w_scale, c_lo, c_hi) = if positive_outputs {
            (0.1, 0.8, 1.2)
        } else {
            (0.5, -0.5, 0.5)
        };
        let weights = Matrix::from_row_major(
            hidden,
            visible,
            (0..hidden * visible).map(|_| rng.uniform(-w_scale, w_scale)).collect(),
        )?;
        let hidden_bias = (0..hidden).map(|_| rng.uniform(-0.5, 0.5)).collect();
        let output_bias = (0..visible).map(|_| rng.uniform(c_lo, c_hi)).collect();
        let params = AutoEncoderParams::new(weights, hidden_bias, output_bias, activation)?;
        let targets: Vec<Vector> = (0..batch)
            .map(|_| (0..visible).map(|_| rng.uniform(0.05, 0.95)).collect())
            .collect();
        let inputs = targets
            .iter()
            .map(|x| {
                if kind.uses_corruption() {
                    variant.corruption.corrupt(x, rng)
                } else {
                    Ok(x.clone())
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GradCheckInstance {
            variant,
            params,
            loss,
            targets,
            inputs,
        })
    }

    pub fn analytic(&self) -> Result<Gradients> {
        gradients_at(&self.variant, &self.params, self.loss, &self.targets, &self.inputs)
    }

    pub fn numeric(&self, step: f64) -> Result<Gradients> {
        finite_difference_gradients(
            &self.variant,
            &self.params,
            self.loss,
            &self.targets,
            &self.inputs,
            step,
        )
    }

    pub fn check(&self, step: f64) -> Result<Discrepancy> {
        Ok(compare(&self.analytic()?, &self.numeric(step)?))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckConfig {
    pub visible: usize,
    pub hidden: usize,
    pub tolerance: f64,
    pub restarts: usize,
    pub batch_size: usize,
    pub step: f64,
    pub seed: u64,
    pub variants: Vec<VariantKind>,
}

impl Default for GradCheckConfig {
    fn default() -> Self {
        GradCheckConfig {
            visible: 20,
            hidden: 7,
            tolerance: 1e-6,
            restarts: 25,
            batch_size: 4,
            step: 1e-5,
            seed: 1,
            variants: VariantKind::ALL.to_vec(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckCase {
    pub variant: VariantKind,
    pub activation: Activation,
    pub loss: LossKind,
    pub restart: usize,
    pub worst: Discrepancy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradCheckReport {
    pub tolerance: f64,
    pub cases: Vec<GradCheckCase>,
}

impl GradCheckReport {
    pub fn worst(&self) -> Option<&GradCheckCase> {
        self.cases.iter().max_by(|a, b| {
            a.worst
                .relative_error
                .partial_cmp(&b.worst.relative_error)
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn max_relative_error(&self) -> f64 {
        self.worst().map_or(0.0, |c| c.worst.relative_error)
    }

    pub fn passed(&self) -> bool {
        self.cases
            .iter()
            .all(|c| c.worst.relative_error < self.tolerance)
    }
}

/// Runs every variant × activation × loss combination `restarts` times.
pub fn run_gradcheck(cfg: &GradCheckConfig) -> Result<GradCheckReport> {
    if cfg.visible == 0 || cfg.hidden == 0 || cfg.batch_size == 0 {
        return Err(Error::Config("gradcheck dimensions must be positive".into()));
    }
    if cfg.visible > 50 {
        return Err(Error::Config(format!(
            "gradcheck is meant for small layers (d_v <= 50), got {}",
            cfg.visible
        )));
    }
    let root = SeededRng::new(cfg.seed);
    let mut cases = Vec::new();
    let mut stream = 0;
    for &variant in &cfg.variants {
        for activation in [Activation::Sigmoid, Activation::Tanh] {
            for loss in [LossKind::Squared, LossKind::CrossEntropy] {
                for restart in 0..cfg.restarts {
                    let mut rng = root.fork(stream);
                    stream += 1;
                    let inst = GradCheckInstance::random(
                        variant,
                        activation,
                        loss,
                        cfg.visible,
                        cfg.hidden,
                        cfg.batch_size,
                        &mut rng,
                    )?;
                    cases.push(GradCheckCase {
                        variant,
                        activation,
                        loss,
                        restart,
                        worst: inst.check(cfg.step)?,
                    });
                }
            }
        }
    }
    Ok(GradCheckReport {
        tolerance: cfg.tolerance,
        cases,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perturbed_gradient_is_located() {
        let mut rng = SeededRng::new(3);
        let inst = GradCheckInstance::random(
            VariantKind::Cdae,
            Activation::Sigmoid,
            LossKind::Squared,
            20,
            7,
            4,
            &mut rng,
        )
        .unwrap();
        let mut analytic = inst.analytic().unwrap();
        let numeric = inst.numeric(1e-5).unwrap();
        assert!(compare(&analytic, &numeric).relative_error < 1e-6);
        let k = 3 * 20 + 5;
        analytic.weights.as_mut_slice()[k] += 1e-2;
        let worst = compare(&analytic, &numeric);
        assert_eq!(worst.slot, ParamSlot::Weight { row: 3, col: 5 });
        assert!(worst.relative_error > 1e-6);
    }

    #[test]
    fn small_matrix_passes() {
        let cfg = GradCheckConfig {
            restarts: 2,
            ..GradCheckConfig::default()
        };
        let report = run_gradcheck(&cfg).unwrap();
        assert_eq!(report.cases.len(), 4 * 2 * 2 * 2);
        assert!(report.passed(), "worst {:?}", report.worst());
    }

    #[test]
    fn below_noise_floor_fails() {
        let cfg = GradCheckConfig {
            restarts: 1,
            tolerance: 1e-12,
            ..GradCheckConfig::default()
        };
        assert!(!run_gradcheck(&cfg).unwrap().passed());
    }

    #[test]
    fn slot_display() {
        assert_eq!(ParamSlot::Weight { row: 1, col: 2 }.to_string(), "W[1][2]");
        assert_eq!(ParamSlot::HiddenBias { index: 4 }.to_string(), "b[4]");
    }
}
