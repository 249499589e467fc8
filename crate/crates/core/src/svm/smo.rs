//! Binary soft-margin SVM trained by sequential minimal optimization.
//!
//! Works on the dual in minimization form
//! `min ½αᵀQα − eᵀα, 0 ≤ α ≤ C, yᵀα = 0` with `Qᵢⱼ = yᵢyⱼK(xᵢ, xⱼ)` and
//! keeps the gradient `G = Qα − e` up to date. Each step picks the maximal
//! violating pair
//!
//! ```text
//! i = argmax { −yₜGₜ : t ∈ I_up },   j = argmin { −yₜGₜ : t ∈ I_low }
//! ```
//!
//! and solves the two-variable subproblem in closed form. The loop stops
//! once `max − min < tol`, which bounds every KKT violation `yf(x)` vs. 1
//! by `tol`.

use std::borrow::Cow;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use crate::error::{check_dim, Error, Result};
use crate::math::Vector;

/// Pairs up to this many samples get a precomputed Gram matrix.
pub const DENSE_GRAM_LIMIT: usize = 4000;

const TAU: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoParams {
    pub c: f64,
    pub kernel: KernelSpec,
    pub tol: f64,
    /// Iteration budget, in units of the training-set size.
    pub max_passes: usize,
}

impl SmoParams {
    pub fn new(c: f64, kernel: KernelSpec) -> Self {
        SmoParams {
            c,
            kernel,
            tol: 1e-3,
            max_passes: 50,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.kernel.validate()?;
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::Config(format!("C must be > 0, got {}", self.c)));
        }
        if !(self.tol > 0.0) {
            return Err(Error::Config(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_passes == 0 {
            return Err(Error::Config("max_passes must be >= 1".into()));
        }
        Ok(())
    }
}

/// Trained binary classifier `f(x) = Σ coefᵢ K(svᵢ, x) + bias`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SvmModel {
    pub support_vectors: Vec<Vector>,
    /// `αᵢ·yᵢ` for each support vector; `|coefᵢ| ≤ C`.
    pub coefficients: Vec<f64>,
    pub bias: f64,
    pub kernel: KernelSpec,
    pub c: f64,
}

impl SvmModel {
    pub fn dim(&self) -> usize {
        self.support_vectors.first().map_or(0, Vector::dim)
    }

    pub fn decision_value(&self, x: &[f64]) -> Result<f64> {
        if !self.support_vectors.is_empty() {
            check_dim("svm predict", self.dim(), x.len())?;
        }
        let mut acc = 0.0;
        for (sv, &coef) in self.support_vectors.iter().zip(&self.coefficients) {
            acc += coef * self.kernel.eval_unchecked(sv, x);
        }
        Ok(acc + self.bias)
    }

    /// Label in `{+1, −1}` (zero maps to `+1`) and the decision value.
    pub fn predict(&self, x: &[f64]) -> Result<(i8, f64)> {
        let v = self.decision_value(x)?;
        Ok((if v >= 0.0 { 1 } else { -1 }, v))
    }
}

/// Training output: the model plus the full dual solution.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoSolution {
    pub model: SvmModel,
    /// Dual variable per training sample, in `[0, C]`.
    pub alphas: Vec<f64>,
    pub iterations: usize,
    /// Dual objective `Σα − ½αᵀQα` after each step (only when requested).
    pub dual_objective: Vec<f64>,
}

enum Gram<'a> {
    Dense { n: usize, data: Vec<f64> },
    OnDemand { xs: &'a [Vector], kernel: KernelSpec },
}

impl Gram<'_> {
    fn new(xs: &[Vector], kernel: KernelSpec) -> Gram<'_> {
        let n = xs.len();
        if n <= DENSE_GRAM_LIMIT {
            let data: Vec<f64> = (0..n)
                .into_par_iter()
                .flat_map_iter(|i| xs.iter().map(move |xj| kernel.eval_unchecked(&xs[i], xj)))
                .collect();
            Gram::Dense { n, data }
        } else {
            Gram::OnDemand { xs, kernel }
        }
    }

    fn row(&self, i: usize) -> Cow<'_, [f64]> {
        match self {
            Gram::Dense { n, data } => Cow::Borrowed(&data[i * n..(i + 1) * n]),
            Gram::OnDemand { xs, kernel } => Cow::Owned(
                xs.iter()
                    .map(|xj| kernel.eval_unchecked(&xs[i], xj))
                    .collect(),
            ),
        }
    }

    fn diag(&self, i: usize) -> f64 {
        match self {
            Gram::Dense { n, data } => data[i * n + i],
            Gram::OnDemand { xs, kernel } => kernel.eval_unchecked(&xs[i], &xs[i]),
        }
    }
}

fn in_up(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha < c) || (y < 0.0 && alpha > 0.0)
}

fn in_low(alpha: f64, y: f64, c: f64) -> bool {
    (y > 0.0 && alpha > 0.0) || (y < 0.0 && alpha < c)
}

/// Maximal violating pair and its gap `m − M`.
fn select_pair(alpha: &[f64], y: &[f64], grad: &[f64], c: f64) -> (Option<usize>, Option<usize>, f64) {
    let mut best_up = f64::NEG_INFINITY;
    let mut best_low = f64::INFINITY;
    let mut i_sel = None;
    let mut j_sel = None;
    for t in 0..alpha.len() {
        let v = -y[t] * grad[t];
        if in_up(alpha[t], y[t], c) && v > best_up {
            best_up = v;
            i_sel = Some(t);
        }
        if in_low(alpha[t], y[t], c) && v < best_low {
            best_low = v;
            j_sel = Some(t);
        }
    }
    (i_sel, j_sel, best_up - best_low)
}

fn count_violations(alpha: &[f64], y: &[f64], grad: &[f64], c: f64, tol: f64) -> usize {
    let (_, _, gap) = select_pair(alpha, y, grad, c);
    if gap < tol {
        return 0;
    }
    let rho = compute_rho(alpha, y, grad, c);
    // yₜf(xₜ) = Gₜ + 1 − yₜρ
    (0..alpha.len())
        .filter(|&t| kkt_violation(alpha[t], grad[t] + 1.0 - y[t] * rho, c) > tol)
        .count()
}

/// `rho` with `f(x) = Σ αᵢyᵢK(xᵢ, x) − rho`; averages `yG` over free
/// variables, or takes the midpoint of the feasible interval when none are free.
fn compute_rho(alpha: &[f64], y: &[f64], grad: &[f64], c: f64) -> f64 {
    let mut upper = f64::INFINITY;
    let mut lower = f64::NEG_INFINITY;
    let mut free_sum = 0.0;
    let mut free = 0usize;
    for t in 0..alpha.len() {
        let yg = y[t] * grad[t];
        if alpha[t] >= c {
            if y[t] < 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else if alpha[t] <= 0.0 {
            if y[t] > 0.0 {
                upper = upper.min(yg);
            } else {
                lower = lower.max(yg);
            }
        } else {
            free += 1;
            free_sum += yg;
        }
    }
    if free > 0 {
        free_sum / free as f64
    } else if upper.is_finite() && lower.is_finite() {
        (upper + lower) / 2.0
    } else if upper.is_finite() {
        upper
    } else {
        lower
    }
}

/// Amount by which margin `y·f(x) = margin` violates the KKT condition
/// for a dual variable `alpha` in `[0, c]`.
pub fn kkt_violation(alpha: f64, margin: f64, c: f64) -> f64 {
    if alpha <= 0.0 {
        (1.0 - margin).max(0.0)
    } else if alpha >= c {
        (margin - 1.0).max(0.0)
    } else {
        (margin - 1.0).abs()
    }
}

/// Trains a binary SVM on labels in `{+1, −1}`.
pub fn smo_train(features: &[Vector], labels: &[i8], params: &SmoParams) -> Result<SvmModel> {
    Ok(smo_solve(features, labels, params, false)?.model)
}

pub fn smo_solve(
    features: &[Vector],
    labels: &[i8],
    params: &SmoParams,
    record_objective: bool,
) -> Result<SmoSolution> {
    params.validate()?;
    let n = features.len();
    check_dim("svm labels", n, labels.len())?;
    if n < 2 {
        return Err(Error::Data("SVM training needs at least two samples".into()));
    }
    let dim = features[0].dim();
    for x in features {
        check_dim("svm feature", dim, x.dim())?;
    }
    if labels.iter().any(|&l| l != 1 && l != -1) {
        return Err(Error::Data("binary labels must be +1 or -1".into()));
    }
    if !labels.contains(&1) || !labels.contains(&-1) {
        return Err(Error::Data("both classes must be present".into()));
    }

    let c = params.c;
    let y: Vec<f64> = labels.iter().map(|&l| f64::from(l)).collect();
    let gram = Gram::new(features, params.kernel);
    let mut alpha = vec![0.0; n];
    let mut grad = vec![-1.0; n];
    let mut trace = Vec::new();
    let budget = params.max_passes.saturating_mul(n);
    let mut iterations = 0;

    loop {
        let (i_sel, j_sel, gap) = select_pair(&alpha, &y, &grad, c);
        let (i, j) = match (i_sel, j_sel) {
            (Some(i), Some(j)) if gap >= params.tol => (i, j),
            _ => break,
        };
        if iterations >= budget {
            return Err(Error::Convergence {
                iterations,
                violations: count_violations(&alpha, &y, &grad, c, params.tol),
            });
        }
        iterations += 1;

        let k_i = gram.row(i);
        let k_j = gram.row(j);
        let (old_i, old_j) = (alpha[i], alpha[j]);
        let q_ij = y[i] * y[j] * k_i[j];
        if y[i] != y[j] {
            let quad = (gram.diag(i) + gram.diag(j) + 2.0 * q_ij).max(TAU);
            let delta = (-grad[i] - grad[j]) / quad;
            let diff = alpha[i] - alpha[j];
            alpha[i] += delta;
            alpha[j] += delta;
            if diff > 0.0 {
                if alpha[j] < 0.0 {
                    alpha[j] = 0.0;
                    alpha[i] = diff;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = -diff;
            }
            if diff > 0.0 {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = c - diff;
                }
            } else if alpha[j] > c {
                alpha[j] = c;
                alpha[i] = c + diff;
            }
        } else {
            let quad = (gram.diag(i) + gram.diag(j) - 2.0 * q_ij).max(TAU);
            let delta = (grad[i] - grad[j]) / quad;
            let sum = alpha[i] + alpha[j];
            alpha[i] -= delta;
            alpha[j] += delta;
            if sum > c {
                if alpha[i] > c {
                    alpha[i] = c;
                    alpha[j] = sum - c;
                }
            } else if alpha[j] < 0.0 {
                alpha[j] = 0.0;
                alpha[i] = sum;
            }
            if sum > c {
                if alpha[j] > c {
                    alpha[j] = c;
                    alpha[i] = sum - c;
                }
            } else if alpha[i] < 0.0 {
                alpha[i] = 0.0;
                alpha[j] = sum;
            }
        }

        let d_i = alpha[i] - old_i;
        let d_j = alpha[j] - old_j;
        for t in 0..n {
            grad[t] += y[t] * (y[i] * k_i[t] * d_i + y[j] * k_j[t] * d_j);
        }
        if record_objective {
            // Σα − ½αᵀQα = −½ Σ αₜ(Gₜ − 1)
            let obj: f64 = -0.5 * alpha.iter().zip(&grad).map(|(a, g)| a * (g - 1.0)).sum::<f64>();
            trace.push(obj);
        }
    }

    let rho = compute_rho(&alpha, &y, &grad, c);
    let mut support_vectors = Vec::new();
    let mut coefficients = Vec::new();
    for t in 0..n {
        if alpha[t] > 0.0 {
            support_vectors.push(features[t].clone());
            coefficients.push(alpha[t] * y[t]);
        }
    }
    Ok(SmoSolution {
        model: SvmModel {
            support_vectors,
            coefficients,
            bias: -rho,
            kernel: params.kernel,
            c,
        },
        alphas: alpha,
        iterations,
        dual_objective: trace,
    })
}

/// Result of checking a trained model against the KKT conditions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KktAudit {
    pub violations: usize,
    pub max_violation: f64,
    /// `|Σ αᵢyᵢ|`
    pub equality_residual: f64,
}

impl KktAudit {
    pub fn passed(&self, tol: f64) -> bool {
        self.violations == 0 && self.equality_residual <= tol
    }
}

/// Recomputes `yᵢf(xᵢ)` from the model for every training point.
pub fn kkt_audit(
    model: &SvmModel,
    features: &[Vector],
    labels: &[i8],
    alphas: &[f64],
    tol: f64,
) -> Result<KktAudit> {
    check_dim("kkt labels", features.len(), labels.len())?;
    check_dim("kkt alphas", features.len(), alphas.len())?;
    let mut violations = 0;
    let mut max_violation: f64 = 0.0;
    let mut equality = 0.0;
    for ((x, &l), &a) in features.iter().zip(labels).zip(alphas) {
        let y = f64::from(l);
        let margin = y * model.decision_value(x)?;
        let v = kkt_violation(a, margin, model.c);
        if v > tol {
            violations += 1;
        }
        max_violation = max_violation.max(v);
        equality += a * y;
    }
    Ok(KktAudit {
        violations,
        max_violation,
        equality_residual: equality.abs(),
    })
}
