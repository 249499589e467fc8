//! One-vs-one multiclass voting over binary SMO machines.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kernel::KernelSpec;
use super::smo::{smo_train, SmoParams, SvmModel};
use crate::error::{check_dim, Error, Result};
use crate::math::{SeededRng, Vector};

pub const MULTICLASS_FORMAT: &str = "cdae-svm-ovo";
pub const MULTICLASS_VERSION: u32 = 1;

/// Binary machine for classes `a < b`; positive decisions vote for `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairModel {
    pub a: usize,
    pub b: usize,
    pub model: SvmModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MulticlassSvm {
    pub format: String,
    pub version: u32,
    pub class_count: usize,
    pub dim: usize,
    pub params: SmoParams,
    pub pairs: Vec<PairModel>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: usize,
    pub votes: Vec<usize>,
}

impl MulticlassSvm {
    /// Trains `k(k−1)/2` machines, one per pair in lexicographic order.
    pub fn train(
        features: &[Vector],
        labels: &[usize],
        class_count: usize,
        params: &SmoParams,
    ) -> Result<Self> {
        params.validate()?;
        check_dim("multiclass labels", features.len(), labels.len())?;
        if class_count < 2 {
            return Err(Error::Data(format!(
                "need at least two classes, got {class_count}"
            )));
        }
        let dim = features
            .first()
            .map(Vector::dim)
            .ok_or_else(|| Error::Data("training set is empty".into()))?;
        let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); class_count];
        for (i, &l) in labels.iter().enumerate() {
            if l >= class_count {
                return Err(Error::Data(format!(
                    "label {l} out of range for {class_count} classes"
                )));
            }
            check_dim("multiclass feature", dim, features[i].dim())?;
            by_class[l].push(i);
        }
        if let Some(empty) = by_class.iter().position(Vec::is_empty) {
            return Err(Error::Data(format!("class {empty} has no training samples")));
        }

        let pair_ids: Vec<(usize, usize)> = (0..class_count)
            .flat_map(|a| (a + 1..class_count).map(move |b| (a, b)))
            .collect();
        let pairs = pair_ids
            .par_iter()
            .map(|&(a, b)| {
                let idx: Vec<usize> = by_class[a].iter().chain(&by_class[b]).copied().collect();
                let xs: Vec<Vector> = idx.iter().map(|&i| features[i].clone()).collect();
                let ys: Vec<i8> = idx.iter().map(|&i| if labels[i] == a { 1 } else { -1 }).collect();
                let model = smo_train(&xs, &ys, params).map_err(|e| match e {
                    e @ Error::Convergence { .. } => e,
                    other => Error::Data(format!("pair ({a}, {b}): {other}")),
                })?;
                Ok(PairModel { a, b, model })
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(MulticlassSvm {
            format: MULTICLASS_FORMAT.into(),
            version: MULTICLASS_VERSION,
            class_count,
            dim,
            params: *params,
            pairs,
        })
    }

    /// Majority vote. Ties go to the tied class with the largest summed
    /// `|decision value|` over the machines that voted for it, then to the
    /// lowest index.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        check_dim("multiclass predict", self.dim, x.len())?;
        let mut votes = vec![0usize; self.class_count];
        let mut strength = vec![0.0f64; self.class_count];
        for p in &self.pairs {
            let (sign, value) = p.model.predict(x)?;
            let winner = if sign > 0 { p.a } else { p.b };
            votes[winner] += 1;
            strength[winner] += value.abs();
        }
        let mut best = 0;
        for k in 1..self.class_count {
            if votes[k] > votes[best] || (votes[k] == votes[best] && strength[k] > strength[best]) {
                best = k;
            }
        }
        Ok(Prediction { label: best, votes })
    }

    pub fn predict_batch(&self, xs: &[Vector]) -> Result<Vec<usize>> {
        xs.par_iter()
            .map(|x| self.predict(x).map(|p| p.label))
            .collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: MulticlassSvm = serde_json::from_str(s)?;
        if m.format != MULTICLASS_FORMAT || m.version != MULTICLASS_VERSION {
            return Err(Error::Config(format!(
                "unsupported svm document {} v{}",
                m.format, m.version
            )));
        }
        if m.pairs.len() != m.class_count * m.class_count.saturating_sub(1) / 2 {
            return Err(Error::Config("svm document has wrong number of pairs".into()));
        }
        Ok(m)
    }
}

/// Fraction of predictions equal to the reference labels.
pub fn accuracy(predicted: &[usize], truth: &[usize]) -> Result<f64> {
    check_dim("accuracy", truth.len(), predicted.len())?;
    if truth.is_empty() {
        return Err(Error::Data("accuracy of an empty set".into()));
    }
    let hits = predicted.iter().zip(truth).filter(|(p, t)| p == t).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Picked `(C, σ)` and its validation accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridChoice {
    pub c: f64,
    pub sigma: f64,
    pub validation_accuracy: f64,
}

/// Holds out a seeded fifth of the training set and tries every
/// `(C, factor·σ_default)` combination; the first best in grid order wins.
pub fn grid_search(
    features: &[Vector],
    labels: &[usize],
    class_count: usize,
    c_grid: &[f64],
    sigma_factors: &[f64],
    base: &SmoParams,
    seed: u64,
) -> Result<GridChoice> {
    check_dim("grid labels", features.len(), labels.len())?;
    let n = features.len();
    if n < 5 || c_grid.is_empty() || sigma_factors.is_empty() {
        return Err(Error::Config("grid search needs >= 5 samples and a non-empty grid".into()));
    }
    let dim = features[0].dim();
    let mut order: Vec<usize> = (0..n).collect();
    SeededRng::new(seed).shuffle(&mut order);
    let (val_idx, fit_idx) = order.split_at(n / 5);
    let pick = |ids: &[usize]| -> (Vec<Vector>, Vec<usize>) {
        (
            ids.iter().map(|&i| features[i].clone()).collect(),
            ids.iter().map(|&i| labels[i]).collect(),
        )
    };
    let (fit_x, fit_y) = pick(fit_idx);
    let (val_x, val_y) = pick(val_idx);
    let default_sigma = match KernelSpec::default_rbf(dim) {
        KernelSpec::Rbf { sigma } => sigma,
        _ => unreachable!(),
    };

    let mut best: Option<GridChoice> = None;
    for &c in c_grid {
        for &f in sigma_factors {
            let sigma = f * default_sigma;
            let params = SmoParams {
                c,
                kernel: KernelSpec::Rbf { sigma },
                ..*base
            };
            let model = MulticlassSvm::train(&fit_x, &fit_y, class_count, &params)?;
            let acc = accuracy(&model.predict_batch(&val_x)?, &val_y)?;
            if best.is_none_or(|b| acc > b.validation_accuracy) {
                best = Some(GridChoice {
                    c,
                    sigma,
                    validation_accuracy: acc,
                });
            }
        }
    }
    Ok(best.expect("grid is non-empty"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blobs(per_class: usize, seed: u64) -> (Vec<Vector>, Vec<usize>) {
        let centers = [[0.0, 0.0], [4.0, 0.0], [0.0, 4.0]];
        let mut rng = SeededRng::new(seed);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (k, c) in centers.iter().enumerate() {
            for _ in 0..per_class {
                xs.push(Vector::from(vec![
                    c[0] + 0.5 * rng.standard_normal(),
                    c[1] + 0.5 * rng.standard_normal(),
                ]));
                ys.push(k);
            }
        }
        (xs, ys)
    }

    #[test]
    fn three_blobs() {
        let (xs, ys) = blobs(30, 1);
        let (tx, ty) = blobs(50, 2);
        let params = SmoParams::new(10.0, KernelSpec::Rbf { sigma: 1.0 });
        let m = MulticlassSvm::train(&xs, &ys, 3, &params).unwrap();
        assert_eq!(m.pairs.iter().map(|p| (p.a, p.b)).collect::<Vec<_>>(), [(0, 1), (0, 2), (1, 2)]);
        let acc = accuracy(&m.predict_batch(&tx).unwrap(), &ty).unwrap();
        assert!(acc >= 0.99, "{acc}");
    }

    #[test]
    fn empty_class_is_data_error() {
        let (xs, ys) = blobs(5, 3);
        let params = SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 });
        assert!(matches!(
            MulticlassSvm::train(&xs, &ys, 4, &params),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn tie_break_prefers_stronger_then_lower() {
        // Three constant machines forming a cycle: 0 beats 1, 1 beats 2, 2 beats 0.
        let constant = |bias: f64| SvmModel {
            support_vectors: vec![],
            coefficients: vec![],
            bias,
            kernel: KernelSpec::Rbf { sigma: 1.0 },
            c: 1.0,
        };
        let mk = |b01: f64, b02: f64, b12: f64| MulticlassSvm {
            format: MULTICLASS_FORMAT.into(),
            version: MULTICLASS_VERSION,
            class_count: 3,
            dim: 1,
            params: SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 }),
            pairs: vec![
                PairModel { a: 0, b: 1, model: constant(b01) },
                PairModel { a: 0, b: 2, model: constant(b02) },
                PairModel { a: 1, b: 2, model: constant(b12) },
            ],
        };
        let p = mk(1.0, -1.0, 1.0).predict(&[0.0]).unwrap();
        assert_eq!(p.votes, [1, 1, 1]);
        assert_eq!(p.label, 0);
        assert_eq!(mk(1.0, -2.0, 1.0).predict(&[0.0]).unwrap().label, 2);
        assert_eq!(mk(1.0, -1.0, 3.0).predict(&[0.0]).unwrap().label, 1);
    }

    #[test]
    fn json_round_trip() {
        let (xs, ys) = blobs(6, 4);
        let params = SmoParams::new(10.0, KernelSpec::Rbf { sigma: 1.0 });
        let m = MulticlassSvm::train(&xs, &ys, 3, &params).unwrap();
        let back = MulticlassSvm::from_json(&m.to_json().unwrap()).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn grid_search_picks_something_sensible() {
        let (xs, ys) = blobs(20, 5);
        let base = SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 });
        let g = grid_search(&xs, &ys, 3, &[1.0, 10.0], &[0.5, 1.0], &base, 9).unwrap();
        assert!(g.validation_accuracy >= 0.9);
    }
}
