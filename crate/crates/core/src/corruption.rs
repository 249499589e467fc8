//! Input corruption processes for the denoising variants.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::{SeededRng, Vector};

pub const DEFAULT_GAUSSIAN_SIGMA: f64 = 0.3;

fn default_sigma() -> f64 {
    DEFAULT_GAUSSIAN_SIGMA
}

/// How a clean sample `x` becomes the corrupted input `x̃`.
///
/// Index masks are 0-based: the MATLAB range `1:80:784` used for MNIST maps
/// to `MaskIndices { start: 0, stride: 80 }` and zeroes the same ten pixels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CorruptionSpec {
    #[default]
    None,
    /// Additive isotropic noise `x + N(0, σ²I)`.
    Gaussian {
        #[serde(default = "default_sigma")]
        sigma: f64,
    },
    /// Zero positions `start, start + stride, …` below the input dimension.
    MaskIndices { start: usize, stride: usize },
    /// Zero a uniformly random `⌊fraction·d⌋`-subset of positions.
    MaskFraction { fraction: f64 },
}

impl CorruptionSpec {
    /// Deterministic stride mask used in the MNIST experiment.
    pub fn mnist_stride_mask() -> Self {
        CorruptionSpec::MaskIndices {
            start: 0,
            stride: 80,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, CorruptionSpec::None)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            CorruptionSpec::None => Ok(()),
            CorruptionSpec::Gaussian { sigma } => {
                if sigma > 0.0 && sigma.is_finite() {
                    Ok(())
                } else {
                    Err(Error::Config(format!("gaussian sigma must be > 0, got {sigma}")))
                }
            }
            CorruptionSpec::MaskIndices { stride, .. } => {
                if stride >= 1 {
                    Ok(())
                } else {
                    Err(Error::Config("mask stride must be >= 1".into()))
                }
            }
            CorruptionSpec::MaskFraction { fraction } => {
                if (0.0..=1.0).contains(&fraction) {
                    Ok(())
                } else {
                    Err(Error::Config(format!(
                        "mask fraction must lie in [0, 1], got {fraction}"
                    )))
                }
            }
        }
    }

    /// Whether `corrupt` draws from the generator.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            CorruptionSpec::Gaussian { .. } | CorruptionSpec::MaskFraction { .. }
        )
    }

    /// Positions zeroed by an index mask on a `dim`-dimensional input.
    pub fn masked_positions(start: usize, stride: usize, dim: usize) -> Vec<usize> {
        (start..dim).step_by(stride.max(1)).collect()
    }

    pub fn corrupt(&self, x: &[f64], rng: &mut SeededRng) -> Result<Vector> {
        self.validate()?;
        let mut out = Vector::from(x.to_vec());
        match *self {
            CorruptionSpec::None => {}
            CorruptionSpec::Gaussian { sigma } => {
                for v in out.iter_mut() {
                    *v += sigma * rng.standard_normal();
                }
            }
            CorruptionSpec::MaskIndices { start, stride } => {
                if start >= x.len() {
                    return Err(Error::Index {
                        index: start,
                        len: x.len(),
                    });
                }
                for i in (start..x.len()).step_by(stride) {
                    out[i] = 0.0;
                }
            }
            CorruptionSpec::MaskFraction { fraction } => {
                let k = (fraction * x.len() as f64).floor() as usize;
                for i in rng.sample_indices(x.len(), k.min(x.len())) {
                    out[i] = 0.0;
                }
            }
        }
        Ok(out)
    }
}

/// Corrupts `x` according to `spec`.
pub fn corrupt(spec: &CorruptionSpec, x: &[f64], rng: &mut SeededRng) -> Result<Vector> {
    spec.corrupt(x, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ramp(d: usize) -> Vec<f64> {
        (0..d).map(|i| 1.0 + i as f64 / d as f64).collect()
    }

    #[test]
    fn none_is_identity() {
        let x = ramp(7);
        let y = CorruptionSpec::None.corrupt(&x, &mut SeededRng::new(0)).unwrap();
        assert_eq!(y.as_slice(), x.as_slice());
    }

    #[test]
    fn zero_sigma_rejected() {
        let spec = CorruptionSpec::Gaussian { sigma: 0.0 };
        assert!(spec.validate().is_err());
        assert!(spec.corrupt(&[1.0], &mut SeededRng::new(0)).is_err());
    }

    #[test]
    fn mnist_stride_mask_zeroes_ten_pixels() {
        // Oracle: enumerate 0, 80, 160, ... below 784.
        let mut expected = Vec::new();
        let mut i = 0;
        while i < 784 {
            expected.push(i);
            i += 80;
        }
        assert_eq!(expected.len(), 10);
        assert_eq!(expected, vec![0, 80, 160, 240, 320, 400, 480, 560, 640, 720]);

        let x = ramp(784);
        let y = CorruptionSpec::mnist_stride_mask()
            .corrupt(&x, &mut SeededRng::new(0))
            .unwrap();
        let zeroed: Vec<usize> = (0..784).filter(|&i| y[i] == 0.0).collect();
        assert_eq!(zeroed, expected);
    }

    #[test]
    fn mask_start_out_of_bounds() {
        let spec = CorruptionSpec::MaskIndices { start: 5, stride: 2 };
        assert!(matches!(
            spec.corrupt(&[1.0; 5], &mut SeededRng::new(0)),
            Err(Error::Index { index: 5, len: 5 })
        ));
    }

    #[test]
    fn full_fraction_mask_zeroes_everything() {
        let spec = CorruptionSpec::MaskFraction { fraction: 1.0 };
        let y = spec.corrupt(&ramp(13), &mut SeededRng::new(4)).unwrap();
        assert!(y.iter().all(|&v| v == 0.0));
        assert!(CorruptionSpec::MaskFraction { fraction: 1.5 }.validate().is_err());
    }

    #[test]
    fn fraction_mask_count() {
        let spec = CorruptionSpec::MaskFraction { fraction: 0.25 };
        let y = spec.corrupt(&ramp(10), &mut SeededRng::new(4)).unwrap();
        assert_eq!(y.iter().filter(|&&v| v == 0.0).count(), 2);
    }

    #[test]
    fn gaussian_variance() {
        let sigma = 0.3;
        let spec = CorruptionSpec::Gaussian { sigma };
        let x = ramp(4);
        let mut rng = SeededRng::new(21);
        let trials = 10_000;
        let mut sum = [0.0; 4];
        let mut sum_sq = [0.0; 4];
        for _ in 0..trials {
            let y = spec.corrupt(&x, &mut rng).unwrap();
            for i in 0..4 {
                let e = y[i] - x[i];
                sum[i] += e;
                sum_sq[i] += e * e;
            }
        }
        for i in 0..4 {
            let mean = sum[i] / trials as f64;
            let var = sum_sq[i] / trials as f64 - mean * mean;
            assert!(((var - sigma * sigma) / (sigma * sigma)).abs() < 0.10, "var {var}");
        }
    }

    #[test]
    fn gaussian_default_sigma_from_json() {
        let spec: CorruptionSpec = serde_json::from_str(r#"{"kind":"gaussian"}"#).unwrap();
        assert_eq!(spec, CorruptionSpec::Gaussian { sigma: 0.3 });
    }

    proptest! {
        #[test]
        fn masks_only_zero_components(
            x in proptest::collection::vec(-3.0f64..3.0, 1..60),
            seed in any::<u64>(),
            fraction in 0.0f64..=1.0,
            stride in 1usize..20,
        ) {
            let mut rng = SeededRng::new(seed);
            for spec in [
                CorruptionSpec::MaskFraction { fraction },
                CorruptionSpec::MaskIndices { start: 0, stride },
            ] {
                let y = spec.corrupt(&x, &mut rng).unwrap();
                for (a, b) in x.iter().zip(y.iter()) {
                    prop_assert!(*b == 0.0 || b == a);
                }
            }
        }

        #[test]
        fn stride_mask_count(d in 1usize..300, stride in 1usize..100, start_frac in 0.0f64..1.0) {
            let start = ((d as f64) * start_frac) as usize;
            let start = start.min(d - 1);
            let positions = CorruptionSpec::masked_positions(start, stride, d);
            prop_assert_eq!(positions.len(), (d - start).div_ceil(stride));
            let x = vec![1.0; d];
            let y = CorruptionSpec::MaskIndices { start, stride }
                .corrupt(&x, &mut SeededRng::new(0))
                .unwrap();
            prop_assert_eq!(y.iter().filter(|&&v| v == 0.0).count(), positions.len());
        }

        #[test]
        fn deterministic_given_state(seed in any::<u64>()) {
            let x = ramp(16);
            let spec = CorruptionSpec::Gaussian { sigma: 0.2 };
            let a = spec.corrupt(&x, &mut SeededRng::new(seed)).unwrap();
            let b = spec.corrupt(&x, &mut SeededRng::new(seed)).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
