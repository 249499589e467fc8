//! Dense linear algebra, activations, seeded randomness and weight init.

mod activation;
mod matrix;
mod rng;

pub use activation::{activate, activate_prime_from_output, Activation};
pub use matrix::{axpy, dot, squared_distance, Matrix, Vector};
pub use rng::{derive_seed, SeededRng, RNG_ALGORITHM};

use crate::error::{Error, Result};

/// Half-width of the uniform init interval for a `d_h × d_v` weight matrix.
pub fn init_bound(d_h: usize, d_v: usize) -> f64 {
    6f64.sqrt() / ((d_v + d_h) as f64).sqrt()
}

/// Draws a `d_h × d_v` matrix with entries i.i.d. uniform on
/// `(-√6/√(d_v+d_h), +√6/√(d_v+d_h))`.
pub fn init_weights(d_h: usize, d_v: usize, rng: &mut SeededRng) -> Result<Matrix> {
    if d_h == 0 || d_v == 0 {
        return Err(Error::Shape(format!(
            "weight matrix must be non-empty, got {d_h}x{d_v}"
        )));
    }
    let bound = init_bound(d_h, d_v);
    let data = (0..d_h * d_v)
        .map(|_| rng.open_uniform(-bound, bound))
        .collect();
    Matrix::from_row_major(d_h, d_v, data)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn init_bound_values() {
        // √6/√984
        assert!((init_bound(200, 784) - 0.078_086_88).abs() < 1e-8);
        assert!((init_bound(1, 1) - 3f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn init_weights_shape_and_range() {
        let w = init_weights(200, 784, &mut SeededRng::new(1)).unwrap();
        assert_eq!(w.shape(), (200, 784));
        let bound = init_bound(200, 784);
        assert!(w.as_slice().iter().all(|v| v.abs() < bound));
        assert!(w.as_slice().iter().all(|v| v.abs() < 0.0781));
    }

    #[test]
    fn init_weights_statistics() {
        let w = init_weights(100, 100, &mut SeededRng::new(2)).unwrap();
        let bound = init_bound(100, 100);
        let n = w.as_slice().len() as f64;
        let mean = w.as_slice().iter().sum::<f64>() / n;
        // Var of U(-a, a) is a²/3.
        let stderr = (bound * bound / 3.0 / n).sqrt();
        assert!(mean.abs() < 3.0 * stderr, "mean {mean} stderr {stderr}");
        let min = w.as_slice().iter().cloned().fold(f64::INFINITY, f64::min);
        let max = w.as_slice().iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!(min > -bound && max < bound);
        // The draws should fill most of the interval.
        assert!(min < -0.99 * bound && max > 0.99 * bound);
    }

    #[test]
    fn init_weights_deterministic() {
        let a = init_weights(3, 4, &mut SeededRng::new(8)).unwrap();
        let b = init_weights(3, 4, &mut SeededRng::new(8)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_weights_rejects_zero_dims() {
        assert!(init_weights(0, 4, &mut SeededRng::new(0)).is_err());
        assert!(init_weights(4, 0, &mut SeededRng::new(0)).is_err());
    }
}
