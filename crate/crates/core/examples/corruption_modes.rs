//! The corruption processes that turn x into x̃.

use cdae::corruption::CorruptionSpec;
use cdae::math::SeededRng;

fn main() {
    let x = vec![1.0; 784];
    let mut rng = SeededRng::new(7);

    let stride = CorruptionSpec::mnist_stride_mask();
    let masked = stride.corrupt(&x, &mut rng).unwrap();
    let zeroed: Vec<usize> = (0..784).filter(|&i| masked[i] == 0.0).collect();
    println!("stride mask zeroes {} pixels: {zeroed:?}", zeroed.len());

    let frac = CorruptionSpec::MaskFraction { fraction: 0.25 };
    let y = frac.corrupt(&x, &mut rng).unwrap();
    println!("fraction 0.25 zeroes {} of 784", y.iter().filter(|v| **v == 0.0).count());

    let gauss = CorruptionSpec::Gaussian { sigma: 0.3 };
    let y = gauss.corrupt(&x, &mut rng).unwrap();
    let var = y.iter().map(|v| (v - 1.0).powi(2)).sum::<f64>() / 784.0;
    println!("gaussian sigma 0.3: empirical variance {var:.4}");
}
