//! Closed-form contractive penalty against an explicit Jacobian.

use cdae::autoencoder::{contractive_penalty, AutoEncoderParams};
use cdae::math::{Activation, SeededRng};

fn main() {
    let mut rng = SeededRng::new(3);
    for act in [Activation::Sigmoid, Activation::Tanh] {
        let params = AutoEncoderParams::init(6, 4, act, &mut rng).unwrap();
        let x: Vec<f64> = (0..6).map(|_| rng.uniform(0.0, 1.0)).collect();
        let h = params.encode(&x).unwrap();
        let closed = contractive_penalty(&params, &h).unwrap();

        // J[i][j] = f'(a_i) W[i][j]
        let mut brute = 0.0;
        for i in 0..4 {
            let s = act.derivative_from_output(h[i]);
            for j in 0..6 {
                brute += (s * params.weights.get(i, j)).powi(2);
            }
        }
        println!("{:<7} closed form {closed:.12}  jacobian {brute:.12}", act.name());
    }
}
