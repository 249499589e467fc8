//! Activations, their derivatives, and the uniform weight initialization.

use cdae::math::{init_bound, init_weights, Activation, SeededRng};

fn main() {
    for act in [Activation::Sigmoid, Activation::Tanh] {
        let z = [-2.0, 0.0, 3f64.ln()];
        let h = act.apply(&z).into_vec();
        let d = act.prime_from_output(&h).into_vec();
        println!("{:<7} f({z:?}) = {h:.4?}  f' = {d:.4?}", act.name());
    }

    let bound = init_bound(200, 784);
    let w = init_weights(200, 784, &mut SeededRng::new(1)).expect("non-empty shape");
    let max = w.as_slice().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    println!("784->200 init bound {bound:.6}, largest |w| drawn {max:.6}");
}
