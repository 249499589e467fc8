//! Binary SMO with a KKT audit, then one-vs-one over three Gaussian blobs.

use cdae::math::{SeededRng, Vector};
use cdae::svm::{accuracy, kkt_audit, smo_solve, KernelSpec, MulticlassSvm, SmoParams};

fn blobs(per_class: usize, rng: &mut SeededRng) -> (Vec<Vector>, Vec<usize>) {
    let centers = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0]];
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

fn main() {
    let xs = vec![
        Vector::from(vec![0.0, 0.0]),
        Vector::from(vec![0.0, 1.0]),
        Vector::from(vec![1.0, 0.0]),
        Vector::from(vec![1.0, 1.0]),
    ];
    let ys = [-1, -1, 1, 1];
    let params = SmoParams::new(10.0, KernelSpec::Rbf { sigma: 1.0 });
    let sol = smo_solve(&xs, &ys, &params, true).unwrap();
    let audit = kkt_audit(&sol.model, &xs, &ys, &sol.alphas, params.tol).unwrap();
    println!(
        "4-point problem: {} iterations, alphas {:.3?}, bias {:.4}, KKT max violation {:.1e}",
        sol.iterations, sol.alphas, sol.model.bias, audit.max_violation
    );

    let mut rng = SeededRng::new(2);
    let (train_x, train_y) = blobs(40, &mut rng);
    let (test_x, test_y) = blobs(100, &mut rng);
    let params = SmoParams::new(10.0, KernelSpec::default_rbf(2));
    let svm = MulticlassSvm::train(&train_x, &train_y, 3, &params).unwrap();
    let pred = svm.predict_batch(&test_x).unwrap();
    println!("3-blob held-out accuracy {:.3}", accuracy(&pred, &test_y).unwrap());
}
