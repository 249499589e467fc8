use cdae::math::{SeededRng, Vector};
use cdae::svm::{kkt_audit, smo_solve, KernelSpec, MulticlassSvm, SmoParams, SvmModel};

fn separable(rng: &mut SeededRng, n: usize) -> (Vec<Vector>, Vec<i8>) {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..n {
        let y: i8 = if i % 2 == 0 { 1 } else { -1 };
        let cx = if y > 0 { 1.5 } else { -1.5 };
        xs.push(Vector::from(vec![
            cx + 0.4 * rng.standard_normal(),
            0.4 * rng.standard_normal(),
        ]));
        ys.push(y);
    }
    (xs, ys)
}

fn blobs(rng: &mut SeededRng, per_class: usize) -> (Vec<Vector>, Vec<usize>) {
    let centers = [(0.0, 0.0), (6.0, 0.0), (0.0, 6.0)];
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..per_class * centers.len() {
        let c = i % centers.len();
        let (cx, cy) = centers[c];
        xs.push(Vector::from(vec![
            cx + 0.5 * rng.standard_normal(),
            cy + 0.5 * rng.standard_normal(),
        ]));
        ys.push(c);
    }
    (xs, ys)
}

fn probe_grid() -> Vec<Vec<f64>> {
    let mut g = Vec::new();
    for i in 0..11 {
        for j in 0..11 {
            g.push(vec![-3.0 + 0.6 * i as f64, -3.0 + 0.6 * j as f64]);
        }
    }
    g
}

fn tight(kernel: KernelSpec) -> SmoParams {
    SmoParams {
        c: 1e6,
        kernel,
        tol: 1e-10,
        max_passes: 2000,
    }
}

#[test]
fn duplicating_points_keeps_decision_function() {
    let mut rng = SeededRng::new(11);
    let (xs, ys) = separable(&mut rng, 30);
    let params = tight(KernelSpec::Rbf { sigma: 1.0 });
    let once = smo_solve(&xs, &ys, &params, false).unwrap().model;

    let xs2: Vec<Vector> = xs.iter().chain(&xs).cloned().collect();
    let ys2: Vec<i8> = ys.iter().chain(&ys).copied().collect();
    let twice = smo_solve(&xs2, &ys2, &params, false).unwrap().model;

    for p in probe_grid() {
        let a = once.decision_value(&p).unwrap();
        let b = twice.decision_value(&p).unwrap();
        assert!((a - b).abs() < 1e-6, "{p:?}: {a} vs {b}");
    }
}

#[test]
fn hard_margin_limit_has_no_training_errors() {
    let mut rng = SeededRng::new(12);
    let (xs, ys) = separable(&mut rng, 60);
    let params = SmoParams::new(1e6, KernelSpec::Rbf { sigma: 1.0 });
    let sol = smo_solve(&xs, &ys, &params, false).unwrap();
    for (x, &y) in xs.iter().zip(&ys) {
        assert_eq!(sol.model.predict(x).unwrap().0, y);
    }
    assert!(kkt_audit(&sol.model, &xs, &ys, &sol.alphas, params.tol).unwrap().passed(params.tol));
}

#[test]
fn free_support_vectors_sit_on_the_margin() {
    let mut rng = SeededRng::new(13);
    let (xs, ys) = separable(&mut rng, 40);
    let params = SmoParams::new(10.0, KernelSpec::Rbf { sigma: 1.0 });
    let sol = smo_solve(&xs, &ys, &params, false).unwrap();
    let mut free = 0;
    for ((x, &y), &a) in xs.iter().zip(&ys).zip(&sol.alphas) {
        if a > 1e-8 && a < params.c - 1e-8 {
            free += 1;
            let f = sol.model.decision_value(x).unwrap();
            assert!((f - y as f64).abs() <= params.tol, "f = {f}, y = {y}");
        }
    }
    assert!(free > 0);
}

#[test]
fn support_vector_order_does_not_matter() {
    let mut rng = SeededRng::new(14);
    let (xs, ys) = separable(&mut rng, 40);
    let model = smo_solve(&xs, &ys, &SmoParams::new(1.0, KernelSpec::Rbf { sigma: 0.7 }), false)
        .unwrap()
        .model;
    let reversed = SvmModel {
        support_vectors: model.support_vectors.iter().rev().cloned().collect(),
        coefficients: model.coefficients.iter().rev().copied().collect(),
        ..model.clone()
    };
    for p in probe_grid() {
        let a = model.decision_value(&p).unwrap();
        let b = reversed.decision_value(&p).unwrap();
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn two_classes_train_one_machine() {
    let mut rng = SeededRng::new(15);
    let (xs, ys) = separable(&mut rng, 30);
    let labels: Vec<usize> = ys.iter().map(|&y| usize::from(y < 0)).collect();
    let params = SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 });
    let multi = MulticlassSvm::train(&xs, &labels, 2, &params).unwrap();
    assert_eq!(multi.pairs.len(), 1);
    let binary = smo_solve(&xs, &ys, &params, false).unwrap().model;
    for p in probe_grid() {
        let expected = usize::from(binary.predict(&p).unwrap().0 < 0);
        assert_eq!(multi.predict(&p).unwrap().label, expected);
    }
}

#[test]
fn relabeling_permutes_predictions() {
    let mut rng = SeededRng::new(16);
    let (xs, ys) = blobs(&mut rng, 40);
    let (probes, _) = blobs(&mut rng, 30);
    let params = SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 });
    let perm = [2usize, 0, 1];
    let base = MulticlassSvm::train(&xs, &ys, 3, &params).unwrap();
    let relabeled: Vec<usize> = ys.iter().map(|&y| perm[y]).collect();
    let permuted = MulticlassSvm::train(&xs, &relabeled, 3, &params).unwrap();
    assert_eq!(base.pairs.len(), 3);
    let a = base.predict_batch(&probes).unwrap();
    let b = permuted.predict_batch(&probes).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(perm[*x], *y);
    }
}

#[test]
fn model_count_is_pairs_of_classes() {
    let mut rng = SeededRng::new(17);
    for k in 2..=5usize {
        let xs: Vec<Vector> = (0..k * 6)
            .map(|i| Vector::from(vec![(i % k) as f64 * 4.0 + 0.3 * rng.standard_normal(), rng.standard_normal()]))
            .collect();
        let ys: Vec<usize> = (0..k * 6).map(|i| i % k).collect();
        let m = MulticlassSvm::train(&xs, &ys, k, &SmoParams::new(1.0, KernelSpec::Rbf { sigma: 1.0 })).unwrap();
        assert_eq!(m.pairs.len(), k * (k - 1) / 2);
        assert!(m.pairs.iter().all(|p| p.a < p.b));
    }
}
