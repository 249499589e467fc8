//! Greedy layer-wise pretraining of a 64-32-8 stack and feature extraction.

use cdae::autoencoder::{TrainConfig, Variant};
use cdae::math::{Activation, SeededRng, Vector};
use cdae::stack::{pretrain, SavedStack, StackSpec};

fn main() {
    let mut rng = SeededRng::new(5);
    let data: Vec<Vector> = (0..300)
        .map(|_| (0..64).map(|_| rng.uniform(0.0, 1.0)).collect())
        .collect();

    let spec = StackSpec::new(
        vec![64, 32, 8],
        Activation::Tanh,
        Variant::with_defaults(cdae::autoencoder::VariantKind::Cae),
        TrainConfig {
            epochs: 10,
            batch_size: 30,
            ..TrainConfig::default()
        },
    );
    let (model, reports) = pretrain(&spec, &data).unwrap();
    for (k, r) in reports.iter().enumerate() {
        println!("layer {k}: {} -> {}, final loss {:.4}", spec.layer_dims[k], spec.layer_dims[k + 1], r.total);
    }
    let f = model.extract_features(&data[0]).unwrap();
    println!("features of sample 0: {:.3?}", f.as_slice());

    let layers = reports
        .into_iter()
        .enumerate()
        .map(|(k, r)| {
            cdae::autoencoder::SavedAutoEncoder::new(
                model.layers[k].clone(),
                spec.layer_variant(k),
                spec.layer_train(k),
                r,
            )
        })
        .collect();
    let json = SavedStack::new(spec, layers).to_json().unwrap();
    let back = SavedStack::from_json(&json).unwrap().model().unwrap();
    assert_eq!(back, model);
    println!("stack document: {} bytes, reloads identically", json.len());
}
