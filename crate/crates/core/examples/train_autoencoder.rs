//! Trains each of the four layer objectives on a small synthetic set.

use cdae::autoencoder::{train, TrainConfig, Variant, VariantKind};
use cdae::corruption::CorruptionSpec;
use cdae::math::{Activation, SeededRng, Vector};

fn main() {
    let mut rng = SeededRng::new(11);
    // Two noisy prototypes in 16 dimensions.
    let protos: Vec<Vec<f64>> = (0..2)
        .map(|_| (0..16).map(|_| rng.uniform(0.0, 1.0)).collect())
        .collect();
    let data: Vec<Vector> = (0..200)
        .map(|n| {
            protos[n % 2]
                .iter()
                .map(|p| (p + 0.05 * rng.standard_normal()).clamp(0.0, 1.0))
                .collect()
        })
        .collect();

    let cfg = TrainConfig {
        epochs: 30,
        batch_size: 20,
        ..TrainConfig::default()
    };
    for kind in VariantKind::ALL {
        let variant = match kind {
            VariantKind::Ae => Variant::ae(),
            VariantKind::Dae => Variant::dae(CorruptionSpec::MaskFraction { fraction: 0.2 }),
            VariantKind::Cae => Variant::cae(0.1),
            VariantKind::Cdae => Variant::cdae(0.1, CorruptionSpec::MaskFraction { fraction: 0.2 }),
        };
        let (_, report) = train(&variant, &data, 4, Activation::Sigmoid, &cfg).unwrap();
        println!(
            "{:<4} first epoch {:.4}  last epoch {:.4}  (reconstruction {:.4}, penalty {:.4})",
            kind.label(),
            report.trace[0],
            report.total,
            report.reconstruction,
            report.penalty
        );
    }
}
