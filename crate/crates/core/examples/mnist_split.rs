//! Loads the bundled MNIST subset, builds a balanced split, and writes and
//! rereads a feature file.

use cdae::dataset::{decode_features, encode_features, load_split, SplitSpec};
use cdae::harness::{ExperimentConfig, Scale};

fn main() {
    let data = ExperimentConfig::preset(Scale::Desk).data.resolved();
    let (train, test) = load_split(&data.images, &data.labels, &SplitSpec::new(50, 1))
        .expect("bundled data/mnist-5k is present");
    println!("train {} / test {} samples of dim {}", train.len(), test.len(), train.dim());
    println!("train class counts {:?}", train.class_counts(10));
    println!("provenance {:?}", train.provenance);

    let bytes = encode_features(&test).unwrap();
    let back = decode_features(&bytes).unwrap();
    assert_eq!(back, test);
    println!("feature file {} bytes, checksum {}", bytes.len(), test.checksum().unwrap());
}
