//! Tied-weight autoencoder layer: the AE, DAE, CAE and CDAE objectives,
//! their exact gradients and minibatch gradient descent.

mod config;
pub mod gradcheck;
mod gradients;
mod objective;
mod params;
mod train;

pub use config::{
    InputRange, LossKind, TrainConfig, Variant, VariantKind, DEFAULT_LAMBDA,
};
pub use gradients::{gradients, gradients_at, Gradients};
pub use objective::{
    contractive_penalty, objective, objective_with_input, reconstruction_loss, ForwardCache,
    ObjectiveValue,
};
pub use params::{decode, encode, AutoEncoderParams};
pub use train::{train, train_from, LossReport};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math::RNG_ALGORITHM;

pub const MODEL_FORMAT: &str = "cdae-autoencoder";
pub const MODEL_VERSION: u32 = 1;

/// Serialized form of one trained layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedAutoEncoder {
    pub format: String,
    pub version: u32,
    pub rng: String,
    pub visible: usize,
    pub hidden: usize,
    pub variant: Variant,
    pub train: TrainConfig,
    pub params: AutoEncoderParams,
    pub report: LossReport,
}

impl SavedAutoEncoder {
    pub fn new(
        params: AutoEncoderParams,
        variant: Variant,
        train: TrainConfig,
        report: LossReport,
    ) -> Self {
        SavedAutoEncoder {
            format: MODEL_FORMAT.into(),
            version: MODEL_VERSION,
            rng: RNG_ALGORITHM.into(),
            visible: params.visible(),
            hidden: params.hidden(),
            variant,
            train,
            params,
            report,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedAutoEncoder = serde_json::from_str(text)?;
        if saved.format != MODEL_FORMAT || saved.version != MODEL_VERSION {
            return Err(Error::Config(format!(
                "unsupported model document {} v{}",
                saved.format, saved.version
            )));
        }
        if saved.params.visible() != saved.visible || saved.params.hidden() != saved.hidden {
            return Err(Error::Shape("model header disagrees with weight shape".into()));
        }
        saved.params.validate()?;
        Ok(saved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::math::{Activation, SeededRng};
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn model_json_round_trips_bit_exactly(seed in any::<u64>(), d_v in 1usize..12, d_h in 1usize..6) {
            let mut rng = SeededRng::new(seed);
            let mut params = AutoEncoderParams::init(d_v, d_h, Activation::Tanh, &mut rng).unwrap();
            for v in params.output_bias.iter_mut() {
                *v = rng.standard_normal() * 1e-7;
            }
            let saved = SavedAutoEncoder::new(
                params,
                Variant::with_defaults(VariantKind::Cdae),
                TrainConfig::default(),
                LossReport { total: 1.0 / 3.0, reconstruction: 0.2, penalty: 1.0, trace: vec![0.1, 1e-300] },
            );
            let back = SavedAutoEncoder::from_json(&saved.to_json().unwrap()).unwrap();
            prop_assert_eq!(&back, &saved);
            prop_assert_eq!(back.to_json().unwrap(), saved.to_json().unwrap());
        }
    }

    #[test]
    fn rejects_foreign_documents() {
        let params = AutoEncoderParams::zeros(2, 1, Activation::Sigmoid);
        let mut saved =
            SavedAutoEncoder::new(params, Variant::ae(), TrainConfig::default(), LossReport::default());
        saved.version = 99;
        assert!(SavedAutoEncoder::from_json(&saved.to_json().unwrap()).is_err());
    }
}
