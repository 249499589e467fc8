//! Greedy layer-wise pretraining and middle-layer feature extraction.
//!
//! A spec `[784, 200, 50]` describes the encoder half of 784-200-50-200-784;
//! the decoder half is implied by the tied weights of each layer.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::autoencoder::{
    train, AutoEncoderParams, InputRange, LossReport, SavedAutoEncoder, TrainConfig, Variant,
};
use crate::corruption::CorruptionSpec;
use crate::error::{check_dim, Error, Result};
use crate::math::{derive_seed, Activation, Vector, RNG_ALGORITHM};

pub const STACK_FORMAT: &str = "cdae-stack";
pub const STACK_VERSION: u32 = 1;

/// How an index-mask corruption carries over to hidden layers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum HiddenMask {
    /// Same start and stride over the hidden layer's own dimension.
    #[default]
    Stride,
    /// Replace the index mask by a random mask of the same input fraction
    /// (10/784 for the MNIST stride mask).
    Fraction,
}

/// Per-layer replacement of the shared variant or training settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct LayerOverride {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub train: Option<TrainConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackSpec {
    /// Encoder widths, input first: `[784, 200, 50]`.
    pub layer_dims: Vec<usize>,
    pub activation: Activation,
    pub variant: Variant,
    pub train: TrainConfig,
    #[serde(default)]
    pub hidden_mask: HiddenMask,
    /// Keyed by layer index (0 = the layer reading raw input).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub overrides: BTreeMap<usize, LayerOverride>,
}

impl StackSpec {
    pub fn new(layer_dims: Vec<usize>, activation: Activation, variant: Variant, train: TrainConfig) -> Self {
        StackSpec {
            layer_dims,
            activation,
            variant,
            train,
            hidden_mask: HiddenMask::default(),
            overrides: BTreeMap::new(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.layer_dims.len() < 2 {
            return Err(Error::Config("a stack needs at least two layer dims".into()));
        }
        if self.layer_dims.contains(&0) {
            return Err(Error::Config("layer dims must be positive".into()));
        }
        for k in 0..self.layer_count() {
            self.layer_variant(k).validate()?;
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.layer_dims.len().saturating_sub(1)
    }

    /// Variant used for layer `k`, after overrides and hidden-mask policy.
    pub fn layer_variant(&self, k: usize) -> Variant {
        if let Some(v) = self.overrides.get(&k).and_then(|o| o.variant) {
            return v;
        }
        let mut v = self.variant;
        if k > 0 && self.hidden_mask == HiddenMask::Fraction {
            if let CorruptionSpec::MaskIndices { start, stride } = v.corruption {
                let input_dim = self.layer_dims[0];
                let masked = CorruptionSpec::masked_positions(start, stride, input_dim).len();
                v.corruption = CorruptionSpec::MaskFraction {
                    fraction: masked as f64 / input_dim as f64,
                };
            }
        }
        v
    }

    /// Training settings for layer `k`; the seed is decorrelated per layer
    /// unless overridden, and layer 0 keeps the configured seed.
    pub fn layer_train(&self, k: usize) -> TrainConfig {
        if let Some(t) = self.overrides.get(&k).and_then(|o| o.train.clone()) {
            return t;
        }
        TrainConfig {
            seed: derive_seed(self.train.seed, k as u64),
            ..self.train.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StackedModel {
    pub layers: Vec<AutoEncoderParams>,
    #[serde(default)]
    pub input_range: InputRange,
}

impl StackedModel {
    pub fn new(layers: Vec<AutoEncoderParams>, input_range: InputRange) -> Result<Self> {
        let model = StackedModel { layers, input_range };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if self.layers.is_empty() {
            return Err(Error::Config("stacked model has no layers".into()));
        }
        for pair in self.layers.windows(2) {
            check_dim("stacked layer chain", pair[0].hidden(), pair[1].visible())?;
        }
        for layer in &self.layers {
            layer.validate()?;
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].visible()
    }

    pub fn feature_dim(&self) -> usize {
        self.layers.last().map_or(0, AutoEncoderParams::hidden)
    }

    pub fn layer_dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(AutoEncoderParams::hidden));
        dims
    }

    /// Clean (uncorrupted) encoder composition through every layer.
    pub fn extract_features(&self, x: &[f64]) -> Result<Vector> {
        check_dim("extract_features", self.input_dim(), x.len())?;
        let mut h = Vector::from(self.input_range.apply(x));
        for layer in &self.layers {
            h = layer.encode(&h)?;
        }
        Ok(h)
    }

    pub fn extract_batch<X: AsRef<[f64]> + Sync>(&self, xs: &[X]) -> Result<Vec<Vector>> {
        xs.par_iter()
            .map(|x| self.extract_features(x.as_ref()))
            .collect()
    }
}

pub fn extract_features(model: &StackedModel, x: &[f64]) -> Result<Vector> {
    model.extract_features(x)
}

/// Receives each trained layer, and may supply one already trained (resume).
pub trait LayerStore {
    fn load(&mut self, layer: usize) -> Result<Option<SavedAutoEncoder>>;
    fn save(&mut self, layer: usize, saved: &SavedAutoEncoder) -> Result<()>;
}

/// Store that keeps nothing.
pub struct NoStore;

impl LayerStore for NoStore {
    fn load(&mut self, _layer: usize) -> Result<Option<SavedAutoEncoder>> {
        Ok(None)
    }

    fn save(&mut self, _layer: usize, _saved: &SavedAutoEncoder) -> Result<()> {
        Ok(())
    }
}

/// Trains the layers in order; layer `k + 1` sees the clean encodings of
/// layer `k`'s clean training inputs.
pub fn pretrain<X: AsRef<[f64]> + Sync>(
    spec: &StackSpec,
    data: &[X],
) -> Result<(StackedModel, Vec<LossReport>)> {
    pretrain_with_store(spec, data, &mut NoStore)
}

pub fn pretrain_with_store<X: AsRef<[f64]> + Sync>(
    spec: &StackSpec,
    data: &[X],
    store: &mut dyn LayerStore,
) -> Result<(StackedModel, Vec<LossReport>)> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::Data("no training data".into()));
    }
    for x in data {
        check_dim("stack input", spec.layer_dims[0], x.as_ref().len())?;
    }

    let mut current: Vec<Vector> = data
        .iter()
        .map(|x| Vector::from(spec.train.input_range.apply(x.as_ref())))
        .collect();
    let mut layers = Vec::with_capacity(spec.layer_count());
    let mut reports = Vec::with_capacity(spec.layer_count());

    for k in 0..spec.layer_count() {
        let variant = spec.layer_variant(k);
        let cfg = spec.layer_train(k);
        let with_layer = |e: Error| Error::Layer {
            layer: k,
            source: Box::new(e),
        };
        let reusable = store.load(k).map_err(with_layer)?.filter(|saved| {
            saved.variant == variant
                && saved.train == cfg
                && saved.visible == spec.layer_dims[k]
                && saved.hidden == spec.layer_dims[k + 1]
                && saved.params.activation == spec.activation
        });
        let (params, report) = match reusable {
            Some(saved) => (saved.params, saved.report),
            None => {
                let (params, report) =
                    train(&variant, &current, spec.layer_dims[k + 1], spec.activation, &cfg)
                        .map_err(with_layer)?;
                let saved = SavedAutoEncoder::new(params, variant, cfg, report);
                store.save(k, &saved).map_err(with_layer)?;
                (saved.params, saved.report)
            }
        };
        if k + 1 < spec.layer_count() {
            current = current
                .par_iter()
                .map(|x| params.encode(x))
                .collect::<Result<Vec<_>>>()?;
        }
        layers.push(params);
        reports.push(report);
    }
    Ok((StackedModel::new(layers, spec.train.input_range)?, reports))
}

/// Serialized stack: manifest plus every layer document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SavedStack {
    pub format: String,
    pub version: u32,
    pub rng: String,
    pub layer_dims: Vec<usize>,
    pub spec: StackSpec,
    pub input_range: InputRange,
    pub layers: Vec<SavedAutoEncoder>,
}

impl SavedStack {
    pub fn new(spec: StackSpec, layers: Vec<SavedAutoEncoder>) -> Self {
        SavedStack {
            format: STACK_FORMAT.into(),
            version: STACK_VERSION,
            rng: RNG_ALGORITHM.into(),
            layer_dims: spec.layer_dims.clone(),
            input_range: spec.train.input_range,
            spec,
            layers,
        }
    }

    pub fn model(&self) -> Result<StackedModel> {
        StackedModel::new(
            self.layers.iter().map(|l| l.params.clone()).collect(),
            self.input_range,
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let saved: SavedStack = serde_json::from_str(text)?;
        if saved.format != STACK_FORMAT || saved.version != STACK_VERSION {
            return Err(Error::Config(format!(
                "unsupported stack document {} v{}",
                saved.format, saved.version
            )));
        }
        let model = saved.model()?;
        if model.layer_dims() != saved.layer_dims {
            return Err(Error::Shape(format!(
                "manifest dims {:?} disagree with layers {:?}",
                saved.layer_dims,
                model.layer_dims()
            )));
        }
        Ok(saved)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::autoencoder::VariantKind;
    use crate::math::SeededRng;

    fn data(n: usize, d: usize) -> Vec<Vector> {
        let mut rng = SeededRng::new(17);
        (0..n)
            .map(|_| (0..d).map(|_| rng.uniform(0.0, 1.0)).collect())
            .collect()
    }

    fn small_train() -> TrainConfig {
        TrainConfig {
            epochs: 3,
            batch_size: 10,
            ..TrainConfig::default()
        }
    }

    #[test]
    fn one_layer_stack_equals_single_train() {
        let xs = data(30, 12);
        let variant = Variant::with_defaults(VariantKind::Cdae);
        let spec = StackSpec::new(vec![12, 5], Activation::Tanh, variant, small_train());
        let (model, reports) = pretrain(&spec, &xs).unwrap();
        let (params, report) = train(&variant, &xs, 5, Activation::Tanh, &small_train()).unwrap();
        assert_eq!(model.layers, vec![params.clone()]);
        assert_eq!(reports, vec![report]);
        assert_eq!(
            model.extract_features(&xs[0]).unwrap(),
            params.encode(&xs[0]).unwrap()
        );
    }

    #[test]
    fn chained_dims_and_feature_size() {
        let xs = data(40, 16);
        let spec = StackSpec::new(
            vec![16, 8, 3],
            Activation::Tanh,
            Variant::with_defaults(VariantKind::Dae),
            small_train(),
        );
        let (model, _) = pretrain(&spec, &xs).unwrap();
        assert_eq!(model.layer_dims(), vec![16, 8, 3]);
        let f = model.extract_features(&xs[3]).unwrap();
        assert_eq!(f.dim(), 3);
        assert!(f.is_finite());
    }

    #[test]
    fn zero_weight_stack_gives_half_vector() {
        let model = StackedModel::new(
            vec![
                AutoEncoderParams::zeros(6, 4, Activation::Sigmoid),
                AutoEncoderParams::zeros(4, 2, Activation::Sigmoid),
            ],
            InputRange::Unit,
        )
        .unwrap();
        assert_eq!(model.extract_features(&[0.3; 6]).unwrap().as_slice(), &[0.5, 0.5]);
    }

    #[test]
    fn batch_extraction_matches_individual() {
        let xs = data(25, 10);
        let spec = StackSpec::new(vec![10, 6, 4], Activation::Sigmoid, Variant::ae(), small_train());
        let (model, _) = pretrain(&spec, &xs).unwrap();
        let batch = model.extract_batch(&xs).unwrap();
        for (x, f) in xs.iter().zip(&batch) {
            assert_eq!(&model.extract_features(x).unwrap(), f);
        }
    }

    #[test]
    fn broken_chain_rejected() {
        assert!(StackedModel::new(
            vec![
                AutoEncoderParams::zeros(6, 4, Activation::Sigmoid),
                AutoEncoderParams::zeros(5, 2, Activation::Sigmoid),
            ],
            InputRange::Unit,
        )
        .is_err());
    }

    #[test]
    fn fraction_hidden_mask_policy() {
        let mut spec = StackSpec::new(
            vec![784, 200, 50],
            Activation::Tanh,
            Variant::with_defaults(VariantKind::Cdae),
            TrainConfig::default(),
        );
        assert_eq!(spec.layer_variant(1).corruption, CorruptionSpec::mnist_stride_mask());
        spec.hidden_mask = HiddenMask::Fraction;
        assert_eq!(spec.layer_variant(0).corruption, CorruptionSpec::mnist_stride_mask());
        assert_eq!(
            spec.layer_variant(1).corruption,
            CorruptionSpec::MaskFraction { fraction: 10.0 / 784.0 }
        );
    }

    #[test]
    fn layer_error_carries_index() {
        let xs = data(10, 4);
        let mut spec = StackSpec::new(vec![4, 3, 2], Activation::Tanh, Variant::ae(), small_train());
        spec.overrides.insert(
            1,
            LayerOverride {
                variant: None,
                train: Some(TrainConfig {
                    batch_size: 11,
                    ..small_train()
                }),
            },
        );
        match pretrain(&spec, &xs) {
            Err(Error::Layer { layer: 1, .. }) => {}
            other => panic!("expected layer-1 error, got {other:?}"),
        }
    }

    #[test]
    fn saved_stack_round_trip() {
        let xs = data(20, 6);
        let spec = StackSpec::new(vec![6, 4, 2], Activation::Tanh, Variant::cae(0.1), small_train());
        let mut layers = Vec::new();
        struct Collect<'a>(&'a mut Vec<SavedAutoEncoder>);
        impl LayerStore for Collect<'_> {
            fn load(&mut self, _: usize) -> Result<Option<SavedAutoEncoder>> {
                Ok(None)
            }
            fn save(&mut self, _: usize, s: &SavedAutoEncoder) -> Result<()> {
                self.0.push(s.clone());
                Ok(())
            }
        }
        let (model, _) = pretrain_with_store(&spec, &xs, &mut Collect(&mut layers)).unwrap();
        let saved = SavedStack::new(spec, layers);
        let back = SavedStack::from_json(&saved.to_json().unwrap()).unwrap();
        assert_eq!(back.model().unwrap(), model);
    }
}
