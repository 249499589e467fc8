use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{arch_name, ExperimentConfig, GRID_C, GRID_SIGMA_FACTORS};
use super::io::{atomic_write, read_string, write_json};
use super::paths::RunPaths;
use super::report::{build_report, read_predictions, score, write_predictions, PredictionRow, RunReport};
use crate::autoencoder::{SavedAutoEncoder, VariantKind};
use crate::dataset::{encode_features, load_split, read_features, sha256_hex, LabeledSet};
use crate::error::{Error, Result};
use crate::stack::{pretrain_with_store, LayerStore, SavedStack};
use crate::svm::{accuracy, grid_search, GridChoice, MulticlassSvm, SmoParams};

/// Layer store backed by `layer-<k>.json` files.
struct DirStore<'a> {
    paths: &'a RunPaths,
    arch: &'a [usize],
    kind: VariantKind,
    log: &'a dyn Fn(&str),
}

impl LayerStore for DirStore<'_> {
    fn load(&mut self, layer: usize) -> Result<Option<SavedAutoEncoder>> {
        let p = self.paths.layer(self.arch, self.kind, layer);
        if !p.exists() {
            return Ok(None);
        }
        (self.log)(&format!("{}/{}: found layer {layer}", arch_name(self.arch), self.kind.tag()));
        SavedAutoEncoder::from_json(&read_string(&p)?).map(Some)
    }

    fn save(&mut self, layer: usize, saved: &SavedAutoEncoder) -> Result<()> {
        (self.log)(&format!(
            "{}/{}: trained layer {layer}, final loss {:.6}",
            arch_name(self.arch),
            self.kind.tag(),
            saved.report.total
        ));
        atomic_write(self.paths.layer(self.arch, self.kind, layer), saved.to_json()?.as_bytes())
    }
}

/// Outcome of classifying one variant's features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifyRecord {
    pub variant: VariantKind,
    pub architecture: String,
    pub accuracy: f64,
    pub correct: usize,
    pub total: usize,
    pub svm: SmoParams,
    pub grid: Option<GridChoice>,
    pub train_features_sha256: String,
    pub test_features_sha256: String,
}

/// Wall-clock seconds per stage, kept apart from the report so that the
/// report stays byte-identical between runs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub seconds: BTreeMap<String, f64>,
}

/// An experiment bound to a run directory.
pub struct Run {
    pub config: ExperimentConfig,
    pub paths: RunPaths,
    log: Box<dyn Fn(&str) + Sync>,
}

impl Run {
    pub fn new(config: ExperimentConfig, paths: RunPaths) -> Self {
        Run {
            config: config.resolved(),
            paths,
            log: Box::new(|_| {}),
        }
    }

    /// Receives one line per completed step.
    pub fn with_log(mut self, log: impl Fn(&str) + Sync + 'static) -> Self {
        self.log = Box::new(log);
        self
    }

    fn log(&self, msg: &str) {
        (self.log)(msg)
    }

    /// Validates the configuration and records it as `config.json`. A run
    /// directory holding a different configuration is refused.
    pub fn prepare(&self) -> Result<()> {
        self.config.validate()?;
        let text = self.config.to_json()? + "\n";
        let p = self.paths.config();
        if p.exists() {
            let mut existing = ExperimentConfig::from_json(&read_string(&p)?)?;
            existing.output_dir.clone_from(&self.config.output_dir);
            if existing != self.config {
                return Err(Error::Config(format!(
                    "{} holds a different configuration; use a fresh output directory",
                    p.display()
                )));
            }
        }
        atomic_write(p, text.as_bytes())
    }

    pub fn load_data(&self) -> Result<(LabeledSet, LabeledSet)> {
        let data = self.config.data.resolved();
        let (train, test) = load_split(&data.images, &data.labels, &self.config.split)?;
        train.check_unit_range()?;
        test.check_unit_range()?;
        self.log(&format!("loaded {} train / {} test images", train.len(), test.len()));
        Ok((train, test))
    }

    fn check_arch(&self, arch: &[usize]) -> Result<()> {
        if self.config.architectures.iter().any(|a| a == arch) {
            Ok(())
        } else {
            Err(Error::Config(format!("architecture {} is not configured", arch_name(arch))))
        }
    }

    /// Pretrains the stack, reusing any matching layer files, and writes
    /// `model.json`.
    pub fn train(&self, arch: &[usize], kind: VariantKind, train: &LabeledSet) -> Result<SavedStack> {
        self.check_arch(arch)?;
        let spec = self.config.stack_spec(arch, kind);
        let mut store = DirStore {
            paths: &self.paths,
            arch,
            kind,
            log: &*self.log,
        };
        let (_, reports) = pretrain_with_store(&spec, &train.samples, &mut store)?;
        // Layer files now hold exactly the layers the model is built from.
        let layers = (0..spec.layer_count())
            .map(|k| SavedAutoEncoder::from_json(&read_string(self.paths.layer(arch, kind, k))?))
            .collect::<Result<Vec<_>>>()?;
        debug_assert!(layers.iter().zip(&reports).all(|(l, r)| &l.report == r));
        let saved = SavedStack::new(spec, layers);
        atomic_write(self.paths.model(arch, kind), saved.to_json()?.as_bytes())?;
        Ok(saved)
    }

    /// Encodes both splits with the saved model into feature files.
    pub fn extract(
        &self,
        arch: &[usize],
        kind: VariantKind,
        train: &LabeledSet,
        test: &LabeledSet,
    ) -> Result<()> {
        let model_text = read_string(self.paths.model(arch, kind))?;
        let model = SavedStack::from_json(&model_text)?.model()?;
        if model.layer_dims() != arch {
            return Err(Error::Shape(format!(
                "model dims {:?} do not match architecture {:?}",
                model.layer_dims(),
                arch
            )));
        }
        let model_sha = sha256_hex(model_text.as_bytes());
        for (set, path) in [
            (train, self.paths.train_features(arch, kind)),
            (test, self.paths.test_features(arch, kind)),
        ] {
            let mut provenance = set.provenance.clone();
            provenance.insert("model_sha256".into(), model_sha.clone());
            provenance.insert("variant".into(), kind.tag().into());
            provenance.insert("architecture".into(), arch_name(arch));
            let features = LabeledSet::new(model.extract_batch(&set.samples)?, set.labels.clone(), provenance)?;
            atomic_write(path, &encode_features(&features)?)?;
        }
        self.log(&format!("{}/{}: extracted features", arch_name(arch), kind.tag()));
        Ok(())
    }

    /// Trains the multiclass SVM on the train features and scores the test
    /// features. A previous result for the same feature files is reused.
    pub fn classify(&self, arch: &[usize], kind: VariantKind) -> Result<ClassifyRecord> {
        let train_bytes = std::fs::read(self.paths.train_features(arch, kind))
            .map_err(|e| Error::io(self.paths.train_features(arch, kind), e))?;
        let test_bytes = std::fs::read(self.paths.test_features(arch, kind))
            .map_err(|e| Error::io(self.paths.test_features(arch, kind), e))?;
        let train_sha = sha256_hex(&train_bytes);
        let test_sha = sha256_hex(&test_bytes);

        let record_path = self.paths.classify(arch, kind);
        if record_path.exists() && self.paths.predictions(arch, kind).exists() {
            let prior: ClassifyRecord = serde_json::from_str(&read_string(&record_path)?)?;
            if prior.train_features_sha256 == train_sha && prior.test_features_sha256 == test_sha {
                self.log(&format!("{}/{}: classification up to date", arch_name(arch), kind.tag()));
                return Ok(prior);
            }
        }

        let train = read_features(self.paths.train_features(arch, kind))?;
        let test = read_features(self.paths.test_features(arch, kind))?;
        if train.dim() != test.dim() {
            return Err(Error::Dimension {
                context: "train vs test features",
                expected: train.dim(),
                found: test.dim(),
            });
        }
        let classes = crate::dataset::CLASS_COUNT;
        let mut params = self.config.svm.params(train.dim());
        let grid = if self.config.svm.grid_search {
            let g = grid_search(
                &train.samples,
                &train.labels,
                classes,
                &GRID_C,
                &GRID_SIGMA_FACTORS,
                &params,
                self.config.seed,
            )?;
            params.c = g.c;
            params.kernel = crate::svm::KernelSpec::Rbf { sigma: g.sigma };
            Some(g)
        } else {
            None
        };
        let svm = MulticlassSvm::train(&train.samples, &train.labels, classes, &params)?;
        let predicted = svm.predict_batch(&test.samples)?;
        let rows: Vec<PredictionRow> = predicted
            .iter()
            .zip(&test.labels)
            .enumerate()
            .map(|(index, (&predicted, &label))| PredictionRow {
                index,
                label,
                predicted,
            })
            .collect();
        let (correct, total) = score(&rows);
        let record = ClassifyRecord {
            variant: kind,
            architecture: arch_name(arch),
            accuracy: accuracy(&predicted, &test.labels)?,
            correct,
            total,
            svm: params,
            grid,
            train_features_sha256: train_sha,
            test_features_sha256: test_sha,
        };
        atomic_write(self.paths.svm(arch, kind), svm.to_json()?.as_bytes())?;
        atomic_write(self.paths.predictions(arch, kind), &write_predictions(&rows)?)?;
        write_json(&record_path, &record)?;
        self.log(&format!(
            "{}/{}: accuracy {:.2}% ({correct}/{total})",
            arch_name(arch),
            kind.tag(),
            100.0 * record.accuracy
        ));
        Ok(record)
    }

    /// Writes `report.json` and `report.txt` from the run directory.
    pub fn report(&self) -> Result<RunReport> {
        report_dir(&self.paths)
    }

    /// The whole pipeline for every configured architecture and variant.
    pub fn reproduce(&self) -> Result<RunReport> {
        self.prepare()?;
        let mut timings = Timings::default();
        let t0 = Instant::now();
        let (train, test) = self.load_data()?;
        timings.seconds.insert("load".into(), t0.elapsed().as_secs_f64());
        for arch in &self.config.architectures {
            for &kind in &self.config.variants {
                let key = format!("{}/{}", arch_name(arch), kind.tag());
                let t = Instant::now();
                self.train(arch, kind, &train)?;
                timings.seconds.insert(format!("{key}/train"), t.elapsed().as_secs_f64());
                let t = Instant::now();
                self.extract(arch, kind, &train, &test)?;
                timings.seconds.insert(format!("{key}/extract"), t.elapsed().as_secs_f64());
                let t = Instant::now();
                self.classify(arch, kind)?;
                timings.seconds.insert(format!("{key}/classify"), t.elapsed().as_secs_f64());
            }
        }
        timings.seconds.insert("total".into(), t0.elapsed().as_secs_f64());
        write_json(self.paths.timings(), &timings)?;
        self.report()
    }
}

/// Rebuilds and writes the report of an existing run directory.
pub fn report_dir(paths: &RunPaths) -> Result<RunReport> {
    let report = build_report(paths)?;
    write_json(paths.report_json(), &report)?;
    atomic_write(paths.report_txt(), report.to_text().as_bytes())?;
    Ok(report)
}

/// Accuracy recomputed from a predictions file.
pub fn accuracy_from_predictions(path: impl AsRef<std::path::Path>) -> Result<f64> {
    let (c, t) = score(&read_predictions(path)?);
    if t == 0 {
        return Err(Error::Data("empty predictions file".into()));
    }
    Ok(c as f64 / t as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Scale;

    #[test]
    fn prepare_accepts_same_config_and_refuses_another() {
        let dir = tempfile::tempdir().unwrap();
        let mut cfg = ExperimentConfig::preset(Scale::Desk);
        cfg.output_dir = Some(dir.path().to_path_buf());
        let run = Run::new(cfg.clone(), RunPaths::new(dir.path()));
        run.prepare().unwrap();
        run.prepare().unwrap();
        let other = Run::new(cfg.with_seed(7), RunPaths::new(dir.path()));
        assert!(matches!(other.prepare(), Err(Error::Config(_))));
    }
}
