use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{arch_label, arch_name, ExperimentConfig};
use super::paths::RunPaths;
use crate::autoencoder::{SavedAutoEncoder, VariantKind, MODEL_FORMAT, MODEL_VERSION};
use crate::dataset::{sha256_hex, FEATURE_VERSION};
use crate::error::{Error, Result};
use crate::math::RNG_ALGORITHM;
use crate::stack::{STACK_FORMAT, STACK_VERSION};

pub const REPORT_FORMAT: &str = "cdae-report";
pub const REPORT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArtifactVersions {
    pub crate_version: String,
    pub model_format: String,
    pub model_version: u32,
    pub stack_format: String,
    pub stack_version: u32,
    pub feature_version: u32,
    pub rng: String,
}

impl ArtifactVersions {
    pub fn current() -> Self {
        ArtifactVersions {
            crate_version: env!("CARGO_PKG_VERSION").into(),
            model_format: MODEL_FORMAT.into(),
            model_version: MODEL_VERSION,
            stack_format: STACK_FORMAT.into(),
            stack_version: STACK_VERSION,
            feature_version: FEATURE_VERSION,
            rng: RNG_ALGORITHM.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerSummary {
    pub layer: usize,
    pub total: f64,
    pub reconstruction: f64,
    pub penalty: f64,
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureChecksums {
    pub train_sha256: String,
    pub test_sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantRow {
    pub variant: VariantKind,
    /// `None` when the run has no predictions for this variant.
    pub accuracy: Option<f64>,
    pub correct: Option<usize>,
    pub total: Option<usize>,
    pub layers: Vec<LayerSummary>,
    pub features: Option<FeatureChecksums>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchTable {
    pub architecture: String,
    pub layer_dims: Vec<usize>,
    pub rows: Vec<VariantRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: String,
    pub version: u32,
    pub versions: ArtifactVersions,
    pub config: ExperimentConfig,
    pub tables: Vec<ArchTable>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRow {
    pub index: usize,
    pub label: usize,
    pub predicted: usize,
}

pub fn write_predictions(rows: &[PredictionRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(|e| Error::Data(format!("csv: {e}")))?;
    }
    w.into_inner().map_err(|e| Error::Data(format!("csv: {e}")))
}

pub fn read_predictions(path: impl AsRef<Path>) -> Result<Vec<PredictionRow>> {
    let path = path.as_ref();
    let mut r = csv::Reader::from_path(path).map_err(|e| Error::Data(format!("{}: {e}", path.display())))?;
    r.deserialize()
        .map(|row| row.map_err(|e| Error::Data(format!("{}: {e}", path.display()))))
        .collect()
}

/// `(correct, total)` of a prediction file.
pub fn score(rows: &[PredictionRow]) -> (usize, usize) {
    (rows.iter().filter(|r| r.label == r.predicted).count(), rows.len())
}

fn file_sha256(path: &Path) -> Result<Option<String>> {
    if !path.exists() {
        return Ok(None);
    }
    Ok(Some(sha256_hex(&std::fs::read(path).map_err(|e| Error::io(path, e))?)))
}

fn layer_summaries(paths: &RunPaths, arch: &[usize], kind: VariantKind) -> Result<Vec<LayerSummary>> {
    let mut out = Vec::new();
    for k in 0..arch.len() - 1 {
        let p = paths.layer(arch, kind, k);
        if !p.exists() {
            break;
        }
        let saved = SavedAutoEncoder::from_json(&super::io::read_string(&p)?)?;
        out.push(LayerSummary {
            layer: k,
            total: saved.report.total,
            reconstruction: saved.report.reconstruction,
            penalty: saved.report.penalty,
            trace: saved.report.trace,
        });
    }
    Ok(out)
}

/// Rebuilds the report from the files under a run directory.
pub fn build_report(paths: &RunPaths) -> Result<RunReport> {
    let config = ExperimentConfig::from_json(&super::io::read_string(paths.config())?)?;
    let mut tables = Vec::new();
    for arch in &config.architectures {
        let mut rows = Vec::new();
        for kind in VariantKind::ALL {
            let preds = paths.predictions(arch, kind);
            let (accuracy, correct, total) = if preds.exists() {
                let (c, t) = score(&read_predictions(&preds)?);
                let acc = if t == 0 { 0.0 } else { c as f64 / t as f64 };
                (Some(acc), Some(c), Some(t))
            } else {
                (None, None, None)
            };
            let features = match (
                file_sha256(&paths.train_features(arch, kind))?,
                file_sha256(&paths.test_features(arch, kind))?,
            ) {
                (Some(train_sha256), Some(test_sha256)) => Some(FeatureChecksums {
                    train_sha256,
                    test_sha256,
                }),
                _ => None,
            };
            rows.push(VariantRow {
                variant: kind,
                accuracy,
                correct,
                total,
                layers: layer_summaries(paths, arch, kind)?,
                features,
            });
        }
        tables.push(ArchTable {
            architecture: arch_label(arch),
            layer_dims: arch.clone(),
            rows,
        });
    }
    Ok(RunReport {
        format: REPORT_FORMAT.into(),
        version: REPORT_VERSION,
        versions: ArtifactVersions::current(),
        config,
        tables,
    })
}

impl RunReport {
    pub fn table(&self, arch: &[usize]) -> Option<&ArchTable> {
        self.tables.iter().find(|t| t.layer_dims == arch)
    }

    pub fn accuracy(&self, arch: &[usize], kind: VariantKind) -> Option<f64> {
        self.table(arch)?
            .rows
            .iter()
            .find(|r| r.variant == kind)?
            .accuracy
    }

    /// Aligned plain-text tables, one per architecture.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (i, t) in self.tables.iter().enumerate() {
            if i > 0 {
                s.push('\n');
            }
            let _ = writeln!(s, "Architecture {} ({})", t.architecture, arch_name(&t.layer_dims));
            let _ = writeln!(s, "{:<8} {:>9} {:>13}", "Variant", "Accuracy", "Correct/Total");
            for r in &t.rows {
                match (r.accuracy, r.correct, r.total) {
                    (Some(a), Some(c), Some(n)) => {
                        let _ = writeln!(
                            s,
                            "{:<8} {:>8.2}% {:>13}",
                            r.variant.label(),
                            100.0 * a,
                            format!("{c}/{n}")
                        );
                    }
                    _ => {
                        let _ = writeln!(s, "{:<8} {:>9} {:>13}", r.variant.label(), "missing", "-");
                    }
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_and_score() {
        let rows = vec![
            PredictionRow { index: 0, label: 3, predicted: 3 },
            PredictionRow { index: 1, label: 4, predicted: 9 },
        ];
        let bytes = write_predictions(&rows).unwrap();
        assert!(bytes.starts_with(b"index,label,predicted\n0,3,3\n"));
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("p.csv");
        std::fs::write(&p, &bytes).unwrap();
        let back = read_predictions(&p).unwrap();
        assert_eq!(back, rows);
        assert_eq!(score(&back), (1, 2));
    }

    #[test]
    fn perfect_predictions_score_one() {
        let rows: Vec<_> = (0..10)
            .map(|i| PredictionRow { index: i, label: i % 10, predicted: i % 10 })
            .collect();
        assert_eq!(score(&rows), (10, 10));
    }

    #[test]
    fn text_table_marks_missing() {
        let report = RunReport {
            format: REPORT_FORMAT.into(),
            version: REPORT_VERSION,
            versions: ArtifactVersions::current(),
            config: crate::harness::ExperimentConfig::preset(crate::harness::Scale::Desk),
            tables: vec![ArchTable {
                architecture: "784-200-50-200-784".into(),
                layer_dims: vec![784, 200, 50],
                rows: VariantKind::ALL
                    .iter()
                    .map(|&k| VariantRow {
                        variant: k,
                        accuracy: (k == VariantKind::Ae).then_some(0.9312),
                        correct: (k == VariantKind::Ae).then_some(9312),
                        total: (k == VariantKind::Ae).then_some(10000),
                        layers: vec![],
                        features: None,
                    })
                    .collect(),
            }],
        };
        let text = report.to_text();
        assert!(text.contains("AE          93.12%    9312/10000"), "{text}");
        assert_eq!(text.matches("missing").count(), 3);
        assert_eq!(report.accuracy(&[784, 200, 50], VariantKind::Ae), Some(0.9312));
    }
}
