//! Versioned JSON model files.

use std::path::Path;

use serde::{Deserialize, Serialize};
use xfer_core::corpus::Task;
use xfer_core::FittedModel;

use crate::error::{Error, Location, Result};

pub const FORMAT: &str = "xfer-model";
pub const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub task: Task,
    pub seed: u64,
    pub config_sha256: String,
    pub model: FittedModel,
}

impl ModelFile {
    pub fn new(task: Task, seed: u64, config_sha256: String, model: FittedModel) -> Self {
        ModelFile {
            format: FORMAT.into(),
            version: VERSION,
            task,
            seed,
            config_sha256,
            model,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("model serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str, path: &Path) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text).map_err(|e| {
            Error::data(Location::line(path, e.line() as u64), format!("invalid model file: {e}"))
        })?;
        if file.format != FORMAT || file.version != VERSION {
            return Err(Error::data(
                Location::file(path),
                format!("unsupported model format {} version {}", file.format, file.version),
            ));
        }
        Ok(file)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use xfer_core::encoding::PairDataset;
    use xfer_core::learn::{fit, ModelConfig};
    use xfer_core::Sequential;

    #[test]
    fn predictions_survive_a_round_trip_bit_for_bit() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![(i as f64 * 0.37).sin(), (i % 7) as f64 / 3.0]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.5 + 0.3 * r[0] - 0.1 * r[1] + 1e-3 / 3.0).collect();
        let d = PairDataset::from_numeric(&["a", "b"], &rows, y).unwrap();
        for config in [ModelConfig::linear(), ModelConfig::forest(3), ModelConfig::gbm(3)] {
            let mut config = config;
            config.n_trees = config.n_trees.min(20);
            let model = fit(&d, &config, &Sequential).unwrap();
            let file = ModelFile::new(Task::Pos, 3, "x".into(), model.clone());
            let back = ModelFile::from_json(&file.to_json(), Path::new("m.json")).unwrap();
            assert_eq!(back, file);
            for r in 0..d.n_rows() {
                assert_eq!(back.model.predict_row(d.row(r)).to_bits(), model.predict_row(d.row(r)).to_bits());
            }
        }
        let e = ModelFile::from_json("{\"format\":\"other\"}", Path::new("m.json")).unwrap_err();
        assert!(e.to_string().starts_with("m.json:1: invalid model file"), "{e}");
    }
}
