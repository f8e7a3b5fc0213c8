//! Dataset container and generators for every experiment: structural-equation
//! regression, the color/shape classification family (synthetic analog or
//! real MNIST IDX files), confounded tabular resampling, and CSV persistence.

mod adult;
mod color_shape;
mod confound;
mod csv;
mod mnist;
mod sem;

pub use adult::load_uci_adult;
pub use color_shape::{gen_color_shape, ColorShapeConfig, ColorShapeSource, Phase};
pub use confound::{
    confound_resample, gen_confounded_tabular, ConfoundTargets, ConfoundedTabularConfig,
};
pub use csv::{load_csv, load_sidecar, save_csv, save_sidecar};
pub use mnist::{read_idx_images, read_idx_labels, IdxImages};
pub use sem::{gen_sem_regression, gen_sem_regression_with_z_noise, SemConfig};

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::Task;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{what} has length {actual}, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        expected: usize,
        actual: usize,
    },
    #[error("classification label at row {index} is {value}, must be 0 or 1")]
    InvalidLabel { index: usize, value: f64 },
    #[error("{what} contains a non-finite value at index {index}")]
    NonFinite { what: &'static str, index: usize },
    #[error("invalid dataset config: {0}")]
    InvalidConfig(String),
    #[error("dataset has no {0} annotations")]
    MissingAnnotation(&'static str),
    #[error("(group={group}, label={label}) stratum is empty; cannot resample")]
    EmptyCell { group: u32, label: u8 },
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing required column `{0}`")]
    MissingColumn(String),
    #[error("failed to ingest {path}: {message}")]
    Ingest { path: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Where the spurious color indicator lives in the feature matrix, recorded
/// by generators so an oracle color scorer can be constructed later.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ColorFeature {
    /// A single 0/1 feature column.
    Column { index: usize },
    /// Image features laid out as two channels of `channel_len` pixels; the
    /// color bit is 1 when the first channel is the populated one.
    ChannelPair { channel_len: usize },
}

/// Dataset name plus the generation parameters that produced it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub name: String,
    #[serde(default, skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub color_feature: Option<ColorFeature>,
}

impl DatasetMeta {
    pub fn named(name: impl Into<String>) -> Self {
        DatasetMeta {
            name: name.into(),
            ..Default::default()
        }
    }
}

/// Feature matrix, labels and optional environment / subgroup annotations;
/// the single container every pipeline stage consumes.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub x: Array2<f64>,
    pub y: Array1<f64>,
    pub env: Option<Vec<u32>>,
    pub group: Option<Vec<u32>>,
    pub task: Task,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn new(
        x: Array2<f64>,
        y: Array1<f64>,
        env: Option<Vec<u32>>,
        group: Option<Vec<u32>>,
        task: Task,
        meta: DatasetMeta,
    ) -> Result<Dataset, DataError> {
        let n = x.nrows();
        if y.len() != n {
            return Err(DataError::LengthMismatch {
                what: "label vector",
                expected: n,
                actual: y.len(),
            });
        }
        if let Some(env) = &env {
            if env.len() != n {
                return Err(DataError::LengthMismatch {
                    what: "env annotation",
                    expected: n,
                    actual: env.len(),
                });
            }
        }
        if let Some(group) = &group {
            if group.len() != n {
                return Err(DataError::LengthMismatch {
                    what: "group annotation",
                    expected: n,
                    actual: group.len(),
                });
            }
        }
        if let Some(index) = x.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                what: "feature matrix",
                index,
            });
        }
        if let Some(index) = y.iter().position(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                what: "label vector",
                index,
            });
        }
        if task == Task::BinaryClassification {
            for (index, &value) in y.iter().enumerate() {
                if value != 0.0 && value != 1.0 {
                    return Err(DataError::InvalidLabel { index, value });
                }
            }
        }
        Ok(Dataset {
            x,
            y,
            env,
            group,
            task,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    /// Row subset (with repetition allowed), carrying annotations along.
    pub fn select_rows(&self, indices: &[usize]) -> Dataset {
        let x = self.x.select(Axis(0), indices);
        let y = Array1::from_iter(indices.iter().map(|&i| self.y[i]));
        let env = self
            .env
            .as_ref()
            .map(|e| indices.iter().map(|&i| e[i]).collect());
        let group = self
            .group
            .as_ref()
            .map(|g| indices.iter().map(|&i| g[i]).collect());
        Dataset {
            x,
            y,
            env,
            group,
            task: self.task,
            meta: self.meta.clone(),
        }
    }

    /// Distinct group ids in ascending order.
    pub fn group_ids(&self) -> Option<Vec<u32>> {
        self.group.as_ref().map(|g| {
            let mut ids: Vec<u32> = g.clone();
            ids.sort_unstable();
            ids.dedup();
            ids
        })
    }
}
