use ndarray::{Array1, Array2};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{DecisionHead, RefineModel, TrainConfig};

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("unsupported checkpoint version {found} (expected {CHECKPOINT_VERSION})")]
    VersionMismatch { found: u32 },
    #[error("corrupt checkpoint: {0}")]
    Corrupt(String),
    #[error("checkpoint dimension mismatch: {0}")]
    Dimension(String),
}

#[derive(Serialize, Deserialize)]
struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    fn from_array(a: &Array2<f64>) -> Self {
        Self {
            rows: a.nrows(),
            cols: a.ncols(),
            data: a.iter().copied().collect(),
        }
    }

    fn into_array(self, what: &str) -> Result<Array2<f64>, CheckpointError> {
        Array2::from_shape_vec((self.rows, self.cols), self.data)
            .map_err(|e| CheckpointError::Corrupt(format!("{what}: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
enum HeadFile {
    Linear {
        weight: Matrix,
        bias: Vec<f64>,
    },
    Attention1 {
        window: usize,
        query: Matrix,
        key: Matrix,
        value: Matrix,
        output: Matrix,
        output_bias: Vec<f64>,
    },
}

#[derive(Serialize, Deserialize)]
struct Header {
    version: u32,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    dim: usize,
    latent_dim: usize,
    num_classes: usize,
    config: TrainConfig,
    edit_latent: Vec<f64>,
    latent_projection: Matrix,
    head: HeadFile,
}

pub fn save_model(model: &RefineModel) -> Vec<u8> {
    let head = match &model.head {
        DecisionHead::Linear { weight, bias } => HeadFile::Linear {
            weight: Matrix::from_array(weight),
            bias: bias.to_vec(),
        },
        DecisionHead::Attention { query, key, value, output, output_bias, window } => HeadFile::Attention1 {
            window: *window,
            query: Matrix::from_array(query),
            key: Matrix::from_array(key),
            value: Matrix::from_array(value),
            output: Matrix::from_array(output),
            output_bias: output_bias.to_vec(),
        },
    };
    let file = ModelFile {
        version: CHECKPOINT_VERSION,
        dim: model.dim(),
        latent_dim: model.latent_dim(),
        num_classes: model.num_classes(),
        config: model.config.clone(),
        edit_latent: model.edit_latent.to_vec(),
        latent_projection: Matrix::from_array(&model.latent_projection),
        head,
    };
    let mut out = serde_json::to_vec(&file).expect("checkpoint serialization is infallible");
    out.push(b'\n');
    out
}

fn expect_shape(what: &str, a: &Array2<f64>, rows: usize, cols: usize) -> Result<(), CheckpointError> {
    if a.dim() != (rows, cols) {
        return Err(CheckpointError::Dimension(format!(
            "{what} is {}x{}, expected {rows}x{cols}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn expect_len(what: &str, v: &[f64], len: usize) -> Result<(), CheckpointError> {
    if v.len() != len {
        return Err(CheckpointError::Dimension(format!("{what} has length {}, expected {len}", v.len())));
    }
    Ok(())
}

pub fn load_model(bytes: &[u8]) -> Result<RefineModel, CheckpointError> {
    let header: Header = serde_json::from_slice(bytes).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    if header.version != CHECKPOINT_VERSION {
        return Err(CheckpointError::VersionMismatch { found: header.version });
    }
    let file: ModelFile = serde_json::from_slice(bytes).map_err(|e| CheckpointError::Corrupt(e.to_string()))?;
    let (dim, d, c) = (file.dim, file.latent_dim, file.num_classes);
    expect_len("edit_latent", &file.edit_latent, d)?;
    let latent_projection = file.latent_projection.into_array("latent_projection")?;
    expect_shape("latent_projection", &latent_projection, dim, d)?;
    let head = match file.head {
        HeadFile::Linear { weight, bias } => {
            let weight = weight.into_array("head.weight")?;
            expect_shape("head.weight", &weight, c, dim)?;
            expect_len("head.bias", &bias, c)?;
            DecisionHead::Linear { weight, bias: Array1::from(bias) }
        }
        HeadFile::Attention1 { window, query, key, value, output, output_bias } => {
            let query = query.into_array("head.query")?;
            let hidden = query.nrows();
            expect_shape("head.query", &query, hidden, dim)?;
            let key = key.into_array("head.key")?;
            expect_shape("head.key", &key, hidden, dim)?;
            let value = value.into_array("head.value")?;
            expect_shape("head.value", &value, hidden, dim)?;
            let output = output.into_array("head.output")?;
            expect_shape("head.output", &output, c, hidden)?;
            expect_len("head.output_bias", &output_bias, c)?;
            if window == 0 {
                return Err(CheckpointError::Corrupt("attention window is zero".into()));
            }
            DecisionHead::Attention {
                query,
                key,
                value,
                output,
                output_bias: Array1::from(output_bias),
                window,
            }
        }
    };
    let model = RefineModel {
        edit_latent: Array1::from(file.edit_latent),
        latent_projection,
        head,
        config: file.config,
    };
    if !model.all_finite() {
        return Err(CheckpointError::Corrupt("non-finite parameter".into()));
    }
    Ok(model)
}

/// Loads a checkpoint and checks that it was trained at dimension `dim`.
pub fn load_model_for(bytes: &[u8], dim: usize) -> Result<RefineModel, CheckpointError> {
    let model = load_model(bytes)?;
    if model.dim() != dim {
        return Err(CheckpointError::Dimension(format!("model has D = {}, expected {dim}", model.dim())));
    }
    Ok(model)
}
