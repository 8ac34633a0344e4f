use std::fmt;

use hdgr::data::DataError;
use hdgr::encoder::EncodeError;
use hdgr::graph::GraphIoError;
use hdgr::hdc::HdcError;
use hdgr::refiner::RefineError;
use hdgr::synth::SynthError;
use hdgr::trainer::{CheckpointError, TrainError};
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorKind {
    Usage,
    Input,
    Numeric,
}

impl ErrorKind {
    pub fn exit_code(self) -> u8 {
        match self {
            Self::Usage => 1,
            Self::Input => 2,
            Self::Numeric => 3,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CliError {
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Usage, message: message.into() }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Input, message: message.into() }
    }

    pub fn numeric(message: impl Into<String>) -> Self {
        Self { kind: ErrorKind::Numeric, message: message.into() }
    }

    /// The single machine-readable line printed to stderr.
    pub fn to_json_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: ErrorLine<'a>,
        }
        #[derive(Serialize)]
        struct ErrorLine<'a> {
            kind: ErrorKind,
            code: u8,
            message: &'a str,
        }
        let line = Line { error: ErrorLine { kind: self.kind, code: self.kind.exit_code(), message: &self.message } };
        serde_json::to_string(&line).expect("error line serializes")
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl From<HdcError> for CliError {
    fn from(e: HdcError) -> Self {
        match e {
            HdcError::InvalidDimension(_) => Self::usage(e.to_string()),
            HdcError::DimensionMismatch { .. } => Self::input(e.to_string()),
            HdcError::EmptyBundle => Self::numeric(e.to_string()),
        }
    }
}

impl From<EncodeError> for CliError {
    fn from(e: EncodeError) -> Self {
        match e {
            EncodeError::Hdc(h) => h.into(),
            other => Self::input(other.to_string()),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::Hdc(h) => h.into(),
            TrainError::Config(_) => Self::usage(e.to_string()),
            TrainError::Diverged { .. } => Self::numeric(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<RefineError> for CliError {
    fn from(e: RefineError) -> Self {
        match e {
            RefineError::Encode(x) => x.into(),
            RefineError::Hdc(x) => x.into(),
            RefineError::Train(x) => x.into(),
            RefineError::Config(_) => Self::usage(e.to_string()),
            RefineError::EmptyLayer(_) | RefineError::InvalidGraph(_) | RefineError::MissingMessage(_) => {
                Self::numeric(e.to_string())
            }
        }
    }
}

impl From<SynthError> for CliError {
    fn from(e: SynthError) -> Self {
        match e {
            SynthError::Refine(x) => x.into(),
            SynthError::Hdc(x) => x.into(),
            SynthError::Infeasible(_) => Self::usage(e.to_string()),
            _ => Self::input(e.to_string()),
        }
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<GraphIoError> for CliError {
    fn from(e: GraphIoError) -> Self {
        Self::input(e.to_string())
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        Self::input(e.to_string())
    }
}
