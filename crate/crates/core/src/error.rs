//! Crate-wide error type and its mapping to process exit codes.

use thiserror::Error;

use crate::classify::ClassifyError;
use crate::embed::EmbedError;
use crate::graph::{DatasetError, GraphError};
use crate::incidence::IncidenceError;
use crate::miner::MinerError;
use crate::walks::WalkError;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error(transparent)]
    Miner(#[from] MinerError),
    #[error(transparent)]
    Embed(#[from] EmbedError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error(transparent)]
    Incidence(#[from] IncidenceError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{stage} stage failed: {source}")]
    Stage { stage: &'static str, source: Box<Error> },
}

/// Coarse error categories, one exit code each.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Dataset,
    ResourceLimit,
    Internal,
}

impl ErrorClass {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorClass::Config => 2,
            ErrorClass::Dataset => 3,
            ErrorClass::ResourceLimit => 4,
            ErrorClass::Internal => 5,
        }
    }
}

impl Error {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        Error::Io { path: path.as_ref().display().to_string(), source }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage { stage, source: Box::new(e) },
        }
    }

    pub fn class(&self) -> ErrorClass {
        use ErrorClass::*;
        match self {
            Error::Config(_) => Config,
            Error::Io { .. } | Error::Incidence(_) => Internal,
            Error::Stage { source, .. } => source.class(),
            Error::Dataset(_) => Dataset,
            Error::Graph(e) => match e {
                GraphError::OracleScale(_) => ResourceLimit,
                GraphError::InvalidPattern(_) => Internal,
                _ => Dataset,
            },
            Error::Walk(e) => match e {
                WalkError::Config(_) | WalkError::Domain(_) => Config,
                WalkError::Parse(_) => Internal,
                _ => Dataset,
            },
            Error::Miner(e) => match e {
                MinerError::Config(_) => Config,
                MinerError::ResourceLimit { .. } => ResourceLimit,
                _ => Internal,
            },
            Error::Embed(e) => match e {
                EmbedError::Config(_) => Config,
                EmbedError::DegenerateGraph(_) | EmbedError::RowMismatch { .. } => Dataset,
                _ => Internal,
            },
            Error::Classify(e) => match e {
                ClassifyError::Config(_) => Config,
                _ => Dataset,
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        self.class().exit_code()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classes_map_to_distinct_codes() {
        let cases = [
            (Error::from(MinerError::Config("theta".into())), 2),
            (Error::from(DatasetError::MissingFile("x".into())), 3),
            (Error::from(MinerError::ResourceLimit { theta: 0.1, budget: 5 }), 4),
            (Error::from(EmbedError::Format("bad".into())), 5),
        ];
        for (e, code) in cases {
            assert_eq!(e.exit_code(), code, "{e}");
        }
    }

    #[test]
    fn stage_wrapper_keeps_class_and_names_stage() {
        let e = Error::from(WalkError::Config("length".into())).in_stage("skeleton").in_stage("run");
        assert_eq!(e.class(), ErrorClass::Config);
        assert!(e.to_string().starts_with("skeleton stage failed"));
    }
}
