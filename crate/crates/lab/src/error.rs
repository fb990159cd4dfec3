use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum LabError {
    #[error("config: {0}")]
    Config(String),
    #[error("{op}: {source}")]
    Numerical {
        op: &'static str,
        #[source]
        source: spectrans_core::Error,
    },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl LabError {
    /// Process exit code for this failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            LabError::Config(_) => 2,
            _ => 3,
        }
    }
}

pub type LabResult<T> = Result<T, LabError>;

/// Tags core failures with the operation that raised them.
pub trait AtOp<T> {
    fn at(self, op: &'static str) -> LabResult<T>;
}

impl<T> AtOp<T> for spectrans_core::Result<T> {
    fn at(self, op: &'static str) -> LabResult<T> {
        self.map_err(|source| LabError::Numerical { op, source })
    }
}

pub(crate) fn config_err(msg: impl Into<String>) -> LabError {
    LabError::Config(msg.into())
}
