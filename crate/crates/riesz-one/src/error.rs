use std::path::PathBuf;

use serde::Serialize;

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error(transparent)]
    Core(#[from] riesz_one_core::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Usage(String),
    #[error("check failed: {0}")]
    CheckFailed(String),
    #[error("thread pool: {0}")]
    Pool(String),
}

pub type AppResult<T> = Result<T, AppError>;

#[derive(Serialize)]
struct ErrorBody<'a> {
    kind: &'a str,
    message: String,
}

#[derive(Serialize)]
struct ErrorEnvelope<'a> {
    error: ErrorBody<'a>,
}

impl AppError {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        AppError::Io {
            path: path.into(),
            source,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            AppError::Core(_) => "computation",
            AppError::Io { .. } => "io",
            AppError::Json { .. } => "config",
            AppError::Csv(_) => "csv",
            AppError::Usage(_) => "usage",
            AppError::CheckFailed(_) => "check-failed",
            AppError::Pool(_) => "thread-pool",
        }
    }

    /// 1 for bad invocations, 2 for everything that failed while computing.
    pub fn exit_code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::Json { .. } => 1,
            _ => 2,
        }
    }

    /// `{"error": {"kind": ..., "message": ...}}` on one line.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&ErrorEnvelope {
            error: ErrorBody {
                kind: self.kind(),
                message: self.to_string(),
            },
        })
        .expect("plain strings serialize")
    }
}
