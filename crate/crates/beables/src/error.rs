use std::path::PathBuf;

use serde::Serialize;

/// Everything that can end a run, with its process exit code.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("invalid {field}: {constraint}")]
    Validation { field: String, constraint: String },

    #[error("post-selection has zero probability (denominator {denominator:e})")]
    ImpossiblePostSelection { denominator: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl RunError {
    pub fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        RunError::Validation { field: field.into(), constraint: constraint.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        RunError::Io { path: path.into(), source }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Validation { .. } => 2,
            RunError::ImpossiblePostSelection { .. } => 3,
            RunError::Invariant(_) => 4,
            RunError::Io { .. } => 5,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            RunError::Validation { .. } => "validation",
            RunError::ImpossiblePostSelection { .. } => "impossible-post-selection",
            RunError::Invariant(_) => "invariant",
            RunError::Io { .. } => "io",
        }
    }

    /// One-line JSON rendering for stderr.
    pub fn report_line(&self) -> String {
        #[derive(Serialize)]
        struct Line<'a> {
            error: &'a str,
            exit_code: i32,
            message: String,
            #[serde(skip_serializing_if = "Option::is_none")]
            field: Option<&'a str>,
            #[serde(skip_serializing_if = "Option::is_none")]
            constraint: Option<&'a str>,
        }
        let (field, constraint) = match self {
            RunError::Validation { field, constraint } => (Some(field.as_str()), Some(constraint.as_str())),
            _ => (None, None),
        };
        let line = Line { error: self.kind(), exit_code: self.exit_code(), message: self.to_string(), field, constraint };
        serde_json::to_string(&line).expect("plain struct serializes")
    }
}

impl From<beables_core::Error> for RunError {
    fn from(e: beables_core::Error) -> Self {
        use beables_core::Error as E;
        match e {
            E::Validation { field, constraint } => RunError::Validation { field, constraint },
            E::ImpossiblePostSelection { denominator } => RunError::ImpossiblePostSelection { denominator },
            E::Capacity { requested, cap } => {
                RunError::validation("dimension", format!("{requested} exceeds the cap of {cap}"))
            }
            E::DimensionMismatch { expected, found } => {
                RunError::validation("dimension", format!("expected {expected}, found {found}"))
            }
            other => RunError::Invariant(other.to_string()),
        }
    }
}

pub type Result<T, E = RunError> = std::result::Result<T, E>;
