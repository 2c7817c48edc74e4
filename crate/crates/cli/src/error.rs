//! Failure classes and their process exit codes.

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExitKind {
    Validation,
    MissingArtifact,
    Internal,
}

impl ExitKind {
    pub fn code(self) -> i32 {
        match self {
            ExitKind::Validation => 1,
            ExitKind::MissingArtifact => 2,
            ExitKind::Internal => 3,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub message: String,
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

pub fn validation(message: impl Into<String>) -> anyhow::Error {
    CliError { kind: ExitKind::Validation, message: message.into() }.into()
}

/// An upstream artifact is absent; the message names the stage to run.
pub fn missing(stage: &str, path: &std::path::Path) -> anyhow::Error {
    CliError {
        kind: ExitKind::MissingArtifact,
        message: format!("{stage} artifact missing: {} (run `fvkit {stage}` first)", path.display()),
    }
    .into()
}

/// Exit code for any error chain; unclassified errors are internal.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    err.chain()
        .find_map(|e| e.downcast_ref::<CliError>())
        .map(|e| e.kind.code())
        .unwrap_or(ExitKind::Internal.code())
}
