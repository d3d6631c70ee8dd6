//! Failure classes that map to distinct exit codes.

use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Bad configuration or arguments (exit 2).
    Config(String),
    /// Requested output is not supported by the available precision (exit 3).
    Audit(String),
    /// Unreadable, corrupt or inconsistent checkpoint (exit 4).
    Checkpoint(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Config(m) => write!(f, "configuration error: {m}"),
            Self::Audit(m) => write!(f, "precision audit failed: {m}"),
            Self::Checkpoint(m) => write!(f, "checkpoint error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub const EXIT_OTHER: u8 = 1;
pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_AUDIT: u8 = 3;
pub const EXIT_CHECKPOINT: u8 = 4;

/// First recognised cause in the chain decides the code.
pub fn exit_code(err: &anyhow::Error) -> u8 {
    use cflab_core::{CatalogError, CheckpointError, ContFracError, DiagnosticsError};
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return match e {
                CliError::Config(_) => EXIT_CONFIG,
                CliError::Audit(_) => EXIT_AUDIT,
                CliError::Checkpoint(_) => EXIT_CHECKPOINT,
            };
        }
        if let Some(e) = cause.downcast_ref::<ContFracError>() {
            if matches!(
                e,
                ContFracError::PrecisionNotCertified { .. }
                    | ContFracError::DigitsUndetermined { .. }
                    | ContFracError::EmptyPrefix
            ) {
                return EXIT_AUDIT;
            }
        }
        if let Some(DiagnosticsError::PrecisionAudit { .. }) = cause.downcast_ref::<DiagnosticsError>() {
            return EXIT_AUDIT;
        }
        if cause.downcast_ref::<CheckpointError>().is_some() {
            return EXIT_CHECKPOINT;
        }
        if cause.downcast_ref::<CatalogError>().is_some() {
            return EXIT_CONFIG;
        }
    }
    EXIT_OTHER
}
