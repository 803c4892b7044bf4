use std::path::PathBuf;

use lorentz_core::ErrorClass;
use serde_json::{json, Value};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] lorentz_core::Error),

    #[error("{0}")]
    Usage(String),

    #[error("cannot parse {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },

    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) => match e.class() {
                ErrorClass::Validation => 2,
                ErrorClass::Numerical => 3,
            },
            CliError::Usage(_) | CliError::Parse { .. } => 2,
            CliError::Io { .. } => 4,
        }
    }

    pub fn code(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.code(),
            CliError::Usage(_) => "UsageError",
            CliError::Parse { .. } => "ParseError",
            CliError::Io { .. } => "IoError",
        }
    }

    fn class(&self) -> &'static str {
        match self.exit_code() {
            2 => "validation",
            3 => "numerical",
            _ => "io",
        }
    }

    /// Numeric payload of the error, where there is one.
    fn details(&self) -> Option<Value> {
        use lorentz_core::Error as E;
        let CliError::Core(e) = self else { return None };
        Some(match e {
            E::Domain { u, v, domain } => json!({ "u": u, "v": v, "domain": domain }),
            E::IntegrabilityTooLarge { residual, threshold } => json!({ "residual": residual, "threshold": threshold }),
            E::StepTooLarge { drift, ceiling } => json!({ "drift": drift, "ceiling": ceiling }),
            E::InvalidMetric { i, j, value } => json!({ "i": i, "j": j, "value": value }),
            E::FrameBranchFlip { u, v } => json!({ "u": u, "v": v }),
            E::MuVanishes { i, j } => json!({ "i": i, "j": j }),
            E::NotSeparable { residual, tolerance } => json!({ "residual": residual, "tolerance": tolerance }),
            E::NonPositive { what, value } => json!({ "what": what, "value": value }),
            E::GridTooSmall { nu, nv, min } => json!({ "nu": nu, "nv": nv, "min": min }),
            E::NoPrincipalTangents { discriminant } => json!({ "discriminant": discriminant }),
            _ => return None,
        })
    }

    /// Machine-readable error object written to stderr.
    pub fn to_json(&self) -> Value {
        let mut obj = json!({
            "code": self.code(),
            "class": self.class(),
            "exit_code": self.exit_code(),
            "message": self.to_string(),
        });
        if let Some(d) = self.details() {
            obj["details"] = d;
        }
        json!({ "error": obj })
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
