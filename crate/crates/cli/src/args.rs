//! Command-line and config-file options.
//!
//! Every option struct doubles as the config-file schema (kebab-case keys,
//! same names as the flags). Unset options serialize to nothing, so merging
//! is a plain JSON object overlay with flags applied last.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "lorentz4", version, about = "Invariants, moving frames and reconstruction of Lorentz surfaces in E^4_2")]
pub struct Cli {
    /// JSON file with option defaults (keys as flag names); flags take precedence.
    /// A nested object named after the subcommand overrides top-level keys.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Second-order invariants on a grid of points (JSON and CSV).
    Analyze(AnalyzeArgs),
    /// Point-class summary table.
    Classify(ClassifyArgs),
    /// Extract the geometric moving frame and functions on a grid.
    Frame(FrameArgs),
    /// Rebuild a surface from a geometric-function grid.
    Reconstruct(ReconstructArgs),
    /// Residuals of the canonical-parameter PDEs for a (lambda, mu, nu) triple.
    #[command(name = "pnmcv-verify")]
    PnmcvVerify(PnmcvVerifyArgs),
    /// Separate E|mu|, -G|mu| and move the data to canonical parameters.
    Canonicalize(CanonicalizeArgs),
    /// Write a z grid as an OBJ mesh.
    Export(ExportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Analyze(_) => "analyze",
            Command::Classify(_) => "classify",
            Command::Frame(_) => "frame",
            Command::Reconstruct(_) => "reconstruct",
            Command::PnmcvVerify(_) => "pnmcv-verify",
            Command::Canonicalize(_) => "canonicalize",
            Command::Export(_) => "export",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JetMode {
    /// Exact derivatives from the catalog formulas.
    Analytic,
    /// Central differences of the position with step --fd-step.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// Positively oriented coordinate frame with signature (1, -1, eps, -eps).
    Standard,
    /// Frame and position stored in the grid's anchor.
    Anchor,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct SurfaceOpts {
    /// Catalog surface: plane, saddle, graph2, graphP, graphK, graphT, chen.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub surface: Option<String>,

    /// Surface parameter NAME=VALUE (repeatable).
    #[arg(long = "param", value_name = "NAME=VALUE")]
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub param: Vec<String>,

    /// Sampled z-grid JSON (e.g. a reconstruction) instead of a catalog surface.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Parameter rectangle.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "U0,U1,V0,V1")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<Vec<f64>>,

    /// Nodes per axis (one value for both, or NU,NV).
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "N[,NV]")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub res: Option<Vec<usize>>,

    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jets: Option<JetMode>,

    /// Finite-difference step for numeric jets.
    #[arg(long, value_name = "H")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fd_step: Option<f64>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceOpts,

    /// Relative tolerance for zero tests in the classification.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// JSON report path (default analyze.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// CSV table path (default: the JSON path with a .csv extension).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ClassifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceOpts,

    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Also write the counts as JSON.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct FrameArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub surface: SurfaceOpts,

    /// Step for differentiating the frame field (sampled inputs use the grid spacing).
    #[arg(long, value_name = "H")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub frame_step: Option<f64>,

    /// Node whose frame and position are stored as the anchor (snapped; default centre).
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "U,V")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub anchor: Option<Vec<f64>>,

    /// Output path (default frame.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ReconstructArgs {
    /// Geometric-function grid JSON (as written by `frame`).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Initial frame (default: anchor when the grid has one).
    #[arg(long, value_enum)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub init: Option<InitMode>,

    /// Parameter point where the initial data is placed (snapped to a node).
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "U,V")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,

    /// Initial position.
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "X1,X2,X3,X4")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p0: Option<Vec<f64>>,

    /// Largest admissible integrability residual.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,

    /// Re-orthonormalize the frame every K steps.
    #[arg(long, value_name = "K")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reorthonormalize: Option<usize>,

    /// Output path (default reconstruct.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// OBJ path (default: the JSON path with an .obj extension).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub obj: Option<PathBuf>,

    /// Ambient coordinates for the OBJ projection, 1-based.
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "A,B,C")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<usize>>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct PnmcvVerifyArgs {
    /// Canonical triple JSON.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Fail (exit 3) when the largest residual exceeds this value.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Output path (default pnmcv-verify.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct CanonicalizeArgs {
    /// PNMCV grid JSON {domain, eps, e, g, lambda, mu, nu} or a principal
    /// geometric-function grid.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Point where the new parameters vanish (default: lower-left corner).
    #[arg(long, value_delimiter = ',', num_args = 1, allow_hyphen_values = true, value_name = "U0,V0")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub origin: Option<Vec<f64>>,

    /// Largest admissible cross-variation residual.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,

    /// Output path (default canonicalize.json).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,

    /// Also write the resampled canonical triple on its own.
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub triple_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Args, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", default)]
pub struct ExportArgs {
    /// z-grid JSON (e.g. a reconstruction).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,

    /// Ambient coordinates to keep, 1-based (default 1,2,3).
    #[arg(long, value_delimiter = ',', num_args = 1, value_name = "A,B,C")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub projection: Option<Vec<usize>>,

    /// Output path (default export.obj).
    #[arg(long, value_name = "FILE")]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
}

fn overlay(base: &mut Map<String, Value>, top: &Map<String, Value>) {
    for (k, v) in top {
        base.insert(k.clone(), v.clone());
    }
}

/// Applies `flags` over the config file's top-level keys and its
/// `section` object.
pub fn merge<T: Serialize + DeserializeOwned>(flags: &T, config: Option<&Value>, section: &str) -> Result<T> {
    let mut merged = Map::new();
    if let Some(cfg) = config {
        let obj = cfg.as_object().ok_or_else(|| CliError::Usage("config file must hold a JSON object".into()))?;
        let top: Map<String, Value> = obj.iter().filter(|(_, v)| !v.is_object()).map(|(k, v)| (k.clone(), v.clone())).collect();
        overlay(&mut merged, &top);
        if let Some(Value::Object(s)) = obj.get(section) {
            overlay(&mut merged, s);
        }
    }
    let Value::Object(f) = serde_json::to_value(flags).expect("options serialize") else {
        unreachable!("option structs serialize to objects")
    };
    overlay(&mut merged, &f);
    T::deserialize(Value::Object(merged)).map_err(|e| CliError::Usage(format!("invalid configuration: {e}")))
}

/// Resolved options as recorded in artifacts.
pub fn record<T: Serialize>(command: &str, opts: &T) -> Value {
    let mut v = serde_json::to_value(opts).expect("options serialize");
    if let Value::Object(m) = &mut v {
        m.insert("command".into(), Value::String(command.into()));
    }
    v
}
