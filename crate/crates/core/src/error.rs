use thiserror::Error;

/// Coarse grouping used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad input: wrong shapes, out-of-domain points, invalid parameters.
    Validation,
    /// The data is well formed but the geometry or numerics break down.
    Numerical,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point ({u}, {v}) lies outside the parameter domain {domain:?}")]
    Domain { u: f64, v: f64, domain: [f64; 4] },

    #[error("induced metric is not Lorentzian (E = {e}, F = {f}, G = {g})")]
    NotLorentz { e: f64, f: f64, g: f64 },

    #[error("normal plane is numerically degenerate (extremal self-products {max}, {min})")]
    DegenerateNormal { max: f64, min: f64 },

    #[error("tangent/normal basis is singular (condition number {condition:e})")]
    SingularBasis { condition: f64 },

    #[error("frames cannot be aligned: {reason}")]
    FrameMismatch { reason: String },

    #[error("shape operators need the F = 0 gauge, got F = {f}")]
    NotDiagonalGauge { f: f64 },

    #[error("all coefficients of the tangent equation vanish (flat or umbilical point)")]
    IndeterminateEquation,

    #[error("point is not of general type: {reason}")]
    NotGeneralType { reason: String },

    #[error("no real principal tangents (kappa^2 - k = {discriminant})")]
    NoPrincipalTangents { discriminant: f64 },

    #[error("principal frame flips branch inside the difference stencil at ({u}, {v})")]
    FrameBranchFlip { u: f64, v: f64 },

    #[error("metric coefficient must be positive, found {value} at node ({i}, {j})")]
    InvalidMetric { i: usize, j: usize, value: f64 },

    #[error("frame Gram drift {drift:e} exceeds ceiling {ceiling:e}; refine the grid")]
    StepTooLarge { drift: f64, ceiling: f64 },

    #[error("integrability residual {residual:e} exceeds threshold {threshold:e}")]
    IntegrabilityTooLarge { residual: f64, threshold: f64 },

    #[error("grid of {nu}x{nv} nodes is too small (need at least {min} per axis)")]
    GridTooSmall { nu: usize, nv: usize, min: usize },

    #[error("mu vanishes at node ({i}, {j})")]
    MuVanishes { i: usize, j: usize },

    #[error("data is not separable: cross-variation residual {residual:e} exceeds {tolerance:e}")]
    NotSeparable { residual: f64, tolerance: f64 },

    #[error("{what} must be positive, found {value}")]
    NonPositive { what: String, value: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Domain { .. }
            | Error::GridTooSmall { .. }
            | Error::FrameMismatch { .. }
            | Error::NotDiagonalGauge { .. }
            | Error::Invalid(_) => ErrorClass::Validation,
            _ => ErrorClass::Numerical,
        }
    }

    /// Stable machine-readable identifier.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "DomainError",
            Error::NotLorentz { .. } => "NotLorentz",
            Error::DegenerateNormal { .. } => "DegenerateNormal",
            Error::SingularBasis { .. } => "SingularBasis",
            Error::FrameMismatch { .. } => "FrameMismatch",
            Error::NotDiagonalGauge { .. } => "NotDiagonalGauge",
            Error::IndeterminateEquation => "IndeterminateEquation",
            Error::NotGeneralType { .. } => "NotGeneralType",
            Error::NoPrincipalTangents { .. } => "NoPrincipalTangents",
            Error::FrameBranchFlip { .. } => "FrameBranchFlip",
            Error::InvalidMetric { .. } => "InvalidMetric",
            Error::StepTooLarge { .. } => "StepTooLarge",
            Error::IntegrabilityTooLarge { .. } => "IntegrabilityTooLarge",
            Error::GridTooSmall { .. } => "GridTooSmall",
            Error::MuVanishes { .. } => "MuVanishes",
            Error::NotSeparable { .. } => "NotSeparable",
            Error::NonPositive { .. } => "NonPositive",
            Error::Invalid(_) => "InvalidInput",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
