use thiserror::Error;

use crate::numerics::Enclosure;

pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes of the library. Variant names double as the diagnostic
/// names surfaced by the command-line runner.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("MarkovViolation: {0}")]
    MarkovViolation(String),

    #[error("ContractionViolation: {0}")]
    ContractionViolation(String),

    #[error("NotTransitive: no k <= {k_max} with A^(k+1) > 0")]
    NotTransitive { k_max: usize },

    #[error("OutOfImage: y = {y} is outside the image of branch {branch}")]
    OutOfImage { branch: usize, y: f64 },

    #[error("FitUnstable: regression residual {residual:e} exceeds 1e-3")]
    FitUnstable { residual: f64 },

    #[error("LevelTooLarge: {count} words at level {level} exceed the budget of {budget}")]
    LevelTooLarge { level: usize, count: u128, budget: u64 },

    #[error("PointOutsideCylinder: {x} is not in [{lo}, {hi}]")]
    PointOutsideCylinder { x: f64, lo: f64, hi: f64 },

    #[error("NotConverged: best enclosure [{}, {}] is wider than {tol:e}", .enclosure.lo, .enclosure.hi)]
    NotConverged { enclosure: Enclosure, tol: f64 },

    #[error("NotStrictlyNegative: sup of the normalized potential is {sup}")]
    NotStrictlyNegative { sup: f64 },

    #[error("DerivativeUnstable: finite differences of b do not settle at a = {a}")]
    DerivativeUnstable { a: f64 },

    #[error("NoParabolicOrbit: the map is uniformly expanding")]
    NoParabolicOrbit,

    #[error("NoConnector: no connector of length <= {k_max} at level {level}")]
    NoConnector { level: usize, k_max: usize },

    #[error("InadmissibleSupport: {0}")]
    InadmissibleSupport(String),

    #[error("ConstraintInfeasible: alpha = {alpha} outside the level hull [{lo}, {hi}]")]
    ConstraintInfeasible { alpha: f64, lo: f64, hi: f64 },

    #[error("EmptyWindow: no level-{level} cylinder has ratio in ({}, {})", .alpha - .eps, .alpha + .eps)]
    EmptyWindow { alpha: f64, eps: f64, level: usize },

    #[error("DegenerateCylinder: diameter underflows at level {level}")]
    DegenerateCylinder { level: usize },

    #[error("TruncationTooSmall: kept branches carry {kept} of the base mass")]
    TruncationTooSmall { kept: f64 },

    #[error("TailDominates: dropped-tail bound {bound:e} exceeds {tol:e} at a = {a}")]
    TailDominates { a: f64, bound: f64, tol: f64 },

    #[error("InvalidInput: {0}")]
    InvalidInput(String),

    #[error("ConfigError: {0}")]
    Config(String),

    #[error("IoError: {0}")]
    Io(String),
}

impl Error {
    /// Short diagnostic name, e.g. `"MarkovViolation"`.
    pub fn name(&self) -> &'static str {
        match self {
            Error::MarkovViolation(_) => "MarkovViolation",
            Error::ContractionViolation(_) => "ContractionViolation",
            Error::NotTransitive { .. } => "NotTransitive",
            Error::OutOfImage { .. } => "OutOfImage",
            Error::FitUnstable { .. } => "FitUnstable",
            Error::LevelTooLarge { .. } => "LevelTooLarge",
            Error::PointOutsideCylinder { .. } => "PointOutsideCylinder",
            Error::NotConverged { .. } => "NotConverged",
            Error::NotStrictlyNegative { .. } => "NotStrictlyNegative",
            Error::DerivativeUnstable { .. } => "DerivativeUnstable",
            Error::NoParabolicOrbit => "NoParabolicOrbit",
            Error::NoConnector { .. } => "NoConnector",
            Error::InadmissibleSupport(_) => "InadmissibleSupport",
            Error::ConstraintInfeasible { .. } => "ConstraintInfeasible",
            Error::EmptyWindow { .. } => "EmptyWindow",
            Error::DegenerateCylinder { .. } => "DegenerateCylinder",
            Error::TruncationTooSmall { .. } => "TruncationTooSmall",
            Error::TailDominates { .. } => "TailDominates",
            Error::InvalidInput(_) => "InvalidInput",
            Error::Config(_) => "ConfigError",
            Error::Io(_) => "IoError",
        }
    }

    /// The enclosure carried by a `NotConverged` error, if any.
    pub fn enclosure(&self) -> Option<Enclosure> {
        match self {
            Error::NotConverged { enclosure, .. } => Some(*enclosure),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

/// Unwraps a value or the enclosure of a `NotConverged` error, reporting
/// whether convergence was reached.
pub(crate) fn accept_enclosure(r: Result<Enclosure>) -> Result<(Enclosure, bool)> {
    match r {
        Ok(e) => Ok((e, true)),
        Err(Error::NotConverged { enclosure, .. }) => Ok((enclosure, false)),
        Err(e) => Err(e),
    }
}
