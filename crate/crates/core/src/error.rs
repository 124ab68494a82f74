use crate::jet::JetError;
use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum Error {
    #[error("point ({x}, {y}) is outside the domain of the {host} host (boundary margin {margin})")]
    OutsideDomain { host: &'static str, x: f64, y: f64, margin: f64 },

    #[error(transparent)]
    Jet(#[from] JetError),

    #[error("first fundamental form is not positive definite (EG - F^2 = {det})")]
    DegenerateMetric { det: f64 },

    #[error("null frame system is rank deficient (smallest pivot {pivot:e})")]
    RankDeficient { pivot: f64 },

    #[error("operation requires the {expected} host, got {got}")]
    WrongHost { expected: &'static str, got: &'static str },

    #[error("({x}, {y}) is an umbilic point: the principal directions are undefined")]
    UmbilicPoint { x: f64, y: f64 },

    #[error("1-jet of C differs from minus the 1-jet of A by {deviation:e}")]
    InconsistentJet { deviation: f64 },

    #[error("lifted trajectory left F = 0: |F| = {residual:e} at ({x}, {y}, {z})")]
    LiftDrift { residual: f64, x: f64, y: f64, z: f64 },

    #[error("step {h} outside the admissible range [{min}, {max}]")]
    InvalidStep { h: f64, min: f64, max: f64 },

    #[error("umbilic is not Darbouxian: {0}")]
    NotDarbouxian(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
