use thiserror::Error;

use crate::model::{AssociationCase, ConfigError, Tier};
use crate::quadrature::QuadError;
use crate::specfun::SpecError;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Special(#[from] SpecError),
    #[error(transparent)]
    Quadrature(#[from] QuadError),
    #[error("probability of {case} evaluated to {value}, outside [0, 1]")]
    ProbabilityRange { case: AssociationCase, value: f64 },
    #[error("{case} has zero probability; its conditional rate is undefined")]
    ZeroProbabilityCase { case: AssociationCase },
    #[error("no serving-distance law for ({case}, {tier})")]
    UnsupportedPair { case: AssociationCase, tier: Tier },
    #[error("closed form {closed} and quadrature {quadrature} disagree for {what}")]
    Mismatch { what: String, closed: f64, quadrature: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
