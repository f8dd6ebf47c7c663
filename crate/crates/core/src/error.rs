use thiserror::Error;

use crate::lattice::RatPoint;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("zero lattice vector has no index or primitive")]
    ZeroVector,

    #[error("series has a term without marked points; exponential would not terminate")]
    NonNilpotentInput,

    #[error("marked points are not pairwise distinct: P{0} = P{1}")]
    DuplicatePoints(usize, usize),

    #[error("points are not in general position: {0}")]
    DegeneratePosition(String),

    #[error("endpoint is not general: {0}")]
    DegenerateEndpoint(String),

    #[error("path crosses a wall tangentially")]
    TangentialCrossing,

    #[error("path meets a singular point of the diagram at {0}")]
    PathHitsSingularPoint(Box<RatPoint>),

    #[error("path vertex {0} lies on the support of the diagram")]
    EndpointOnSupport(Box<RatPoint>),

    #[error("descendent coefficient for u_I differs between index sets of size {size} (family {family}, d = {d}, nu = {nu})")]
    InconsistentAcrossSubsets {
        family: String,
        d: u32,
        nu: u32,
        size: usize,
    },

    #[error("invariant needs {needed} marked points but only {available} are available")]
    InsufficientPoints { needed: usize, available: usize },

    #[error("unexpected nonzero coefficient at negative psi power: {0}")]
    NegativePsiPower(String),

    #[error("could not find a general configuration after {attempts} attempts: {last}")]
    ExhaustedRetries { attempts: u32, last: String },

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
