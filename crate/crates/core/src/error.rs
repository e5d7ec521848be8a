use thiserror::Error;

use crate::ambient::GfVector;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ambient rank {0} is outside 1..={max}", max = crate::ambient::MAX_RANK)]
    RankOutOfRange(u32),

    #[error("vector {word:#x} does not fit in rank {rank}")]
    VectorOutOfRange { word: u64, rank: u32 },

    #[error("the zero vector is not a point of the geometry")]
    ZeroVector,

    #[error("ambient ranks differ: {left} vs {right}")]
    AmbientMismatch { left: u32, right: u32 },

    #[error("basis vectors are linearly dependent")]
    DependentBasis,

    #[error("point {0} is not in the set")]
    PointNotInSet(GfVector),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// A precondition of a theorem-check does not hold for the given input.
    #[error("hypothesis not satisfied: {0}")]
    Hypothesis(String),

    #[error("set is not {epsilon}-uniform; worst character {worst_gamma} has |coefficient| = {magnitude}")]
    NotUniform {
        epsilon: String,
        worst_gamma: GfVector,
        magnitude: u64,
    },

    /// A proven inequality failed on a concrete input. Indicates a bug.
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),

    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),

    #[error("parse error at {position}: {message}")]
    Parse { position: String, message: String },
}

impl Error {
    pub(crate) fn parse(position: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Parse {
            position: position.into(),
            message: message.into(),
        }
    }
}
