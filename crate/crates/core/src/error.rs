use thiserror::Error;

use crate::arith::RatVec;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("zero vector given as a ray generator")]
    ZeroRay,

    #[error("scale factor must be non-negative, got {0}")]
    NegativeScale(String),

    #[error("point {point} is not contained in the polyhedron")]
    NotContained { point: RatVec },

    #[error("polytope is empty")]
    EmptyPolytope,

    #[error("polyhedron is unbounded (recession direction {direction})")]
    Unbounded { direction: RatVec },

    #[error("class {class} is not pseudo-effective (outside the image cone)")]
    NotPseudoEffective { class: RatVec },

    #[error("class {class} is not in the relative interior of the image cone")]
    NotInterior { class: RatVec },

    #[error("the image cone is the origin; no interior class exists")]
    DegenerateImage,

    #[error("basis has no entry for chamber ray {ray}")]
    MissingBasisRay { ray: RatVec },

    #[error("chamber segment too short: {0}")]
    ChamberSegmentTooShort(String),

    #[error("volume polynomial vanishes identically for class {class}")]
    ZeroVolumePolynomial { class: RatVec },

    #[error("class must be nonzero")]
    ZeroClass,

    #[error("sample count must be positive")]
    NoSamples,

    #[error("malformed instance: {0}")]
    Malformed(String),

    #[error("cone is not pointed: contains the line spanned by {line}")]
    NotPointed { line: RatVec },

    #[error("cone is not full-dimensional: satisfies the equation {equation} = 0")]
    NotFullDimensional { equation: RatVec },

    #[error("unbounded fiber: nonzero direction {ray} projects to the zero class")]
    UnboundedFiber { ray: RatVec },

    #[error("unknown instance family `{0}`")]
    UnknownFamily(String),

    #[error("internal invariant violated: {0}")]
    Internal(String),
}
