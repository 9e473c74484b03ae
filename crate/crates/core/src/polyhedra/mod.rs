//! Rational polyhedral cones and polytopes with canonical double representation.

mod bitset;
mod cone;
mod dd;
mod face;
mod polytope;

pub(crate) use bitset::BitSet;
pub use cone::Cone;
pub use face::Face;
pub use polytope::Polytope;
