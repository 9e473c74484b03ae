pub mod arith;
pub mod body;
pub mod error;
pub mod fans;
pub mod harness;
pub mod numdim;
pub mod polyhedra;

pub use error::{Error, Result};
