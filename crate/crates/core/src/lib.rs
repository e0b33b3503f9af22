pub mod algebra;
pub mod constructions;
pub mod dense;
pub mod error;
pub mod group;
pub mod pauli;
pub mod privacy;

pub use error::{Error, Result};
