pub mod design;
pub mod cli;
pub mod error;
pub mod grid;
pub mod hierarchical;
pub mod hypothesis;
pub mod power_prior;
pub mod quadrature;
pub mod special_math;

pub use error::{Error, Result};
