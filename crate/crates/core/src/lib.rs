pub mod error;
pub mod hamiltonians;
pub mod hilbert;
pub mod cli;
pub mod dynamics;
pub mod linalg;
pub mod measurement;
pub mod protocols;

pub use error::{Error, Result};
