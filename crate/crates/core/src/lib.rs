pub mod bell;
pub mod cli;
pub mod error;
pub mod fock;
pub mod kernel;
pub mod optimize;
pub mod types;

pub use error::{Error, Result};
