pub mod cli;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod floquet;
pub mod model;
pub mod numerics;

pub use error::{CdtError, Result};
