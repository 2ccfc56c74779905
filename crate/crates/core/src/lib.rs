pub mod crb;
pub mod estimator;
pub mod harness;
pub mod error;
pub mod likelihood;
pub mod scene;
pub mod signal;

pub use error::{Error, Result};
