pub mod cli;
pub mod config;
pub mod dataset;
pub mod dimred;
pub mod error;
pub mod eval;
pub mod featuremap;
pub mod kernel;
pub mod pipeline;
pub mod statevec;
pub mod svm;

pub use error::{Error, Result};
