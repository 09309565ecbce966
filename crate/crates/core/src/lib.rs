pub mod curves;
pub mod diagram;
pub mod error;
pub mod geomprob;
pub mod measures;
pub mod geometry;
pub mod polynomial;
pub mod vassiliev;

pub use error::{Error, Result};
