pub mod contour;
pub mod error;
pub mod exec;
pub mod fd;
pub mod immersion;
pub mod metric;
pub mod poly;
pub mod region;
pub mod solver;
pub mod source;

pub use error::{Error, Result};
