//! Computer algebra for shuffle operads.

pub mod apps;
pub mod element;
pub mod error;
pub mod groebner;
pub mod linalg;
pub mod morse;
pub mod orders;
pub mod perturb;
pub mod resolution;
pub mod trees;

pub use error::{Error, Result};
