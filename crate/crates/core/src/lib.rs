pub mod analysis;
pub mod cli;
pub mod error;
pub mod gadgets;
pub mod gates;
pub mod homodyne;
pub mod quadgrid;
pub mod states;
pub mod transform;

pub use error::{Error, Result};
