pub mod analysis;
pub mod controllers;
pub mod dispatch;
pub mod dynamics;
pub mod error;
pub mod netmodel;
pub mod powerflow;
pub mod runner;

pub use error::{Error, Result};
