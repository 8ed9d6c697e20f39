//! Multitype Galton-Watson forests with immigration, their depth-first and
//! breadth-first encodings, and Monte-Carlo checks of their scaling limits.

pub mod config;
pub mod encodings;
pub mod error;
pub mod family;
pub mod forest;
pub mod lab;
pub mod law;
pub mod limit;
pub mod rng;
pub mod stats;

pub use error::{Error, Result};
