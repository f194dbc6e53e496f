//! Computable model of a CAT(0) admissible group: two copies of F₂×ℤ glued
//! along ℤ², its Bass-Serre tree, block geometry, hierarchically hyperbolic
//! structure, and random-walk statistics.

pub mod amalgam;
pub mod blocks;
pub mod freegroup;
pub mod hhs;
pub mod randwalk;
pub mod stats;
pub mod tree;
pub mod verifier;

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid configuration: {}", .0.join("; "))]
    Config(Vec<String>),
    #[error("resource cap exceeded: {0}")]
    Cap(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("undefined for this relation: {0}")]
    Relation(String),
    #[error("ray prefix has not stabilized")]
    NotStabilized,
    #[error("measure rejected: {0}")]
    Measure(String),
    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
