//! Generators, JSON interchange and seed sweeps.

pub mod gen;
pub mod json;
pub mod sweep;

use thiserror::Error;

use crate::cstarcat::CStarError;
use crate::functors::FunctorError;
use crate::spaceoid::SpaceoidError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HarnessError {
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("bad generator parameters: {0}")]
    Params(String),
    #[error(transparent)]
    Functor(#[from] FunctorError),
    #[error(transparent)]
    CStar(#[from] CStarError),
    #[error(transparent)]
    Spaceoid(#[from] SpaceoidError),
}
