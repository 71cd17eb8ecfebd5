//! Generic geographic question answering: encoding toponyms into
//! type/scale/prominence symbols, mining and learning question-to-answer
//! templates, evaluating predictors, and generating SPARQL.

pub mod breaks;
pub mod encoder;
pub mod error;
pub mod evaluator;
pub mod gazetteer;
pub mod miner;
pub mod predictor;
pub mod sparql;
pub mod model;

pub use error::{Error, Result};
