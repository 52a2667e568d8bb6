pub mod classifier;
pub mod corpus;
pub mod error;
pub mod eval;
pub mod index;
pub mod label;
pub mod synth;
pub mod textproc;

pub use error::{Error, Result};
pub use label::{ClassScores, LoeLabel};
