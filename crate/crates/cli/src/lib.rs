//! File formats, experiment drivers and the command-line front end for
//! `apollo-qmc-core`.

pub mod error;
pub mod experiments;
pub mod io;
pub mod runner;
pub mod parse;

pub use error::Error;
