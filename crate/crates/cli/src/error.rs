use std::path::PathBuf;

use apollo_qmc_core::cubature::CubatureError;
use apollo_qmc_core::domain::Violation;
use apollo_qmc_core::fit::FitError;
use apollo_qmc_core::greedy::GreedyError;
use apollo_qmc_core::harmonic::HarmonicError;
use apollo_qmc_core::{GeometryError, PackingError};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: malformed domain file: {source}")]
    Format { path: PathBuf, source: serde_json::Error },
    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },
    #[error("invalid domain: {}", list_violations(.0))]
    Invalid(Vec<Violation>),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Packing(#[from] PackingError),
    #[error(transparent)]
    Cubature(#[from] CubatureError),
    #[error(transparent)]
    Fit(#[from] FitError),
    #[error(transparent)]
    Greedy(#[from] GreedyError),
    #[error(transparent)]
    Harmonic(#[from] HarmonicError),
    #[error("thread pool: {0}")]
    Threads(#[from] rayon::ThreadPoolBuildError),
}

fn list_violations(v: &[Violation]) -> String {
    let mut out = format!("{} violation(s)", v.len());
    for item in v {
        out.push_str("\n  ");
        out.push_str(&item.to_string());
    }
    out
}

impl Error {
    /// 1 usage, 2 invalid input, 3 numeric or geometric failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Io { .. } | Error::Format { .. } | Error::Input { .. } | Error::Invalid(_) => 2,
            Error::Packing(PackingError::InvalidDomain(_)) => 2,
            _ => 3,
        }
    }
}
