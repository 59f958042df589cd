//! Library half of the `crheat` binary: file schemas, emitters and the
//! command implementations, kept here so tests can drive them in-process.

use std::fmt;

pub mod commands;
pub mod emit;
pub mod files;
pub mod validate;

/// Exit codes.
pub const EXIT_OK: u8 = 0;
pub const EXIT_FAILED: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_INFEASIBLE: u8 = 3;

/// An error carrying the process exit code it should map to.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }

    pub fn infeasible(message: impl Into<String>) -> Self {
        Self { code: EXIT_INFEASIBLE, message: message.into() }
    }

    pub fn failed(message: impl Into<String>) -> Self {
        Self { code: EXIT_FAILED, message: message.into() }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<crheat::Error> for Failure {
    fn from(e: crheat::Error) -> Self {
        use crheat::Error as E;
        match e {
            E::DegreeOutOfRange { n, q } => Failure::usage(format!("q out of range: q = {q} but n = {n}")),
            E::DivergentIntegral { direction } => Failure::infeasible(format!(
                "eta-integral diverges as {direction}; pass --delta to truncate"
            )),
            E::NonHermitian { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidParameter(_)
            | E::NonRigidTruncation { .. }
            | E::UnknownFunction(_)
            | E::EmptyDescriptor
            | E::MixedDimension { .. } => Failure::usage(e.to_string()),
            other => Failure::failed(other.to_string()),
        }
    }
}

/// Maps any error to `(exit code, message)`.
pub fn classify(err: &anyhow::Error) -> (u8, String) {
    if let Some(f) = err.downcast_ref::<Failure>() {
        return (f.code, f.message.clone());
    }
    if let Some(e) = err.downcast_ref::<crheat::Error>() {
        let f = Failure::from(e.clone());
        return (f.code, f.message);
    }
    (EXIT_FAILED, format!("{err:#}"))
}

/// Sizes the global rayon pool from `CRHEAT_THREADS` when set.
pub fn init_threads() -> anyhow::Result<()> {
    let Ok(raw) = std::env::var("CRHEAT_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&k| k > 0)
        .ok_or_else(|| Failure::usage(format!("CRHEAT_THREADS must be a positive integer, got {raw:?}")))?;
    // a second call in the same process (tests) keeps the first pool
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}
