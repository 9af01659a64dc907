//! Reference evaluations that the test suites compare the solver against.
//!
//! Nothing in here shares code with `starklab-core`: the Airy functions are
//! computed from their Maclaurin series and their large-argument expansions,
//! and quadratures are plain composite rules.

#![allow(clippy::excessive_precision)]

pub mod airy;
pub mod quad;
