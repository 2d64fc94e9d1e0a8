//! Engine for discovering and verifying Ramanujan-like series for 1/π².
//!
//! The pipeline: a fifth-order differential operator of Calabi-Yau type is
//! solved by the Frobenius method ([`cyode`]), the solution bundle is turned
//! into a mirror map, a potential `T(q)` and a Yukawa series ([`mirror`]),
//! and candidate series parameters are hunted with high-precision root
//! finding plus integer-relation detection ([`hunter`], [`intrel`]).
//! Discovered formulas are re-verified numerically and through
//! supercongruences ([`verifier`], [`seqlang`]).

pub mod cyode;
pub mod error;
pub mod hunter;
pub mod intrel;
pub mod mirror;
pub mod numkernel;
pub mod seqlang;
pub mod series;

pub use error::{Error, Result};
