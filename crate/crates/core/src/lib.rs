//! Uncertainty estimation toolkit for word-sense-disambiguation classifiers.
//!
//! The crate consumes a corpus plus externally produced Monte-Carlo dropout
//! samples and provides:
//!
//! - [`scores`]: MP, SMP, PV and BALD uncertainty scores and distribution
//!   diagnostics,
//! - [`metrics`]: risk-coverage (RCC), reversed-pair proportion (RPP), F1 and
//!   cohort comparisons,
//! - [`context`]: window- and dependency-controlled context ablations,
//! - [`effects`]: condition filtering, aggregation, level binning, t-tests and
//!   OLS regression for lexical effects,
//! - [`sim`]: a seeded synthetic classifier that produces every artifact the
//!   pipeline consumes.

pub mod context;
pub mod corpus;
pub mod effects;
pub mod error;
mod jsonl;
pub mod metrics;
pub mod par;
pub mod scores;
pub mod sim;

pub use error::{Error, Result};
pub use par::Exec;
