//! Numerical machinery for models of regularity structures: concrete models
//! and their seminorms, mollification with convergence studies in the
//! weakened topology, modelled-distribution norms with a dense subspace of
//! localized constants, the explicit reconstruction operator for continuous
//! models, and the branched rough path instantiation with compensated
//! Riemann-sum integration.
//!
//! The `regrecon` binary drives reproducible experiments over this library;
//! see the guide under `book/` for worked examples.

pub mod config;
pub mod experiments;
pub mod hopf;
pub mod modelled;
pub mod models;
pub mod mollify;
pub mod reconstruct;
pub mod rough;
pub mod report;
pub mod structures;
pub mod weierstrass;

#[cfg(doctest)]
mod book;
