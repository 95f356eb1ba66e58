//! Robustness analysis for causal claims in linear structural equation models.
//!
//! A model is a mixed acyclic graph over an ordered variable set: directed
//! edges carry free path coefficients, bidirected edges stand for latent
//! common causes of their endpoints, and every *missing* edge is a
//! substantive assumption. Given a claim (a single path coefficient or a
//! total effect), this crate answers how robust the claim is:
//!
//! * [`robustness::enumerate_msas`] finds every minimal sufficient assumption
//!   set (msa) under which the claim is identified, each with a closed-form
//!   estimand over the observed covariance matrix.
//! * [`robustness::degrees`] counts corroboration `m` (number of msas),
//!   identification degree `k` (extensionally distinct estimands among them),
//!   and the degrees of freedom `df = k - 1` available for testing.
//! * [`robustness::induced_constraints`] lists the equality constraints that
//!   an over-identified claim imposes on the covariance matrix.
//! * [`robustness::is_relevant`] and [`robustness::relevant_submodel`]
//!   separate assumptions the claim actually leans on from decoration.
//! * [`identification::maximal_iv_pairs`] searches instrument/conditioning
//!   pairs that remain valid in edge-maximal supergraphs of the model.
//! * [`sem::locally_identified`] is an independent numeric oracle: it decides
//!   local identifiability from the rank structure of a finite-difference
//!   Jacobian of the implied-covariance map, with no graphical reasoning.
//!
//! Graph searches are exponential in the number of missing edges and run
//! data-parallel by default; build with `--no-default-features` for the
//! sequential fallback. All entry points are deterministic in their seed
//! arguments regardless of the execution mode.

pub mod catalogue;
pub mod error;
pub mod estimand;
mod exec;
pub mod graph;
pub mod identification;
pub mod robustness;
pub mod sem;

pub use error::{Error, Result};
pub use graph::{CausalGraph, Edge, EdgeKind, VarId, VarSet};

// Re-exported so downstream code can build the matrix arguments of
// [`sem::Covariance`] against the same linear-algebra version.
pub use nalgebra;
