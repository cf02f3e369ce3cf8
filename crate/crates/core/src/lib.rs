//! surplex — exact solver for full surplus extraction with always-truthful
//! types.
//!
//! Decides whether a designer can extract every type's informational rent in
//! a finite environment where some types are behavioral (they always report
//! truthfully and impose no incentive constraints). When extraction is
//! feasible the solver constructs the contract menu; when it is not, it emits
//! a machine-checkable certificate (a convex decomposition, a separating
//! functional, or a Farkas vector). A correlated-values auction front end
//! reduces each bidder to a single-agent problem and maps contracts back to
//! transfer rules.
//!
//! All arithmetic is exact rational; there is no floating point in any
//! decision path, and identical inputs produce identical outputs.

// Error values are rich (exact rationals, offending ids); the solver is not
// on a hot path where their size matters.
#![allow(clippy::result_large_err)]

pub mod auction;
mod error;
pub mod extraction;
pub mod generate;
pub mod geometry;
pub mod io;
pub mod lp;
pub mod model;
pub mod rational;
pub mod verify;

pub use error::Error;
pub use model::{
    expected_transfer, validate_environment, Belief, Contract, ContractDerivation, ContractMenu,
    DerivationMethod, Environment, TypeKind, TypeRecord, Weight,
};
pub use rational::Rational;
