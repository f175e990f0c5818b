//! Set-valued value functions of multiobjective variational problems with
//! non-constant discount.
//!
//! Upper sets of `ℝ^d` ordered by a cone `C` are stored through their lower
//! support thresholds over a finite base of the dual cone (`lattice`). A
//! [`problem::Scenario`] fixes the vector Lagrangian, terminal cost, discount
//! and horizon. `hopflax` evaluates the value function direction by
//! direction, `bellman` and `hjb` check the optimality principle and the
//! set-valued HJB equation, and `oracle` gives brute-force references.

// Negated float comparisons are deliberate: NaN must fail them.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bellman;
pub mod cli;
pub mod config;
pub mod error;
pub mod hjb;
pub mod hopflax;
pub mod lattice;
pub mod oracle;
pub mod parallel;
pub mod problem;
pub mod quadrature;
pub mod report;
pub mod sensitivity;

pub use error::{Error, Hypothesis, Result};
pub use lattice::{ConeSpec, HalfSpace, UpperSet};
pub use problem::{DiscountSpec, LagrangianSpec, Scenario, TerminalSpec};
