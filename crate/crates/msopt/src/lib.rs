//! Solvers for linear multi-time-scale optimization problems.
//!
//! A multi-time-scale model couples one set of high-level decisions `x`
//! (capacities, designs) with per-subperiod low-level decisions `y_s`
//! (operating levels for each representative day or scenario). This crate
//! provides:
//!
//! - [`lp`] — an embedded dense LP solver producing the optimal duals,
//!   Farkas rays and unbounded directions the decomposition algorithms need;
//! - [`model`] — the instance data model, full-space and aggregated model
//!   builders, a seeded random instance generator, and JSON instance files;
//! - [`benders`] — Benders decomposition (feasibility/optimality cuts);
//! - [`lagrangian`] — Lagrangian decomposition by subperiod with subgradient
//!   and cutting-plane multiplier updates;
//! - [`dantzig_wolfe`] — Dantzig-Wolfe column generation;
//! - [`pamso`] — parametric autotuning of an aggregated high-level model
//!   against the full model, with pattern-search and genetic tuners;
//! - [`metrics`] — the VMM and VSS solution-quality metrics.
//!
//! The guide under `book/` walks through each algorithm on worked examples;
//! its code blocks compile and run as doctests of this crate.

pub mod benders;
pub mod dantzig_wolfe;
pub mod io;
pub mod lagrangian;
pub mod lp;
pub mod metrics;
pub mod model;
pub mod pamso;

pub use lp::{solve_lp, verify_certificate, LinearProgram, LpSolution, LpStatus};
pub use model::{AlgorithmResult, CapacityInstance, ConvergenceLog, MultiScaleInstance};

#[cfg(doctest)]
mod book;
