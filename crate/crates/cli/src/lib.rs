//! Command-line front end for `manifold-fv`: JSON configurations, solver
//! runs, convergence studies, property checks and run comparison.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod output;
pub mod problem;
