//! Exact solution toolkit for the quadratic bin packing problem: instance
//! data and generation, branch-and-price with quadratic knapsack pricing,
//! compact MILP exports and a brute-force reference solver.

pub mod bnp;
pub mod error;
pub mod generator;
pub mod lp;
pub mod milp_export;
pub mod oracle;
pub mod pricing;
pub mod problem;

pub use error::{Error, Result};
pub use problem::{
    pattern_cost, read_instance, read_solution, solution_cost, validate_solution, write_instance, write_solution,
    Instance, InstanceMeta, Pattern, SignRegime, Solution, ValidationReport,
};
