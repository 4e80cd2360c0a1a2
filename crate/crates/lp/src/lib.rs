//! Linear programs with bounded variables and a revised simplex solver.

mod basis;
mod error;
mod lazy;
mod mps;
mod problem;
mod simplex;

pub use error::LpError;
pub use lazy::solve_lp_lazy;
pub use mps::{to_mps, write_mps};
pub use problem::{
    check_feasibility, Constraint, LinearProgram, LpSolution, LpStatus, Relation, Var, Violation,
    ViolationSite, BOUND_TOL, FEASIBILITY_TOL,
};
pub use simplex::{solve_lp, solve_lp_warm, Basis, VarStatus, PIVOT_TOL};
