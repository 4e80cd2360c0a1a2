//! Row generation for programs with many rows that are rarely tight.

use log::debug;

use crate::error::LpError;
use crate::problem::{LinearProgram, LpSolution, LpStatus, Relation};
use crate::simplex::solve_lp;

/// Rows violated by more than this are added in the next round.
const ADD_TOL: f64 = 1e-9;

/// Solves `lp` starting from the rows flagged in `initial`, repeatedly adding
/// every violated row until the reduced optimum is feasible for the full
/// program. The returned solution is optimal for `lp`.
///
/// An infeasible reduced program proves the full one infeasible. An unbounded
/// reduced program is resolved by falling back to the full row set.
pub fn solve_lp_lazy(lp: &LinearProgram, initial: &[bool]) -> Result<LpSolution, LpError> {
    if initial.len() != lp.num_constraints() {
        return Err(LpError::LengthMismatch {
            expected: lp.num_constraints(),
            got: initial.len(),
        });
    }
    let mut active = initial.to_vec();
    let mut iterations = 0;
    let mut round = 0;
    loop {
        round += 1;
        let reduced = lp.with_rows(&active);
        let sol = solve_lp(&reduced)?;
        iterations += sol.iterations;
        match sol.status {
            LpStatus::Infeasible => return Ok(LpSolution { iterations, ..sol }),
            LpStatus::Unbounded => {
                debug!("reduced program unbounded in round {round}, solving all rows");
                let full = solve_lp(lp)?;
                return Ok(LpSolution {
                    iterations: iterations + full.iterations,
                    ..full
                });
            }
            LpStatus::Optimal => {}
        }
        let mut added = 0;
        for (i, row) in lp.constraints().iter().enumerate() {
            if active[i] {
                continue;
            }
            let r = row.activity(&sol.values) - row.rhs;
            let violated = match row.relation {
                Relation::Le => r > ADD_TOL,
                Relation::Ge => r < -ADD_TOL,
                Relation::Eq => r.abs() > ADD_TOL,
            };
            if violated {
                active[i] = true;
                added += 1;
            }
        }
        debug!(
            "row generation round {round}: {} active rows, {added} added",
            active.iter().filter(|&&a| a).count()
        );
        if added == 0 {
            return Ok(LpSolution { iterations, ..sol });
        }
    }
}
