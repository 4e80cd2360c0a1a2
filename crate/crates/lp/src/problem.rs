use std::fmt;

use crate::error::LpError;

/// Row tolerance used when certifying a solution.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Largest bound violation a reported solution may carry.
pub const BOUND_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// Handle to a variable of a [`LinearProgram`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(pub usize);

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub name: String,
    /// Sparse row: `(variable index, coefficient)`, variables unique.
    pub coeffs: Vec<(usize, f64)>,
    pub relation: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * values[j]).sum()
    }
}

/// A minimization LP with sparse rows and per-variable bounds.
///
/// Lower bounds must be finite; upper bounds may be `f64::INFINITY`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LinearProgram {
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    names: Vec<String>,
    constraints: Vec<Constraint>,
}

impl LinearProgram {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, name: impl Into<String>, cost: f64, lower: f64, upper: f64) -> Var {
        self.objective.push(cost);
        self.lower.push(lower);
        self.upper.push(upper);
        self.names.push(name.into());
        Var(self.objective.len() - 1)
    }

    /// Appends a row and returns its index. Duplicate variables are merged.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        coeffs: impl IntoIterator<Item = (Var, f64)>,
        relation: Relation,
        rhs: f64,
    ) -> usize {
        let mut row: Vec<(usize, f64)> = coeffs.into_iter().map(|(v, a)| (v.0, a)).collect();
        row.sort_by_key(|&(j, _)| j);
        row.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        row.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint {
            name: name.into(),
            coeffs: row,
            relation,
            rhs,
        });
        self.constraints.len() - 1
    }

    pub fn set_bounds(&mut self, var: Var, lower: f64, upper: f64) {
        self.lower[var.0] = lower;
        self.upper[var.0] = upper;
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn var_name(&self, j: usize) -> &str {
        &self.names[j]
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn constraint(&self, i: usize) -> &Constraint {
        &self.constraints[i]
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        self.objective.iter().zip(values).map(|(c, x)| c * x).sum()
    }

    /// Copy of this program restricted to the rows flagged in `keep`.
    pub fn with_rows(&self, keep: &[bool]) -> LinearProgram {
        LinearProgram {
            objective: self.objective.clone(),
            lower: self.lower.clone(),
            upper: self.upper.clone(),
            names: self.names.clone(),
            constraints: self
                .constraints
                .iter()
                .zip(keep)
                .filter(|(_, &k)| k)
                .map(|(c, _)| c.clone())
                .collect(),
        }
    }

    /// Structural checks: finite data, `lower <= upper`, finite lower bounds,
    /// in-range variable indices.
    pub fn validate(&self) -> Result<(), LpError> {
        let n = self.num_vars();
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !self.objective[j].is_finite() {
                return Err(LpError::Malformed(format!(
                    "objective coefficient of `{}` is not finite",
                    self.names[j]
                )));
            }
            if !l.is_finite() || u.is_nan() || u == f64::NEG_INFINITY {
                return Err(LpError::Malformed(format!(
                    "variable `{}` has unsupported bounds [{l}, {u}]",
                    self.names[j]
                )));
            }
            if l > u {
                return Err(LpError::Malformed(format!(
                    "variable `{}` has lower bound {l} above upper bound {u}",
                    self.names[j]
                )));
            }
        }
        for (i, row) in self.constraints.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(LpError::Malformed(format!("row {i} (`{}`) has non-finite rhs", row.name)));
            }
            for &(j, a) in &row.coeffs {
                if j >= n {
                    return Err(LpError::Malformed(format!(
                        "row {i} (`{}`) references variable {j} of {n}",
                        row.name
                    )));
                }
                if !a.is_finite() {
                    return Err(LpError::Malformed(format!(
                        "row {i} (`{}`) has non-finite coefficient on `{}`",
                        row.name, self.names[j]
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective_value: f64,
    pub values: Vec<f64>,
    pub iterations: usize,
}

impl LpSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == LpStatus::Optimal
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationSite {
    Constraint(usize),
    LowerBound(usize),
    UpperBound(usize),
}

/// One violated row or bound. `residual` is `activity - rhs` for rows and
/// `value - bound` for bounds, so its sign shows the direction of the breach.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Violation {
    pub site: ViolationSite,
    pub residual: f64,
}

/// Lists every row breached by more than [`FEASIBILITY_TOL`] and every bound
/// breached by more than [`BOUND_TOL`]. An empty list means feasible.
pub fn check_feasibility(lp: &LinearProgram, values: &[f64]) -> Result<Vec<Violation>, LpError> {
    if values.len() != lp.num_vars() {
        return Err(LpError::LengthMismatch {
            expected: lp.num_vars(),
            got: values.len(),
        });
    }
    let mut out = Vec::new();
    for (i, row) in lp.constraints.iter().enumerate() {
        let residual = row.activity(values) - row.rhs;
        let violated = match row.relation {
            Relation::Le => residual > FEASIBILITY_TOL,
            Relation::Ge => residual < -FEASIBILITY_TOL,
            Relation::Eq => residual.abs() > FEASIBILITY_TOL,
        };
        if violated {
            out.push(Violation {
                site: ViolationSite::Constraint(i),
                residual,
            });
        }
    }
    for (j, &x) in values.iter().enumerate() {
        if x < lp.lower[j] - BOUND_TOL {
            out.push(Violation {
                site: ViolationSite::LowerBound(j),
                residual: x - lp.lower[j],
            });
        } else if x > lp.upper[j] + BOUND_TOL {
            out.push(Violation {
                site: ViolationSite::UpperBound(j),
                residual: x - lp.upper[j],
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assignment_lp() -> (LinearProgram, Var, Var) {
        let mut lp = LinearProgram::new();
        let a = lp.add_var("z_0_0", 1.0, 0.0, 1.0);
        let b = lp.add_var("z_0_1", 2.0, 0.0, 1.0);
        lp.add_constraint("assign_0", [(a, 1.0), (b, 1.0)], Relation::Eq, 1.0);
        (lp, a, b)
    }

    #[test]
    fn duplicate_terms_are_merged() {
        let mut lp = LinearProgram::new();
        let x = lp.add_var("x", 1.0, 0.0, 1.0);
        let i = lp.add_constraint("r", [(x, 1.0), (x, 2.0)], Relation::Le, 1.0);
        assert_eq!(lp.constraint(i).coeffs, vec![(0, 3.0)]);
    }

    #[test]
    fn flags_short_assignment_with_negative_residual() {
        let (lp, _, _) = assignment_lp();
        let report = check_feasibility(&lp, &[0.5, 0.4]).unwrap();
        assert_eq!(report.len(), 1);
        assert_eq!(report[0].site, ViolationSite::Constraint(0));
        assert!((report[0].residual + 0.1).abs() < 1e-12);
    }

    #[test]
    fn feasible_point_yields_empty_report() {
        let (lp, _, _) = assignment_lp();
        assert!(check_feasibility(&lp, &[0.25, 0.75]).unwrap().is_empty());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let (lp, _, _) = assignment_lp();
        assert!(matches!(
            check_feasibility(&lp, &[1.0]),
            Err(LpError::LengthMismatch { expected: 2, got: 1 })
        ));
    }

    #[test]
    fn bound_breaches_are_reported() {
        let (lp, _, _) = assignment_lp();
        let report = check_feasibility(&lp, &[1.5, -0.5]).unwrap();
        assert!(report.iter().any(|v| v.site == ViolationSite::UpperBound(0)));
        assert!(report.iter().any(|v| v.site == ViolationSite::LowerBound(1)));
    }

    #[test]
    fn validate_rejects_inverted_bounds() {
        let mut lp = LinearProgram::new();
        lp.add_var("x", 0.0, 2.0, 1.0);
        assert!(matches!(lp.validate(), Err(LpError::Malformed(_))));
    }
}
