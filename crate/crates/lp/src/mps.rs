use std::fmt::Write as _;
use std::io;

use crate::problem::{LinearProgram, Relation};

fn token(name: &str) -> String {
    name.chars().map(|c| if c.is_whitespace() { '_' } else { c }).collect()
}

/// Renders `lp` in free-format MPS. Row and column names are taken from the
/// program with whitespace replaced by underscores.
pub fn to_mps(lp: &LinearProgram, name: &str) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "NAME          {}", token(name));
    out.push_str("ROWS\n N  COST\n");
    for row in lp.constraints() {
        let kind = match row.relation {
            Relation::Le => 'L',
            Relation::Eq => 'E',
            Relation::Ge => 'G',
        };
        let _ = writeln!(out, " {kind}  {}", token(&row.name));
    }

    let mut columns: Vec<Vec<(usize, f64)>> = vec![Vec::new(); lp.num_vars()];
    for (i, row) in lp.constraints().iter().enumerate() {
        for &(j, a) in &row.coeffs {
            columns[j].push((i, a));
        }
    }
    out.push_str("COLUMNS\n");
    for (j, col) in columns.iter().enumerate() {
        let var = token(lp.var_name(j));
        let c = lp.objective()[j];
        if c != 0.0 {
            let _ = writeln!(out, "    {var}  COST  {c:e}");
        }
        for &(i, a) in col {
            let _ = writeln!(out, "    {var}  {}  {a:e}", token(&lp.constraint(i).name));
        }
    }

    out.push_str("RHS\n");
    for row in lp.constraints() {
        if row.rhs != 0.0 {
            let _ = writeln!(out, "    RHS  {}  {:e}", token(&row.name), row.rhs);
        }
    }

    out.push_str("BOUNDS\n");
    for j in 0..lp.num_vars() {
        let var = token(lp.var_name(j));
        let (l, u) = (lp.lower()[j], lp.upper()[j]);
        if l == u {
            let _ = writeln!(out, " FX BND  {var}  {l:e}");
            continue;
        }
        if l != 0.0 {
            let _ = writeln!(out, " LO BND  {var}  {l:e}");
        }
        if u.is_finite() {
            let _ = writeln!(out, " UP BND  {var}  {u:e}");
        }
    }
    out.push_str("ENDATA\n");
    out
}

pub fn write_mps(lp: &LinearProgram, name: &str, mut w: impl io::Write) -> io::Result<()> {
    w.write_all(to_mps(lp, name).as_bytes())
}
