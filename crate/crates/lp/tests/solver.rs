use grouprep_lp::{
    check_feasibility, solve_lp, solve_lp_lazy, solve_lp_warm, LinearProgram, LpStatus, Relation, Var,
    ViolationSite,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Dense row used by the vertex-enumeration oracle: `a . x (rel) b`.
#[derive(Clone, Debug)]
struct Row {
    a: Vec<f64>,
    rel: Relation,
    b: f64,
}

fn build(costs: &[f64], upper: &[f64], rows: &[Row]) -> LinearProgram {
    let mut lp = LinearProgram::new();
    let vars: Vec<Var> = costs
        .iter()
        .zip(upper)
        .enumerate()
        .map(|(j, (&c, &u))| lp.add_var(format!("x{j}"), c, 0.0, u))
        .collect();
    for (i, r) in rows.iter().enumerate() {
        lp.add_constraint(format!("r{i}"), vars.iter().zip(&r.a).map(|(&v, &a)| (v, a)), r.rel, r.b);
    }
    lp
}

/// Solves a small square system by Gaussian elimination with partial pivoting.
fn solve_square(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs()))?;
        if m[p][c].abs() < 1e-10 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for r in 0..n {
            if r != c {
                let f = m[r][c] / m[c][c];
                for k in c..n {
                    m[r][k] -= f * m[c][k];
                }
                rhs[r] -= f * rhs[c];
            }
        }
    }
    Some((0..n).map(|i| rhs[i] / m[i][i]).collect())
}

/// Minimum over all vertices of the bounded polytope, or `None` if empty.
fn vertex_oracle(costs: &[f64], upper: &[f64], rows: &[Row]) -> Option<f64> {
    let n = costs.len();
    // Candidate tight hyperplanes: every row plus both bounds per variable.
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|r| (r.a.clone(), r.b)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), 0.0));
        planes.push((e, upper[j]));
    }
    let feasible = |x: &[f64]| {
        x.iter().zip(upper).all(|(&v, &u)| v >= -1e-9 && v <= u + 1e-9)
            && rows.iter().all(|r| {
                let act: f64 = r.a.iter().zip(x).map(|(a, v)| a * v).sum();
                match r.rel {
                    Relation::Le => act <= r.b + 1e-9,
                    Relation::Ge => act >= r.b - 1e-9,
                    Relation::Eq => (act - r.b).abs() <= 1e-9,
                }
            })
    };
    let mut best: Option<f64> = None;
    let p = planes.len();
    let mut idx: Vec<usize> = (0..n).collect();
    loop {
        let m: Vec<Vec<f64>> = idx.iter().map(|&i| planes[i].0.clone()).collect();
        let rhs: Vec<f64> = idx.iter().map(|&i| planes[i].1).collect();
        if let Some(x) = solve_square(m, rhs) {
            if feasible(&x) {
                let v: f64 = costs.iter().zip(&x).map(|(c, x)| c * x).sum();
                best = Some(best.map_or(v, |b: f64| b.min(v)));
            }
        }
        // Next combination in lexicographic order.
        let mut i = n;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if idx[i] < p - n + i {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..n {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn row_strategy(n: usize) -> impl Strategy<Value = Row> {
    (
        prop::collection::vec(-3i32..=3, n),
        prop_oneof![Just(Relation::Le), Just(Relation::Ge), Just(Relation::Eq)],
        -4i32..=6,
    )
        .prop_map(|(a, rel, b)| Row {
            a: a.into_iter().map(f64::from).collect(),
            rel,
            b: f64::from(b) / 2.0,
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn matches_vertex_enumeration(
        costs in prop::collection::vec(-5i32..=5, 3),
        upper in prop::collection::vec(1i32..=4, 3),
        rows in prop::collection::vec(row_strategy(3), 1..=4),
    ) {
        let costs: Vec<f64> = costs.into_iter().map(f64::from).collect();
        let upper: Vec<f64> = upper.into_iter().map(f64::from).collect();
        let lp = build(&costs, &upper, &rows);
        let sol = solve_lp(&lp).unwrap();
        match vertex_oracle(&costs, &upper, &rows) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert!((sol.objective_value - best).abs() < 1e-7,
                    "solver {} oracle {}", sol.objective_value, best);
                prop_assert!(check_feasibility(&lp, &sol.values).unwrap().is_empty());
            }
        }
    }

    #[test]
    fn adding_a_row_never_lowers_the_optimum(
        costs in prop::collection::vec(-5i32..=5, 3),
        rows in prop::collection::vec(row_strategy(3), 1..=3),
        extra in row_strategy(3),
    ) {
        let costs: Vec<f64> = costs.into_iter().map(f64::from).collect();
        let upper = vec![2.0; 3];
        let base = solve_lp(&build(&costs, &upper, &rows)).unwrap();
        let mut more = rows.clone();
        more.push(extra);
        let tighter = solve_lp(&build(&costs, &upper, &more)).unwrap();
        if base.status == LpStatus::Infeasible {
            prop_assert_eq!(tighter.status, LpStatus::Infeasible);
        } else if tighter.status == LpStatus::Optimal {
            prop_assert!(tighter.objective_value >= base.objective_value - 1e-9);
        }
    }

    #[test]
    fn warm_start_after_new_rows_matches_cold_solve(
        costs in prop::collection::vec(-5i32..=5, 3),
        rows in prop::collection::vec(row_strategy(3), 1..=3),
        extra in prop::collection::vec(row_strategy(3), 1..=2),
    ) {
        let costs: Vec<f64> = costs.into_iter().map(f64::from).collect();
        let upper = vec![2.0; 3];
        let (_, basis) = solve_lp_warm(&build(&costs, &upper, &rows), None).unwrap();
        let mut more = rows.clone();
        more.extend(extra);
        let lp = build(&costs, &upper, &more);
        let cold = solve_lp(&lp).unwrap();
        let (warm, _) = solve_lp_warm(&lp, Some(&basis)).unwrap();
        prop_assert_eq!(warm.status, cold.status);
        if cold.status == LpStatus::Optimal {
            prop_assert!((warm.objective_value - cold.objective_value).abs() < 1e-7);
            prop_assert!(check_feasibility(&lp, &warm.values).unwrap().is_empty());
        }
    }
}

/// Random k-median style LP: assignment, linking, cardinality and group rows.
fn fair_kmedian_lp(n: usize, k: usize, seed: u64) -> LinearProgram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random::<f64>(), rng.random::<f64>())).collect();
    let groups: Vec<usize> = (0..n).map(|u| u % 2).collect();
    let d = |a: usize, b: usize| ((pts[a].0 - pts[b].0).powi(2) + (pts[a].1 - pts[b].1).powi(2)).sqrt();
    let mut lp = LinearProgram::new();
    let z: Vec<Vec<Var>> = (0..n)
        .map(|u| (0..n).map(|v| lp.add_var(format!("z_{u}_{v}"), 0.0, 0.0, 1.0)).collect())
        .collect();
    let y: Vec<Var> = (0..n).map(|v| lp.add_var(format!("y_{v}"), 0.0, 0.0, 1.0)).collect();
    let lambda = lp.add_var("lambda", 1.0, 0.0, f64::INFINITY);
    for u in 0..n {
        lp.add_constraint(format!("assign_{u}"), (0..n).map(|v| (z[u][v], 1.0)), Relation::Eq, 1.0);
    }
    for u in 0..n {
        for v in 0..n {
            lp.add_constraint(format!("link_{u}_{v}"), [(z[u][v], 1.0), (y[v], -1.0)], Relation::Le, 0.0);
        }
    }
    lp.add_constraint("open", y.iter().map(|&v| (v, 1.0)), Relation::Le, k as f64);
    for g in 0..2 {
        let size = groups.iter().filter(|&&x| x == g).count() as f64;
        let mut terms = vec![(lambda, -1.0)];
        for u in (0..n).filter(|&u| groups[u] == g) {
            for v in 0..n {
                terms.push((z[u][v], d(u, v) / size));
            }
        }
        lp.add_constraint(format!("group_{g}"), terms, Relation::Le, 0.0);
    }
    lp
}

#[test]
fn fair_lp_solution_is_feasible_and_deterministic() {
    let lp = fair_kmedian_lp(20, 3, 11);
    let a = solve_lp(&lp).unwrap();
    let b = solve_lp(&lp).unwrap();
    assert_eq!(a.status, LpStatus::Optimal);
    assert!(check_feasibility(&lp, &a.values).unwrap().is_empty());
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&a.values), bits(&b.values));
    assert_eq!(a.objective_value.to_bits(), b.objective_value.to_bits());
}

#[test]
fn fixing_variables_at_the_optimum_reproduces_the_objective() {
    let lp = fair_kmedian_lp(12, 2, 5);
    let sol = solve_lp(&lp).unwrap();
    let mut fixed = lp.clone();
    for (j, &x) in sol.values.iter().enumerate() {
        fixed.set_bounds(Var(j), x, x);
    }
    let again = solve_lp(&fixed).unwrap();
    assert_eq!(again.status, LpStatus::Optimal);
    assert!((again.objective_value - sol.objective_value).abs() < 1e-6);
}

#[test]
fn lambda_below_a_group_cost_is_flagged() {
    let lp = fair_kmedian_lp(10, 2, 3);
    let mut values = solve_lp(&lp).unwrap().values;
    let lambda = lp.num_vars() - 1;
    values[lambda] -= 0.05;
    let report = check_feasibility(&lp, &values).unwrap();
    assert!(!report.is_empty());
    for v in &report {
        match v.site {
            ViolationSite::Constraint(i) => assert!(lp.constraint(i).name.starts_with("group_")),
            other => panic!("unexpected violation {other:?}"),
        }
    }
}

#[test]
fn row_generation_agrees_with_the_full_solve() {
    for seed in 0..4 {
        let lp = fair_kmedian_lp(15, 3, seed);
        let full = solve_lp(&lp).unwrap();
        let initial: Vec<bool> = lp.constraints().iter().map(|c| !c.name.starts_with("link_")).collect();
        let lazy = solve_lp_lazy(&lp, &initial).unwrap();
        assert_eq!(lazy.status, LpStatus::Optimal);
        assert!((lazy.objective_value - full.objective_value).abs() < 1e-7);
        assert!(check_feasibility(&lp, &lazy.values).unwrap().is_empty());
    }
}

#[test]
fn warm_start_with_a_stale_basis_still_solves() {
    let lp = fair_kmedian_lp(10, 2, 9);
    let (cold, basis) = solve_lp_warm(&lp, None).unwrap();
    // A basis from another instance of the same shape.
    let other = fair_kmedian_lp(10, 2, 10);
    let (_, stale) = solve_lp_warm(&other, None).unwrap();
    let (warm, _) = solve_lp_warm(&lp, Some(&stale)).unwrap();
    assert!((warm.objective_value - cold.objective_value).abs() < 1e-7);
    let (again, _) = solve_lp_warm(&lp, Some(&basis)).unwrap();
    assert!((again.objective_value - cold.objective_value).abs() < 1e-9);
    assert!(again.iterations <= 1);
}
