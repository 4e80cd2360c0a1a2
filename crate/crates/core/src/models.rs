//! LP relaxations of the k-median variants and of (capacitated) facility
//! location, and extraction of their fractional solutions.
//!
//! Variable layout in every model: `z` (n x t, row-major), then `y` (t), then
//! `lambda` when the model has one. Row layout: assignment (n), linking
//! (n x t), cardinality (k-median only), capacity (t, capacitated only),
//! group bounds.

use std::collections::HashSet;

use grouprep_lp::{check_feasibility, solve_lp, solve_lp_warm, LinearProgram, LpSolution, LpStatus, Relation, Var};
use log::debug;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};
use crate::facility::FacilityInstance;
use crate::instance::Dataset;
use crate::metric::{CostMatrix, MetricCache, SiteDistance};
use crate::rounding::dependent::{round_dependent, DependentOptions};
use crate::seed::derive_indexed;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KMedianVariant {
    /// Total connection cost.
    Standard,
    /// Connection cost of each point weighted by `1/|X_i|` of its group.
    Weighted,
    /// Minimize the largest group average.
    FairAbs,
    /// Minimize the largest group cost relative to the group's own optimum.
    FairRel,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fairness {
    #[default]
    PerGroup,
    /// All clients form one group.
    Aggregate,
}

/// Per-group approximate k-median optima used as RelError denominators.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelErrorCertificate {
    values: Vec<f64>,
    method: String,
}

impl RelErrorCertificate {
    pub fn new(values: Vec<f64>, method: impl Into<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("certificate needs one value per group"));
        }
        if let Some(g) = values.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid(format!(
                "group {g} has optimum {}; relative error divides by it, so it must be positive",
                values[g]
            )));
        }
        Ok(RelErrorCertificate {
            values,
            method: method.into(),
        })
    }

    /// Runs [`group_kmedian_approx`] for every group.
    pub fn compute(dataset: &Dataset, metric: &MetricCache, k: usize, seed: u64) -> Result<Self> {
        let values = (0..dataset.num_groups())
            .map(|g| group_kmedian_approx(dataset, metric, g, k, derive_indexed(seed, g as u64)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values, "standard LP + dependent rounding, best of 5 draws")
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn value(&self, g: usize) -> f64 {
        self.values[g]
    }

    pub fn method(&self) -> &str {
        &self.method
    }
}

/// Where each variable lives in the LP.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelShape {
    pub n: usize,
    pub t: usize,
    /// Site id of each LP column: a dataset index (k-median) or a location
    /// index (facility location).
    pub site_ids: Vec<usize>,
    pub lambda: Option<usize>,
}

impl ModelShape {
    pub fn z(&self, u: usize, v: usize) -> usize {
        u * self.t + v
    }

    pub fn y(&self, v: usize) -> usize {
        self.n * self.t + v
    }
}

#[derive(Clone, Debug)]
struct GroupRow {
    name: String,
    members: Vec<usize>,
    scale: f64,
}

/// Everything needed to write the LP down or to solve it by cut generation.
#[derive(Clone, Debug)]
struct Structure {
    costs: CostMatrix,
    client_weight: Vec<f64>,
    site_cost: Vec<f64>,
    groups: Vec<GroupRow>,
    max_open: Option<usize>,
    capacity: Option<usize>,
    has_lambda: bool,
}

/// A built LP together with the structure it was generated from.
#[derive(Clone, Debug)]
pub struct LpModel {
    pub lp: LinearProgram,
    pub shape: ModelShape,
    structure: Structure,
}

impl LpModel {
    fn from_structure(structure: Structure, site_ids: Vec<usize>) -> Self {
        let s = &structure;
        let (n, t) = (s.costs.rows(), s.costs.cols());
        let mut lp = LinearProgram::new();
        for u in 0..n {
            for v in 0..t {
                lp.add_var(format!("z_{u}_{v}"), s.client_weight[u] * s.costs.get(u, v), 0.0, 1.0);
            }
        }
        for v in 0..t {
            lp.add_var(format!("y_{v}"), s.site_cost[v], 0.0, 1.0);
        }
        let lambda = s.has_lambda.then(|| lp.add_var("lambda", 1.0, 0.0, f64::INFINITY).0);
        let z = |u: usize, v: usize| Var(u * t + v);
        let y = |v: usize| Var(n * t + v);
        for u in 0..n {
            lp.add_constraint(format!("assign_{u}"), (0..t).map(|v| (z(u, v), 1.0)), Relation::Eq, 1.0);
        }
        for u in 0..n {
            for v in 0..t {
                lp.add_constraint(format!("link_{u}_{v}"), [(z(u, v), 1.0), (y(v), -1.0)], Relation::Le, 0.0);
            }
        }
        if let Some(k) = s.max_open {
            lp.add_constraint("open", (0..t).map(|v| (y(v), 1.0)), Relation::Le, k as f64);
        }
        if let Some(cap) = s.capacity {
            for v in 0..t {
                let terms = (0..n).map(|u| (z(u, v), 1.0)).chain([(y(v), -(cap as f64))]);
                lp.add_constraint(format!("capacity_{v}"), terms, Relation::Le, 0.0);
            }
        }
        if let Some(l) = lambda {
            for g in &s.groups {
                let mut terms = Vec::with_capacity(g.members.len() * t + 1);
                for &u in &g.members {
                    for v in 0..t {
                        terms.push((z(u, v), g.scale * s.costs.get(u, v)));
                    }
                }
                terms.push((Var(l), -1.0));
                lp.add_constraint(format!("group_{}", g.name), terms, Relation::Le, 0.0);
            }
        }
        LpModel {
            lp,
            shape: ModelShape {
                n,
                t,
                site_ids,
                lambda,
            },
            structure,
        }
    }

    pub fn costs(&self) -> &CostMatrix {
        &self.structure.costs
    }
}

/// Builds the k-median LP of the given variant. `candidates` defaults to all
/// points.
pub fn build_kmedian_lp(
    variant: KMedianVariant,
    dataset: &Dataset,
    metric: &MetricCache,
    k: usize,
    certificate: Option<&RelErrorCertificate>,
    candidates: Option<&[usize]>,
) -> Result<LpModel> {
    let n = dataset.len();
    if metric.len() != n {
        return Err(invalid(format!("metric has {} points, dataset {n}", metric.len())));
    }
    let site_ids: Vec<usize> = match candidates {
        Some(c) => {
            if c.is_empty() {
                return Err(invalid("candidate list is empty"));
            }
            if let Some(&bad) = c.iter().find(|&&i| i >= n) {
                return Err(invalid(format!("candidate {bad} out of range for {n} points")));
            }
            let mut seen = HashSet::new();
            if let Some(&dup) = c.iter().find(|&&i| !seen.insert(i)) {
                return Err(invalid(format!("candidate {dup} listed twice")));
            }
            c.to_vec()
        }
        None => (0..n).collect(),
    };
    if k == 0 || k > site_ids.len() {
        return Err(invalid(format!("k = {k} must lie in 1..={}", site_ids.len())));
    }
    let m = dataset.num_groups();
    let size = |u: usize| dataset.group(dataset.group_of(u)).len() as f64;
    let (client_weight, groups, has_lambda) = match variant {
        KMedianVariant::Standard => (vec![1.0; n], Vec::new(), false),
        KMedianVariant::Weighted => ((0..n).map(|u| 1.0 / size(u)).collect(), Vec::new(), false),
        KMedianVariant::FairAbs | KMedianVariant::FairRel => {
            let scale: Vec<f64> = if variant == KMedianVariant::FairAbs {
                (0..m).map(|g| 1.0 / dataset.group(g).len() as f64).collect()
            } else {
                let cert = certificate.ok_or_else(|| invalid("fair-rel needs a RelError certificate"))?;
                if cert.values().len() != m {
                    return Err(invalid(format!(
                        "certificate has {} values for {m} groups",
                        cert.values().len()
                    )));
                }
                cert.values().iter().map(|v| 1.0 / v).collect()
            };
            let groups = (0..m)
                .map(|g| GroupRow {
                    name: dataset.group_names()[g].clone(),
                    members: dataset.group(g).to_vec(),
                    scale: scale[g],
                })
                .collect();
            (vec![0.0; n], groups, true)
        }
    };
    let t = site_ids.len();
    let structure = Structure {
        costs: metric.restrict(&site_ids),
        client_weight,
        site_cost: vec![0.0; t],
        groups,
        max_open: Some(k),
        capacity: None,
        has_lambda,
    };
    Ok(LpModel::from_structure(structure, site_ids))
}

/// Builds the facility-location LP: minimize `lambda + (1/|X|) sum f_v y_v`.
pub fn build_facility_lp(
    instance: &FacilityInstance,
    costs: &CostMatrix,
    fairness: Fairness,
    capacitated: bool,
) -> Result<LpModel> {
    let clients = instance.clients();
    let n = clients.len();
    let t = instance.num_locations();
    if costs.rows() != n || costs.cols() != t {
        return Err(invalid(format!(
            "cost matrix is {}x{}, instance is {n}x{t}",
            costs.rows(),
            costs.cols()
        )));
    }
    let capacity = if capacitated {
        Some(instance.capacity().ok_or_else(|| invalid("capacitated model needs a capacity"))?)
    } else {
        None
    };
    let groups = match fairness {
        Fairness::PerGroup => (0..clients.num_groups())
            .map(|g| GroupRow {
                name: clients.group_names()[g].clone(),
                members: clients.group(g).to_vec(),
                scale: 1.0 / clients.group(g).len() as f64,
            })
            .collect(),
        Fairness::Aggregate => vec![GroupRow {
            name: "all".to_string(),
            members: (0..n).collect(),
            scale: 1.0 / n as f64,
        }],
    };
    let structure = Structure {
        costs: costs.clone(),
        client_weight: vec![0.0; n],
        site_cost: instance.opening_costs().iter().map(|f| f / n as f64).collect(),
        groups,
        max_open: None,
        capacity,
        has_lambda: true,
    };
    Ok(LpModel::from_structure(structure, (0..t).collect()))
}

/// Optimal fractional solution of an assignment LP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalClustering {
    pub n: usize,
    pub t: usize,
    /// n x t, row-major.
    pub z: Vec<f64>,
    pub y: Vec<f64>,
    /// The `lambda` column, or the objective value for models without one.
    pub lambda: f64,
    pub objective: f64,
    pub site_ids: Vec<usize>,
    pub integral: bool,
}

const INTEGRAL_TOL: f64 = 1e-9;

impl FractionalClustering {
    pub fn z(&self, u: usize, v: usize) -> f64 {
        self.z[u * self.t + v]
    }

    pub fn z_row(&self, u: usize) -> &[f64] {
        &self.z[u * self.t..(u + 1) * self.t]
    }

    /// Fractional connection cost `R_u = sum_v d(u, v) z_uv` of every client.
    pub fn radii(&self, d: &impl SiteDistance) -> Vec<f64> {
        (0..self.n)
            .map(|u| {
                self.z_row(u)
                    .iter()
                    .zip(&self.site_ids)
                    .filter(|(&z, _)| z > 0.0)
                    .map(|(&z, &s)| z * d.dist(u, s))
                    .sum()
            })
            .collect()
    }

    /// Builds a fractional solution from an integral choice of columns and
    /// an assignment given as column positions.
    pub fn from_integral(t: usize, site_ids: Vec<usize>, open: &[usize], assign: &[usize]) -> Self {
        let n = assign.len();
        let mut z = vec![0.0; n * t];
        let mut y = vec![0.0; t];
        for &v in open {
            y[v] = 1.0;
        }
        for (u, &v) in assign.iter().enumerate() {
            z[u * t + v] = 1.0;
        }
        FractionalClustering {
            n,
            t,
            z,
            y,
            lambda: 0.0,
            objective: 0.0,
            site_ids,
            integral: true,
        }
    }

    fn compute_integral(&mut self) {
        self.integral = self
            .z
            .iter()
            .chain(&self.y)
            .all(|&x| x.abs() <= INTEGRAL_TOL || (x - 1.0).abs() <= INTEGRAL_TOL);
    }
}

/// Reshapes an optimal LP solution. Negative noise is clipped to zero and
/// values above one to one.
pub fn extract_fractional(solution: &LpSolution, shape: &ModelShape) -> Result<FractionalClustering> {
    if solution.status != LpStatus::Optimal {
        return Err(invalid(format!("cannot extract a {:?} LP solution", solution.status)));
    }
    let expect = shape.n * shape.t + shape.t + usize::from(shape.lambda.is_some());
    if solution.values.len() != expect {
        return Err(invalid(format!(
            "solution has {} values, shape needs {expect}",
            solution.values.len()
        )));
    }
    let clip = |x: f64| x.clamp(0.0, 1.0);
    let z: Vec<f64> = solution.values[..shape.n * shape.t].iter().map(|&x| clip(x)).collect();
    let y: Vec<f64> = solution.values[shape.n * shape.t..shape.n * shape.t + shape.t]
        .iter()
        .map(|&x| clip(x))
        .collect();
    let lambda = match shape.lambda {
        Some(l) => solution.values[l],
        None => solution.objective_value,
    };
    let mut frac = FractionalClustering {
        n: shape.n,
        t: shape.t,
        z,
        y,
        lambda,
        objective: solution.objective_value,
        site_ids: shape.site_ids.clone(),
        integral: false,
    };
    frac.compute_integral();
    Ok(frac)
}

/// Solves the full LP with the simplex solver.
pub fn solve_model_full(model: &LpModel) -> Result<FractionalClustering> {
    let sol = solve_lp(&model.lp)?;
    match sol.status {
        LpStatus::Optimal => extract_fractional(&sol, &model.shape),
        LpStatus::Infeasible => Err(CoreError::Infeasible("LP relaxation has no feasible point".into())),
        LpStatus::Unbounded => Err(CoreError::Invariant("assignment LP reported unbounded".into())),
    }
}

/// Solves the model. Uncapacitated models go through cut generation on
/// `(y, r, lambda)` (see [`solve_model_compact`]); capacitated ones through
/// the full LP.
pub fn solve_model(model: &LpModel) -> Result<FractionalClustering> {
    if model.structure.capacity.is_some() {
        solve_model_full(model)
    } else {
        solve_model_compact(model)
    }
}

/// Sites of every client sorted by `(distance, column)`.
fn site_orders(costs: &CostMatrix) -> Vec<Vec<usize>> {
    (0..costs.rows())
        .map(|u| {
            let mut order: Vec<usize> = (0..costs.cols()).collect();
            order.sort_by(|&a, &b| costs.get(u, a).total_cmp(&costs.get(u, b)).then(a.cmp(&b)));
            order
        })
        .collect()
}

/// Fills one unit of demand nearest-first under the caps `y`. Returns the
/// cost and the position in `order` where the demand was exhausted.
fn greedy_fill(costs: &CostMatrix, u: usize, order: &[usize], y: &[f64], mut out: Option<&mut [f64]>) -> (f64, usize) {
    let mut need = 1.0;
    let mut cost = 0.0;
    let mut last = order.len() - 1;
    for (p, &v) in order.iter().enumerate() {
        if y[v] <= 0.0 {
            continue;
        }
        let take = y[v].min(need);
        cost += take * costs.get(u, v);
        need -= take;
        last = p;
        if let Some(o) = out.as_deref_mut() {
            o[v] = take;
        }
        if need <= 1e-12 {
            break;
        }
    }
    if need > 0.0 {
        // Round-off shortfall below the LP tolerance: give it to the last site used.
        cost += need * costs.get(u, order[last]);
        if let Some(o) = out {
            o[order[last]] += need;
        }
    }
    (cost, last)
}

/// Cut-generation solve for uncapacitated models.
///
/// For fixed `y` the best assignment of a client fills its demand from the
/// nearest sites first, and its cost `R_u(y)` is the maximum over
/// breakpoints `a` of `a - sum_v (a - d_uv)^+ y_v`. The solver therefore
/// works with variables `(y, r, lambda)`, adds the breakpoint cut that is
/// tight at the current `y` for every client with `r_u < R_u(y)`, and
/// finally rebuilds `z` by the greedy fill. The result is certified against
/// the full LP before it is returned.
pub fn solve_model_compact(model: &LpModel) -> Result<FractionalClustering> {
    let s = &model.structure;
    if s.capacity.is_some() {
        return Err(invalid("capacitated models need the full LP"));
    }
    let (n, t) = (s.costs.rows(), s.costs.cols());
    let orders = site_orders(&s.costs);

    let mut lp = LinearProgram::new();
    let yv: Vec<Var> = (0..t).map(|v| lp.add_var(format!("y_{v}"), s.site_cost[v], 0.0, 1.0)).collect();
    let rv: Vec<Var> = (0..n)
        .map(|u| lp.add_var(format!("r_{u}"), s.client_weight[u], 0.0, f64::INFINITY))
        .collect();
    let lambda = s.has_lambda.then(|| lp.add_var("lambda", 1.0, 0.0, f64::INFINITY));
    lp.add_constraint("cover", yv.iter().map(|&v| (v, 1.0)), Relation::Ge, 1.0);
    if let Some(k) = s.max_open {
        lp.add_constraint("open", yv.iter().map(|&v| (v, 1.0)), Relation::Le, k as f64);
    }
    if let Some(l) = lambda {
        for g in &s.groups {
            let terms = g.members.iter().map(|&u| (rv[u], g.scale)).chain([(l, -1.0)]);
            lp.add_constraint(format!("group_{}", g.name), terms, Relation::Le, 0.0);
        }
    }
    let mut cuts: HashSet<(usize, usize)> = HashSet::new();
    let add_cut = |lp: &mut LinearProgram, cuts: &mut HashSet<(usize, usize)>, u: usize, p: usize| {
        if !cuts.insert((u, p)) {
            return false;
        }
        let a = s.costs.get(u, orders[u][p]);
        let terms = orders[u][..p]
            .iter()
            .filter(|&&v| s.costs.get(u, v) < a)
            .map(|&v| (yv[v], a - s.costs.get(u, v)))
            .chain([(rv[u], 1.0)]);
        lp.add_constraint(format!("cut_{u}_{p}"), terms, Relation::Ge, a);
        true
    };
    for u in 0..n {
        add_cut(&mut lp, &mut cuts, u, t - 1);
    }

    let mut rounds = 0;
    let mut basis = None;
    let sol = loop {
        rounds += 1;
        // Each round restarts from the previous optimal basis.
        let (sol, b) = solve_lp_warm(&lp, basis.as_ref())?;
        basis = Some(b);
        match sol.status {
            LpStatus::Optimal => {}
            LpStatus::Infeasible => return Err(CoreError::Infeasible("LP relaxation has no feasible point".into())),
            LpStatus::Unbounded => return Err(CoreError::Invariant("cut model reported unbounded".into())),
        }
        let y = &sol.values[..t];
        let mut added = 0;
        for u in 0..n {
            let (cost, p) = greedy_fill(&s.costs, u, &orders[u], y, None);
            if sol.values[rv[u].0] < cost - 1e-9 * (1.0 + cost) && add_cut(&mut lp, &mut cuts, u, p) {
                added += 1;
            }
        }
        debug!("cut round {rounds}: {} rows, {added} cuts added", lp.num_constraints());
        if added == 0 {
            break sol;
        }
    };

    // Rebuild the full solution vector.
    let shape = &model.shape;
    let y: Vec<f64> = sol.values[..t].iter().map(|x| x.clamp(0.0, 1.0)).collect();
    let mut values = vec![0.0; model.lp.num_vars()];
    let mut radius = vec![0.0; n];
    for u in 0..n {
        let row = &mut values[u * t..(u + 1) * t];
        radius[u] = greedy_fill(&s.costs, u, &orders[u], &y, Some(row)).0;
    }
    values[n * t..n * t + t].copy_from_slice(&y);
    if let Some(l) = shape.lambda {
        let lam = s
            .groups
            .iter()
            .map(|g| g.scale * g.members.iter().map(|&u| radius[u]).sum::<f64>())
            .fold(0.0, f64::max);
        values[l] = lam.max(lambda.map_or(0.0, |v| sol.values[v.0]));
    }
    let violations = check_feasibility(&model.lp, &values)?;
    if let Some(v) = violations.first() {
        return Err(CoreError::Invariant(format!(
            "cut-generation solution violates {} ({:?}, residual {:e})",
            model.lp.constraint_name_of(v.site),
            v.site,
            v.residual
        )));
    }
    let objective = model.lp.objective_value(&values);
    let full = LpSolution {
        status: LpStatus::Optimal,
        objective_value: objective,
        values,
        iterations: sol.iterations,
    };
    extract_fractional(&full, shape)
}

trait SiteName {
    fn constraint_name_of(&self, site: grouprep_lp::ViolationSite) -> String;
}

impl SiteName for LinearProgram {
    fn constraint_name_of(&self, site: grouprep_lp::ViolationSite) -> String {
        match site {
            grouprep_lp::ViolationSite::Constraint(i) => self.constraint(i).name.clone(),
            grouprep_lp::ViolationSite::LowerBound(j) | grouprep_lp::ViolationSite::UpperBound(j) => {
                self.var_name(j).to_string()
            }
        }
    }
}

/// Cost of an integral k-median solution for group `group` alone: standard
/// LP on the group's points, then dependent rounding repaired to exactly
/// `k` centers, best of 5 seeded draws.
pub fn group_kmedian_approx(dataset: &Dataset, metric: &MetricCache, group: usize, k: usize, seed: u64) -> Result<f64> {
    if group >= dataset.num_groups() {
        return Err(invalid(format!("group {group} out of range")));
    }
    if k == 0 {
        return Err(invalid("k must be at least 1"));
    }
    let members = dataset.group(group);
    if k >= members.len() {
        return Ok(0.0);
    }
    let sub = dataset.subset(members)?;
    let sub_metric = metric.submatrix(members);
    let model = build_kmedian_lp(KMedianVariant::Standard, &sub, &sub_metric, k, None, None)?;
    let frac = solve_model(&model)?;
    let opts = DependentOptions { exact_k: true, ..Default::default() };
    let mut best = f64::INFINITY;
    for draw in 0..5 {
        let sol = round_dependent(&frac, &sub_metric, k, derive_indexed(seed, draw), opts)?;
        best = best.min(sol.total_connection());
    }
    Ok(best)
}

impl MetricCache {
    /// Distances among the listed points, in the given order.
    pub fn submatrix(&self, indices: &[usize]) -> MetricCache {
        let m = indices.len();
        let mut data = Vec::with_capacity(m * m);
        for &i in indices {
            data.extend(indices.iter().map(|&j| self.d(i, j)));
        }
        MetricCache::from_matrix(self.mode(), m, data)
    }
}
