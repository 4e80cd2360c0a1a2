//! Rounding for capacitated fair facility location. Loads may exceed the
//! capacity `U` by the factor `1 + 3 theta`.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};
use crate::facility::FacilityInstance;
use crate::metric::CostMatrix;
use crate::models::FractionalClustering;
use crate::rounding::radius_tol;
use crate::rounding::transport::transportation_assign_within;
use crate::solution::IntegralSolution;

const MASS_TOL: f64 = 1e-12;

/// One pass of the opening loop.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FflIteration {
    /// Client with the smallest radius among the under-served.
    pub client: usize,
    /// Under-served clients at the start of the pass.
    pub under_served: Vec<usize>,
    /// Fractionally open locations in the client's ball.
    pub ball: Vec<usize>,
    pub r: usize,
    pub opened: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundingTrace {
    pub theta: f64,
    pub delta: f64,
    pub capacity: usize,
    /// Per-location cap used by the final assignment.
    pub load_cap: usize,
    pub radii: Vec<f64>,
    /// Locations promoted because their filtered `y` reached 1/2.
    pub promoted: Vec<usize>,
    pub iterations: Vec<FflIteration>,
    /// Open set after the loop, ascending.
    pub opened: Vec<usize>,
    pub beta: Vec<f64>,
    /// Fractional load on each opened location before the final assignment.
    pub fractional_loads: Vec<f64>,
    /// False when the assignment had to leave the fractional support.
    pub support_respected: bool,
}

fn cheapest_first(set: &mut [usize], f: &[f64]) {
    set.sort_by(|&a, &b| f[a].total_cmp(&f[b]).then(a.cmp(&b)));
}

/// Rounds a fractional capacitated solution. `frac` columns must be the
/// instance's locations in order.
pub fn ffl_round(
    frac: &FractionalClustering,
    instance: &FacilityInstance,
    costs: &CostMatrix,
    theta: f64,
    delta: f64,
) -> Result<(IntegralSolution, RoundingTrace)> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(invalid(format!("theta must lie in (0, 1/2], got {theta}")));
    }
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(invalid(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    let capacity = instance
        .capacity()
        .ok_or_else(|| invalid("capacitated rounding needs an instance with a capacity"))?;
    let (n, t) = (frac.n, frac.t);
    if t != instance.num_locations() || frac.site_ids.iter().enumerate().any(|(i, &s)| i != s) {
        return Err(invalid("fractional columns do not match the instance locations"));
    }
    let f = instance.opening_costs();
    let d = |u: usize, v: usize| costs.get(u, v);
    let radii = frac.radii(costs);
    let load_cap = ((1.0 + 3.0 * theta) * capacity as f64 - 1e-9).ceil() as usize;
    let in_ball = |u: usize, v: usize| {
        let r = radii[u] / theta;
        d(u, v) <= r + radius_tol(r)
    };

    // Filtering: keep each client's mass inside its ball and renormalise.
    let mut z = vec![0.0; n * t];
    for u in 0..n {
        let kept: f64 = (0..t).filter(|&v| in_ball(u, v)).map(|v| frac.z(u, v)).sum();
        if kept <= MASS_TOL {
            return Err(CoreError::Invariant(format!("client {u} keeps no mass after filtering")));
        }
        for v in (0..t).filter(|&v| in_ball(u, v)) {
            z[u * t + v] = frac.z(u, v) / kept;
        }
    }
    let mut y: Vec<f64> = frac.y.iter().map(|&y| (y / (1.0 - theta)).min(1.0)).collect();
    let mut open = vec![false; t];
    let mut promoted = Vec::new();
    for v in 0..t {
        if y[v] >= 0.5 {
            y[v] = 1.0;
            open[v] = true;
            promoted.push(v);
        }
    }
    let mut load: Vec<f64> = (0..t).map(|v| (0..n).map(|u| z[u * t + v]).sum()).collect();

    let mut by_radius: Vec<usize> = (0..n).collect();
    by_radius.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let served = |z: &[f64], open: &[bool], u: usize| (0..t).filter(|&v| open[v]).map(|v| z[u * t + v]).sum::<f64>();

    let mut iterations = Vec::new();
    loop {
        let under: Vec<usize> = by_radius
            .iter()
            .copied()
            .filter(|&u| served(&z, &open, u) < 1.0 - delta)
            .collect();
        let Some(&u) = under.first() else { break };
        let ball: Vec<usize> = (0..t)
            .filter(|&v| in_ball(u, v) && y[v] > 0.0 && y[v] < 1.0)
            .collect();
        if ball.is_empty() {
            return Err(CoreError::Invariant(format!(
                "under-served client {u} has no fractional location in its ball"
            )));
        }
        let mass: f64 = ball.iter().map(|&v| y[v]).sum();
        let r = ((mass - 1e-9).ceil() as usize).clamp(1, ball.len());
        let mut order = ball.clone();
        cheapest_first(&mut order, f);
        let opened: Vec<usize> = order[..r].to_vec();
        let closed: Vec<usize> = order[r..].to_vec();
        for &v in &opened {
            y[v] = 1.0;
            open[v] = true;
        }
        for &v in &closed {
            y[v] = 0.0;
        }
        // Every client holding mass on a closed location moves it onto the
        // new locations, nearest first, up to the load cap.
        for w in 0..n {
            let mut moving = 0.0;
            for &v in &closed {
                moving += z[w * t + v];
                load[v] -= z[w * t + v];
                z[w * t + v] = 0.0;
            }
            if moving <= 0.0 {
                continue;
            }
            let mut targets = opened.clone();
            targets.sort_by(|&a, &b| d(w, a).total_cmp(&d(w, b)).then(a.cmp(&b)));
            for &v in &targets {
                let room = (load_cap as f64 - load[v]).max(0.0);
                let put = moving.min(room);
                z[w * t + v] += put;
                load[v] += put;
                moving -= put;
                if moving <= MASS_TOL {
                    break;
                }
            }
            if moving > 0.0 {
                z[w * t + targets[0]] += moving;
                load[targets[0]] += moving;
            }
        }
        iterations.push(FflIteration {
            client: u,
            under_served: under,
            ball,
            r,
            opened,
        });
    }

    // Close what is still fractional and rescale each client onto the open set.
    let opened: Vec<usize> = (0..t).filter(|&v| open[v]).collect();
    let mut beta = vec![0.0; n];
    for u in 0..n {
        for v in (0..t).filter(|&v| !open[v]) {
            z[u * t + v] = 0.0;
        }
        beta[u] = served(&z, &open, u);
        if beta[u] <= MASS_TOL {
            return Err(CoreError::Invariant(format!("client {u} has no mass on open locations")));
        }
        if beta[u] < 1.0 {
            for &v in &opened {
                z[u * t + v] /= beta[u];
            }
        }
    }
    let fractional_loads: Vec<f64> = opened.iter().map(|&v| (0..n).map(|u| z[u * t + v]).sum()).collect();

    let support = |u: usize, v: usize| z[u * t + v] > MASS_TOL;
    let (assignment, support_respected) = match transportation_assign_within(&opened, load_cap, costs, support)? {
        Some((a, _)) => (a, true),
        None => {
            warn!("fractional support cannot carry all clients at cap {load_cap}; assigning over all open locations");
            let (a, _) = transportation_assign_within(&opened, load_cap, costs, |_, _| true)?.ok_or_else(|| {
                CoreError::Invariant(format!(
                    "{} open locations at cap {load_cap} cannot serve {n} clients",
                    opened.len()
                ))
            })?;
            (a, false)
        }
    };
    let solution = IntegralSolution::with_assignment(opened.clone(), assignment, costs)?;
    let trace = RoundingTrace {
        theta,
        delta,
        capacity,
        load_cap,
        radii,
        promoted,
        iterations,
        opened,
        beta,
        fractional_loads,
        support_respected,
    };
    Ok((solution, trace))
}
