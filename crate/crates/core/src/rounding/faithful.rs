use crate::error::{invalid, CoreError, Result};
use crate::facility::FacilityInstance;
use crate::metric::CostMatrix;
use crate::models::FractionalClustering;
use crate::rounding::radius_tol;
use crate::solution::IntegralSolution;

/// Ball parameter giving factor `3/theta = 4` on connection and
/// `1/(1-theta) = 4` on opening cost.
pub const DEFAULT_THETA: f64 = 0.75;

/// Deterministic filtering rounding for uncapacitated facility location.
///
/// Clients are scanned by increasing `R_u`. A client still present opens
/// the cheapest location with positive `z_uv` inside `B(u, R_u/theta)`, then
/// every remaining client with positive `z` on one of those locations (inside
/// its own ball) is dropped. Clients go to the nearest open location.
pub fn round_facility_faithful(
    frac: &FractionalClustering,
    instance: &FacilityInstance,
    costs: &CostMatrix,
    theta: f64,
) -> Result<IntegralSolution> {
    if !(theta > 0.0 && theta < 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1), got {theta}")));
    }
    let radii = frac.radii(costs);
    let n = frac.n;
    let f = instance.opening_costs();
    let in_ball = |u: usize, v: usize| {
        let r = radii[u] / theta;
        frac.z(u, v) > 0.0 && costs.get(u, frac.site_ids[v]) <= r + radius_tol(r)
    };
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let mut alive = vec![true; n];
    let mut open = Vec::new();
    for &u in &order {
        if !alive[u] {
            continue;
        }
        let ball: Vec<usize> = (0..frac.t).filter(|&v| in_ball(u, v)).collect();
        let cheapest = ball
            .iter()
            .copied()
            .min_by(|&a, &b| f[frac.site_ids[a]].total_cmp(&f[frac.site_ids[b]]).then(a.cmp(&b)))
            .ok_or_else(|| CoreError::Invariant(format!("ball of client {u} holds no assigned location")))?;
        open.push(frac.site_ids[cheapest]);
        for w in 0..n {
            if alive[w] && ball.iter().any(|&v| in_ball(w, v)) {
                alive[w] = false;
            }
        }
    }
    IntegralSolution::nearest(open, costs)
}
