use serde::{Deserialize, Serialize};

use crate::metric::MetricCache;
use crate::models::FractionalClustering;

/// Well-separated points selected greedily by increasing fractional
/// connection cost.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FilteredSet {
    /// Selected points in selection order.
    pub members: Vec<usize>,
    /// `R_u` of every point.
    pub radii: Vec<f64>,
    /// For each point removed by a member, that member.
    pub removed_by: Vec<Option<usize>>,
}

impl FilteredSet {
    pub fn contains(&self, u: usize) -> bool {
        self.members.contains(&u)
    }
}

pub fn filter_points(frac: &FractionalClustering, metric: &MetricCache, removal_factor: f64) -> FilteredSet {
    filter_by_radii(frac.radii(metric), metric, removal_factor)
}

/// Scans points by `(R_u, u)`. Each point still present joins the set and
/// removes every remaining `v` with `d(u, v) <= removal_factor * R_v`.
pub fn filter_by_radii(radii: Vec<f64>, metric: &MetricCache, removal_factor: f64) -> FilteredSet {
    let n = radii.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| radii[a].total_cmp(&radii[b]).then(a.cmp(&b)));
    let mut alive = vec![true; n];
    let mut removed_by = vec![None; n];
    let mut members = Vec::new();
    for &u in &order {
        if !alive[u] {
            continue;
        }
        alive[u] = false;
        members.push(u);
        for v in 0..n {
            if alive[v] && metric.d(u, v) <= removal_factor * radii[v] {
                alive[v] = false;
                removed_by[v] = Some(u);
            }
        }
    }
    FilteredSet {
        members,
        radii,
        removed_by,
    }
}
