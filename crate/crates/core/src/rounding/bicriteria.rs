use crate::error::{invalid, Result};
use crate::metric::MetricCache;
use crate::models::FractionalClustering;
use crate::rounding::filter::filter_points;
use crate::solution::IntegralSolution;

/// Opens the members of the filtered set with factor `2/epsilon` and assigns
/// every point to its nearest member. Each point ends within `(2/epsilon) R_u`
/// of a center, and at most `k/(1-epsilon)` centers open.
pub fn round_bicriteria(frac: &FractionalClustering, metric: &MetricCache, epsilon: f64) -> Result<IntegralSolution> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    let filtered = filter_points(frac, metric, 2.0 / epsilon);
    IntegralSolution::nearest(filtered.members, metric)
}
