//! Rounding schemes from fractional LP solutions to integral ones.

pub mod bicriteria;
pub mod dependent;
pub mod faithful;
pub mod ffl;
pub mod filter;
pub mod transport;

pub use bicriteria::round_bicriteria;
pub use dependent::{round_dependent, Bundle, DependentOptions, DependentPlan};
pub use faithful::{round_facility_faithful, DEFAULT_THETA};
pub use ffl::{ffl_round, FflIteration, RoundingTrace};
pub use filter::{filter_by_radii, filter_points, FilteredSet};
pub use transport::transportation_assign;

/// Slack for comparisons of distances against radii.
pub(crate) fn radius_tol(r: f64) -> f64 {
    1e-12 * (1.0 + r.abs())
}
