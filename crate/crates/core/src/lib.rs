//! Group-representative clustering: fair k-median and fair facility location
//! by LP rounding and local search.

pub mod error;
pub mod evaluation;
pub mod facility;
pub mod generate;
pub mod instance;
pub mod local_search;
pub mod metric;
pub mod models;
pub mod pipeline;
pub mod rounding;
pub mod seed;
pub mod solution;

pub use error::{CoreError, Result};
pub use evaluation::{
    brute_force_facility_opt, brute_force_fair_opt, fair_objective, faithfulness_probe, group_costs, CostKind,
    GroupReport, ProbeReport,
};
pub use facility::FacilityInstance;
pub use instance::{build_dataset, Dataset};
pub use local_search::{ls_fair, LocalSearchResult};
pub use metric::{build_metric, CostMatrix, DistanceMode, MetricCache, SiteDistance};
pub use models::{
    build_facility_lp, build_kmedian_lp, solve_model, Fairness, FractionalClustering, KMedianVariant, LpModel,
    RelErrorCertificate,
};
pub use pipeline::{run_facility, run_kmedian, FacilityConfig, FacilityOutcome, KMedianConfig, Method, MethodOutcome};
pub use solution::IntegralSolution;
