pub mod costs;
pub mod oracle;
pub mod probe;

pub use costs::{fair_objective, group_costs, CostKind, GroupCost, GroupReport};
pub use oracle::{brute_force_facility_opt, brute_force_fair_opt, facility_objective};
pub use probe::{faithfulness_probe, Estimate, ProbeReport};
