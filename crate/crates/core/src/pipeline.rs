//! End-to-end methods: LP or local search, rounding, and group costs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, CoreError, Result};
use crate::evaluation::costs::{fair_objective, group_costs, CostKind, GroupReport};
use crate::evaluation::oracle::facility_objective;
use crate::facility::FacilityInstance;
use crate::generate::farthest_first;
use crate::instance::Dataset;
use crate::local_search::ls_fair;
use crate::metric::{DistanceMode, MetricCache};
use crate::models::{build_facility_lp, build_kmedian_lp, solve_model, Fairness, KMedianVariant, RelErrorCertificate};
use crate::rounding::dependent::{plan_dependent, round_with_plan, DependentOptions};
use crate::rounding::{ffl_round, round_bicriteria, round_facility_faithful, RoundingTrace};
use crate::seed::{derive_indexed, derive_seed};
use crate::solution::IntegralSolution;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Standard,
    Weighted,
    LsFair,
    LpFairBicriteria,
    LpFairDependent,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Standard,
        Method::Weighted,
        Method::LsFair,
        Method::LpFairBicriteria,
        Method::LpFairDependent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Standard => "standard",
            Method::Weighted => "weighted",
            Method::LsFair => "ls-fair",
            Method::LpFairBicriteria => "lp-fair-bicriteria",
            Method::LpFairDependent => "lp-fair-dependent",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| invalid(format!("unknown method {s:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KMedianConfig {
    pub k: usize,
    /// `Abs` or `Rel`; `Rel` needs a certificate.
    pub objective: CostKind,
    /// Bicriteria parameter.
    pub epsilon: f64,
    /// Dependent-rounding draws; the best one is kept.
    pub draws: usize,
    /// Restrict centers to this many farthest-first points.
    pub candidates: Option<usize>,
    pub seed: u64,
}

impl Default for KMedianConfig {
    fn default() -> Self {
        KMedianConfig {
            k: 3,
            objective: CostKind::Abs,
            epsilon: 0.5,
            draws: 10,
            candidates: None,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub solution: IntegralSolution,
    pub report: GroupReport,
    /// Fair objective of the solution under the configured cost kind.
    pub objective: f64,
    pub lp_value: Option<f64>,
}

/// Candidate centers for `config`, or `None` for all points.
pub fn candidate_set(dataset: &Dataset, mode: DistanceMode, config: &KMedianConfig) -> Option<Vec<usize>> {
    config
        .candidates
        .filter(|&t| t < dataset.len())
        .map(|t| farthest_first(dataset.points(), t, 0, mode))
}

pub fn run_kmedian(
    dataset: &Dataset,
    metric: &MetricCache,
    method: Method,
    config: &KMedianConfig,
    certificate: Option<&RelErrorCertificate>,
) -> Result<MethodOutcome> {
    if config.objective == CostKind::AbsTotal {
        return Err(invalid("k-median methods take the abs or rel objective"));
    }
    if config.draws == 0 {
        return Err(invalid("draws must be at least 1"));
    }
    let kind = config.objective;
    let cert = if kind == CostKind::Rel {
        Some(certificate.ok_or_else(|| invalid("rel objective needs a certificate"))?)
    } else {
        None
    };
    let candidates = candidate_set(dataset, metric.mode(), config);
    let cands = candidates.as_deref();
    let seed = derive_seed(config.seed, method.name());
    let score = |s: &IntegralSolution, by: &dyn Fn(&GroupReport) -> f64| -> Result<(f64, GroupReport)> {
        let report = group_costs(dataset, s, kind, cert)?;
        Ok((by(&report), report))
    };
    let fair = |r: &GroupReport| fair_objective(r).unwrap_or(f64::INFINITY);

    let (solution, lp_value) = match method {
        Method::LsFair => {
            let r = ls_fair(dataset, metric, config.k, kind, cert, seed, None, cands)?;
            (r.solution, None)
        }
        _ => {
            let variant = match method {
                Method::Standard => KMedianVariant::Standard,
                Method::Weighted => KMedianVariant::Weighted,
                _ if kind == CostKind::Rel => KMedianVariant::FairRel,
                _ => KMedianVariant::FairAbs,
            };
            let model = build_kmedian_lp(variant, dataset, metric, config.k, cert, cands)?;
            let frac = solve_model(&model)?;
            if method == Method::LpFairBicriteria {
                (round_bicriteria(&frac, metric, config.epsilon)?, Some(frac.lambda))
            } else {
                // Draws are ranked by the objective the LP optimised.
                let rank: Box<dyn Fn(&GroupReport) -> f64> = match method {
                    Method::Standard => Box::new(|r: &GroupReport| r.groups.iter().map(|g| g.total).sum()),
                    Method::Weighted => Box::new(|r: &GroupReport| r.groups.iter().map(|g| g.average).sum()),
                    _ => Box::new(fair),
                };
                let plan = plan_dependent(&frac, metric)?;
                let opts = DependentOptions { exact_k: true, ..Default::default() };
                let mut best: Option<(f64, IntegralSolution)> = None;
                for d in 0..config.draws {
                    let s = round_with_plan(&plan, &frac, metric, config.k, derive_indexed(seed, d as u64), opts)?;
                    let (v, _) = score(&s, &*rank)?;
                    if best.as_ref().is_none_or(|b| v < b.0) {
                        best = Some((v, s));
                    }
                }
                (best.expect("at least one draw").1, Some(frac.lambda))
            }
        }
    };
    let (objective, report) = score(&solution, &fair)?;
    Ok(MethodOutcome {
        method,
        solution,
        report,
        objective,
        lp_value,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacilityConfig {
    pub fairness: Fairness,
    pub capacitated: bool,
    pub theta: f64,
    pub delta: f64,
    pub mode: DistanceMode,
}

impl Default for FacilityConfig {
    fn default() -> Self {
        FacilityConfig {
            fairness: Fairness::PerGroup,
            capacitated: false,
            theta: crate::rounding::DEFAULT_THETA,
            delta: 0.1,
            mode: DistanceMode::Euclidean,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacilityOutcome {
    pub solution: IntegralSolution,
    pub lp_value: f64,
    /// LP opening term `(1/|X|) sum f_v y_v`.
    pub lp_opening: f64,
    pub lp_lambda: f64,
    pub objective: f64,
    /// `(1/|X|) sum` of opened costs.
    pub opening: f64,
    /// Average distance per group, in group order.
    pub group_averages: Vec<f64>,
    pub trace: Option<RoundingTrace>,
}

pub fn run_facility(instance: &FacilityInstance, config: &FacilityConfig) -> Result<FacilityOutcome> {
    let costs = instance.costs(config.mode);
    let model = build_facility_lp(instance, &costs, config.fairness, config.capacitated)?;
    let frac = solve_model(&model)?;
    let n = instance.clients().len() as f64;
    let lp_opening: f64 = frac.y.iter().zip(instance.opening_costs()).map(|(y, f)| y * f).sum::<f64>() / n;
    let (solution, trace) = if config.capacitated {
        let (s, t) = ffl_round(&frac, instance, &costs, config.theta, config.delta)?;
        (s, Some(t))
    } else {
        (round_facility_faithful(&frac, instance, &costs, config.theta)?, None)
    };
    let group_averages = instance
        .clients()
        .groups()
        .iter()
        .map(|g| g.iter().map(|&u| solution.connection[u]).sum::<f64>() / g.len() as f64)
        .collect();
    Ok(FacilityOutcome {
        objective: facility_objective(instance, config.fairness, &solution.centers, &solution.connection),
        opening: instance.opening_cost_of(&solution.centers) / n,
        lp_value: frac.objective,
        lp_opening,
        lp_lambda: frac.lambda,
        solution,
        group_averages,
        trace,
    })
}
