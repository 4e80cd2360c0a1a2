//! Repeated k-median runs in the results-table layout, and the facility
//! opening-cost sweep.

use std::time::Instant;

use grouprep_core::generate::{gen_synthetic, propose_locations};
use grouprep_core::models::group_kmedian_approx;
use grouprep_core::rounding::DEFAULT_THETA;
use grouprep_core::seed::{derive_seed, rng};
use grouprep_core::{
    build_metric, run_facility, run_kmedian, CostKind, Dataset, DistanceMode, FacilityConfig, FacilityInstance,
    KMedianConfig, Method, RelErrorCertificate,
};
use rand::seq::index::sample;
use rayon::prelude::*;

use crate::config::{DataSource, ExperimentConfig, FacilitySweep};
use crate::error::{validation, CliError, Result};
use crate::input::load_csv;
use crate::report::{percentage, CellRecord, ExperimentReport, ReportRow, SweepPoint, GROUP_OPTIMAL};

/// Draws the configured per-group subsample without replacement. Indices
/// keep their original order.
pub fn subsample(dataset: &Dataset, sizes: &[crate::config::GroupSample], seed: u64) -> Result<Dataset> {
    if sizes.is_empty() {
        return Ok(dataset.clone());
    }
    let mut chosen = Vec::new();
    for s in sizes {
        let g = dataset
            .group_id(&s.group)
            .ok_or_else(|| validation(format!("no group named {:?} in the data", s.group)))?;
        let members = dataset.group(g);
        if s.size == 0 || s.size > members.len() {
            return Err(validation(format!(
                "cannot sample {} points from group {:?} of size {}",
                s.size,
                s.group,
                members.len()
            )));
        }
        let mut r = rng(derive_seed(seed, &s.group));
        chosen.extend(sample(&mut r, members.len(), s.size).into_iter().map(|i| members[i]));
    }
    chosen.sort_unstable();
    Ok(dataset.subset(&chosen)?)
}

/// The dataset of repetition `rep`.
fn repetition_data(config: &ExperimentConfig, base: Option<&Dataset>, rep: usize) -> Result<Dataset> {
    let seed = derive_seed(config.seed, &format!("rep{rep}/data"));
    let full = match (&config.source, base) {
        (DataSource::Synthetic { spec }, _) => gen_synthetic(seed, spec)?,
        (DataSource::Csv { .. }, Some(d)) => d.clone(),
        (DataSource::Csv { .. }, None) => unreachable!("csv data is loaded up front"),
    };
    subsample(&full, &config.sample, derive_seed(seed, "sample"))
}

struct Cell {
    method: Option<Method>,
    rep: usize,
}

impl Cell {
    fn label(&self) -> String {
        let m = self.method.map_or(GROUP_OPTIMAL, Method::name);
        format!("rep{}/{m}", self.rep)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let base = match &config.source {
        DataSource::Csv {
            path,
            group_column,
            feature_columns,
        } => Some(load_csv(path, group_column, feature_columns)?),
        DataSource::Synthetic { .. } => None,
    };
    let data = (0..config.repetitions)
        .map(|r| repetition_data(config, base.as_ref(), r))
        .collect::<Result<Vec<_>>>()?;
    let groups = data[0].group_names().to_vec();
    if let Some(r) = data.iter().position(|d| d.group_names() != groups.as_slice()) {
        return Err(validation(format!("repetition {r} has different groups than repetition 0")));
    }
    let metrics: Vec<_> = data.par_iter().map(|d| build_metric(d, DistanceMode::Euclidean)).collect();

    // Group-optimal cells come first; relative objectives need them.
    let group_opt: Vec<(Vec<f64>, CellRecord)> = (0..config.repetitions)
        .into_par_iter()
        .map(|rep| -> Result<_> {
            let cell = Cell { method: None, rep };
            let label = cell.label();
            let seed = derive_seed(config.seed, &label);
            let start = Instant::now();
            let totals = (0..groups.len())
                .map(|g| group_kmedian_approx(&data[rep], &metrics[rep], g, config.k, derive_seed(seed, &groups[g])))
                .collect::<grouprep_core::Result<Vec<f64>>>()
                .map_err(|e| CliError::from(e).in_cell(&label))?;
            let averages: Vec<f64> = totals.iter().zip(data[rep].groups()).map(|(t, g)| t / g.len() as f64).collect();
            let record = CellRecord {
                cell: label,
                repetition: rep,
                method: GROUP_OPTIMAL.into(),
                seed,
                group_averages: averages,
                objective: None,
                wall_ms: config.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
            };
            Ok((totals, record))
        })
        .collect::<Result<_>>()?;

    let mut methods = vec![Method::Standard];
    methods.extend(config.methods.iter().copied().filter(|&m| m != Method::Standard));
    let cells: Vec<Cell> = (0..config.repetitions)
        .flat_map(|rep| methods.iter().map(move |&m| Cell { method: Some(m), rep }))
        .collect();
    let records: Vec<CellRecord> = cells
        .par_iter()
        .map(|cell| -> Result<CellRecord> {
            let label = cell.label();
            let method = cell.method.expect("method cell");
            let seed = derive_seed(config.seed, &label);
            let kconfig = KMedianConfig {
                k: config.k,
                objective: config.objective,
                epsilon: config.epsilon,
                draws: config.draws,
                candidates: config.candidates,
                seed,
            };
            let start = Instant::now();
            let cert = if config.objective == CostKind::Rel {
                Some(
                    RelErrorCertificate::new(group_opt[cell.rep].0.clone(), "group-optimal cell")
                        .map_err(|e| CliError::from(e).in_cell(&label))?,
                )
            } else {
                None
            };
            let out = run_kmedian(&data[cell.rep], &metrics[cell.rep], method, &kconfig, cert.as_ref())
                .map_err(|e| CliError::from(e).in_cell(&label))?;
            Ok(CellRecord {
                cell: label,
                repetition: cell.rep,
                method: method.name().into(),
                seed,
                group_averages: out.report.averages(),
                objective: Some(out.report.max_average),
                wall_ms: config.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect::<Result<_>>()?;

    let mean_of = |recs: &[&CellRecord], g: usize| recs.iter().map(|r| r.group_averages[g]).sum::<f64>() / recs.len() as f64;
    let opt_recs: Vec<&CellRecord> = group_opt.iter().map(|(_, r)| r).collect();
    let std_recs: Vec<&CellRecord> = records.iter().filter(|r| r.method == Method::Standard.name()).collect();
    let mut rows = Vec::new();
    let mut push_rows = |name: &str, recs: &[&CellRecord]| {
        for (g, group) in groups.iter().enumerate() {
            let avg = mean_of(recs, g);
            rows.push(ReportRow {
                method: name.to_string(),
                group: group.clone(),
                avg_cost: avg,
                pct_vs_standard: percentage(avg, mean_of(&std_recs, g)),
                pct_vs_group_opt: percentage(avg, mean_of(&opt_recs, g)),
                seed_count: recs.len(),
            });
        }
    };
    push_rows(GROUP_OPTIMAL, &opt_recs);
    for m in &methods {
        let recs: Vec<&CellRecord> = records.iter().filter(|r| r.method == m.name()).collect();
        push_rows(m.name(), &recs);
    }

    let sweep = match &config.facility {
        Some(f) => run_sweep(&data[0], f, config.seed)?,
        None => Vec::new(),
    };
    let mut cells: Vec<CellRecord> = opt_recs.into_iter().cloned().collect();
    cells.extend(records);
    Ok(ExperimentReport {
        k: config.k,
        objective: config.objective,
        repetitions: config.repetitions,
        seed: config.seed,
        groups,
        rows,
        cells,
        sweep,
    })
}

/// Fair and aggregate facility location at every opening cost of the grid,
/// on locations proposed from `dataset`.
pub fn run_sweep(dataset: &Dataset, sweep: &FacilitySweep, seed: u64) -> Result<Vec<SweepPoint>> {
    if sweep.locations > dataset.len() {
        return Err(validation(format!(
            "{} locations requested from {} points",
            sweep.locations,
            dataset.len()
        )));
    }
    let locations = propose_locations(dataset, sweep.locations, derive_seed(seed, "locations"))?;
    let theta = sweep
        .theta
        .unwrap_or(if sweep.capacity.is_some() { 0.1 } else { DEFAULT_THETA });
    let points: Vec<(f64, grouprep_core::Fairness)> = sweep
        .opening_costs
        .iter()
        .flat_map(|&f| sweep.fairness.iter().map(move |&m| (f, m)))
        .collect();
    points
        .par_iter()
        .map(|&(f, fairness)| -> Result<SweepPoint> {
            let label = format!("facility/f={f}/{fairness:?}");
            let instance =
                FacilityInstance::new(dataset.clone(), locations.clone(), vec![f; locations.len()], sweep.capacity)?;
            let config = FacilityConfig {
                fairness,
                capacitated: sweep.capacity.is_some(),
                theta,
                delta: sweep.delta,
                mode: DistanceMode::Euclidean,
            };
            let out = run_facility(&instance, &config).map_err(|e| CliError::from(e).in_cell(&label))?;
            Ok(SweepPoint {
                opening_cost: f,
                fairness,
                capacity: sweep.capacity,
                opened: out.solution.centers.len(),
                lp_value: out.lp_value,
                objective: out.objective,
                opening: out.opening,
                max_average: out.group_averages.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                group_averages: out.group_averages,
            })
        })
        .collect()
}
