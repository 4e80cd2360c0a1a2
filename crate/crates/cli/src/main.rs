use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use grouprep_cli::error::{CliError, Result};
use grouprep_cli::input::{load_csv, write_dataset_csv};
use grouprep_cli::report::{emit_report, write_output, Format};
use grouprep_cli::{run_experiment, ExperimentConfig};
use grouprep_core::generate::{gen_synthetic, propose_locations, SyntheticSpec};
use grouprep_core::pipeline::candidate_set;
use grouprep_core::rounding::DEFAULT_THETA;
use grouprep_core::{
    brute_force_facility_opt, brute_force_fair_opt, build_facility_lp, build_kmedian_lp, build_metric, run_facility,
    run_kmedian, CostKind, Dataset, DistanceMode, FacilityConfig, FacilityInstance, Fairness, KMedianConfig,
    KMedianVariant, Method, RelErrorCertificate,
};
use serde::Serialize;

/// Fair k-median and fair facility location by LP rounding and local search.
///
/// Coordinates are treated as planar points; latitude/longitude input is
/// used as-is, which is adequate at county scale.
#[derive(Parser)]
#[command(name = "grouprep", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write the two-group Gaussian dataset.
    GenSynthetic(GenArgs),
    /// Run one k-median method and report per-group costs.
    Kmedian(KmedianArgs),
    /// Solve and round fair facility location.
    Facility(FacilityArgs),
    /// Exhaustive optimum of a small instance.
    Oracle(OracleArgs),
    /// Repeated runs in the results-table layout, with an optional facility sweep.
    Experiment(ExperimentArgs),
}

#[derive(Args)]
struct Common {
    /// Base seed [default: 0; for `experiment`, the config file's seed].
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Replace an existing output file.
    #[arg(long)]
    force: bool,
}

impl Common {
    fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row. Without it the synthetic dataset is used.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "group")]
    group_column: String,
    /// Comma-separated feature columns.
    #[arg(long, value_delimiter = ',')]
    features: Vec<String>,
    #[arg(long, value_enum, default_value_t = Distance::Euclidean)]
    distance: Distance,
}

#[derive(Clone, Copy, ValueEnum)]
enum Distance {
    Euclidean,
    /// Squared distances (k-means); approximation factors are not asserted.
    Squared,
}

impl From<Distance> for DistanceMode {
    fn from(d: Distance) -> Self {
        match d {
            Distance::Euclidean => DistanceMode::Euclidean,
            Distance::Squared => DistanceMode::SquaredEuclidean,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Objective {
    Abs,
    Rel,
}

impl From<Objective> for CostKind {
    fn from(o: Objective) -> Self {
        match o {
            Objective::Abs => CostKind::Abs,
            Objective::Rel => CostKind::Rel,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum FairnessArg {
    PerGroup,
    Aggregate,
}

impl From<FairnessArg> for Fairness {
    fn from(f: FairnessArg) -> Self {
        match f {
            FairnessArg::PerGroup => Fairness::PerGroup,
            FairnessArg::Aggregate => Fairness::Aggregate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Standard,
    Weighted,
    LsFair,
    LpFairBicriteria,
    LpFairDependent,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Standard => Method::Standard,
            MethodArg::Weighted => Method::Weighted,
            MethodArg::LsFair => Method::LsFair,
            MethodArg::LpFairBicriteria => Method::LpFairBicriteria,
            MethodArg::LpFairDependent => Method::LpFairDependent,
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 250)]
    majority: usize,
    #[arg(long, default_value_t = 50)]
    minority: usize,
    #[arg(long, default_value_t = 0.0)]
    majority_mean: f64,
    #[arg(long, default_value_t = 3.0)]
    minority_mean: f64,
    #[arg(long, default_value_t = 0.5)]
    stddev: f64,
}

#[derive(Args)]
struct KmedianArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = MethodArg::LpFairDependent)]
    method: MethodArg,
    #[arg(long, value_enum, default_value_t = Objective::Abs)]
    objective: Objective,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Dependent-rounding draws; the best is kept.
    #[arg(long, default_value_t = 10)]
    draws: usize,
    /// Restrict centers to this many farthest-first points.
    #[arg(long)]
    candidates: Option<usize>,
    /// Write the LP in MPS format.
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Args)]
struct FacilityArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    /// Candidate locations proposed by farthest-first traversal.
    #[arg(long, default_value_t = 20)]
    locations: usize,
    #[arg(long, default_value_t = 1.0)]
    opening_cost: f64,
    #[arg(long)]
    capacity: Option<usize>,
    /// Filtering parameter; 0.75 uncapacitated, 0.1 capacitated by default.
    #[arg(long)]
    theta: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, value_enum, default_value_t = FairnessArg::PerGroup)]
    fairness: FairnessArg,
    /// Write the capacitated rounding trace as JSON.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    dump_lp: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value_t = Objective::Abs)]
    objective: Objective,
    /// Solve facility location with this many proposed locations instead.
    #[arg(long)]
    facility_locations: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    opening_cost: f64,
    #[arg(long)]
    capacity: Option<usize>,
    #[arg(long, value_enum, default_value_t = FairnessArg::PerGroup)]
    fairness: FairnessArg,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    common: Common,
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
}

fn load_data(args: &DataArgs, seed: u64) -> Result<Dataset> {
    match &args.input {
        Some(path) => {
            if args.features.is_empty() {
                return Err(CliError::Validation("--features is required with --input".into()));
            }
            load_csv(path, &args.group_column, &args.features)
        }
        None => Ok(gen_synthetic(seed, &SyntheticSpec::default())?),
    }
}

fn emit<T: Serialize>(value: &T, csv_rows: Option<Vec<Vec<String>>>, common: &Common) -> Result<()> {
    let text = match common.format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(value)
                .map_err(|e| CliError::Validation(format!("cannot encode output: {e}")))?;
            s.push('\n');
            s
        }
        Format::Csv => {
            let rows = csv_rows.ok_or_else(|| CliError::Validation("this output has no CSV form".into()))?;
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.write_record(&r).map_err(|e| CliError::Validation(e.to_string()))?;
            }
            String::from_utf8(w.into_inner().map_err(|e| CliError::Validation(e.to_string()))?)
                .map_err(|e| CliError::Validation(e.to_string()))?
        }
    };
    write_output(&text, common.out.as_deref(), common.force)
}

fn dump_lp(lp: &grouprep_lp::LinearProgram, path: &Path, force: bool) -> Result<()> {
    write_output(&grouprep_lp::to_mps(lp, "grouprep"), Some(path), force)
}

fn group_rows(dataset: &Dataset, averages: &[f64], label: &str) -> Vec<Vec<String>> {
    let mut rows = vec![vec!["method".into(), "group".into(), "size".into(), "avg_cost".into()]];
    for (g, avg) in averages.iter().enumerate() {
        rows.push(vec![
            label.to_string(),
            dataset.group_names()[g].clone(),
            dataset.group(g).len().to_string(),
            avg.to_string(),
        ]);
    }
    rows
}

fn gen_synthetic_cmd(a: &GenArgs) -> Result<()> {
    let spec = SyntheticSpec {
        majority_size: a.majority,
        minority_size: a.minority,
        majority_mean: a.majority_mean,
        minority_mean: a.minority_mean,
        stddev: a.stddev,
    };
    let d = gen_synthetic(a.common.seed(), &spec)?;
    match a.common.format {
        Format::Csv => {
            let mut buf = Vec::new();
            write_dataset_csv(&d, &mut buf)?;
            write_output(&String::from_utf8_lossy(&buf), a.common.out.as_deref(), a.common.force)
        }
        Format::Json => emit(&d, None, &a.common),
    }
}

fn kmedian_cmd(a: &KmedianArgs) -> Result<()> {
    let d = load_data(&a.data, a.common.seed())?;
    let metric = build_metric(&d, a.data.distance.into());
    let method: Method = a.method.into();
    let config = KMedianConfig {
        k: a.k,
        objective: a.objective.into(),
        epsilon: a.epsilon,
        draws: a.draws,
        candidates: a.candidates,
        seed: a.common.seed(),
    };
    let cert = match config.objective {
        CostKind::Rel => Some(RelErrorCertificate::compute(&d, &metric, a.k, a.common.seed())?),
        _ => None,
    };
    if let Some(path) = &a.dump_lp {
        let variant = match (method, config.objective) {
            (Method::Standard, _) => KMedianVariant::Standard,
            (Method::Weighted, _) => KMedianVariant::Weighted,
            (_, CostKind::Rel) => KMedianVariant::FairRel,
            _ => KMedianVariant::FairAbs,
        };
        let cands = candidate_set(&d, metric.mode(), &config);
        let model = build_kmedian_lp(variant, &d, &metric, a.k, cert.as_ref(), cands.as_deref())?;
        dump_lp(&model.lp, path, a.common.force)?;
    }
    let out = run_kmedian(&d, &metric, method, &config, cert.as_ref())?;
    let rows = group_rows(&d, &out.report.averages(), method.name());
    emit(&out, Some(rows), &a.common)
}

fn facility_instance(d: Dataset, locations: usize, opening: f64, capacity: Option<usize>, seed: u64) -> Result<FacilityInstance> {
    if locations == 0 || locations > d.len() {
        return Err(CliError::Validation(format!("--locations must lie in 1..={}", d.len())));
    }
    let locs = propose_locations(&d, locations, seed)?;
    Ok(FacilityInstance::new(d, locs, vec![opening; locations], capacity)?)
}

fn facility_cmd(a: &FacilityArgs) -> Result<()> {
    let d = load_data(&a.data, a.common.seed())?;
    let inst = facility_instance(d, a.locations, a.opening_cost, a.capacity, a.common.seed())?;
    let config = FacilityConfig {
        fairness: a.fairness.into(),
        capacitated: a.capacity.is_some(),
        theta: a.theta.unwrap_or(if a.capacity.is_some() { 0.1 } else { DEFAULT_THETA }),
        delta: a.delta,
        mode: a.data.distance.into(),
    };
    if let Some(path) = &a.dump_lp {
        let costs = inst.costs(config.mode);
        let model = build_facility_lp(&inst, &costs, config.fairness, config.capacitated)?;
        dump_lp(&model.lp, path, a.common.force)?;
    }
    let out = run_facility(&inst, &config)?;
    if let Some(path) = &a.trace {
        let trace = out
            .trace
            .as_ref()
            .ok_or_else(|| CliError::Validation("--trace needs --capacity".into()))?;
        let text = serde_json::to_string_pretty(trace).map_err(|e| CliError::Validation(e.to_string()))?;
        write_output(&text, Some(path), a.common.force)?;
    }
    let rows = group_rows(inst.clients(), &out.group_averages, "facility");
    emit(&out, Some(rows), &a.common)
}

#[derive(Serialize)]
struct OracleOutput {
    value: f64,
    centers: Vec<usize>,
}

fn oracle_cmd(a: &OracleArgs) -> Result<()> {
    let d = load_data(&a.data, a.common.seed())?;
    let (value, centers) = match a.facility_locations {
        Some(l) => {
            let inst = facility_instance(d, l, a.opening_cost, a.capacity, a.common.seed())?;
            let costs = inst.costs(a.data.distance.into());
            brute_force_facility_opt(&inst, &costs, a.fairness.into())?
        }
        None => {
            let metric = build_metric(&d, a.data.distance.into());
            let kind: CostKind = a.objective.into();
            let cert = match kind {
                CostKind::Rel => Some(RelErrorCertificate::compute(&d, &metric, a.k, a.common.seed())?),
                _ => None,
            };
            brute_force_fair_opt(&d, &metric, a.k, kind, cert.as_ref(), None)?
        }
    };
    let rows = vec![
        vec!["value".into(), "centers".into()],
        vec![value.to_string(), centers.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" ")],
    ];
    emit(&OracleOutput { value, centers }, Some(rows), &a.common)
}

fn experiment_cmd(a: &ExperimentArgs) -> Result<()> {
    let mut config = ExperimentConfig::load(&a.config)?;
    // A seed given on the command line overrides the file.
    if let Some(seed) = a.common.seed {
        config.seed = seed;
    }
    if let Some(p) = &a.common.out {
        if p.exists() && !a.common.force {
            return Err(CliError::Validation(format!("{} exists; pass --force to overwrite", p.display())));
        }
    }
    let report = run_experiment(&config)?;
    emit_report(&report, a.common.format, a.common.out.as_deref(), a.common.force)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match &cli.command {
        Command::GenSynthetic(a) => gen_synthetic_cmd(a),
        Command::Kmedian(a) => kmedian_cmd(a),
        Command::Facility(a) => facility_cmd(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Experiment(a) => experiment_cmd(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
