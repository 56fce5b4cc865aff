//! Command-line front end.
//!
//! | status | meaning                                   |
//! |--------|-------------------------------------------|
//! | 0      | success                                   |
//! | 2      | usage error, conflicting flags, bad scheme |
//! | 3      | config file missing or unreadable         |
//! | 4      | config parse error                        |
//! | 5      | unknown config key                        |
//! | 6      | config value out of range                 |
//! | 7      | output could not be written               |
//! | 8      | a trial failed                            |
//! | 9      | oracle check failed                       |

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::config::{parse_config, ScenarioConfig};
use crate::error::{ConfigError, Error, Result};
use crate::experiment::{
    run_trials, sweep, trial_rng, Scheme, SchemeAggregate, StreamRole, TrialRecord,
};
use crate::inner::{solve_inner, SolverSettings};
use crate::matching::{
    enumerate_optimal, feasible_assignments, find_blocking, slj_match, Evaluator, SljSettings,
};
use crate::oracle::{inner_utility, GridSpec};
use crate::Realization;

pub const VERSION: &str = concat!(env!("CARGO_PKG_NAME"), " ", env!("CARGO_PKG_VERSION"));

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG_MISSING: i32 = 3;
pub const EXIT_CONFIG_PARSE: i32 = 4;
pub const EXIT_UNKNOWN_KEY: i32 = 5;
pub const EXIT_RANGE: i32 = 6;
pub const EXIT_OUTPUT: i32 = 7;
pub const EXIT_TRIAL: i32 = 8;
pub const EXIT_ORACLE: i32 = 9;

#[derive(Debug, Parser)]
#[command(
    name = "gensemcom",
    version,
    about = "Prompt-generation offloading simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run trials for one scheme or all of them.
    Run(Common),
    /// Vary one config key over a list of values.
    Sweep {
        /// `KEY=v1,v2,...`, alternative to `--sweep`.
        spec: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Per-scheme latency/CIDEr summary of all four schemes.
    Compare(Common),
    /// Check the solvers against brute-force oracles on small instances.
    OracleCheck(Common),
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    sweep: Option<String>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Lib(Error),
    Oracle(usize),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Lib(e.into())
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(ConfigError::Missing { .. }) => EXIT_CONFIG_MISSING,
        Error::Config(ConfigError::Parse { .. }) => EXIT_CONFIG_PARSE,
        Error::Config(ConfigError::UnknownKey { .. }) => EXIT_UNKNOWN_KEY,
        Error::Config(ConfigError::Range { .. }) => EXIT_RANGE,
        Error::UnknownScheme(_) => EXIT_USAGE,
        Error::Output(_) | Error::Io(_) => EXIT_OUTPUT,
        _ => EXIT_TRIAL,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status. Diagnostics go to stderr, tables to stdout.
pub fn run_command<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
        Err(Failure::Oracle(n)) => {
            eprintln!("error: {n} oracle check(s) failed");
            EXIT_ORACLE
        }
    }
}

fn load(common: &Common) -> Result<ScenarioConfig, Failure> {
    let mut config = match &common.config {
        Some(path) => parse_config(path)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = common.seed {
        config.experiment.seed = seed;
    }
    if let Some(trials) = common.trials {
        config.experiment.trials = trials;
    }
    config.validate()?;
    Ok(config)
}

fn schemes(common: &Common) -> Result<Vec<Scheme>, Failure> {
    match &common.scheme {
        None => Ok(Scheme::ALL.to_vec()),
        Some(s) if s == "all" => Ok(Scheme::ALL.to_vec()),
        Some(s) => Ok(vec![s.parse::<Scheme>()?]),
    }
}

fn reject(cond: bool, msg: &str) -> Result<(), Failure> {
    if cond {
        Err(Failure::Usage(msg.to_string()))
    } else {
        Ok(())
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run(c) => {
            reject(
                c.sweep.is_some(),
                "--sweep is only valid with the `sweep` command",
            )?;
            let config = load(&c)?;
            let schemes = schemes(&c)?;
            let result = run_trials(&config, &schemes)?;
            let dir = prepare_out(&c.out)?;
            write_results_csv(
                &dir.join("results.csv"),
                &result.records,
                config.transmitters,
            )?;
            write_summary(
                &dir.join("summary.json"),
                &Summary::new("run", &config, result.aggregates, None),
            )?;
            Ok(())
        }
        Command::Compare(c) => {
            reject(
                c.sweep.is_some(),
                "--sweep is only valid with the `sweep` command",
            )?;
            reject(
                c.scheme.is_some(),
                "`compare` always runs every scheme; drop --scheme",
            )?;
            let config = load(&c)?;
            let result = run_trials(&config, &Scheme::ALL)?;
            let dir = prepare_out(&c.out)?;
            write_results_csv(
                &dir.join("results.csv"),
                &result.records,
                config.transmitters,
            )?;
            print_comparison(&result.aggregates);
            write_summary(
                &dir.join("summary.json"),
                &Summary::new("compare", &config, result.aggregates, None),
            )?;
            Ok(())
        }
        Command::Sweep { spec, common: c } => {
            let spec = match (spec, &c.sweep) {
                (Some(_), Some(_)) => {
                    return Err(Failure::Usage(
                        "sweep given both positionally and via --sweep".into(),
                    ))
                }
                (None, None) => return Err(Failure::Usage("`sweep` needs KEY=v1,v2,...".into())),
                (Some(s), None) => s,
                (None, Some(s)) => s.clone(),
            };
            let (key, values) = parse_sweep(&spec)?;
            let config = load(&c)?;
            let schemes = schemes(&c)?;
            let points = sweep(&config, &key, &values, &schemes)?;
            let dir = prepare_out(&c.out)?;
            write_sweep_csv(&dir.join("sweep.csv"), &points)?;
            let summary = Summary::new(
                "sweep",
                &config,
                Vec::new(),
                Some(SweepSummary {
                    key,
                    points: points
                        .into_iter()
                        .map(|p| SweepPointSummary {
                            value: p.value,
                            schemes: p.aggregates,
                        })
                        .collect(),
                }),
            );
            write_summary(&dir.join("summary.json"), &summary)?;
            Ok(())
        }
        Command::OracleCheck(c) => {
            reject(
                c.sweep.is_some(),
                "--sweep is only valid with the `sweep` command",
            )?;
            reject(c.scheme.is_some(), "`oracle-check` takes no --scheme")?;
            let config = load(&c)?;
            let failed = oracle_check(&config, c.trials.unwrap_or(20));
            if failed > 0 {
                Err(Failure::Oracle(failed))
            } else {
                Ok(())
            }
        }
    }
}

fn parse_sweep(spec: &str) -> Result<(String, Vec<String>), Failure> {
    let (key, values) = spec
        .split_once('=')
        .ok_or_else(|| Failure::Usage(format!("sweep spec `{spec}` is not KEY=v1,v2,...")))?;
    let values: Vec<String> = values.split(',').map(|v| v.trim().to_string()).collect();
    if key.trim().is_empty() || values.iter().any(String::is_empty) {
        return Err(Failure::Usage(format!(
            "sweep spec `{spec}` is not KEY=v1,v2,..."
        )));
    }
    Ok((key.trim().to_string(), values))
}

fn prepare_out(dir: &Path) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir)
        .map_err(|e| Error::Output(format!("cannot create {}: {e}", dir.display())))?;
    Ok(dir.to_path_buf())
}

/// Locale-independent float text: Rust's shortest round-trip form, `inf`
/// for unbounded values and an empty field for undefined ones.
fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x}")
    }
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Output(format!("{}: {e}", path.display()))
}

/// `trial,scheme,max_ccq,max_latency,min_cider,offloaded_count,ccq_0..ccq_{N-1}`.
pub fn write_results_csv(path: &Path, records: &[TrialRecord], transmitters: usize) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| output_err(path, e))?;
    let mut header: Vec<String> = [
        "trial",
        "scheme",
        "max_ccq",
        "max_latency",
        "min_cider",
        "offloaded_count",
    ]
    .iter()
    .map(|s| s.to_string())
    .collect();
    header.extend((0..transmitters).map(|n| format!("ccq_{n}")));
    w.write_record(&header).map_err(|e| output_err(path, e))?;
    for rec in records {
        for s in &rec.schemes {
            let mut row = vec![
                rec.trial.to_string(),
                s.scheme.to_string(),
                num(s.max_ccq),
                num(s.max_latency),
                num(s.min_cider),
                s.offloaded.to_string(),
            ];
            row.extend(
                (0..transmitters).map(|n| s.pair_ccq.get(n).map_or(String::new(), |&v| num(v))),
            );
            w.write_record(&row).map_err(|e| output_err(path, e))?;
        }
    }
    w.flush().map_err(|e| output_err(path, e))
}

pub const SWEEP_HEADER: [&str; 12] = [
    "key",
    "value",
    "scheme",
    "trials",
    "feasible_trials",
    "mean_max_ccq",
    "max_max_ccq",
    "mean_max_latency",
    "mean_cider",
    "mean_offloaded",
    "pair_ccq_mean",
    "pair_ccq_variance",
];

pub fn write_sweep_csv(path: &Path, points: &[crate::experiment::SweepPoint]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| output_err(path, e))?;
    w.write_record(SWEEP_HEADER)
        .map_err(|e| output_err(path, e))?;
    for p in points {
        for a in &p.aggregates {
            w.write_record([
                p.key.clone(),
                p.value.clone(),
                a.scheme.to_string(),
                a.trials.to_string(),
                a.feasible_trials.to_string(),
                num(a.mean_max_ccq),
                num(a.max_max_ccq),
                num(a.mean_max_latency),
                num(a.mean_cider),
                num(a.mean_offloaded),
                num(a.pair_ccq_mean),
                num(a.pair_ccq_variance),
            ])
            .map_err(|e| output_err(path, e))?;
        }
    }
    w.flush().map_err(|e| output_err(path, e))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub command: String,
    pub seed: u64,
    pub trials: usize,
    #[serde(with = "aggregates")]
    pub schemes: Vec<SchemeAggregate>,
    pub sweep: Option<SweepSummary>,
    pub config: ScenarioConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub key: String,
    pub points: Vec<SweepPointSummary>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPointSummary {
    pub value: String,
    #[serde(with = "aggregates")]
    pub schemes: Vec<SchemeAggregate>,
}

impl Summary {
    fn new(
        command: &str,
        config: &ScenarioConfig,
        schemes: Vec<SchemeAggregate>,
        sweep: Option<SweepSummary>,
    ) -> Self {
        Self {
            version: VERSION.to_string(),
            command: command.to_string(),
            seed: config.experiment.seed,
            trials: config.experiment.trials,
            schemes,
            sweep,
            config: config.clone(),
        }
    }
}

/// Aggregates with undefined statistics (no feasible trial) are written
/// with `null` in place of NaN and read back as NaN.
mod aggregates {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[SchemeAggregate], s: S) -> Result<S::Ok, S::Error> {
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<SchemeAggregate>, D::Error> {
        let raw: Vec<Raw> = Vec::deserialize(d)?;
        Ok(raw.into_iter().map(Raw::into_aggregate).collect())
    }

    #[derive(Deserialize)]
    struct Raw {
        scheme: Scheme,
        trials: usize,
        feasible_trials: usize,
        infeasible_trials: usize,
        mean_max_ccq: Option<f64>,
        max_max_ccq: Option<f64>,
        mean_max_latency: Option<f64>,
        mean_cider: Option<f64>,
        mean_max_cider: Option<f64>,
        mean_min_cider: Option<f64>,
        mean_offloaded: Option<f64>,
        pair_ccq_mean: Option<f64>,
        pair_ccq_variance: Option<f64>,
    }
    impl Raw {
        fn into_aggregate(self) -> SchemeAggregate {
            let r = self;
            let f = |x: Option<f64>| x.unwrap_or(f64::NAN);
            SchemeAggregate {
                scheme: r.scheme,
                trials: r.trials,
                feasible_trials: r.feasible_trials,
                infeasible_trials: r.infeasible_trials,
                mean_max_ccq: f(r.mean_max_ccq),
                max_max_ccq: f(r.max_max_ccq),
                mean_max_latency: f(r.mean_max_latency),
                mean_cider: f(r.mean_cider),
                mean_max_cider: f(r.mean_max_cider),
                mean_min_cider: f(r.mean_min_cider),
                mean_offloaded: f(r.mean_offloaded),
                pair_ccq_mean: f(r.pair_ccq_mean),
                pair_ccq_variance: f(r.pair_ccq_variance),
            }
        }
    }
}

pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let mut text = serde_json::to_string_pretty(summary).map_err(|e| output_err(path, e))?;
    text.push('\n');
    let mut f = fs::File::create(path).map_err(|e| output_err(path, e))?;
    f.write_all(text.as_bytes())
        .map_err(|e| output_err(path, e))
}

pub fn read_summary(path: &Path) -> Result<Summary> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| output_err(path, e))
}

fn print_comparison(aggs: &[SchemeAggregate]) {
    println!(
        "{:<9} {:>16} {:>12} {:>14} {:>10}",
        "scheme", "mean_max_lat_s", "mean_cider", "mean_max_ccq", "feasible"
    );
    for a in aggs {
        println!(
            "{:<9} {:>16.6} {:>12.3} {:>14.6e} {:>6}/{}",
            a.scheme.name(),
            a.mean_max_latency,
            a.mean_cider,
            a.mean_max_ccq,
            a.feasible_trials,
            a.trials
        );
    }
}

/// Runs the small-instance oracle suites and prints one line per suite.
/// Returns the number of failed suites.
pub fn oracle_check(config: &ScenarioConfig, instances: usize) -> usize {
    let settings = SolverSettings::from_config(&config.solver);
    let seed = config.experiment.seed;

    let mut small = config.clone();
    small.transmitters = 2;
    small.servers = 1;
    small.server_capacity = small.server_capacity.max(2);
    let spec = GridSpec::default();
    let (mut checked, mut worst, mut bad) = (0usize, 0f64, 0usize);
    for t in 0..instances as u64 {
        let Ok(net) = crate::experiment::build_realization::<f64, _>(
            &small,
            &mut trial_rng(seed, t, StreamRole::Realization),
        ) else {
            bad += 1;
            continue;
        };
        for a in feasible_assignments(&net) {
            let solved = solve_inner(&a, &net, &settings);
            match (solved.is_optimal(), inner_utility(&a, &net, &spec)) {
                (true, Some(grid)) => {
                    let gap = (solved.utility - grid) / grid;
                    worst = worst.max(gap.abs());
                    if gap.abs() > 0.015 {
                        bad += 1;
                    }
                }
                (false, None) => {}
                _ => bad += 1,
            }
            checked += 1;
        }
    }
    let mut failed = 0;
    report(
        &mut failed,
        bad == 0,
        &format!("inner solver vs grid: {checked} assignments, worst relative gap {worst:.3e}"),
    );

    let mut three = config.clone();
    three.transmitters = 3;
    three.servers = 3;
    let slj = SljSettings {
        solver: settings,
        restarts: config.matching.restarts,
        operation_cap: None,
    };
    let (mut stable, mut dominated, mut close, mut count) = (true, true, 0usize, 0usize);
    for t in 0..instances.min(20) as u64 {
        let Ok(net): std::result::Result<Realization, _> = crate::experiment::build_realization(
            &three,
            &mut trial_rng(seed, t, StreamRole::Realization),
        ) else {
            stable = false;
            continue;
        };
        let eval = Evaluator::new(&net, settings);
        let out = slj_match(
            &net,
            &slj,
            &mut trial_rng(seed, t, StreamRole::Matching),
        );
        stable &= find_blocking(&out.matching, &eval).is_none();
        match enumerate_optimal(&eval, config.matching.enumeration_cap) {
            Ok(best) => {
                dominated &= best.utility() <= out.matching.utility();
                if out.matching.utility() <= 1.10 * best.utility() {
                    close += 1;
                }
            }
            Err(_) => dominated = false,
        }
        count += 1;
    }
    report(
        &mut failed,
        stable,
        &format!("matching stability on {count} realizations"),
    );
    report(
        &mut failed,
        dominated,
        "enumeration never worse than matching",
    );
    report(
        &mut failed,
        close * 10 >= count * 9,
        &format!("matching within 10% of enumeration on {close}/{count}"),
    );
    failed
}

fn report(failed: &mut usize, ok: bool, what: &str) {
    println!("{} {what}", if ok { "PASS" } else { "FAIL" });
    if !ok {
        *failed += 1;
    }
}
