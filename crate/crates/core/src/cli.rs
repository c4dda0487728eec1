//! The `cplr` command line.
//!
//! Option values are resolved as: command-line flag, then the `--config`
//! file (plain `key = value` lines, keys spelled like the long flags), then
//! the `CPLR_WORKERS` environment variable (worker count only), then the
//! built-in default.
//!
//! Exit codes: 0 on success, 1 on a numerical or verification failure,
//! 2 on a usage error.

use crate::densities::JumpDensity;
use crate::functionals::EstimatorTriple;
use crate::montecarlo::{
    replicate, run_replication, run_sweep_with_progress, RunSettings, SweepConfig,
};
use crate::path::{sample_two_sided, TruncationPolicy, DEFAULT_GAP, DEFAULT_MAX_EVENTS};
use crate::reference::{estimate_z0, estimate_zinf, ReferenceConstants, Z0Config};
use crate::verify::{run_suite, SuiteConfig};
use crate::{io, make_stream, Error, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use std::collections::HashMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

pub const WORKERS_ENV: &str = "CPLR_WORKERS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "cplr",
    version,
    about = "Compound Poisson limiting likelihood ratio simulator"
)]
pub struct Cli {
    /// key = value file supplying defaults for any long flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Estimate B, M^alpha and E^alpha over a gamma x alpha grid
    Sweep(SweepArgs),
    /// Run the statistical verification suite
    Verify(VerifyArgs),
    /// Print the closed-form limit constants as JSON
    Constants(ConstantsArgs),
    /// Sample one path, dump it as CSV, optionally stream replication triples
    SamplePath(SamplePathArgs),
    /// Monte Carlo moments of the Brownian limit Z_0
    Z0(Z0Args),
    /// Monte Carlo moments of the uniform limit Z_inf
    Zinf(ZinfArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Args, Debug, Default)]
pub struct CommonArgs {
    /// base seed of the replication streams [default: 42]
    #[arg(long)]
    pub seed: Option<u64>,
    /// worker threads [default: $CPLR_WORKERS or available parallelism]
    #[arg(long)]
    pub workers: Option<usize>,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    /// innovation density: gaussian or logistic [default: gaussian]
    #[arg(long)]
    pub density: Option<String>,
    /// comma-separated gamma values [default: 13 log-spaced points over 0.1..10]
    #[arg(long, value_delimiter = ',')]
    pub gamma_grid: Option<Vec<f64>>,
    /// comma-separated alpha values [default: 0,0.25,0.5]
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// replications per gamma [default: 100000]
    #[arg(long)]
    pub reps: Option<usize>,
    /// truncation gap below the running max, log units [default: 30]
    #[arg(long)]
    pub gap: Option<f64>,
    /// event cap per side [default: 10000000]
    #[arg(long)]
    pub max_events: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// output file (stdout if absent)
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// csv or json [default: csv]
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub density: Option<String>,
    /// multiplies every replication count [default: 1]
    #[arg(long)]
    pub scale: Option<f64>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// also write the reports as JSON
    #[arg(long)]
    pub json_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct ConstantsArgs {
    /// alphas at which M_inf and E_inf are tabulated [default: 0,0.25,0.5]
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SamplePathArgs {
    #[arg(long)]
    pub density: Option<String>,
    /// [default: 1]
    #[arg(long)]
    pub gamma: Option<f64>,
    /// replication index of the dumped path [default: 0]
    #[arg(long)]
    pub index: Option<u64>,
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long)]
    pub max_events: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
    /// path dump (side,index,event_time,cum_sum); stdout if absent
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// number of replications whose triples go to --triples-out [default: 0]
    #[arg(long)]
    pub reps: Option<usize>,
    /// per-replication CSV (rep,zeta,xi_minus,xi_plus,tail_bound)
    #[arg(long)]
    pub triples_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct Z0Args {
    /// [default: 0.001]
    #[arg(long)]
    pub grid_step: Option<f64>,
    #[arg(long)]
    pub gap: Option<f64>,
    /// [default: 10000]
    #[arg(long)]
    pub reps: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
}

#[derive(Args, Debug)]
pub struct ZinfArgs {
    #[arg(long, value_delimiter = ',')]
    pub alphas: Option<Vec<f64>>,
    /// [default: 1000000]
    #[arg(long)]
    pub reps: Option<usize>,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub format: Option<Format>,
}

/// Parsed `key = value` config file.
#[derive(Debug, Default, Clone)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidArgument(format!("config line {}: expected key = value", n + 1))
            })?;
            let key = key.trim().trim_start_matches("--").replace('_', "-");
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.values
            .get(key)
            .map(|v| {
                v.parse::<T>().map_err(|_| {
                    Error::InvalidArgument(format!("config key `{key}`: cannot parse `{v}`"))
                })
            })
            .transpose()
    }

    pub fn get_list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>> {
        self.values
            .get(key)
            .map(|v| {
                parse_list(v)
                    .map_err(|e| Error::InvalidArgument(format!("config key `{key}`: {e}")))
            })
            .transpose()
    }
}

fn parse_list<T: FromStr>(text: &str) -> std::result::Result<Vec<T>, String> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<T>().map_err(|_| format!("cannot parse `{s}`")))
        .collect()
}

fn pick<T: FromStr>(flag: Option<T>, file: &ConfigFile, key: &str, default: T) -> Result<T> {
    Ok(match flag {
        Some(v) => v,
        None => file.get(key)?.unwrap_or(default),
    })
}

fn pick_list<T: FromStr>(
    flag: Option<Vec<T>>,
    file: &ConfigFile,
    key: &str,
    default: Vec<T>,
) -> Result<Vec<T>> {
    Ok(match flag {
        Some(v) => v,
        None => file.get_list(key)?.unwrap_or(default),
    })
}

fn default_workers() -> Result<usize> {
    match std::env::var(WORKERS_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("{WORKERS_ENV}=`{v}` is not a worker count"))
        }),
        Err(_) => Ok(std::thread::available_parallelism().map_or(1, |n| n.get())),
    }
}

fn resolve_common(args: &CommonArgs, file: &ConfigFile) -> Result<(u64, usize)> {
    let seed = pick(args.seed, file, "seed", 42)?;
    let workers = match args.workers {
        Some(w) => w,
        None => match file.get("workers")? {
            Some(w) => w,
            None => default_workers()?,
        },
    };
    if workers == 0 {
        return Err(Error::InvalidArgument("workers must be at least 1".into()));
    }
    Ok((seed, workers))
}

/// Log-spaced `10^(-1 + k/6)`, `k = 0..=12`.
pub fn default_gamma_grid() -> Vec<f64> {
    (0..=12)
        .map(|k| 10f64.powf(-1.0 + k as f64 / 6.0))
        .collect()
}

fn default_alphas() -> Vec<f64> {
    vec![0.0, 0.25, 0.5]
}

fn check_reps(reps: usize, min: usize) -> Result<usize> {
    if reps < min {
        return Err(Error::InvalidArgument(format!(
            "--reps must be at least {min}, got {reps}"
        )));
    }
    Ok(reps)
}

/// A subcommand with every option resolved and validated.
#[derive(Debug)]
pub enum Plan {
    Sweep {
        config: SweepConfig,
        out: Option<PathBuf>,
        format: Format,
    },
    Verify {
        suite: SuiteConfig,
        json_out: Option<PathBuf>,
    },
    Constants {
        alphas: Vec<f64>,
        out: Option<PathBuf>,
    },
    SamplePath {
        density: JumpDensity,
        gamma: f64,
        policy: TruncationPolicy,
        seed: u64,
        index: u64,
        workers: usize,
        out: Option<PathBuf>,
        reps: usize,
        triples_out: Option<PathBuf>,
    },
    Z0 {
        config: Z0Config,
        settings: RunSettings,
        out: Option<PathBuf>,
        format: Format,
    },
    Zinf {
        alphas: Vec<f64>,
        settings: RunSettings,
        out: Option<PathBuf>,
        format: Format,
    },
}

fn check_alphas(alphas: &[f64]) -> Result<()> {
    if alphas.is_empty() {
        return Err(Error::InvalidArgument("alpha list is empty".into()));
    }
    match alphas.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        Some(a) => Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {a}"
        ))),
        None => Ok(()),
    }
}

/// Resolves flags against the config file and defaults, validating everything.
pub fn plan(cli: Cli) -> Result<Plan> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let plan = match cli.command {
        Command::Sweep(a) => {
            let (seed, workers) = resolve_common(&a.common, &file)?;
            let density_name = pick(a.density, &file, "density", "gaussian".to_string())?;
            JumpDensity::from_name(&density_name)?;
            let trunc = TruncationPolicy::new(
                pick(a.gap, &file, "gap", DEFAULT_GAP)?,
                pick(a.max_events, &file, "max-events", DEFAULT_MAX_EVENTS)?,
            )?;
            let config = SweepConfig {
                gamma_grid: pick_list(a.gamma_grid, &file, "gamma-grid", default_gamma_grid())?,
                alphas: pick_list(a.alphas, &file, "alphas", default_alphas())?,
                reps: check_reps(pick(a.reps, &file, "reps", 100_000)?, 2)?,
                seed,
                density_name,
                trunc,
                workers,
            };
            config.validate()?;
            Plan::Sweep {
                config,
                out: a.out.or(file.get("out")?),
                format: pick(a.format, &file, "format", Format::Csv)?,
            }
        }
        Command::Verify(a) => {
            let (seed, workers) = resolve_common(&a.common, &file)?;
            let density = JumpDensity::from_name(&pick(
                a.density,
                &file,
                "density",
                "gaussian".to_string(),
            )?)?;
            let scale = pick(a.scale, &file, "scale", 1.0)?;
            if !(scale.is_finite() && scale > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "--scale must be positive, got {scale}"
                )));
            }
            Plan::Verify {
                suite: SuiteConfig {
                    density,
                    seed,
                    workers,
                    scale,
                },
                json_out: a.json_out.or(file.get("json-out")?),
            }
        }
        Command::Constants(a) => {
            let alphas = pick_list(a.alphas, &file, "alphas", default_alphas())?;
            check_alphas(&alphas)?;
            Plan::Constants {
                alphas,
                out: a.out.or(file.get("out")?),
            }
        }
        Command::SamplePath(a) => {
            let (seed, workers) = resolve_common(&a.common, &file)?;
            let density = JumpDensity::from_name(&pick(
                a.density,
                &file,
                "density",
                "gaussian".to_string(),
            )?)?;
            let gamma = pick(a.gamma, &file, "gamma", 1.0)?;
            if !(gamma.is_finite() && gamma > 0.0) {
                return Err(Error::InvalidArgument(format!(
                    "--gamma must be positive, got {gamma}"
                )));
            }
            let reps = pick(a.reps, &file, "reps", 0)?;
            let triples_out = a.triples_out.or(file.get("triples-out")?);
            if triples_out.is_some() {
                check_reps(reps, 1)?;
            }
            Plan::SamplePath {
                density,
                gamma,
                policy: TruncationPolicy::new(
                    pick(a.gap, &file, "gap", DEFAULT_GAP)?,
                    pick(a.max_events, &file, "max-events", DEFAULT_MAX_EVENTS)?,
                )?,
                seed,
                index: pick(a.index, &file, "index", 0)?,
                workers,
                out: a.out.or(file.get("out")?),
                reps,
                triples_out,
            }
        }
        Command::Z0(a) => {
            let (seed, workers) = resolve_common(&a.common, &file)?;
            let defaults = Z0Config::default();
            let config = Z0Config {
                grid_step: pick(a.grid_step, &file, "grid-step", defaults.grid_step)?,
                gap: pick(a.gap, &file, "gap", defaults.gap)?,
                max_steps: defaults.max_steps,
            };
            config.validate()?;
            let reps = check_reps(pick(a.reps, &file, "reps", 10_000)?, 2)?;
            Plan::Z0 {
                config,
                settings: RunSettings::new(reps, seed).with_workers(workers),
                out: a.out.or(file.get("out")?),
                format: pick(a.format, &file, "format", Format::Csv)?,
            }
        }
        Command::Zinf(a) => {
            let (seed, workers) = resolve_common(&a.common, &file)?;
            let alphas = pick_list(a.alphas, &file, "alphas", default_alphas())?;
            check_alphas(&alphas)?;
            let reps = check_reps(pick(a.reps, &file, "reps", 1_000_000)?, 2)?;
            Plan::Zinf {
                alphas,
                settings: RunSettings::new(reps, seed).with_workers(workers),
                out: a.out.or(file.get("out")?),
                format: pick(a.format, &file, "format", Format::Csv)?,
            }
        }
    };
    Ok(plan)
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => io::write_atomic(p, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn encode<T: serde::Serialize>(rows: &[T], format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Csv => io::to_csv(rows),
        Format::Json => io::to_json(rows),
    }
}

/// Executes a resolved plan; returns the process exit code.
pub fn execute(plan: Plan) -> Result<i32> {
    match plan {
        Plan::Sweep {
            config,
            out,
            format,
        } => {
            let density = JumpDensity::from_name(&config.density_name)?;
            let rows = run_sweep_with_progress(&config, &density, |cell| {
                for r in cell {
                    eprintln!(
                        "gamma={} alpha={} B={:.6e}±{:.2e} M={:.6e}±{:.2e} E={:.6} reps={} trunc_failures={}",
                        r.gamma, r.alpha, r.b_hat, r.b_se, r.m_hat, r.m_se, r.e_hat, r.reps, r.trunc_failures
                    );
                }
            })?;
            let bytes = match format {
                Format::Csv => io::sweep_csv(&rows)?,
                Format::Json => io::to_json(&rows)?,
            };
            emit(out.as_deref(), &bytes)?;
            Ok(EXIT_OK)
        }
        Plan::Verify { suite, json_out } => {
            let reports = run_suite(&suite)?;
            for r in &reports {
                println!("{r}");
            }
            if let Some(p) = json_out {
                io::write_atomic(&p, &io::to_json(&reports)?)?;
            }
            let failed = reports.iter().filter(|r| !r.pass && !r.skipped).count();
            println!("{} checks, {} failed", reports.len(), failed);
            Ok(if failed == 0 { EXIT_OK } else { EXIT_FAILURE })
        }
        Plan::Constants { alphas, out } => {
            let json = ReferenceConstants::new().to_json(&alphas);
            emit(out.as_deref(), &io::to_json(&json)?)?;
            Ok(EXIT_OK)
        }
        Plan::SamplePath {
            density,
            gamma,
            policy,
            seed,
            index,
            workers,
            out,
            reps,
            triples_out,
        } => {
            let path = sample_two_sided(&density, gamma, &policy, &mut make_stream(seed, index))?;
            let triple = crate::functionals::estimator_triple(&path)?;
            let mut dump = Vec::new();
            path.write_csv(&mut dump)?;
            emit(out.as_deref(), &dump)?;
            eprintln!(
                "index={index} events(plus,minus)=({},{}) zeta={} xi=[{}, {}] tail_bound={:.3e}",
                path.plus.truncated_at(),
                path.minus.truncated_at(),
                triple.zeta,
                triple.xi_minus,
                triple.xi_plus,
                triple.zeta_tail_bound
            );
            if let Some(p) = triples_out {
                let settings = RunSettings::new(reps, seed).with_workers(workers);
                let triples: Vec<(u64, EstimatorTriple)> = replicate(&settings, |i, s| {
                    run_replication(&density, gamma, &policy, s).map(|t| (i, t))
                })?
                .into_iter()
                .collect::<Result<_>>()?;
                io::write_atomic(&p, &io::triples_csv(&triples)?)?;
            }
            Ok(EXIT_OK)
        }
        Plan::Z0 {
            config,
            settings,
            out,
            format,
        } => {
            let summary = estimate_z0(&config, &settings)?;
            eprintln!(
                "Z_0 grid_step={} B={:.4}±{:.4} (ref {:.4}) M={:.4}±{:.4} (ref {}) side-sup KS D={:.5} p={:.4}",
                config.grid_step,
                summary.row.b_hat,
                summary.row.b_se,
                summary.row.b_ref,
                summary.row.m_hat,
                summary.row.m_se,
                summary.row.m_ref,
                summary.side_sup_ks.statistic,
                summary.side_sup_ks.p_value
            );
            emit(
                out.as_deref(),
                &encode(std::slice::from_ref(&summary.row), format)?,
            )?;
            Ok(EXIT_OK)
        }
        Plan::Zinf {
            alphas,
            settings,
            out,
            format,
        } => {
            let rows = estimate_zinf(&alphas, &settings)?;
            emit(out.as_deref(), &encode(&rows, format)?)?;
            Ok(EXIT_OK)
        }
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let plan = match plan(cli) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    match execute(plan) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_FAILURE
        }
    }
}
