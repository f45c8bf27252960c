//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 when parameters fail validation or a run
//! cannot complete, 2 on usage errors.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{OrchidError, Result};
use crate::experiments::{self, OscillatorOptions};
use crate::output::{self, ConsensusSummary, RunManifest};
use crate::params::OrchidParams;

#[derive(Debug, Parser)]
#[command(name = "orchid", version, about = "Phase-synchronisation consensus simulator", arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    #[command(flatten)]
    global: GlobalArgs,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Root seed; falls back to ORCHID_SEED, then to the `seed` parameter.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Trials per sweep point (each command has its own default).
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Node count.
    #[arg(long, global = true)]
    n: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Parameter override, `key=value`; repeatable.
    #[arg(long = "param", global = true, value_name = "KEY=VALUE")]
    params: Vec<String>,

    /// Flat `key=value` parameter file applied before `--param` overrides.
    #[arg(long = "params-file", global = true, value_name = "FILE")]
    params_file: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single oscillator run: per-node trajectories plus r / psi / entropy series.
    Oscillate,
    /// Final order parameter versus coupling strength.
    SweepCoupling {
        /// Comma-separated coupling values (default 0.25, 0.5, ..., 4.0).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Final order parameter versus a shared coherence level.
    SweepCoherence {
        /// Comma-separated coherence values (default 0.0, 0.1, ..., 1.0).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Secret-sharing fidelity curve and coherence threshold.
    QssFidelity {
        /// Comma-separated coherence values (default 0.50 to 1.00 step 0.01).
        #[arg(long)]
        grid: Option<String>,
        /// Also scan thresholds k = 3..=7.
        #[arg(long)]
        multi_k: bool,
    },
    /// Batch of consensus runs with per-trial summary and the first run's series.
    Consensus,
    /// Convergence rate and time versus Byzantine fraction.
    SweepByzantine {
        /// Comma-separated fractions (default 0, 0.1, 0.2, 0.3, 0.4).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Latency versus network size against the PBFT and PoW models.
    Scale {
        /// Comma-separated network sizes (default 10, 25, 50, 75, 100, 125, 150).
        #[arg(long)]
        grid: Option<String>,
    },
    /// Summary table over the standard Byzantine fractions.
    Table1,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Oscillate => "oscillate",
            Command::SweepCoupling { .. } => "sweep-coupling",
            Command::SweepCoherence { .. } => "sweep-coherence",
            Command::QssFidelity { .. } => "qss-fidelity",
            Command::Consensus => "consensus",
            Command::SweepByzantine { .. } => "sweep-byzantine",
            Command::Scale { .. } => "scale",
            Command::Table1 => "table1",
        }
    }

    fn default_trials(&self) -> usize {
        match self {
            Command::Oscillate => 1,
            Command::SweepCoupling { .. } | Command::SweepCoherence { .. } => 5,
            Command::QssFidelity { .. } => 60,
            Command::Consensus | Command::Table1 => 20,
            Command::SweepByzantine { .. } => 15,
            Command::Scale { .. } => 10,
        }
    }

    fn default_n(&self) -> usize {
        match self {
            Command::Oscillate | Command::SweepCoupling { .. } | Command::SweepCoherence { .. } => 25,
            _ => 30,
        }
    }
}

fn parse_list<T: std::str::FromStr>(text: &str) -> Result<Vec<T>> {
    text.split(',')
        .map(|s| s.trim().parse().map_err(|_| OrchidError::Parse(format!("bad grid value {s:?}"))))
        .collect()
}

fn float_grid(text: Option<&str>, default: impl FnOnce() -> Vec<f64>) -> Result<Vec<f64>> {
    text.map_or_else(|| Ok(default()), parse_list)
}

/// Resolved parameters, seed and trial count for one invocation.
struct Setup {
    params: OrchidParams,
    seed: u64,
    trials: usize,
    stamp: u128,
    out: PathBuf,
}

impl Setup {
    fn path(&self, stem: &str) -> PathBuf {
        self.out.join(format!("{stem}_{}.csv", self.stamp))
    }
}

fn resolve(cli: &Cli) -> Result<Setup> {
    let g = &cli.global;
    let mut params = OrchidParams { n: cli.command.default_n(), ..Default::default() };
    if let Some(file) = &g.params_file {
        params.apply_file(file)?;
    }
    if let Some(n) = g.n {
        params.n = n;
    }
    let mut seed_from_param = false;
    for assignment in &g.params {
        params.apply_assignment(assignment)?;
        seed_from_param |= assignment.trim_start().starts_with("seed");
    }
    if let Some(seed) = g.seed {
        params.seed = seed;
    } else if !seed_from_param {
        if let Ok(env) = std::env::var("ORCHID_SEED") {
            params.seed = env
                .trim()
                .parse()
                .map_err(|_| OrchidError::Parse(format!("ORCHID_SEED={env:?} is not a u64")))?;
        }
    }
    let params = params.validate()?;
    let trials = g.trials.unwrap_or_else(|| cli.command.default_trials());
    if trials == 0 {
        return Err(OrchidError::InvalidParams("--trials must be at least 1".into()));
    }
    let stamp = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0);
    Ok(Setup { seed: params.seed, params, trials, stamp, out: g.out.clone() })
}

fn execute(cli: &Cli, setup: &Setup) -> Result<Vec<PathBuf>> {
    let p = &setup.params;
    let (seed, trials) = (setup.seed, setup.trials);
    let mut outputs = Vec::new();
    match &cli.command {
        Command::Oscillate => {
            let options = OscillatorOptions { record_trajectories: true, ..Default::default() };
            let run = experiments::run_oscillator(p, seed, options)?;
            let phases = setup.path("oscillate_phases");
            let series = setup.path("oscillate_series");
            output::write_trajectories(&phases, &run, p.dt)?;
            output::write_oscillator_series(&series, &run, p.dt)?;
            println!("final r = {:.4}, max r = {:.4}", run.final_r(), run.max_r());
            outputs.extend([phases, series]);
        }
        Command::SweepCoupling { grid } => {
            let grid = float_grid(grid.as_deref(), || (1..=16).map(|i| 0.25 * i as f64).collect())?;
            let sweep = experiments::coupling_sweep(&grid, p, trials, seed)?;
            let path = setup.path("sweep_coupling");
            output::write_sweep(&path, &sweep)?;
            match sweep.steepest_rise() {
                Some(k) => println!("steepest rise of r near K = {k:.3}"),
                None => println!("no rise detected"),
            }
            outputs.push(path);
        }
        Command::SweepCoherence { grid } => {
            let grid = float_grid(grid.as_deref(), || (0..=10).map(|i| i as f64 / 10.0).collect())?;
            let sweep = experiments::coherence_sweep(&grid, p, trials, seed)?;
            let path = setup.path("sweep_coherence");
            output::write_sweep(&path, &sweep)?;
            match sweep.upward_crossing(p.binding_threshold) {
                Some(c) => println!("r crosses the binding threshold near c = {c:.3}"),
                None => println!("r does not cross the binding threshold on this grid"),
            }
            outputs.push(path);
        }
        Command::QssFidelity { grid, multi_k } => {
            let grid = float_grid(grid.as_deref(), experiments::default_qss_grid)?;
            let ks: Vec<usize> = if *multi_k { (3..=7).filter(|&k| k <= p.qss_n).collect() } else { vec![p.qss_k] };
            let scans = ks
                .iter()
                .map(|&k| experiments::qss_scan(p, k, &grid, trials, crate::rng::derive_seed(seed, &[k as u64])))
                .collect::<Result<Vec<_>>>()?;
            for scan in &scans {
                let c = scan.threshold.map_or("none".into(), |c| format!("{c:.3}"));
                println!("k={} n={}: c* = {c}", scan.k, scan.n);
            }
            let path = setup.path("qss_fidelity");
            output::write_fidelity(&path, &scans)?;
            outputs.push(path);
        }
        Command::Consensus => {
            let outcomes = experiments::consensus_trials(p, trials, seed)?;
            let rows: Vec<ConsensusSummary> =
                outcomes.iter().enumerate().map(|(t, o)| ConsensusSummary::new(t, o, p.dt)).collect();
            let series = setup.path("consensus_series");
            let summary = setup.path("consensus_summary");
            output::write_consensus_series(&series, &outcomes[0])?;
            output::write_consensus_summary(&summary, &rows)?;
            let json = setup.out.join(format!("consensus_summary_{}.json", setup.stamp));
            std::fs::write(&json, serde_json::to_string_pretty(&rows)? + "\n")?;
            let converged = rows.iter().filter(|r| r.converged).count();
            println!("converged {converged}/{trials}");
            outputs.extend([series, summary, json]);
        }
        Command::SweepByzantine { grid } => {
            let grid = float_grid(grid.as_deref(), || vec![0.0, 0.1, 0.2, 0.3, 0.4])?;
            let sweep = experiments::byzantine_sweep(&grid, p, trials, seed)?;
            let rate = setup.path("sweep_byzantine_rate");
            let time = setup.path("sweep_byzantine_time");
            output::write_sweep(&rate, &sweep.rate)?;
            output::write_sweep_with_median(&time, &sweep.time)?;
            for (r, t) in sweep.rate.points.iter().zip(&sweep.time.points) {
                println!("byz {:.2}: rate {:.2}, median {:.2} s", r.axis, r.mean, t.median);
            }
            outputs.extend([rate, time]);
        }
        Command::Scale { grid } => {
            let grid: Vec<usize> = match grid {
                Some(text) => parse_list(text)?,
                None => experiments::DEFAULT_N_GRID.to_vec(),
            };
            let cmp = experiments::scalability_sweep(&grid, p, trials, seed)?;
            let path = setup.path("scale");
            output::write_scale(&path, &cmp)?;
            match cmp.crossover_n {
                Some(n) => println!("ORCHID beats the PBFT model from n = {n}"),
                None => println!("no crossover with the PBFT model on this grid"),
            }
            outputs.push(path);
        }
        Command::Table1 => {
            let table = experiments::table1_report(p, trials, seed)?;
            let path = setup.path("table1");
            output::write_table1(&path, &table)?;
            let text = setup.out.join(format!("table1_{}.txt", setup.stamp));
            std::fs::write(&text, table.to_string())?;
            print!("{table}");
            outputs.extend([path, text]);
        }
    }
    Ok(outputs)
}

fn run_command(cli: &Cli, argv: &[String]) -> Result<()> {
    let started = Instant::now();
    let setup = resolve(cli)?;
    std::fs::create_dir_all(&setup.out)?;
    let outputs = match cli.global.jobs {
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| OrchidError::InvalidParams(format!("thread pool: {e}")))?;
            pool.install(|| execute(cli, &setup))?
        }
        None => execute(cli, &setup)?,
    };
    let manifest = RunManifest {
        command: cli.command.name().to_string(),
        version: output::version_string(),
        argv: argv.to_vec(),
        params_snapshot: setup.params.clone(),
        seed: setup.seed,
        trials: setup.trials,
        outputs,
        wall_clock: started.elapsed().as_secs_f64(),
    };
    let path = setup.out.join(format!("{}_{}.manifest.json", manifest.command, setup.stamp));
    manifest.write(&path)?;
    println!("manifest: {}", path.display());
    Ok(())
}

/// Parse `argv` (including the program name) and run; returns the exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let argv: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    match run_command(&cli, &argv) {
        Ok(()) => 0,
        Err(err) => {
            eprintln!("error: {err}");
            1
        }
    }
}

/// Files in `dir` written by a run, for tests and tooling.
pub fn list_outputs(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    files.sort();
    Ok(files)
}
