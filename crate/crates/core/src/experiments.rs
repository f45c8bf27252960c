//! Sweep harness for the synchronisation, secret-sharing, consensus and
//! scalability experiments.
//!
//! Every trial draws from a substream of the root seed keyed by its trial
//! index (and, where the topology is shared across a sweep, nothing else), so
//! results are identical whether trials run serially or on a thread pool.
//! Grid points of the oscillator and Byzantine sweeps reuse the same trial
//! seeds, which pairs topology and initial conditions across the axis.

use std::fmt;

use rayon::prelude::*;

use crate::consensus::{self, ConsensusOutcome};
use crate::error::{OrchidError, Result};
use crate::oscillator::{self, Dynamics, PhaseState};
use crate::params::{theoretical_critical_coupling, OrchidParams};
use crate::qss::{self, ThresholdScan};
use crate::rng;
use crate::stats;
use crate::topology::{self, Topology};

/// Nakamoto-style block time used as the flat reference latency.
pub const POW_LATENCY_SECONDS: f64 = 600.0;

/// Network size and latency of the single quoted PBFT operating point.
const PBFT_REFERENCE_N: f64 = 150.0;
const PBFT_REFERENCE_SECONDS: f64 = 7.5;

/// Default network sizes for the scalability sweep.
pub const DEFAULT_N_GRID: [usize; 7] = [10, 25, 50, 75, 100, 125, 150];

/// Byzantine fractions reported in the summary table.
pub const TABLE1_FRACTIONS: [f64; 4] = [0.10, 0.25, 0.33, 0.40];

/// Aggregate of one swept axis value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub axis: f64,
    pub mean: f64,
    pub std: f64,
    pub sem: f64,
    pub median: f64,
    /// Number of samples aggregated at this point.
    pub trials: usize,
}

impl SweepPoint {
    pub fn from_samples(axis: f64, samples: &[f64]) -> Self {
        Self {
            axis,
            mean: stats::mean(samples),
            std: stats::std_dev(samples),
            sem: stats::sem(samples),
            median: stats::median(samples),
            trials: samples.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis_name: String,
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn means(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.mean).collect()
    }

    pub fn point_at(&self, axis: f64) -> Option<&SweepPoint> {
        self.points.iter().find(|p| (p.axis - axis).abs() < 1e-9)
    }

    /// Whether the mean curve never drops by more than `sems` combined
    /// standard errors between consecutive points.
    pub fn is_monotone_within(&self, sems: f64) -> bool {
        self.points.windows(2).all(|w| w[1].mean >= w[0].mean - sems * (w[0].sem + w[1].sem))
    }

    /// Midpoint of the interval with the steepest rise of the mean curve.
    pub fn steepest_rise(&self) -> Option<f64> {
        self.points
            .windows(2)
            .map(|w| ((w[1].mean - w[0].mean) / (w[1].axis - w[0].axis), 0.5 * (w[0].axis + w[1].axis)))
            .filter(|(slope, _)| slope.is_finite())
            .max_by(|a, b| a.0.total_cmp(&b.0))
            .map(|(_, mid)| mid)
    }

    /// Midpoint of the first interval where the mean rises through `level`.
    pub fn upward_crossing(&self, level: f64) -> Option<f64> {
        self.points
            .windows(2)
            .find(|w| w[0].mean < level && w[1].mean >= level)
            .map(|w| 0.5 * (w[0].axis + w[1].axis))
    }
}

/// One oscillator-only simulation.
#[derive(Debug, Clone)]
pub struct OscillatorRun {
    pub topology: Topology,
    pub r: Vec<f64>,
    pub psi: Vec<f64>,
    pub entropy: Vec<f64>,
    /// Phases per step (step 0 is the initial state); empty unless requested.
    pub trajectories: Vec<Vec<f64>>,
    pub final_state: PhaseState,
}

impl OscillatorRun {
    pub fn final_r(&self) -> f64 {
        *self.r.last().expect("series holds the initial state")
    }

    pub fn max_r(&self) -> f64 {
        self.r.iter().copied().fold(0.0, f64::max)
    }
}

/// Options for [`run_oscillator`].
#[derive(Debug, Clone, Copy, Default)]
pub struct OscillatorOptions {
    /// Assign this coherence to every node instead of the uniform draw.
    pub coherence: Option<f64>,
    pub record_trajectories: bool,
}

/// Oscillator dynamics without commitment for `step_budget` steps. The
/// series have `step_budget + 1` entries, starting at step 0.
pub fn run_oscillator(params: &OrchidParams, seed: u64, options: OscillatorOptions) -> Result<OscillatorRun> {
    let params = params.clone().validate()?;
    let topology = topology::generate_watts_strogatz(
        params.n,
        params.mean_degree,
        params.rewire_prob,
        &mut rng::substream(seed, &[0]),
    )?;
    let mut state = oscillator::init_phase_state(&params, &mut rng::substream(seed, &[1]));
    if let Some(c) = options.coherence {
        if !(0.0..=1.0).contains(&c) {
            return Err(OrchidError::InvalidParams(format!("coherence {c} outside [0, 1]")));
        }
        state = state.with_uniform_coherence(c);
    }
    let mut step_rng = rng::substream(seed, &[2]);
    let dynamics = Dynamics::from(&params);
    let capacity = params.step_budget + 1;
    let mut run = OscillatorRun {
        topology,
        r: Vec::with_capacity(capacity),
        psi: Vec::with_capacity(capacity),
        entropy: Vec::with_capacity(capacity),
        trajectories: Vec::new(),
        final_state: state.clone(),
    };
    for step in 0..=params.step_budget {
        if step > 0 {
            state = oscillator::phase_step(&state, &run.topology, dynamics, &mut step_rng);
        }
        let field = oscillator::global_order_parameter(&state.phases)?;
        run.r.push(field.magnitude);
        run.psi.push(field.angle);
        run.entropy.push(oscillator::binding_entropy(&state.phases, params.entropy_bins)?);
        if options.record_trajectories {
            run.trajectories.push(state.phases.clone());
        }
    }
    run.final_state = state;
    Ok(run)
}

fn trial_seed(seed: u64, trial: usize) -> u64 {
    rng::derive_seed(seed, &[trial as u64])
}

fn check_trials(trials: usize) -> Result<()> {
    if trials == 0 {
        return Err(OrchidError::InvalidParams("trials must be at least 1".into()));
    }
    Ok(())
}

fn check_ascending(grid: &[f64], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(OrchidError::Empty("sweep grid"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) || grid.iter().any(|x| !x.is_finite()) {
        return Err(OrchidError::InvalidParams(format!("{what} grid must be finite and ascending")));
    }
    Ok(())
}

/// Evaluate `f(point, trial)` over the whole grid in parallel and aggregate
/// per point in grid order.
fn sweep<F>(axis_name: &str, grid: &[f64], trials: usize, f: F) -> Result<SweepResult>
where
    F: Fn(f64, usize) -> Result<f64> + Sync,
{
    let jobs: Vec<(usize, usize)> = (0..grid.len()).flat_map(|g| (0..trials).map(move |t| (g, t))).collect();
    let values = jobs.par_iter().map(|&(g, t)| f(grid[g], t)).collect::<Result<Vec<f64>>>()?;
    let points = values
        .chunks(trials)
        .zip(grid)
        .map(|(samples, &axis)| SweepPoint::from_samples(axis, samples))
        .collect();
    Ok(SweepResult { axis_name: axis_name.to_string(), points })
}

/// Final global order parameter versus coupling strength.
pub fn coupling_sweep(k_grid: &[f64], params: &OrchidParams, trials: usize, seed: u64) -> Result<SweepResult> {
    check_trials(trials)?;
    check_ascending(k_grid, "coupling")?;
    sweep("coupling", k_grid, trials, |k, t| {
        let p = OrchidParams { coupling: k, ..params.clone() };
        Ok(run_oscillator(&p, trial_seed(seed, t), OscillatorOptions::default())?.final_r())
    })
}

/// Final global order parameter versus a coherence level shared by all nodes.
pub fn coherence_sweep(c_grid: &[f64], params: &OrchidParams, trials: usize, seed: u64) -> Result<SweepResult> {
    check_trials(trials)?;
    check_ascending(c_grid, "coherence")?;
    if c_grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(OrchidError::InvalidParams("coherence grid must lie in [0, 1]".into()));
    }
    sweep("coherence", c_grid, trials, |c, t| {
        let options = OscillatorOptions { coherence: Some(c), ..Default::default() };
        Ok(run_oscillator(params, trial_seed(seed, t), options)?.final_r())
    })
}

/// `trials` independent consensus runs, in trial order.
pub fn consensus_trials(params: &OrchidParams, trials: usize, seed: u64) -> Result<Vec<ConsensusOutcome>> {
    check_trials(trials)?;
    (0..trials)
        .into_par_iter()
        .map(|t| consensus::run_consensus(params, trial_seed(seed, t)))
        .collect()
}

/// Convergence rate, convergence time and final order parameter per
/// Byzantine fraction.
#[derive(Debug, Clone, PartialEq)]
pub struct ByzantineSweep {
    pub rate: SweepResult,
    /// Seconds to convergence, aggregated over converged trials only.
    pub time: SweepResult,
    pub final_r: SweepResult,
}

pub fn byzantine_sweep(fractions: &[f64], params: &OrchidParams, trials: usize, seed: u64) -> Result<ByzantineSweep> {
    check_trials(trials)?;
    check_ascending(fractions, "Byzantine fraction")?;
    if fractions.iter().any(|f| !(0.0..=0.45).contains(f)) {
        return Err(OrchidError::InvalidParams("Byzantine fractions must lie in [0, 0.45]".into()));
    }
    let mut rate = Vec::new();
    let mut time = Vec::new();
    let mut final_r = Vec::new();
    for &f in fractions {
        let p = OrchidParams { byz_fraction: f, ..params.clone() };
        let outcomes = consensus_trials(&p, trials, seed)?;
        let converged: Vec<f64> = outcomes.iter().map(|o| o.converged as u8 as f64).collect();
        let times: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.converged)
            .filter_map(|o| o.convergence_seconds(p.dt))
            .collect();
        let rs: Vec<f64> = outcomes.iter().map(|o| o.final_r).collect();
        rate.push(SweepPoint::from_samples(f, &converged));
        time.push(SweepPoint::from_samples(f, &times));
        final_r.push(SweepPoint::from_samples(f, &rs));
    }
    Ok(ByzantineSweep {
        rate: SweepResult { axis_name: "byz_fraction".into(), points: rate },
        time: SweepResult { axis_name: "byz_fraction".into(), points: time },
        final_r: SweepResult { axis_name: "byz_fraction".into(), points: final_r },
    })
}

/// Quadratic PBFT latency calibrated so that `n = 150` takes 7.5 s.
pub fn pbft_latency_model(n: usize) -> f64 {
    PBFT_REFERENCE_SECONDS * (n as f64 / PBFT_REFERENCE_N).powi(2)
}

/// All-to-all PBFT messages per round, to order `n^2`.
pub fn pbft_messages_per_round(n: usize) -> f64 {
    (n * n) as f64
}

/// Measured ORCHID latency against the analytical baselines.
#[derive(Debug, Clone, PartialEq)]
pub struct LatencyComparison {
    pub n_values: Vec<usize>,
    pub orchid_mean: Vec<f64>,
    pub orchid_std: Vec<f64>,
    pub converged: Vec<usize>,
    pub trials: usize,
    pub pbft_model_latency: Vec<f64>,
    pub pow_latency: f64,
    /// Beacons per round divided by `n`, averaged over trials.
    pub messages_per_round_per_node: Vec<f64>,
    pub pbft_messages_per_round: Vec<f64>,
    /// Smallest grid size where ORCHID's mean latency beats the PBFT model.
    pub crossover_n: Option<usize>,
}

/// Latency versus network size at 10% Byzantine nodes.
pub fn scalability_sweep(n_grid: &[usize], params: &OrchidParams, trials: usize, seed: u64) -> Result<LatencyComparison> {
    check_trials(trials)?;
    if n_grid.is_empty() {
        return Err(OrchidError::Empty("network size grid"));
    }
    if n_grid.windows(2).any(|w| w[0] > w[1]) || n_grid.iter().any(|&n| n < 4) {
        return Err(OrchidError::InvalidParams("network sizes must be ascending and at least 4".into()));
    }
    let mut out = LatencyComparison {
        n_values: n_grid.to_vec(),
        orchid_mean: Vec::new(),
        orchid_std: Vec::new(),
        converged: Vec::new(),
        trials,
        pbft_model_latency: n_grid.iter().map(|&n| pbft_latency_model(n)).collect(),
        pow_latency: POW_LATENCY_SECONDS,
        messages_per_round_per_node: Vec::new(),
        pbft_messages_per_round: n_grid.iter().map(|&n| pbft_messages_per_round(n)).collect(),
        crossover_n: None,
    };
    for &n in n_grid {
        let p = OrchidParams { n, byz_fraction: 0.10, ..params.clone() };
        let outcomes = consensus_trials(&p, trials, rng::derive_seed(seed, &[n as u64]))?;
        let times: Vec<f64> = outcomes.iter().filter_map(|o| o.convergence_seconds(p.dt)).collect();
        let per_node: Vec<f64> = outcomes.iter().map(|o| o.messages_per_round as f64 / n as f64).collect();
        out.orchid_mean.push(stats::mean(&times));
        out.orchid_std.push(stats::std_dev(&times));
        out.converged.push(times.len());
        out.messages_per_round_per_node.push(stats::mean(&per_node));
    }
    out.crossover_n = out
        .n_values
        .iter()
        .zip(out.orchid_mean.iter().zip(&out.pbft_model_latency))
        .find(|(_, (orchid, pbft))| orchid < pbft)
        .map(|(&n, _)| n);
    Ok(out)
}

/// One row of the summary table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Table1Row {
    pub byz_fraction: f64,
    pub median_seconds: f64,
    pub final_r_mean: f64,
    pub final_r_std: f64,
    pub rate: f64,
    pub trials: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table1 {
    pub n: usize,
    pub rows: Vec<Table1Row>,
    /// Largest global order parameter of a clean 25-node oscillator run.
    pub r_max: f64,
    pub critical_coupling: f64,
    pub coupling_ratio: f64,
    pub qss_threshold: Option<f64>,
    pub pbft_messages_per_round: f64,
}

impl fmt::Display for Table1 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Results summary (n={}, {} trials)", self.n, self.rows.first().map_or(0, |r| r.trials))?;
        writeln!(f, "{:<20} {:>12} {:>16} {:>8}", "Protocol", "Med. conv.", "Final r", "Rate")?;
        for row in &self.rows {
            writeln!(
                f,
                "{:<20} {:>10.2} s {:>9.3} ± {:.3} {:>7.0}%",
                format!("ORCHID ({:.0}% Byz)", row.byz_fraction * 100.0),
                row.median_seconds,
                row.final_r_mean,
                row.final_r_std,
                row.rate * 100.0
            )?;
        }
        writeln!(f, "{:<20} {:>12} {:>16} {:>8}", "PBFT (10% Byz)", format!("{:.0} msgs", self.pbft_messages_per_round), "N/A", "det.")?;
        writeln!(f, "{:<20} {:>10.0} s {:>16} {:>8}", "PoW", POW_LATENCY_SECONDS, "N/A", "prob.")?;
        let threshold = self.qss_threshold.map_or("none".to_string(), |c| format!("{c:.3}"));
        writeln!(
            f,
            "QSS threshold c* = {threshold}; r_max = {:.3}; K/K_c = {:.2} (K_c = {:.3})",
            self.r_max, self.coupling_ratio, self.critical_coupling
        )
    }
}

/// Default coherence grid for threshold scans: 0.50 to 1.00 in steps of 0.01.
pub fn default_qss_grid() -> Vec<f64> {
    qss::coherence_grid(0.5, 1.0, 0.01)
}

/// `(k, n)` threshold scan with the given parameters' prime and flip model.
pub fn qss_scan(params: &OrchidParams, k: usize, grid: &[f64], trials: usize, seed: u64) -> Result<ThresholdScan> {
    qss::threshold_scan(k, params.qss_n, grid, trials, params.prime, params.flip_model, seed)
}

/// Consensus rows at the standard Byzantine fractions, `r_max` from a clean
/// 25-node run, and the `(qss_k, qss_n)` coherence threshold.
pub fn table1_report(params: &OrchidParams, trials: usize, seed: u64) -> Result<Table1> {
    check_trials(trials)?;
    let n = params.n;
    let mut rows = Vec::new();
    for &f in &TABLE1_FRACTIONS {
        let p = OrchidParams { byz_fraction: f, ..params.clone() };
        let outcomes = consensus_trials(&p, trials, rng::derive_seed(seed, &[1]))?;
        let times: Vec<f64> = outcomes
            .iter()
            .filter(|o| o.converged)
            .filter_map(|o| o.convergence_seconds(p.dt))
            .collect();
        let rs: Vec<f64> = outcomes.iter().map(|o| o.final_r).collect();
        rows.push(Table1Row {
            byz_fraction: f,
            median_seconds: stats::median(&times),
            final_r_mean: stats::mean(&rs),
            final_r_std: stats::std_dev(&rs),
            rate: outcomes.iter().filter(|o| o.converged).count() as f64 / trials as f64,
            trials,
        });
    }
    let clean = OrchidParams { n: 25, byz_fraction: 0.0, ..params.clone() };
    let r_max = run_oscillator(&clean, rng::derive_seed(seed, &[2]), OscillatorOptions::default())?.max_r();
    let critical_coupling = theoretical_critical_coupling(params.freq_std)?;
    let scan = qss_scan(params, params.qss_k, &default_qss_grid(), 60, rng::derive_seed(seed, &[3]))?;
    Ok(Table1 {
        n,
        rows,
        r_max,
        critical_coupling,
        coupling_ratio: params.coupling / critical_coupling,
        qss_threshold: scan.threshold,
        pbft_messages_per_round: pbft_messages_per_round(n),
    })
}

/// Pearson correlation between the order-parameter and entropy series.
pub fn entropy_duality(r: &[f64], entropy: &[f64]) -> Option<f64> {
    stats::pearson(r, entropy)
}
