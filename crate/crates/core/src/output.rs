//! CSV writers and the run manifest.
//!
//! CSVs always carry a header row, use `\n` line endings and format floats
//! with nine significant digits so repeated runs diff byte-for-byte.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::consensus::ConsensusOutcome;
use crate::error::Result;
use crate::experiments::{LatencyComparison, OscillatorRun, SweepResult, Table1};
use crate::params::OrchidParams;
use crate::qss::ThresholdScan;

/// Nine significant digits in plain decimal notation.
pub fn format_float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // Trailing zeros carry no information; "-0" becomes "0".
    let s = if s.contains('.') { s.trim_end_matches('0').trim_end_matches('.').to_string() } else { s };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_path(path)?)
}

/// `axis, mean, std, sem, trials`.
pub fn write_sweep(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["axis", "mean", "std", "sem", "trials"])?;
    for p in &sweep.points {
        w.write_record([format_float(p.axis), format_float(p.mean), format_float(p.std), format_float(p.sem), p.trials.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Sweep columns plus the per-point median.
pub fn write_sweep_with_median(path: &Path, sweep: &SweepResult) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["axis", "mean", "std", "sem", "trials", "median"])?;
    for p in &sweep.points {
        w.write_record([
            format_float(p.axis),
            format_float(p.mean),
            format_float(p.std),
            format_float(p.sem),
            p.trials.to_string(),
            format_float(p.median),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `step, t_seconds, node_id, phase`.
pub fn write_trajectories(path: &Path, run: &OscillatorRun, dt: f64) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "t_seconds", "node_id", "phase"])?;
    for (step, phases) in run.trajectories.iter().enumerate() {
        let t = format_float(step as f64 * dt);
        for (node, &phi) in phases.iter().enumerate() {
            w.write_record([step.to_string(), t.clone(), node.to_string(), format_float(phi)])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `step, t_seconds, r, psi, entropy`.
pub fn write_oscillator_series(path: &Path, run: &OscillatorRun, dt: f64) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "t_seconds", "r", "psi", "entropy"])?;
    for step in 0..run.r.len() {
        w.write_record([
            step.to_string(),
            format_float(step as f64 * dt),
            format_float(run.r[step]),
            format_float(run.psi[step]),
            format_float(run.entropy[step]),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `step, r, entropy, committed_fraction, messages_cumulative`.
pub fn write_consensus_series(path: &Path, outcome: &ConsensusOutcome) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["step", "r", "entropy", "committed_fraction", "messages_cumulative"])?;
    for (i, messages) in outcome.messages_cumulative().enumerate() {
        w.write_record([
            (i + 1).to_string(),
            format_float(outcome.r_series[i]),
            format_float(outcome.entropy_series[i]),
            format_float(outcome.commit_fraction_series[i]),
            messages.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Per-trial summary of a batch of consensus runs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusSummary {
    pub trial: usize,
    pub converged: bool,
    pub consensus_value: Option<u32>,
    pub steps_to_converge: Option<usize>,
    pub seconds_to_converge: Option<f64>,
    pub rounds_executed: usize,
    pub message_count: u64,
    pub final_r: f64,
    pub qss_ok: Option<bool>,
}

impl ConsensusSummary {
    pub fn new(trial: usize, outcome: &ConsensusOutcome, dt: f64) -> Self {
        Self {
            trial,
            converged: outcome.converged,
            consensus_value: outcome.consensus_value,
            steps_to_converge: outcome.steps_to_converge,
            seconds_to_converge: outcome.convergence_seconds(dt),
            rounds_executed: outcome.rounds_executed,
            message_count: outcome.message_count,
            final_r: outcome.final_r,
            qss_ok: outcome.qss_ok,
        }
    }
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

pub fn write_consensus_summary(path: &Path, rows: &[ConsensusSummary]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record([
        "trial",
        "converged",
        "consensus_value",
        "steps_to_converge",
        "seconds_to_converge",
        "rounds_executed",
        "message_count",
        "final_r",
        "qss_ok",
    ])?;
    for r in rows {
        w.write_record([
            r.trial.to_string(),
            r.converged.to_string(),
            opt(r.consensus_value),
            opt(r.steps_to_converge),
            r.seconds_to_converge.map_or(String::new(), format_float),
            r.rounds_executed.to_string(),
            r.message_count.to_string(),
            format_float(r.final_r),
            opt(r.qss_ok),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `coherence, fidelity, sem, trials, k, n, prime, model`, one block per scan.
pub fn write_fidelity(path: &Path, scans: &[ThresholdScan]) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["coherence", "fidelity", "sem", "trials", "k", "n", "prime", "model"])?;
    for scan in scans {
        for p in &scan.curve {
            w.write_record([
                format_float(p.coherence),
                format_float(p.fidelity),
                format_float(p.sem),
                p.trials.to_string(),
                scan.k.to_string(),
                scan.n.to_string(),
                scan.prime.to_string(),
                scan.model.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `n, orchid_mean_s, orchid_std_s, pbft_model_s, pow_s`.
pub fn write_scale(path: &Path, cmp: &LatencyComparison) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["n", "orchid_mean_s", "orchid_std_s", "pbft_model_s", "pow_s"])?;
    for i in 0..cmp.n_values.len() {
        w.write_record([
            cmp.n_values[i].to_string(),
            format_float(cmp.orchid_mean[i]),
            format_float(cmp.orchid_std[i]),
            format_float(cmp.pbft_model_latency[i]),
            format_float(cmp.pow_latency),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// `byz_fraction, median_s, final_r_mean, final_r_std, rate, trials`.
pub fn write_table1(path: &Path, table: &Table1) -> Result<()> {
    let mut w = writer(path)?;
    w.write_record(["byz_fraction", "median_s", "final_r_mean", "final_r_std", "rate", "trials"])?;
    for row in &table.rows {
        w.write_record([
            format_float(row.byz_fraction),
            format_float(row.median_seconds),
            format_float(row.final_r_mean),
            format_float(row.final_r_std),
            format_float(row.rate),
            row.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Everything needed to reproduce a CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub version: String,
    pub argv: Vec<String>,
    pub params_snapshot: OrchidParams,
    pub seed: u64,
    pub trials: usize,
    pub outputs: Vec<PathBuf>,
    pub wall_clock: f64,
}

impl RunManifest {
    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(&mut file, self)?;
        file.write_all(b"\n")?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }
}

pub fn version_string() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}
