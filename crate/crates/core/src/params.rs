//! Protocol and simulation constants.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{OrchidError, Result};
use crate::qss::FlipModel;

/// Every tunable of the simulator in one place.
///
/// Units: `coupling`, `freq_std` and `noise_std` are rad/s, `dt` is seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrchidParams {
    pub n: usize,
    pub mean_degree: usize,
    pub rewire_prob: f64,
    pub coupling: f64,
    pub dt: f64,
    pub binding_threshold: f64,
    pub freq_std: f64,
    pub noise_std: f64,
    pub coherence_min: f64,
    pub coherence_max: f64,
    pub byz_fraction: f64,
    pub step_budget: usize,
    pub entropy_bins: usize,
    /// When set, commitment also requires the neighbourhood binding entropy
    /// to be strictly below this value (nats).
    pub entropy_gate: Option<f64>,
    pub qss_k: usize,
    pub qss_n: usize,
    pub prime: u64,
    pub flip_model: FlipModel,
    /// Proposal shared by honest nodes.
    pub honest_value: u32,
    /// Fraction of honest nodes that propose `honest_value + 1` instead.
    pub honest_split: f64,
    pub seed: u64,
}

impl Default for OrchidParams {
    fn default() -> Self {
        Self {
            n: 25,
            mean_degree: 6,
            rewire_prob: 0.3,
            coupling: 3.0,
            dt: 0.05,
            binding_threshold: 0.75,
            freq_std: 0.5,
            noise_std: 7.0,
            coherence_min: 0.7,
            coherence_max: 1.0,
            byz_fraction: 0.0,
            step_budget: 600,
            entropy_bins: 36,
            entropy_gate: None,
            qss_k: 5,
            qss_n: 10,
            prime: (1 << 31) - 1,
            flip_model: FlipModel::DeterministicFloor,
            honest_value: 42,
            honest_split: 0.0,
            seed: 0,
        }
    }
}

/// Largest proposal value; proposals live in `0..=MAX_VALUE`.
pub const MAX_VALUE: u32 = 100;

const KEYS: &[&str] = &[
    "n",
    "mean_degree",
    "rewire_prob",
    "coupling",
    "dt",
    "binding_threshold",
    "freq_std",
    "noise_std",
    "coherence_min",
    "coherence_max",
    "byz_fraction",
    "step_budget",
    "entropy_bins",
    "entropy_gate",
    "qss_k",
    "qss_n",
    "prime",
    "flip_model",
    "honest_value",
    "honest_split",
    "seed",
];

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .trim()
        .parse()
        .map_err(|_| OrchidError::Parse(format!("cannot parse {key}={value:?}")))
}

fn invalid(msg: impl Into<String>) -> OrchidError {
    OrchidError::InvalidParams(msg.into())
}

impl OrchidParams {
    /// Names accepted by [`OrchidParams::set`].
    pub fn keys() -> &'static [&'static str] {
        KEYS
    }

    /// Number of Byzantine nodes, `floor(byz_fraction * n)`.
    pub fn byzantine_count(&self) -> usize {
        (self.byz_fraction * self.n as f64 + 1e-9).floor() as usize
    }

    /// Assign one field from its textual form.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim();
        match key {
            "n" => self.n = parse(key, value)?,
            "mean_degree" => self.mean_degree = parse(key, value)?,
            "rewire_prob" => self.rewire_prob = parse(key, value)?,
            "coupling" => self.coupling = parse(key, value)?,
            "dt" => self.dt = parse(key, value)?,
            "binding_threshold" => self.binding_threshold = parse(key, value)?,
            "freq_std" => self.freq_std = parse(key, value)?,
            "noise_std" => self.noise_std = parse(key, value)?,
            "coherence_min" => self.coherence_min = parse(key, value)?,
            "coherence_max" => self.coherence_max = parse(key, value)?,
            "byz_fraction" => self.byz_fraction = parse(key, value)?,
            "step_budget" => self.step_budget = parse(key, value)?,
            "entropy_bins" => self.entropy_bins = parse(key, value)?,
            "entropy_gate" => {
                self.entropy_gate = match value.trim() {
                    "" | "none" | "off" => None,
                    v => Some(parse(key, v)?),
                }
            }
            "qss_k" => self.qss_k = parse(key, value)?,
            "qss_n" => self.qss_n = parse(key, value)?,
            "prime" => self.prime = parse(key, value)?,
            "flip_model" => self.flip_model = value.trim().parse()?,
            "honest_value" => self.honest_value = parse(key, value)?,
            "honest_split" => self.honest_split = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            other => return Err(OrchidError::Parse(format!("unknown parameter {other:?}"))),
        }
        Ok(())
    }

    /// Apply a single `key=value` assignment.
    pub fn apply_assignment(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = assignment
            .split_once('=')
            .ok_or_else(|| OrchidError::Parse(format!("expected key=value, got {assignment:?}")))?;
        self.set(k, v)
    }

    /// Apply every `key=value` line of a flat text file. Blank lines and
    /// lines starting with `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            self.apply_assignment(line)?;
        }
        Ok(())
    }

    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path)?;
        self.apply_text(&text)
    }

    /// Render as the flat `key=value` format read by [`OrchidParams::apply_text`].
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            let _ = writeln!(out, "{key}={}", self.value_text(key));
        }
        out
    }

    fn value_text(&self, key: &str) -> String {
        match key {
            "n" => self.n.to_string(),
            "mean_degree" => self.mean_degree.to_string(),
            "rewire_prob" => self.rewire_prob.to_string(),
            "coupling" => self.coupling.to_string(),
            "dt" => self.dt.to_string(),
            "binding_threshold" => self.binding_threshold.to_string(),
            "freq_std" => self.freq_std.to_string(),
            "noise_std" => self.noise_std.to_string(),
            "coherence_min" => self.coherence_min.to_string(),
            "coherence_max" => self.coherence_max.to_string(),
            "byz_fraction" => self.byz_fraction.to_string(),
            "step_budget" => self.step_budget.to_string(),
            "entropy_bins" => self.entropy_bins.to_string(),
            "entropy_gate" => self.entropy_gate.map_or("none".into(), |g| g.to_string()),
            "qss_k" => self.qss_k.to_string(),
            "qss_n" => self.qss_n.to_string(),
            "prime" => self.prime.to_string(),
            "flip_model" => self.flip_model.to_string(),
            "honest_value" => self.honest_value.to_string(),
            "honest_split" => self.honest_split.to_string(),
            "seed" => self.seed.to_string(),
            _ => unreachable!("unknown key {key}"),
        }
    }

    /// Check every invariant, returning the parameters unchanged on success.
    /// The error names the first violated invariant.
    pub fn validate(self) -> Result<Self> {
        let p = &self;
        let finite = [
            ("rewire_prob", p.rewire_prob),
            ("coupling", p.coupling),
            ("dt", p.dt),
            ("binding_threshold", p.binding_threshold),
            ("freq_std", p.freq_std),
            ("noise_std", p.noise_std),
            ("coherence_min", p.coherence_min),
            ("coherence_max", p.coherence_max),
            ("byz_fraction", p.byz_fraction),
            ("honest_split", p.honest_split),
        ];
        if let Some((name, _)) = finite.iter().find(|(_, v)| !v.is_finite()) {
            return Err(invalid(format!("{name} must be finite")));
        }
        if p.n < 2 {
            return Err(invalid(format!("n must be at least 2, got {}", p.n)));
        }
        if p.mean_degree % 2 != 0 {
            return Err(invalid(format!("mean_degree must be even, got {}", p.mean_degree)));
        }
        if p.mean_degree == 0 || p.mean_degree >= p.n {
            return Err(invalid(format!(
                "mean_degree must satisfy 0 < mean_degree < n, got {} with n={}",
                p.mean_degree, p.n
            )));
        }
        if !(0.0..=1.0).contains(&p.rewire_prob) {
            return Err(invalid("rewire_prob must lie in [0, 1]"));
        }
        if !(p.binding_threshold > 0.0 && p.binding_threshold <= 1.0) {
            return Err(invalid("binding_threshold must lie in (0, 1]"));
        }
        if p.dt <= 0.0 {
            return Err(invalid("dt must be positive"));
        }
        if p.coupling < 0.0 || p.freq_std < 0.0 || p.noise_std < 0.0 {
            return Err(invalid("coupling, freq_std and noise_std must be non-negative"));
        }
        if !(0.0..=1.0).contains(&p.coherence_min) || !(0.0..=1.0).contains(&p.coherence_max) {
            return Err(invalid("coherence bounds must lie in [0, 1]"));
        }
        if p.coherence_min > p.coherence_max {
            return Err(invalid("coherence_min must not exceed coherence_max"));
        }
        if !(0.0..0.5).contains(&p.byz_fraction) {
            return Err(invalid("byz_fraction must lie in [0, 0.5)"));
        }
        if 2 * p.byzantine_count() >= p.n {
            return Err(invalid("Byzantine nodes must leave an honest strict majority"));
        }
        if p.step_budget == 0 {
            return Err(invalid("step_budget must be positive"));
        }
        if p.entropy_bins < 2 {
            return Err(invalid("entropy_bins must be at least 2"));
        }
        if let Some(g) = p.entropy_gate {
            if !(g.is_finite() && g > 0.0) {
                return Err(invalid("entropy_gate must be a positive number of nats"));
            }
        }
        if p.qss_k < 1 || p.qss_k > p.qss_n {
            return Err(invalid(format!(
                "qss_k must satisfy 1 <= qss_k <= qss_n, got k={} n={}",
                p.qss_k, p.qss_n
            )));
        }
        if !crate::qss::is_prime(p.prime) {
            return Err(invalid(format!("prime {} is not prime", p.prime)));
        }
        if p.prime <= p.qss_n as u64 {
            return Err(invalid("prime must exceed qss_n"));
        }
        if p.honest_value > MAX_VALUE {
            return Err(invalid(format!("honest_value must lie in 0..={MAX_VALUE}")));
        }
        if !(0.0..1.0).contains(&p.honest_split) {
            return Err(invalid("honest_split must lie in [0, 1)"));
        }
        Ok(self)
    }
}

/// `K_c = 2 / (pi g(0))` for zero-mean normal frequencies with standard
/// deviation `freq_std`, i.e. `2 freq_std sqrt(2 pi) / pi`.
pub fn theoretical_critical_coupling(freq_std: f64) -> Result<f64> {
    if !(freq_std > 0.0) || !freq_std.is_finite() {
        return Err(invalid("freq_std must be positive"));
    }
    Ok(2.0 * freq_std * (2.0 * PI).sqrt() / PI)
}
