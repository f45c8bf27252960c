//! Coherence-weighted `(k, n)` Shamir secret sharing over a prime field.
//!
//! Shares pass through a decoherence channel that flips bits of the share
//! value in proportion to `(1 - c)^2`. Under the default deterministic-floor
//! flip count a share is untouched until `c` drops below roughly
//! `1 - 1/sqrt(B_s)`, where `B_s` is the share's bit-length exponent, and the
//! reconstruction fidelity collapses abruptly below that point.

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{OrchidError, Result};
use crate::rng;

/// A share point `(x, y)` with `y` a field element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Share {
    pub x: u64,
    pub y: u64,
}

/// How many bits the decoherence channel flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FlipModel {
    /// Exactly `floor((1 - c)^2 * B_s)` distinct bits.
    #[default]
    DeterministicFloor,
    /// Each of the `B_s + 1` low bits flips independently with probability
    /// `min(1, (1 - c)^2)`.
    Binomial,
}

impl fmt::Display for FlipModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FlipModel::DeterministicFloor => "deterministic",
            FlipModel::Binomial => "binomial",
        })
    }
}

impl FromStr for FlipModel {
    type Err = OrchidError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "deterministic" | "floor" | "deterministic_floor" => Ok(FlipModel::DeterministicFloor),
            "binomial" => Ok(FlipModel::Binomial),
            other => Err(OrchidError::Parse(format!("unknown flip model {other:?}"))),
        }
    }
}

fn mul_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 * b as u128) % p as u128) as u64
}

fn add_mod(a: u64, b: u64, p: u64) -> u64 {
    ((a as u128 + b as u128) % p as u128) as u64
}

fn sub_mod(a: u64, b: u64, p: u64) -> u64 {
    add_mod(a, p - b % p, p)
}

fn pow_mod(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, p);
        }
        base = mul_mod(base, base, p);
        exp >>= 1;
    }
    acc
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

/// Deterministic Miller-Rabin, exact for all `u64`.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n % b == 0 {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Dealer polynomial `a_0 + a_1 x + ... + a_{k-1} x^{k-1}` with `a_0` the secret.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SecretPolynomial {
    coefficients: Vec<u64>,
    prime: u64,
}

impl SecretPolynomial {
    pub fn new(coefficients: Vec<u64>, prime: u64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(OrchidError::Empty("polynomial coefficients"));
        }
        if coefficients.iter().any(|&a| a >= prime) {
            return Err(OrchidError::SecretSharing("coefficient outside the field".into()));
        }
        Ok(Self { coefficients, prime })
    }

    /// Uniformly random higher coefficients.
    pub fn random<R: Rng>(secret: u64, k: usize, prime: u64, rng: &mut R) -> Result<Self> {
        let mut coefficients = Vec::with_capacity(k);
        coefficients.push(secret);
        coefficients.extend((1..k).map(|_| rng.random_range(0..prime)));
        Self::new(coefficients, prime)
    }

    pub fn secret(&self) -> u64 {
        self.coefficients[0]
    }

    pub fn threshold(&self) -> usize {
        self.coefficients.len()
    }

    pub fn eval(&self, x: u64) -> u64 {
        self.coefficients
            .iter()
            .rev()
            .fold(0, |acc, &a| add_mod(mul_mod(acc, x, self.prime), a, self.prime))
    }

    /// Shares at `x = 1..=n`.
    pub fn shares(&self, n: usize) -> Vec<Share> {
        (1..=n as u64).map(|x| Share { x, y: self.eval(x) }).collect()
    }
}

fn check_scheme(k: usize, n: usize, prime: u64) -> Result<()> {
    if k < 1 || k > n {
        return Err(OrchidError::SecretSharing(format!("need 1 <= k <= n, got k={k} n={n}")));
    }
    if (n as u64) >= prime {
        return Err(OrchidError::SecretSharing(format!("share count {n} must be below the prime {prime}")));
    }
    if !is_prime(prime) {
        return Err(OrchidError::SecretSharing(format!("{prime} is not prime")));
    }
    Ok(())
}

/// Split `secret` into `n` shares, any `k` of which reconstruct it.
pub fn split_secret<R: Rng>(secret: u64, k: usize, n: usize, prime: u64, rng: &mut R) -> Result<Vec<Share>> {
    check_scheme(k, n, prime)?;
    if secret >= prime {
        return Err(OrchidError::SecretSharing(format!("secret {secret} is not below the prime {prime}")));
    }
    Ok(SecretPolynomial::random(secret, k, prime, rng)?.shares(n))
}

/// Lagrange interpolation at zero over the first `k` shares by ascending `x`.
pub fn reconstruct(shares: &[Share], k: usize, prime: u64) -> Result<u64> {
    if k == 0 {
        return Err(OrchidError::SecretSharing("threshold must be positive".into()));
    }
    if shares.len() < k {
        return Err(OrchidError::SecretSharing(format!("need {k} shares, got {}", shares.len())));
    }
    let mut sorted = shares.to_vec();
    sorted.sort_by_key(|s| s.x);
    if sorted.windows(2).any(|w| w[0].x == w[1].x) {
        return Err(OrchidError::SecretSharing("duplicate share x values".into()));
    }
    let points = &sorted[..k];
    if points.iter().any(|s| s.x % prime == 0) {
        return Err(OrchidError::SecretSharing("share x must be a non-zero field element".into()));
    }
    let mut secret = 0;
    for (i, si) in points.iter().enumerate() {
        let (mut num, mut den) = (1u64, 1u64);
        for (j, sj) in points.iter().enumerate() {
            if i != j {
                num = mul_mod(num, sj.x % prime, prime);
                den = mul_mod(den, sub_mod(sj.x, si.x, prime), prime);
            }
        }
        let basis = mul_mod(num, inv_mod(den, prime), prime);
        secret = add_mod(secret, mul_mod(si.y % prime, basis, prime), prime);
    }
    Ok(secret)
}

/// `floor(log2(max(y, 1)))`.
pub fn bit_exponent(y: u64) -> u32 {
    63 - y.max(1).leading_zeros()
}

/// Number of flips under the deterministic-floor model.
pub fn flip_count(coherence: f64, bit_exponent: u32) -> usize {
    let q = (1.0 - coherence.clamp(0.0, 1.0)).powi(2);
    // Guard against 0.09 * 30 evaluating to 2.6999999.
    ((q * bit_exponent as f64) + 1e-9).floor() as usize
}

/// Pass a share through the decoherence channel at coherence `coherence`.
pub fn apply_decoherence<R: Rng>(share: Share, coherence: f64, prime: u64, model: FlipModel, rng: &mut R) -> Share {
    if coherence >= 1.0 {
        return share;
    }
    let exp = bit_exponent(share.y);
    let positions = exp as usize + 1;
    let mut mask = 0u64;
    match model {
        FlipModel::DeterministicFloor => {
            let flips = flip_count(coherence, exp).min(positions);
            for bit in index::sample(rng, positions, flips) {
                mask |= 1 << bit;
            }
        }
        FlipModel::Binomial => {
            let q = (1.0 - coherence.clamp(0.0, 1.0)).powi(2).min(1.0);
            for bit in 0..positions {
                if rng.random::<f64>() < q {
                    mask |= 1 << bit;
                }
            }
        }
    }
    Share { x: share.x, y: (share.y ^ mask) % prime }
}

/// Fraction of `trials` in which a random secret survives dealing, decoherence
/// of every share at `coherence`, and reconstruction from `k` random shares.
///
/// Trial `t` uses the substream `(seed, t)`.
pub fn fidelity_estimate(
    k: usize,
    n: usize,
    coherence: f64,
    trials: usize,
    prime: u64,
    model: FlipModel,
    seed: u64,
) -> Result<FidelityPoint> {
    check_scheme(k, n, prime)?;
    if trials == 0 {
        return Err(OrchidError::Empty("fidelity trials"));
    }
    let successes: Vec<bool> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::substream(seed, &[t]);
            let secret = rng.random_range(0..prime);
            let shares = split_secret(secret, k, n, prime, &mut rng).expect("scheme checked");
            let noisy: Vec<Share> = shares
                .into_iter()
                .map(|s| apply_decoherence(s, coherence, prime, model, &mut rng))
                .collect();
            let chosen: Vec<Share> = index::sample(&mut rng, n, k).into_iter().map(|i| noisy[i]).collect();
            reconstruct(&chosen, k, prime).expect("distinct x") == secret
        })
        .collect();
    let hits = successes.iter().filter(|&&ok| ok).count();
    let f = hits as f64 / trials as f64;
    let sem = if trials > 1 {
        let var = successes.iter().map(|&ok| (ok as u8 as f64 - f).powi(2)).sum::<f64>() / (trials - 1) as f64;
        (var / trials as f64).sqrt()
    } else {
        0.0
    };
    Ok(FidelityPoint { coherence, fidelity: f, sem, trials })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FidelityPoint {
    pub coherence: f64,
    pub fidelity: f64,
    pub sem: f64,
    pub trials: usize,
}

/// Fidelity curve over a coherence grid plus the detected threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdScan {
    pub k: usize,
    pub n: usize,
    pub prime: u64,
    pub model: FlipModel,
    pub curve: Vec<FidelityPoint>,
    /// Midpoint of the first grid interval where fidelity crosses 0.5 upward.
    pub threshold: Option<f64>,
}

impl ThresholdScan {
    /// Narrowest coherence window over which fidelity rises from below `lo`
    /// to above `hi`, if the curve spans both levels.
    pub fn transition_width(&self, lo: f64, hi: f64) -> Option<f64> {
        let last_low = self.curve.iter().rev().find(|p| p.fidelity < lo)?;
        let first_high = self.curve.iter().find(|p| p.coherence > last_low.coherence && p.fidelity > hi)?;
        Some(first_high.coherence - last_low.coherence)
    }
}

/// First upward crossing of 0.5 on a sorted curve.
pub fn detect_threshold(curve: &[FidelityPoint]) -> Option<f64> {
    curve
        .windows(2)
        .find(|w| w[0].fidelity < 0.5 && w[1].fidelity >= 0.5)
        .map(|w| 0.5 * (w[0].coherence + w[1].coherence))
}

/// Evaluate fidelity on every grid point. Point `g` uses the substream
/// `(seed, g)`.
pub fn threshold_scan(
    k: usize,
    n: usize,
    coherence_grid: &[f64],
    trials: usize,
    prime: u64,
    model: FlipModel,
    seed: u64,
) -> Result<ThresholdScan> {
    if coherence_grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(OrchidError::InvalidParams("coherence grid must be ascending".into()));
    }
    if coherence_grid.iter().any(|c| !(0.0..=1.0).contains(c)) {
        return Err(OrchidError::InvalidParams("coherence grid must lie in [0, 1]".into()));
    }
    let curve = coherence_grid
        .iter()
        .enumerate()
        .map(|(g, &c)| fidelity_estimate(k, n, c, trials, prime, model, rng::derive_seed(seed, &[g as u64])))
        .collect::<Result<Vec<_>>>()?;
    let threshold = detect_threshold(&curve);
    Ok(ThresholdScan { k, n, prime, model, curve, threshold })
}

/// `lo, lo + step, ..., hi` built from integer multiples to avoid drift.
pub fn coherence_grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let count = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=count).map(|i| ((lo + i as f64 * step) * 1e9).round() / 1e9).collect()
}
