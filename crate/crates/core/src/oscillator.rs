//! Kuramoto phase dynamics with coherence-scaled decoherence noise.
//!
//! Each node integrates
//!
//! ```text
//! phi_i <- phi_i + dt * [omega_i + K r_i sin(psi_i - phi_i) + eta_i]
//! ```
//!
//! where `r_i e^{i psi_i}` is the mean phasor over the node and its
//! neighbours and `eta_i ~ N(0, ((1 - c_i) sigma_eta)^2)`. All local fields
//! are evaluated from the pre-step phases, so one step is a synchronous
//! update. The all-to-all model is the special case of a complete graph.

use std::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};

use crate::error::{OrchidError, Result};
use crate::params::OrchidParams;
use crate::rng;
use crate::topology::Topology;

/// Per-node phases, natural frequency deviations and coherence levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    pub phases: Vec<f64>,
    pub frequencies: Vec<f64>,
    pub coherences: Vec<f64>,
}

/// Magnitude and angle of a mean unit phasor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanField {
    pub magnitude: f64,
    pub angle: f64,
}

/// Wrap an angle into `[0, 2pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

impl MeanField {
    /// Mean phasor of the given phases; `None` if there are none.
    pub fn of<I: IntoIterator<Item = f64>>(phases: I) -> Option<Self> {
        let (mut re, mut im, mut count) = (0.0, 0.0, 0usize);
        for phi in phases {
            let (s, c) = phi.sin_cos();
            re += c;
            im += s;
            count += 1;
        }
        if count == 0 {
            return None;
        }
        re /= count as f64;
        im /= count as f64;
        Some(Self { magnitude: re.hypot(im).min(1.0), angle: wrap_phase(im.atan2(re)) })
    }
}

impl PhaseState {
    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Replace every coherence with `c`.
    pub fn with_uniform_coherence(mut self, c: f64) -> Self {
        self.coherences.iter_mut().for_each(|x| *x = c);
        self
    }
}

/// Draw phases uniformly on `[0, 2pi)`, frequencies from `N(0, freq_std^2)`
/// and coherences uniformly on `[coherence_min, coherence_max]`.
pub fn init_phase_state<R: Rng>(params: &OrchidParams, rng: &mut R) -> PhaseState {
    let n = params.n;
    let phase_dist = Uniform::new(0.0, TAU).expect("non-empty range");
    let phases = (0..n).map(|_| wrap_phase(phase_dist.sample(rng))).collect();
    let frequencies = (0..n)
        .map(|_| params.freq_std * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let (lo, hi) = (params.coherence_min, params.coherence_max);
    let coherences = (0..n).map(|_| lo + (hi - lo) * rng.random::<f64>()).collect();
    PhaseState { phases, frequencies, coherences }
}

/// Mean field over node `i` and its neighbours.
pub fn local_mean_field(state: &PhaseState, topology: &Topology, i: usize) -> Result<MeanField> {
    let n = state.len();
    if i >= n {
        return Err(OrchidError::IndexOutOfRange { index: i, n });
    }
    let adj = topology.neighbors(i)?;
    let phases = std::iter::once(state.phases[i]).chain(adj.iter().map(|&j| state.phases[j]));
    Ok(MeanField::of(phases).expect("node itself is always present"))
}

/// Local fields for every node, in index order.
pub fn local_mean_fields(state: &PhaseState, topology: &Topology) -> Vec<MeanField> {
    (0..state.len())
        .map(|i| local_mean_field(state, topology, i).expect("index in range"))
        .collect()
}

/// Global Kuramoto order parameter `r e^{i psi} = mean_j e^{i phi_j}`.
pub fn global_order_parameter(phases: &[f64]) -> Result<MeanField> {
    MeanField::of(phases.iter().copied()).ok_or(OrchidError::Empty("phase state"))
}

/// Dynamics constants used by [`phase_step`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dynamics {
    pub coupling: f64,
    pub dt: f64,
    pub noise_std: f64,
}

impl From<&OrchidParams> for Dynamics {
    fn from(p: &OrchidParams) -> Self {
        Self { coupling: p.coupling, dt: p.dt, noise_std: p.noise_std }
    }
}

/// Advance every phase by one synchronous step.
///
/// One `u64` is drawn from `rng` as the step key; node `i`'s noise comes from
/// a substream keyed by `(step key, i)`, so the result does not depend on the
/// order in which nodes are visited.
pub fn phase_step<R: Rng>(
    state: &PhaseState,
    topology: &Topology,
    dynamics: Dynamics,
    rng: &mut R,
) -> PhaseState {
    phase_step_with_fields(state, topology, dynamics, rng).0
}

/// [`phase_step`] that also returns the pre-step local fields it used.
pub fn phase_step_with_fields<R: Rng>(
    state: &PhaseState,
    topology: &Topology,
    dynamics: Dynamics,
    rng: &mut R,
) -> (PhaseState, Vec<MeanField>) {
    let step_key: u64 = rng.random();
    let fields = local_mean_fields(state, topology);
    let phases = state
        .phases
        .iter()
        .zip(&state.frequencies)
        .zip(&state.coherences)
        .zip(&fields)
        .enumerate()
        .map(|(i, (((&phi, &omega), &c), field))| {
            let noise_sd = (1.0 - c) * dynamics.noise_std;
            let eta = if noise_sd > 0.0 {
                let mut node_rng = rng::substream(step_key, &[i as u64]);
                noise_sd * node_rng.sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            let drift = omega + dynamics.coupling * field.magnitude * (field.angle - phi).sin() + eta;
            wrap_phase(phi + dynamics.dt * drift)
        })
        .collect();
    let next = PhaseState {
        phases,
        frequencies: state.frequencies.clone(),
        coherences: state.coherences.clone(),
    };
    (next, fields)
}

/// Shannon entropy (nats) of the phase histogram over `bins` equal-width bins
/// on `[0, 2pi)`.
pub fn binding_entropy(phases: &[f64], bins: usize) -> Result<f64> {
    entropy_of(phases.iter().copied(), bins)
}

pub(crate) fn entropy_of<I: IntoIterator<Item = f64>>(phases: I, bins: usize) -> Result<f64> {
    if bins < 2 {
        return Err(OrchidError::InvalidParams(format!("entropy needs at least 2 bins, got {bins}")));
    }
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    let width = TAU / bins as f64;
    for phi in phases {
        let b = ((wrap_phase(phi) / width) as usize).min(bins - 1);
        counts[b] += 1;
        total += 1;
    }
    if total == 0 {
        return Ok(0.0);
    }
    let h = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / total as f64;
            -p * p.ln()
        })
        .sum::<f64>();
    Ok(h.clamp(0.0, (bins as f64).ln()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use crate::topology::generate_watts_strogatz;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn state(phases: Vec<f64>) -> PhaseState {
        let n = phases.len();
        PhaseState { phases, frequencies: vec![0.0; n], coherences: vec![1.0; n] }
    }

    #[test]
    fn init_moments() {
        let p = OrchidParams { n: 1000, ..Default::default() };
        let s = init_phase_state(&p, &mut seeded(11));
        let n = 1000.0;
        let mean_w = s.frequencies.iter().sum::<f64>() / n;
        assert!(mean_w.abs() < 3.0 * 0.5 / n.sqrt());
        let mean_phi = s.phases.iter().sum::<f64>() / n;
        assert!((mean_phi - PI).abs() < 3.0 * (TAU / 12f64.sqrt()) / n.sqrt());
        assert!(s.coherences.iter().all(|&c| (0.7..=1.0).contains(&c)));
        assert!(s.phases.iter().all(|&x| (0.0..TAU).contains(&x)));
        assert_eq!(s, init_phase_state(&p, &mut seeded(11)));
    }

    #[test]
    fn local_field_cases() {
        let ring = Topology::ring_lattice(5, 2);
        let aligned = state(vec![1.3; 5]);
        let f = local_mean_field(&aligned, &ring, 2).unwrap();
        assert_abs_diff_eq!(f.magnitude, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.angle, 1.3, epsilon = 1e-12);

        let pair = Topology::from_edges(2, &[(0, 1)]).unwrap();
        let f = local_mean_field(&state(vec![0.0, PI]), &pair, 0).unwrap();
        assert_abs_diff_eq!(f.magnitude, 0.0, epsilon = 1e-12);

        // (1 + i - 1) / 3 = i / 3
        let clique = Topology::complete(3);
        let f = local_mean_field(&state(vec![0.0, PI / 2.0, PI]), &clique, 1).unwrap();
        assert_abs_diff_eq!(f.magnitude, 1.0 / 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.angle, PI / 2.0, epsilon = 1e-12);

        assert!(local_mean_field(&aligned, &ring, 5).is_err());
    }

    #[test]
    fn global_order_cases() {
        assert_abs_diff_eq!(global_order_parameter(&[0.4; 7]).unwrap().magnitude, 1.0, epsilon = 1e-12);
        for n in 2..12 {
            let spaced: Vec<f64> = (0..n).map(|j| TAU * j as f64 / n as f64).collect();
            assert!(global_order_parameter(&spaced).unwrap().magnitude < 1e-12);
        }
        assert_abs_diff_eq!(
            global_order_parameter(&[0.0, 0.0, PI]).unwrap().magnitude,
            1.0 / 3.0,
            epsilon = 1e-12
        );
        assert!(global_order_parameter(&[]).is_err());
    }

    #[test]
    fn isolated_node_is_a_fixed_point() {
        let topo = Topology::from_edges(1, &[]).unwrap();
        let s = state(vec![2.0]);
        let dynamics = Dynamics { coupling: 3.0, dt: 0.05, noise_std: 1.0 };
        let next = phase_step(&s, &topo, dynamics, &mut seeded(0));
        assert_eq!(next.phases, vec![2.0]);
    }

    #[test]
    fn coupled_pair_moves_symmetrically() {
        let topo = Topology::from_edges(2, &[(0, 1)]).unwrap();
        let s = state(vec![0.0, 0.2]);
        let dynamics = Dynamics { coupling: 3.0, dt: 0.05, noise_std: 1.0 };
        let next = phase_step(&s, &topo, dynamics, &mut seeded(0));
        let up = next.phases[0]; // moved forward from 0
        let down = 0.2 - next.phases[1];
        assert!(up > 0.0 && down > 0.0);
        assert_abs_diff_eq!(up, down, epsilon = 1e-12);
        // r = cos(0.1), psi = 0.1: each moves dt*K*cos(0.1)*sin(0.1)
        assert_abs_diff_eq!(up, 0.05 * 3.0 * 0.1f64.cos() * 0.1f64.sin(), epsilon = 1e-12);
    }

    #[test]
    fn matches_two_buffer_reference() {
        let p = OrchidParams::default();
        let topo = generate_watts_strogatz(p.n, 6, 0.3, &mut seeded(5)).unwrap();
        let s = init_phase_state(&p, &mut seeded(6));
        let dynamics = Dynamics::from(&p);
        let next = phase_step(&s, &topo, dynamics, &mut seeded(7));

        // Reference: read only from the frozen input buffer, write to a second.
        let step_key: u64 = seeded(7).random();
        let mut out = vec![0.0; p.n];
        for i in (0..p.n).rev() {
            let (mut re, mut im) = (s.phases[i].cos(), s.phases[i].sin());
            for &j in topo.neighbors(i).unwrap() {
                re += s.phases[j].cos();
                im += s.phases[j].sin();
            }
            let m = (topo.degree(i) + 1) as f64;
            let coupling_term = p.coupling * ((im / m) * s.phases[i].cos() - (re / m) * s.phases[i].sin());
            let sd = (1.0 - s.coherences[i]) * p.noise_std;
            let eta = if sd > 0.0 {
                sd * rng::substream(step_key, &[i as u64]).sample::<f64, _>(StandardNormal)
            } else {
                0.0
            };
            out[i] = wrap_phase(s.phases[i] + p.dt * (s.frequencies[i] + coupling_term + eta));
        }
        for (a, b) in next.phases.iter().zip(&out) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn noiseless_identical_oscillators_do_not_desynchronise() {
        let p = OrchidParams::default();
        for seed in 0..20 {
            let topo = generate_watts_strogatz(p.n, 6, 0.3, &mut seeded(seed)).unwrap();
            let s0 = init_phase_state(&p, &mut seeded(1000 + seed));
            let mut s = state(s0.phases);
            let r0 = global_order_parameter(&s.phases).unwrap().magnitude;
            let mut rng = seeded(seed);
            for _ in 0..p.step_budget {
                s = phase_step(&s, &topo, Dynamics::from(&p), &mut rng);
            }
            let r1 = global_order_parameter(&s.phases).unwrap().magnitude;
            assert!(r1 >= r0 - 1e-9, "seed {seed}: {r0} -> {r1}");
        }
    }

    #[test]
    fn entropy_cases() {
        assert_eq!(binding_entropy(&[0.01, 0.02, 0.03], 36).unwrap(), 0.0);
        let bins = 8;
        let uniform: Vec<f64> = (0..24).map(|j| (j % bins) as f64 * TAU / bins as f64 + 0.1).collect();
        assert_abs_diff_eq!(binding_entropy(&uniform, bins).unwrap(), (bins as f64).ln(), epsilon = 1e-12);
        let two = [0.1, 0.1, PI + 0.1, PI + 0.1];
        assert_abs_diff_eq!(binding_entropy(&two, 4).unwrap(), 2f64.ln(), epsilon = 1e-12);
        assert!(binding_entropy(&two, 1).is_err());
    }

    #[test]
    fn wrapping_stays_in_range() {
        for x in [-1e-18, -TAU, TAU, 3.0 * TAU + 0.5, -0.5] {
            let w = wrap_phase(x);
            assert!((0.0..TAU).contains(&w), "{x} -> {w}");
        }
    }

    proptest::proptest! {
        #[test]
        fn rotation_invariance(phases in proptest::collection::vec(0.0f64..TAU, 1..40), shift in -10.0f64..10.0) {
            let rotated: Vec<f64> = phases.iter().map(|&p| wrap_phase(p + shift)).collect();
            let r0 = global_order_parameter(&phases).unwrap().magnitude;
            let r1 = global_order_parameter(&rotated).unwrap().magnitude;
            proptest::prop_assert!((r0 - r1).abs() < 1e-9);
            proptest::prop_assert!((0.0..=1.0).contains(&r0));
            let h = binding_entropy(&phases, 36).unwrap();
            proptest::prop_assert!((0.0..=36f64.ln() + 1e-12).contains(&h));
        }

        // Rotating by a whole number of bins permutes the histogram.
        #[test]
        fn entropy_invariant_under_bin_rotation(phases in proptest::collection::vec(0.0f64..TAU, 1..40), k in 0usize..36) {
            let width = TAU / 36.0;
            let shifted: Vec<f64> = phases.iter().map(|&p| {
                let b = ((p / width) as usize).min(35);
                let frac = ((p - b as f64 * width) / width).clamp(0.0, 0.999);
                (((b + k) % 36) as f64 + frac) * width
            }).collect();
            let original: Vec<f64> = phases.iter().map(|&p| {
                let b = ((p / width) as usize).min(35);
                let frac = ((p - b as f64 * width) / width).clamp(0.0, 0.999);
                (b as f64 + frac) * width
            }).collect();
            let h0 = binding_entropy(&original, 36).unwrap();
            let h1 = binding_entropy(&shifted, 36).unwrap();
            proptest::prop_assert!((h0 - h1).abs() < 1e-9);
        }
    }
}
