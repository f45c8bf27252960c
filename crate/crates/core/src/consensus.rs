//! Phase-gated consensus: lock-step beacon rounds, binding-triggered
//! commitment with a majority vote, and secret-shared commit digests.
//!
//! Per round every node beacons `(id, value, phase, coherence)` to its
//! neighbours, all phases advance together, and each uncommitted node whose
//! pre-step local order parameter reached the binding threshold commits.
//! Honest nodes commit to the majority of the values they just received plus
//! their own; Byzantine nodes redraw a random value every round, follow the
//! same phase dynamics, and commit to whatever value they hold when they bind.

use std::collections::BTreeMap;

use rand::seq::index;
use rand::Rng;

use crate::error::{OrchidError, Result};
use crate::oscillator::{self, Dynamics, PhaseState};
use crate::params::{OrchidParams, MAX_VALUE};
use crate::qss::{self, Share};
use crate::rng::{self, SimRng};
use crate::topology::{self, Topology};

/// Per-node protocol state. Phase, frequency and coherence live in the
/// shared [`PhaseState`] at the same index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeState {
    pub id: usize,
    pub value: u32,
    pub byzantine: bool,
    pub committed_value: Option<u32>,
    pub commit_step: Option<usize>,
}

impl NodeState {
    pub fn honest(id: usize, value: u32) -> Self {
        Self { id, value, byzantine: false, committed_value: None, commit_step: None }
    }

    pub fn is_committed(&self) -> bool {
        self.committed_value.is_some()
    }
}

/// What a node broadcasts to its neighbours each round.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Beacon {
    pub sender: usize,
    pub value: u32,
    pub phase: f64,
    pub coherence: f64,
}

/// Shares of a committed node's digest, one per recipient neighbour.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DealtShares {
    pub dealer: usize,
    pub secret: u64,
    pub shares: Vec<(usize, Share)>,
}

/// Full simulation state between rounds.
#[derive(Debug, Clone)]
pub struct World {
    pub phases: PhaseState,
    pub nodes: Vec<NodeState>,
    /// Rounds completed so far.
    pub round: usize,
    pub messages: u64,
    pub dealt: Vec<DealtShares>,
    /// Order in which nodes committed (ties by id).
    pub commit_order: Vec<usize>,
}

impl World {
    pub fn new(phases: PhaseState, nodes: Vec<NodeState>) -> Result<Self> {
        if phases.len() != nodes.len() {
            return Err(OrchidError::InvalidParams(format!(
                "{} phases for {} nodes",
                phases.len(),
                nodes.len()
            )));
        }
        Ok(Self { phases, nodes, round: 0, messages: 0, dealt: Vec::new(), commit_order: Vec::new() })
    }

    pub fn honest_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.byzantine).count()
    }

    pub fn honest_committed(&self) -> usize {
        self.nodes.iter().filter(|n| !n.byzantine && n.is_committed()).count()
    }

    pub fn all_honest_committed(&self) -> bool {
        self.nodes.iter().all(|n| n.byzantine || n.is_committed())
    }
}

/// Most frequent value, ties broken toward the smallest.
pub fn majority<I: IntoIterator<Item = u32>>(values: I) -> Result<u32> {
    let mut counts = BTreeMap::new();
    for v in values {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    // max_by_key keeps the last maximum, so iterate descending by value.
    counts
        .into_iter()
        .rev()
        .max_by_key(|&(_, c)| c)
        .map(|(v, _)| v)
        .ok_or(OrchidError::Empty("majority vote"))
}

/// Majority over `own` and `received`. Ties go to `own` when it is among the
/// most frequent values, otherwise to the smallest tied value.
pub fn majority_preferring_own(own: u32, received: &[u32]) -> u32 {
    let mut counts = BTreeMap::new();
    for &v in std::iter::once(&own).chain(received) {
        *counts.entry(v).or_insert(0usize) += 1;
    }
    let top = counts.values().copied().max().unwrap_or(0);
    if counts[&own] == top {
        own
    } else {
        counts.into_iter().find(|&(_, c)| c == top).map(|(v, _)| v).unwrap_or(own)
    }
}

/// FNV-1a over the decimal text of `value`, reduced mod `prime`.
pub fn hash_value(value: u32, prime: u64) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    let h = value
        .to_string()
        .bytes()
        .fold(OFFSET, |h, b| (h ^ b as u64).wrapping_mul(PRIME));
    h % prime
}

/// Random proposal for a Byzantine node.
fn byzantine_value<R: Rng>(rng: &mut R) -> u32 {
    rng.random_range(0..=MAX_VALUE)
}

/// Run one synchronous round in place.
pub fn consensus_round(world: &mut World, params: &OrchidParams, topology: &Topology, rng: &mut SimRng) -> Result<()> {
    let n = world.nodes.len();
    if topology.n() != n {
        return Err(OrchidError::InvalidParams(format!("topology has {} nodes, world has {n}", topology.n())));
    }
    let step = world.round + 1;

    for node in world.nodes.iter_mut().filter(|n| n.byzantine) {
        node.value = byzantine_value(rng);
    }
    let beacons: Vec<Beacon> = world
        .nodes
        .iter()
        .map(|node| Beacon {
            sender: node.id,
            value: node.value,
            phase: world.phases.phases[node.id],
            coherence: world.phases.coherences[node.id],
        })
        .collect();
    world.messages += topology.degree_sum() as u64;

    let (next, fields) = oscillator::phase_step_with_fields(&world.phases, topology, Dynamics::from(params), rng);

    let share_seed: u64 = rng.random();
    for i in 0..n {
        if world.nodes[i].is_committed() || fields[i].magnitude < params.binding_threshold {
            continue;
        }
        let neighbours = topology.neighbors(i)?;
        if let Some(gate) = params.entropy_gate {
            let local = std::iter::once(beacons[i].phase).chain(neighbours.iter().map(|&j| beacons[j].phase));
            if oscillator::entropy_of(local, params.entropy_bins)? >= gate {
                continue;
            }
        }
        let node = &mut world.nodes[i];
        let decided = if node.byzantine {
            node.value
        } else {
            let received: Vec<u32> = neighbours.iter().map(|&j| beacons[j].value).collect();
            majority_preferring_own(node.value, &received)
        };
        node.committed_value = Some(decided);
        node.commit_step = Some(step);
        world.commit_order.push(i);
        if !node.byzantine {
            if let Some(dealt) = deal_shares(i, decided, neighbours, params, share_seed)? {
                world.dealt.push(dealt);
            }
        }
    }

    world.phases = next;
    world.round = step;
    Ok(())
}

/// Shares of `hash_value(decided)` to the first `min(degree, qss_n)`
/// neighbours; nothing if that is fewer than `qss_k`.
fn deal_shares(
    dealer: usize,
    decided: u32,
    neighbours: &[usize],
    params: &OrchidParams,
    share_seed: u64,
) -> Result<Option<DealtShares>> {
    let count = neighbours.len().min(params.qss_n);
    if count < params.qss_k {
        return Ok(None);
    }
    let secret = hash_value(decided, params.prime);
    let mut rng = rng::substream(share_seed, &[dealer as u64]);
    let shares = qss::split_secret(secret, params.qss_k, count, params.prime, &mut rng)?;
    Ok(Some(DealtShares { dealer, secret, shares: neighbours[..count].iter().copied().zip(shares).collect() }))
}

/// Result of one consensus run.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsensusOutcome {
    pub converged: bool,
    pub consensus_value: Option<u32>,
    /// Latest honest commit step; `None` unless every honest node committed.
    pub steps_to_converge: Option<usize>,
    pub rounds_executed: usize,
    pub message_count: u64,
    /// Beacons per round, `sum_i degree(i)`.
    pub messages_per_round: u64,
    pub r_series: Vec<f64>,
    pub entropy_series: Vec<f64>,
    pub commit_fraction_series: Vec<f64>,
    pub final_r: f64,
    /// `None` when there was no consensus or the first honest committer dealt
    /// fewer than `qss_k` shares.
    pub qss_ok: Option<bool>,
    pub byzantine: Vec<bool>,
    pub committed: Vec<bool>,
    pub topology: Topology,
}

impl ConsensusOutcome {
    /// Convergence time in simulated seconds.
    pub fn convergence_seconds(&self, dt: f64) -> Option<f64> {
        self.steps_to_converge.map(|s| s as f64 * dt)
    }

    pub fn messages_cumulative(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.rounds_executed as u64).map(|r| r * self.messages_per_round)
    }
}

/// Initial world: random Byzantine subset, honest proposals, phase state.
pub fn init_world(params: &OrchidParams, rng: &mut SimRng) -> Result<World> {
    let phases = oscillator::init_phase_state(params, rng);
    let n = params.n;
    let mut byzantine = vec![false; n];
    for i in index::sample(rng, n, params.byzantine_count()) {
        byzantine[i] = true;
    }
    let honest: Vec<usize> = (0..n).filter(|&i| !byzantine[i]).collect();
    let split = (params.honest_split * honest.len() as f64).floor() as usize;
    let alternative = (params.honest_value + 1) % (MAX_VALUE + 1);
    let mut nodes: Vec<NodeState> = (0..n).map(|i| NodeState::honest(i, params.honest_value)).collect();
    for &i in honest.iter().take(split) {
        nodes[i].value = alternative;
    }
    for (node, &b) in nodes.iter_mut().zip(&byzantine) {
        if b {
            node.byzantine = true;
            node.value = byzantine_value(rng);
        }
    }
    World::new(phases, nodes)
}

/// Simulate until every honest node has committed or the step budget runs out.
pub fn run_consensus(params: &OrchidParams, seed: u64) -> Result<ConsensusOutcome> {
    let params = params.clone().validate()?;
    let topology = topology::generate_watts_strogatz(
        params.n,
        params.mean_degree,
        params.rewire_prob,
        &mut rng::substream(seed, &[0]),
    )?;
    let world = init_world(&params, &mut rng::substream(seed, &[1]))?;
    run_world(world, &params, topology, seed)
}

/// Drive an already initialised world; exposed for custom topologies.
pub fn run_world(mut world: World, params: &OrchidParams, topology: Topology, seed: u64) -> Result<ConsensusOutcome> {
    let mut round_rng = rng::substream(seed, &[2]);
    let honest = world.honest_count().max(1) as f64;
    let mut r_series = Vec::new();
    let mut entropy_series = Vec::new();
    let mut commit_fraction_series = Vec::new();

    while world.round < params.step_budget && !world.all_honest_committed() {
        consensus_round(&mut world, params, &topology, &mut round_rng)?;
        r_series.push(oscillator::global_order_parameter(&world.phases.phases)?.magnitude);
        entropy_series.push(oscillator::binding_entropy(&world.phases.phases, params.entropy_bins)?);
        commit_fraction_series.push(world.honest_committed() as f64 / honest);
    }

    let honest_nodes = || world.nodes.iter().filter(|n| !n.byzantine);
    let all_committed = world.all_honest_committed();
    let first_value = honest_nodes().next().and_then(|n| n.committed_value);
    let converged = all_committed && honest_nodes().all(|n| n.committed_value == first_value);
    let consensus_value = if converged { first_value } else { None };
    let steps_to_converge = if all_committed { honest_nodes().filter_map(|n| n.commit_step).max() } else { None };

    let qss_ok = consensus_value.and_then(|v| check_first_dealer(&world, v, params, seed));

    Ok(ConsensusOutcome {
        converged,
        consensus_value,
        steps_to_converge,
        rounds_executed: world.round,
        message_count: world.messages,
        messages_per_round: topology.degree_sum() as u64,
        final_r: oscillator::global_order_parameter(&world.phases.phases)?.magnitude,
        r_series,
        entropy_series,
        commit_fraction_series,
        qss_ok,
        byzantine: world.nodes.iter().map(|n| n.byzantine).collect(),
        committed: world.nodes.iter().map(NodeState::is_committed).collect(),
        topology,
    })
}

/// Reconstruct the first honest committer's digest after each share crosses
/// the decoherence channel at its recipient's coherence.
fn check_first_dealer(world: &World, consensus_value: u32, params: &OrchidParams, seed: u64) -> Option<bool> {
    let dealer = world.commit_order.iter().copied().find(|&i| !world.nodes[i].byzantine)?;
    let dealt = world.dealt.iter().find(|d| d.dealer == dealer)?;
    let mut rng = rng::substream(seed, &[3]);
    let received: Vec<Share> = dealt
        .shares
        .iter()
        .map(|&(to, share)| {
            qss::apply_decoherence(share, world.phases.coherences[to], params.prime, params.flip_model, &mut rng)
        })
        .collect();
    let recovered = qss::reconstruct(&received, params.qss_k, params.prime).ok()?;
    Some(recovered == hash_value(consensus_value, params.prime))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn majority_rules() {
        assert_eq!(majority([5, 5, 7]).unwrap(), 5);
        assert_eq!(majority([3, 9]).unwrap(), 3);
        assert_eq!(majority([9, 3]).unwrap(), 3);
        assert_eq!(majority([42]).unwrap(), 42);
        assert_eq!(majority([8, 8, 1, 1, 9]).unwrap(), 1);
        assert!(majority(std::iter::empty()).is_err());
    }

    #[test]
    fn hashes_are_distinct_and_reduced() {
        let p = (1u64 << 31) - 1;
        let mut hashes: Vec<u64> = (0..=MAX_VALUE).map(|v| hash_value(v, p)).collect();
        assert!(hashes.iter().all(|&h| h < p));
        hashes.sort_unstable();
        hashes.dedup();
        assert_eq!(hashes.len(), 101);
        assert_eq!(hash_value(42, p), hash_value(42, p));
        assert!((0..1000).all(|v| hash_value(v, 13) < 13));
    }

    #[test]
    fn hash_matches_reference_fnv1a() {
        // FNV-1a 64 of the bytes "42", computed independently.
        assert_eq!(hash_value(42, u64::MAX), 571_532_774_284_038_691 % u64::MAX);
        assert_eq!(hash_value(42, (1 << 31) - 1), 1_150_193_202);
    }

    fn pair_world(phases: [f64; 2]) -> (World, Topology, OrchidParams) {
        let params = OrchidParams { n: 2, ..Default::default() };
        let state = PhaseState { phases: phases.to_vec(), frequencies: vec![0.0; 2], coherences: vec![1.0; 2] };
        let nodes = vec![NodeState::honest(0, 42), NodeState::honest(1, 42)];
        let topo = Topology::from_edges(2, &[(0, 1)]).unwrap();
        (World::new(state, nodes).unwrap(), topo, params)
    }

    #[test]
    fn synchronised_pair_commits_in_first_round() {
        let (mut world, topo, params) = pair_world([0.5, 0.5]);
        consensus_round(&mut world, &params, &topo, &mut seeded(0)).unwrap();
        for node in &world.nodes {
            assert_eq!(node.committed_value, Some(42));
            assert_eq!(node.commit_step, Some(1));
        }
        assert_eq!(world.messages, 2);
    }

    #[test]
    fn committed_world_keeps_oscillating() {
        let (mut world, topo, params) = pair_world([0.5, 0.5]);
        world.phases.frequencies = vec![1.0, 1.0];
        consensus_round(&mut world, &params, &topo, &mut seeded(0)).unwrap();
        let before = world.nodes.clone();
        let phase_before = world.phases.phases.clone();
        consensus_round(&mut world, &params, &topo, &mut seeded(1)).unwrap();
        assert_eq!(world.nodes, before);
        assert_ne!(world.phases.phases, phase_before);
        assert_eq!(world.messages, 4);
    }

    #[test]
    fn antiphase_pair_does_not_commit() {
        let (mut world, topo, params) = pair_world([0.0, std::f64::consts::PI]);
        consensus_round(&mut world, &params, &topo, &mut seeded(0)).unwrap();
        assert!(world.nodes.iter().all(|n| !n.is_committed()));
    }

    #[test]
    fn entropy_gate_blocks_commit() {
        let (mut world, topo, mut params) = pair_world([0.5, 0.5]);
        params.entropy_gate = Some(1e-6);
        consensus_round(&mut world, &params, &topo, &mut seeded(0)).unwrap();
        assert!(world.nodes.iter().all(|n| n.is_committed()), "both in one bin: entropy 0 < gate");

        let (mut world, topo, mut params) = pair_world([0.05, 0.3]);
        params.entropy_gate = Some(0.5);
        consensus_round(&mut world, &params, &topo, &mut seeded(0)).unwrap();
        assert!(world.nodes.iter().all(|n| !n.is_committed()), "two bins: ln 2 >= gate");
    }

    #[test]
    fn honest_runs_agree_on_common_value() {
        let params = OrchidParams { n: 30, ..Default::default() };
        for seed in 0..5 {
            let out = run_consensus(&params, seed).unwrap();
            assert!(out.converged);
            assert_eq!(out.consensus_value, Some(42));
            assert_eq!(out.message_count, out.rounds_executed as u64 * out.messages_per_round);
            assert_eq!(out.messages_per_round, 180);
        }
    }

    #[test]
    fn commit_fraction_never_decreases() {
        let params = OrchidParams { n: 30, byz_fraction: 0.25, ..Default::default() };
        let out = run_consensus(&params, 9).unwrap();
        assert!(out.commit_fraction_series.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(out.byzantine.iter().filter(|&&b| b).count(), 7);
    }

    #[test]
    fn runs_are_deterministic() {
        let params = OrchidParams { n: 30, byz_fraction: 0.1, ..Default::default() };
        assert_eq!(run_consensus(&params, 5).unwrap(), run_consensus(&params, 5).unwrap());
    }

    #[test]
    fn small_degree_skips_share_check() {
        let params = OrchidParams { n: 12, mean_degree: 2, rewire_prob: 0.0, ..Default::default() };
        let out = run_consensus(&params, 1).unwrap();
        assert_eq!(out.qss_ok, None);
    }

    #[test]
    fn split_honest_proposals() {
        let params = OrchidParams { n: 30, honest_split: 0.3, ..Default::default() };
        let world = init_world(&params.clone().validate().unwrap(), &mut seeded(2)).unwrap();
        let alt = world.nodes.iter().filter(|n| n.value == 43).count();
        assert_eq!(alt, 9);
    }
}
