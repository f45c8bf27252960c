//! Watts-Strogatz small-world communication graph.

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;

use rand::Rng;

use crate::error::{OrchidError, Result};
use crate::rng;

const MAX_ATTEMPTS: usize = 100;

/// Undirected simple graph stored as sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl Topology {
    /// Build from an edge list, rejecting self-loops, duplicates and
    /// out-of-range endpoints. Connectivity is not required here.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); n];
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(OrchidError::IndexOutOfRange { index: a.max(b), n });
            }
            if a == b {
                return Err(OrchidError::Topology(format!("self-loop at {a}")));
            }
            if !sets[a].insert(b) {
                return Err(OrchidError::Topology(format!("duplicate edge {a}-{b}")));
            }
            sets[b].insert(a);
        }
        Ok(Self::from_sets(sets))
    }

    /// Every pair of distinct nodes connected.
    pub fn complete(n: usize) -> Self {
        let adjacency = (0..n).map(|i| (0..n).filter(|&j| j != i).collect()).collect();
        Self { adjacency, edge_count: n * n.saturating_sub(1) / 2 }
    }

    /// Ring lattice where each node links to `mean_degree / 2` neighbours on
    /// each side.
    pub fn ring_lattice(n: usize, mean_degree: usize) -> Self {
        Self::from_sets(lattice_sets(n, mean_degree))
    }

    fn from_sets(sets: Vec<BTreeSet<usize>>) -> Self {
        let adjacency: Vec<Vec<usize>> = sets.into_iter().map(|s| s.into_iter().collect()).collect();
        let edge_count = adjacency.iter().map(Vec::len).sum::<usize>() / 2;
        Self { adjacency, edge_count }
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    /// Sorted neighbours of node `i`.
    pub fn neighbors(&self, i: usize) -> Result<&[usize]> {
        self.adjacency
            .get(i)
            .map(Vec::as_slice)
            .ok_or(OrchidError::IndexOutOfRange { index: i, n: self.n() })
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    /// Sum of all degrees, i.e. the number of directed beacons per round.
    pub fn degree_sum(&self) -> usize {
        2 * self.edge_count
    }

    pub fn mean_degree(&self) -> f64 {
        self.degree_sum() as f64 / self.n() as f64
    }

    pub fn is_connected(&self) -> bool {
        let n = self.n();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut visited = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    visited += 1;
                    queue.push_back(v);
                }
            }
        }
        visited == n
    }

    /// Edges as `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(i, adj)| adj.iter().filter(move |&&j| j > i).map(move |&j| (i, j)))
            .collect()
    }

    /// One `i j` pair per line with `i < j`, sorted.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for (i, j) in self.edges() {
            let _ = writeln!(out, "{i} {j}");
        }
        out
    }

    pub fn from_edge_list(n: usize, text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let mut it = line.split_whitespace().map(str::parse::<usize>);
            match (it.next(), it.next(), it.next()) {
                (Some(Ok(a)), Some(Ok(b)), None) => edges.push((a, b)),
                _ => return Err(OrchidError::Parse(format!("bad edge line {line:?}"))),
            }
        }
        Self::from_edges(n, &edges)
    }
}

fn lattice_sets(n: usize, mean_degree: usize) -> Vec<BTreeSet<usize>> {
    let mut sets = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=mean_degree / 2 {
            let v = (u + j) % n;
            sets[u].insert(v);
            sets[v].insert(u);
        }
    }
    sets
}

fn rewire_once<R: Rng>(n: usize, mean_degree: usize, rewire_prob: f64, rng: &mut R) -> Topology {
    let mut sets = lattice_sets(n, mean_degree);
    if rewire_prob > 0.0 {
        for j in 1..=mean_degree / 2 {
            for u in 0..n {
                let v = (u + j) % n;
                if rng.random::<f64>() >= rewire_prob {
                    continue;
                }
                // u already touches everyone; nothing to rewire to.
                if sets[u].len() >= n - 1 {
                    continue;
                }
                let mut w = rng.random_range(0..n);
                while w == u || sets[u].contains(&w) {
                    w = rng.random_range(0..n);
                }
                sets[u].remove(&v);
                sets[v].remove(&u);
                sets[u].insert(w);
                sets[w].insert(u);
            }
        }
    }
    Topology::from_sets(sets)
}

/// Ring lattice with each clockwise edge's far endpoint rewired with
/// probability `rewire_prob` to a uniformly chosen new neighbour.
///
/// Disconnected draws are discarded and regenerated from a fresh substream,
/// up to 100 attempts.
pub fn generate_watts_strogatz<R: Rng>(
    n: usize,
    mean_degree: usize,
    rewire_prob: f64,
    rng: &mut R,
) -> Result<Topology> {
    if mean_degree % 2 != 0 || mean_degree >= n {
        return Err(OrchidError::InvalidParams(format!(
            "mean_degree must be even and below n (got {mean_degree}, n={n})"
        )));
    }
    if !(0.0..=1.0).contains(&rewire_prob) {
        return Err(OrchidError::InvalidParams("rewire_prob must lie in [0, 1]".into()));
    }
    for _ in 0..MAX_ATTEMPTS {
        let mut attempt_rng = rng::seeded(rng.random());
        let topo = rewire_once(n, mean_degree, rewire_prob, &mut attempt_rng);
        if topo.is_connected() {
            return Ok(topo);
        }
    }
    Err(OrchidError::Topology(format!(
        "no connected graph after {MAX_ATTEMPTS} attempts (n={n}, k={mean_degree}, p={rewire_prob})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;
    use proptest::prelude::*;

    #[test]
    fn default_size_edge_count() {
        let t = generate_watts_strogatz(30, 6, 0.3, &mut seeded(1)).unwrap();
        assert_eq!(t.edge_count(), 90);
        assert!(t.is_connected());
    }

    #[test]
    fn zero_rewiring_is_ring() {
        for seed in 0..5 {
            let t = generate_watts_strogatz(10, 4, 0.0, &mut seeded(seed)).unwrap();
            assert_eq!(t, Topology::ring_lattice(10, 4));
            assert!(t.adjacency().iter().all(|a| a.len() == 4));
        }
        let ring = Topology::ring_lattice(10, 4);
        assert_eq!(ring.neighbors(0).unwrap(), &[1, 2, 8, 9]);
    }

    #[test]
    fn deterministic_for_seed() {
        let a = generate_watts_strogatz(25, 6, 0.3, &mut seeded(99)).unwrap();
        let b = generate_watts_strogatz(25, 6, 0.3, &mut seeded(99)).unwrap();
        assert_eq!(a.to_edge_list(), b.to_edge_list());
    }

    #[test]
    fn out_of_range_neighbour_query() {
        let t = Topology::ring_lattice(6, 2);
        assert!(matches!(t.neighbors(6), Err(OrchidError::IndexOutOfRange { index: 6, n: 6 })));
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(generate_watts_strogatz(10, 3, 0.1, &mut seeded(0)).is_err());
        assert!(generate_watts_strogatz(6, 6, 0.1, &mut seeded(0)).is_err());
        assert!(generate_watts_strogatz(10, 4, 1.5, &mut seeded(0)).is_err());
    }

    #[test]
    fn edge_list_round_trip_and_validation() {
        let t = generate_watts_strogatz(40, 6, 0.5, &mut seeded(3)).unwrap();
        let back = Topology::from_edge_list(40, &t.to_edge_list()).unwrap();
        assert_eq!(t, back);
        assert!(Topology::from_edges(3, &[(0, 0)]).is_err());
        assert!(Topology::from_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(Topology::from_edge_list(3, "0 x\n").is_err());
    }

    proptest! {
        #[test]
        fn structural_invariants(seed in any::<u64>(), n in 8usize..60, half in 1usize..4, p in 0.0f64..=1.0) {
            let k = 2 * half;
            prop_assume!(k < n);
            let t = generate_watts_strogatz(n, k, p, &mut seeded(seed)).unwrap();
            prop_assert_eq!(t.edge_count(), n * k / 2);
            prop_assert!((t.mean_degree() - k as f64).abs() < 1e-12);
            prop_assert!(t.is_connected());
            for i in 0..n {
                let adj = t.neighbors(i).unwrap();
                prop_assert!(!adj.is_empty());
                prop_assert!(!adj.contains(&i));
                prop_assert!(adj.windows(2).all(|w| w[0] < w[1]));
                for &j in adj {
                    prop_assert!(t.neighbors(j).unwrap().contains(&i));
                }
            }
        }
    }
}
