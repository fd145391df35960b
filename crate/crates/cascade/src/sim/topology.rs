//! Interference structure of the chain.

use super::{SimError, TopologyKind};

/// Transmitter/receiver pairs plus the hidden-interference edges between
/// them. Transmitter `i` sends to receiver `i`; receiver `i` additionally
/// hears the transmitters in `interferers(i)`, whose frames destroy its
/// receptions on any overlap. In a linear chain receiver 0 hears nobody
/// else; in a ring the last transmitter wraps around to interfere there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pairs: Vec<(usize, usize)>,
    interferers: Vec<Vec<usize>>,
}

/// Build the interference graph for a chain of `n_pairs` pairs.
pub fn build_topology(kind: TopologyKind, n_pairs: usize) -> Result<Topology, SimError> {
    if n_pairs < 2 {
        return Err(SimError::invalid("n_pairs", "need at least 2 pairs"));
    }
    let pairs = (0..n_pairs).map(|i| (i, i)).collect();
    let mut interferers = vec![Vec::new(); n_pairs];
    for i in 1..n_pairs {
        interferers[i].push(i - 1);
    }
    if kind == TopologyKind::Ring {
        interferers[0].push(n_pairs - 1);
    }
    Ok(Topology {
        pairs,
        interferers,
    })
}

impl Topology {
    pub fn n_pairs(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    /// Hidden transmitters whose frames destroy receptions at receiver `i`.
    pub fn interferers(&self, receiver: usize) -> &[usize] {
        &self.interferers[receiver]
    }

    /// Receivers whose receptions transmitter `tx` can destroy.
    pub fn victims(&self, tx: usize) -> Vec<usize> {
        (0..self.n_pairs())
            .filter(|&j| self.interferers[j].contains(&tx))
            .collect()
    }

    pub fn interference_edge_count(&self) -> usize {
        self.interferers.iter().map(Vec::len).sum()
    }
}
