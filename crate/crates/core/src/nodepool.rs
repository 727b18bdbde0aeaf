//! The node pool: every distinct node repeated as often as it occurs in the
//! source piece, sampled with optional exclusions.

use std::collections::BTreeSet;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{node_entries, table_from_entries, NodeEntry, NodeTable};
use crate::FORMAT_VERSION;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePool {
    frequencies: Vec<u64>,
    total: u64,
}

impl NodePool {
    pub fn build(table: &NodeTable) -> NodePool {
        NodePool::from_frequencies(table.frequencies().to_vec()).expect("node tables count every node at least once")
    }

    pub fn from_frequencies(frequencies: Vec<u64>) -> Result<NodePool> {
        if frequencies.is_empty() {
            return Err(Error::InvalidConfig("node pool needs at least one node".into()));
        }
        if let Some(i) = frequencies.iter().position(|&f| f == 0) {
            return Err(Error::InvalidConfig(format!("node {i} has zero frequency")));
        }
        let total = frequencies.iter().sum();
        Ok(NodePool { frequencies, total })
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    pub fn frequencies(&self) -> &[u64] {
        &self.frequencies
    }

    /// Number of entries in the pool, i.e. the length of the source flow.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// `f_j / d`.
    pub fn probability(&self, node: usize) -> f64 {
        self.frequencies[node] as f64 / self.total as f64
    }

    /// Draws a node with probability proportional to its frequency, never
    /// returning an excluded node. Exclusion removes every copy of that node.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, exclude: &BTreeSet<usize>) -> Result<usize> {
        let allowed = |i: usize| !exclude.contains(&i);
        let support: u64 = self
            .frequencies
            .iter()
            .enumerate()
            .filter(|&(i, _)| allowed(i))
            .map(|(_, &f)| f)
            .sum();
        if support == 0 {
            return Err(Error::EmptySamplingSupport);
        }
        let mut ticket = rng.gen_range(0..support);
        for (i, &f) in self.frequencies.iter().enumerate() {
            if !allowed(i) {
                continue;
            }
            if ticket < f {
                return Ok(i);
            }
            ticket -= f;
        }
        unreachable!("ticket is below the support total")
    }
}

/// `pool.json`: frequencies plus, when known, the notes behind each node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolDocument {
    pub format_version: u32,
    pub total: u64,
    pub frequencies: Vec<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<Vec<NodeEntry>>,
}

impl PoolDocument {
    pub fn new(table: &NodeTable) -> PoolDocument {
        let pool = NodePool::build(table);
        PoolDocument {
            format_version: FORMAT_VERSION,
            total: pool.total,
            frequencies: pool.frequencies,
            nodes: Some(node_entries(table)),
        }
    }

    pub fn pool(&self) -> Result<NodePool> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::FormatVersion { found: self.format_version, expected: FORMAT_VERSION });
        }
        let pool = NodePool::from_frequencies(self.frequencies.clone())?;
        if pool.total != self.total {
            return Err(Error::InvalidConfig(format!("pool total {} does not match frequency sum {}", self.total, pool.total)));
        }
        Ok(pool)
    }

    pub fn table(&self) -> Result<Option<NodeTable>> {
        self.nodes.as_deref().map(table_from_entries).transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::seeded;

    #[test]
    fn alternating_flow_is_even() {
        let pool = NodePool::from_frequencies(vec![5, 5]).unwrap();
        assert_eq!(pool.total(), 10);
        assert_eq!(pool.probability(0), 0.5);
    }

    #[test]
    fn exclusion_leaves_single_node() {
        let pool = NodePool::from_frequencies(vec![3, 9, 1, 4]).unwrap();
        let mut rng = seeded(7);
        let exclude = BTreeSet::from([1, 2, 3]);
        for _ in 0..200 {
            assert_eq!(pool.sample(&mut rng, &exclude).unwrap(), 0);
        }
    }

    #[test]
    fn excluding_everything_fails() {
        let pool = NodePool::from_frequencies(vec![1, 2]).unwrap();
        let all = BTreeSet::from([0, 1]);
        assert!(matches!(pool.sample(&mut seeded(1), &all), Err(Error::EmptySamplingSupport)));
    }

    #[test]
    fn zero_frequency_is_rejected() {
        assert!(NodePool::from_frequencies(vec![2, 0]).is_err());
        assert!(NodePool::from_frequencies(vec![]).is_err());
    }

    #[test]
    fn same_seed_same_draws() {
        let pool = NodePool::from_frequencies(vec![4, 1, 7, 2, 2]).unwrap();
        let none = BTreeSet::new();
        let draw = |seed| {
            let mut rng = seeded(seed);
            (0..100).map(|_| pool.sample(&mut rng, &none).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(draw(11), draw(11));
        assert_ne!(draw(11), draw(12));
    }
}
