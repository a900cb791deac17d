//! Background knowledge about the process: station tiers, forbidden
//! edges, and root nodes.
//!
//! All three kinds of constraint are folded into a single forbidden-edge
//! mask when the value is constructed, so downstream code only ever asks
//! one question: may `k -> l` exist?

use alloc::vec::Vec;

use crate::bitset::{BitMatrix, BitSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PriorError {
    #[error("variable index {index} out of range for {nodes} variables")]
    NodeOutOfRange { index: usize, nodes: usize },
    #[error("tier for variable {index} must be a positive integer")]
    InvalidTier { index: usize },
    #[error("a prior needs at least one variable")]
    Empty,
}

/// Normalized prior knowledge over `node_count` variables.
///
/// After construction the forbidden mask already encodes self-loops,
/// edges against the tier order, and edges into root nodes; the tier map
/// and root set are retained only for reporting.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PriorKnowledge {
    tiers: Vec<usize>,
    forbidden: BitMatrix,
    roots: BitSet,
}

impl PriorKnowledge {
    /// Full prior: an explicit tier map plus extra forbidden pairs and roots.
    pub fn new(
        tiers: Vec<usize>,
        forbidden_pairs: &[(usize, usize)],
        roots: &[usize],
    ) -> Result<Self, PriorError> {
        let p = tiers.len();
        if p == 0 {
            return Err(PriorError::Empty);
        }
        for (i, &t) in tiers.iter().enumerate() {
            if t == 0 {
                return Err(PriorError::InvalidTier { index: i });
            }
        }
        let check = |i: usize| {
            if i >= p {
                Err(PriorError::NodeOutOfRange { index: i, nodes: p })
            } else {
                Ok(())
            }
        };

        let mut forbidden = BitMatrix::new(p);
        for k in 0..p {
            forbidden.set(k, k);
            for l in 0..p {
                if tiers[k] > tiers[l] {
                    forbidden.set(k, l);
                }
            }
        }
        for &(k, l) in forbidden_pairs {
            check(k)?;
            check(l)?;
            forbidden.set(k, l);
        }
        let mut root_set = BitSet::new(p);
        for &r in roots {
            check(r)?;
            root_set.set(r);
            for k in 0..p {
                forbidden.set(k, r);
            }
        }
        Ok(Self { tiers, forbidden, roots: root_set })
    }

    /// Single tier, no forbidden edges, no roots: the CAM setting.
    pub fn trivial(node_count: usize) -> Self {
        Self::new(alloc::vec![1; node_count], &[], &[]).expect("trivial prior is valid")
    }

    /// Tier map only.
    pub fn from_tiers(tiers: &[usize]) -> Result<Self, PriorError> {
        Self::new(tiers.to_vec(), &[], &[])
    }

    pub fn node_count(&self) -> usize {
        self.tiers.len()
    }

    pub fn tier(&self, node: usize) -> usize {
        self.tiers[node]
    }

    pub fn tiers(&self) -> &[usize] {
        &self.tiers
    }

    pub fn is_root(&self, node: usize) -> bool {
        self.roots.get(node)
    }

    pub fn roots(&self) -> Vec<usize> {
        self.roots.iter().collect()
    }

    /// Whether the edge `from -> to` is known to be absent.
    pub fn forbids(&self, from: usize, to: usize) -> bool {
        self.forbidden.get(from, to)
    }

    /// Marks `from -> to` as absent (used to fold in screening results).
    pub fn forbid(&mut self, from: usize, to: usize) {
        self.forbidden.set(from, to);
    }

    /// True when the edge crosses from a strictly earlier tier.
    pub fn crosses_tiers(&self, from: usize, to: usize) -> bool {
        self.tiers[from] < self.tiers[to]
    }

    /// Number of distinct tier labels in use.
    pub fn distinct_tiers(&self) -> usize {
        let mut seen: Vec<usize> = self.tiers.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Whether the prior constrains anything beyond self-loops.
    pub fn is_informative(&self) -> bool {
        let p = self.node_count();
        for k in 0..p {
            for l in 0..p {
                if k != l && self.forbidden.get(k, l) {
                    return true;
                }
            }
        }
        false
    }
}
