//! Directed acyclic graphs over variable indices.
//!
//! `Dag` keeps a per-node descendant cache so that cycle checks during
//! greedy search are O(1) lookups instead of per-query traversals; the
//! search consults the addable set roughly p² times per accepted edge.

use alloc::vec;
use alloc::vec::Vec;

use crate::bitset::BitSet;
use crate::prior::PriorKnowledge;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GraphError {
    /// Adding the edge would close a directed cycle (includes self-loops).
    #[error("edge {from} -> {to} would create a cycle")]
    Cycle { from: usize, to: usize },
    #[error("edge {from} -> {to} is already present")]
    DuplicateEdge { from: usize, to: usize },
    #[error("node index {index} out of range for {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },
}

/// Directed acyclic graph on nodes `0..node_count`.
///
/// Every mutation goes through [`Dag::add_edge_checked`], which re-verifies
/// acyclicity and keeps the descendant cache consistent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    node_count: usize,
    children: Vec<Vec<usize>>,
    parents: Vec<Vec<usize>>,
    /// `reach[v]` holds the strict descendants of `v`.
    reach: Vec<BitSet>,
    edge_count: usize,
}

impl Dag {
    pub fn new(node_count: usize) -> Self {
        assert!(node_count > 0, "a dag needs at least one node");
        Self {
            node_count,
            children: vec![Vec::new(); node_count],
            parents: vec![Vec::new(); node_count],
            reach: vec![BitSet::new(node_count); node_count],
            edge_count: 0,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// Sorted parent indices of `node`.
    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    /// Sorted child indices of `node`.
    pub fn children(&self, node: usize) -> &[usize] {
        &self.children[node]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.children[from].binary_search(&to).is_ok()
    }

    /// Whether a directed path from `from` to `to` exists.
    pub fn reaches(&self, from: usize, to: usize) -> bool {
        self.reach[from].get(to)
    }

    /// All edges in ascending `(source, target)` order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.edge_count);
        for (k, ch) in self.children.iter().enumerate() {
            for &l in ch {
                out.push((k, l));
            }
        }
        out
    }

    fn check_node(&self, i: usize) -> Result<(), GraphError> {
        if i >= self.node_count {
            return Err(GraphError::NodeOutOfRange { index: i, nodes: self.node_count });
        }
        Ok(())
    }

    /// Inserts the edge `from -> to`, rejecting duplicates and cycles.
    ///
    /// On success the descendant cache is updated incrementally: every node
    /// that reaches `from` (including `from` itself) gains the descendants
    /// of `to` plus `to`.
    pub fn add_edge_checked(&mut self, from: usize, to: usize) -> Result<(), GraphError> {
        self.check_node(from)?;
        self.check_node(to)?;
        if from == to {
            return Err(GraphError::Cycle { from, to });
        }
        if self.has_edge(from, to) {
            return Err(GraphError::DuplicateEdge { from, to });
        }
        if self.reach[to].get(from) {
            return Err(GraphError::Cycle { from, to });
        }

        let mut gained = self.reach[to].clone();
        gained.set(to);
        for v in 0..self.node_count {
            if v == from || self.reach[v].get(from) {
                self.reach[v].union_with(&gained);
            }
        }

        let pos = self.children[from].binary_search(&to).unwrap_err();
        self.children[from].insert(pos, to);
        let pos = self.parents[to].binary_search(&from).unwrap_err();
        self.parents[to].insert(pos, from);
        self.edge_count += 1;
        Ok(())
    }

    /// Builds a dag from an edge list, failing on the first duplicate or cycle.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, GraphError> {
        let mut dag = Dag::new(node_count);
        for (k, l) in edges {
            dag.add_edge_checked(k, l)?;
        }
        Ok(dag)
    }

    /// Pairs whose insertion keeps the graph acyclic and is not forbidden
    /// by `prior`, in ascending `(source, target)` order.
    ///
    /// Existing edges are excluded; `prior` must already be normalized so
    /// that tier and root implications are folded into its forbidden mask.
    pub fn addable_edges(&self, prior: &PriorKnowledge) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for k in 0..self.node_count {
            for l in 0..self.node_count {
                if k == l || prior.forbids(k, l) || self.has_edge(k, l) || self.reach[l].get(k) {
                    continue;
                }
                out.push((k, l));
            }
        }
        out
    }

    /// Deterministic topological order: among ready nodes the smallest
    /// index always comes first.
    pub fn topological_order(&self) -> NodeOrdering {
        let mut indegree: Vec<usize> = (0..self.node_count).map(|v| self.parents[v].len()).collect();
        let mut placed = vec![false; self.node_count];
        let mut order = Vec::with_capacity(self.node_count);
        for _ in 0..self.node_count {
            let next = (0..self.node_count)
                .find(|&v| !placed[v] && indegree[v] == 0)
                .expect("acyclicity is a type invariant");
            placed[next] = true;
            order.push(next);
            for &c in &self.children[next] {
                indegree[c] -= 1;
            }
        }
        NodeOrdering::new(order).expect("kahn emits a permutation")
    }
}

/// A permutation of node indices; edges of a compatible dag always point
/// from an earlier to a later position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeOrdering {
    order: Vec<usize>,
    rank: Vec<usize>,
}

impl NodeOrdering {
    /// Builds an ordering from node indices listed first-to-last.
    ///
    /// Returns `None` if `order` is not a permutation of `0..order.len()`.
    pub fn new(order: Vec<usize>) -> Option<Self> {
        let n = order.len();
        let mut rank = vec![usize::MAX; n];
        for (pos, &v) in order.iter().enumerate() {
            if v >= n || rank[v] != usize::MAX {
                return None;
            }
            rank[v] = pos;
        }
        Some(Self { order, rank })
    }

    pub fn identity(n: usize) -> Self {
        Self::new((0..n).collect()).expect("identity is a permutation")
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Nodes first-to-last.
    pub fn nodes(&self) -> &[usize] {
        &self.order
    }

    /// Position of `node` in the ordering (0-based).
    pub fn rank(&self, node: usize) -> usize {
        self.rank[node]
    }

    /// Nodes strictly before `node`, ascending by index.
    pub fn predecessors(&self, node: usize) -> Vec<usize> {
        let r = self.rank(node);
        let mut pre: Vec<usize> = self.order[..r].to_vec();
        pre.sort_unstable();
        pre
    }
}
