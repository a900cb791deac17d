//! Graph-quality metrics.
//!
//! Two distances matter here: the standard structural Hamming distance
//! between two DAGs, and an adapted variant for comparison against
//! partial expert knowledge, where some edges are known to exist ("sure")
//! and others are merely plausible ("possible") and cost nothing.

use alloc::collections::BTreeSet;

use crate::graph::Dag;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricsError {
    #[error("graphs have {left} and {right} nodes; metrics need equal node sets")]
    NodeMismatch { left: usize, right: usize },
    #[error("edge {from} -> {to} is out of range for {nodes} nodes")]
    EdgeOutOfRange { from: usize, to: usize, nodes: usize },
    #[error("self-loop {node} -> {node} is not a valid expert edge")]
    SelfLoop { node: usize },
    #[error("edge {from} -> {to} is listed as both sure and possible")]
    Overlap { from: usize, to: usize },
}

/// Partial expert knowledge: edges known to exist and edges that are
/// plausible but unconfirmed. The union need not be acyclic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpertGraph {
    node_count: usize,
    sure: BTreeSet<(usize, usize)>,
    possible: BTreeSet<(usize, usize)>,
}

impl ExpertGraph {
    pub fn new(
        node_count: usize,
        sure: &[(usize, usize)],
        possible: &[(usize, usize)],
    ) -> Result<Self, MetricsError> {
        let check = |&(from, to): &(usize, usize)| {
            if from >= node_count || to >= node_count {
                Err(MetricsError::EdgeOutOfRange { from, to, nodes: node_count })
            } else if from == to {
                Err(MetricsError::SelfLoop { node: from })
            } else {
                Ok(())
            }
        };
        for e in sure {
            check(e)?;
        }
        let sure_set: BTreeSet<_> = sure.iter().copied().collect();
        let mut possible_set = BTreeSet::new();
        for e in possible {
            check(e)?;
            if sure_set.contains(e) {
                return Err(MetricsError::Overlap { from: e.0, to: e.1 });
            }
            possible_set.insert(*e);
        }
        Ok(Self { node_count, sure: sure_set, possible: possible_set })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn sure_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.sure.iter().copied()
    }

    pub fn possible_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.possible.iter().copied()
    }
}

/// Adapted structural Hamming distance: sure edges missing from the
/// estimate, plus estimated edges depicted nowhere in the expert graph.
/// Possible edges are free in both directions of the comparison.
pub fn ashd(estimated: &Dag, expert: &ExpertGraph) -> Result<usize, MetricsError> {
    if estimated.node_count() != expert.node_count {
        return Err(MetricsError::NodeMismatch {
            left: estimated.node_count(),
            right: expert.node_count,
        });
    }
    let est: BTreeSet<(usize, usize)> = estimated.edges().into_iter().collect();
    let missing_sure = expert.sure.iter().filter(|e| !est.contains(e)).count();
    let undepicted = est
        .iter()
        .filter(|e| !expert.sure.contains(e) && !expert.possible.contains(e))
        .count();
    Ok(missing_sure + undepicted)
}

/// Standard structural Hamming distance; a reversed edge costs 1.
pub fn shd(a: &Dag, b: &Dag) -> Result<usize, MetricsError> {
    if a.node_count() != b.node_count() {
        return Err(MetricsError::NodeMismatch { left: a.node_count(), right: b.node_count() });
    }
    let state = |g: &Dag, i: usize, j: usize| -> u8 {
        if g.has_edge(i, j) {
            1
        } else if g.has_edge(j, i) {
            2
        } else {
            0
        }
    };
    let mut d = 0;
    for i in 0..a.node_count() {
        for j in i + 1..a.node_count() {
            if state(a, i, j) != state(b, i, j) {
                d += 1;
            }
        }
    }
    Ok(d)
}

/// Directed-edge precision and recall of `estimated` against `truth`;
/// an empty reference set scores 1.0 by convention.
pub fn edge_precision_recall(estimated: &Dag, truth: &Dag) -> Result<(f64, f64), MetricsError> {
    if estimated.node_count() != truth.node_count() {
        return Err(MetricsError::NodeMismatch {
            left: estimated.node_count(),
            right: truth.node_count(),
        });
    }
    let est: BTreeSet<(usize, usize)> = estimated.edges().into_iter().collect();
    let tru: BTreeSet<(usize, usize)> = truth.edges().into_iter().collect();
    let hit = est.intersection(&tru).count() as f64;
    let precision = if est.is_empty() { 1.0 } else { hit / est.len() as f64 };
    let recall = if tru.is_empty() { 1.0 } else { hit / tru.len() as f64 };
    Ok((precision, recall))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;
    use proptest::prelude::*;

    #[test]
    fn exact_sure_match_scores_zero() {
        let expert = ExpertGraph::new(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let est = Dag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(ashd(&est, &expert).unwrap(), 0);
    }

    #[test]
    fn missing_sure_and_undepicted_each_cost_one() {
        // sure = {a->b}, possible = {b->c}, est = {b->c, c->a}:
        // one missing sure edge plus one undepicted edge.
        let expert = ExpertGraph::new(3, &[(0, 1)], &[(1, 2)]).unwrap();
        let est = Dag::from_edges(3, [(1, 2), (2, 0)]).unwrap();
        assert_eq!(ashd(&est, &expert).unwrap(), 2);
    }

    #[test]
    fn possible_edges_are_free() {
        let expert = ExpertGraph::new(3, &[(0, 1)], &[(1, 2)]).unwrap();
        let everything = Dag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(ashd(&everything, &expert).unwrap(), 0);
        let only_sure = Dag::from_edges(3, [(0, 1)]).unwrap();
        assert_eq!(ashd(&only_sure, &expert).unwrap(), 0);
    }

    #[test]
    fn reversed_sure_edge_costs_two() {
        let expert = ExpertGraph::new(2, &[(0, 1)], &[]).unwrap();
        let est = Dag::from_edges(2, [(1, 0)]).unwrap();
        assert_eq!(ashd(&est, &expert).unwrap(), 2);
    }

    #[test]
    fn undepicted_edges_add_one_each() {
        let expert = ExpertGraph::new(4, &[(0, 1)], &[]).unwrap();
        let mut est = Dag::from_edges(4, [(0, 1)]).unwrap();
        let base = ashd(&est, &expert).unwrap();
        est.add_edge_checked(2, 3).unwrap();
        assert_eq!(ashd(&est, &expert).unwrap(), base + 1);
        est.add_edge_checked(1, 3).unwrap();
        assert_eq!(ashd(&est, &expert).unwrap(), base + 2);
    }

    #[test]
    fn shd_examples() {
        let a = Dag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        assert_eq!(shd(&a, &a.clone()).unwrap(), 0);

        let reversed = Dag::from_edges(3, [(1, 0), (1, 2)]).unwrap();
        assert_eq!(shd(&a, &reversed).unwrap(), 1, "one reversal costs one");

        let empty = Dag::new(3);
        assert_eq!(shd(&empty, &a).unwrap(), 2, "two insertions");
        assert_eq!(shd(&a, &empty).unwrap(), 2, "symmetric");
    }

    #[test]
    fn node_mismatch_is_rejected() {
        let expert = ExpertGraph::new(3, &[], &[]).unwrap();
        let est = Dag::new(2);
        assert_eq!(
            ashd(&est, &expert).unwrap_err(),
            MetricsError::NodeMismatch { left: 2, right: 3 }
        );
        assert!(shd(&Dag::new(2), &Dag::new(4)).is_err());
    }

    #[test]
    fn expert_graph_validation() {
        assert_eq!(
            ExpertGraph::new(2, &[(0, 2)], &[]).unwrap_err(),
            MetricsError::EdgeOutOfRange { from: 0, to: 2, nodes: 2 }
        );
        assert_eq!(
            ExpertGraph::new(2, &[(1, 1)], &[]).unwrap_err(),
            MetricsError::SelfLoop { node: 1 }
        );
        assert_eq!(
            ExpertGraph::new(2, &[(0, 1)], &[(0, 1)]).unwrap_err(),
            MetricsError::Overlap { from: 0, to: 1 }
        );
    }

    #[test]
    fn precision_recall_counts_directed_hits() {
        let truth = Dag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let est = Dag::from_edges(3, [(0, 1), (0, 2)]).unwrap();
        let (p, r) = edge_precision_recall(&est, &truth).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!((r - 0.5).abs() < 1e-12);
        let (p, r) = edge_precision_recall(&Dag::new(3), &truth).unwrap();
        assert_eq!(p, 1.0);
        assert_eq!(r, 0.0);
    }

    /// Random edge lists over up to 5 nodes; pairs are deduplicated and
    /// self-loops removed before use.
    fn clean_pairs(raw: Vec<(usize, usize)>, n: usize) -> Vec<(usize, usize)> {
        let mut seen = BTreeSet::new();
        raw.into_iter()
            .map(|(a, b)| (a % n, b % n))
            .filter(|&(a, b)| a != b && seen.insert((a, b)))
            .collect()
    }

    proptest! {
        #[test]
        fn ashd_zero_iff_est_between_sure_and_union(
            est_raw in proptest::collection::vec((0usize..5, 0usize..5), 0..8),
            sure_raw in proptest::collection::vec((0usize..5, 0usize..5), 0..5),
            possible_raw in proptest::collection::vec((0usize..5, 0usize..5), 0..5),
        ) {
            let n = 5;
            let mut est = Dag::new(n);
            for (a, b) in clean_pairs(est_raw, n) {
                let _ = est.add_edge_checked(a, b);
            }
            let sure = clean_pairs(sure_raw, n);
            let possible: Vec<_> = clean_pairs(possible_raw, n)
                .into_iter()
                .filter(|e| !sure.contains(e))
                .collect();
            let expert = ExpertGraph::new(n, &sure, &possible).unwrap();

            let est_edges: BTreeSet<_> = est.edges().into_iter().collect();
            let sure_set: BTreeSet<_> = sure.iter().copied().collect();
            let union: BTreeSet<_> =
                sure.iter().chain(possible.iter()).copied().collect();
            let between = sure_set.is_subset(&est_edges) && est_edges.is_subset(&union);
            prop_assert_eq!(ashd(&est, &expert).unwrap() == 0, between);
        }
    }
}
