//! Significance pruning of the searched graph.
//!
//! The greedy search is liberal: it accepts any edge with a positive
//! score gain, so the pre-pruning graph typically contains spurious
//! parents. Pruning refits each node on its parent set and keeps an
//! edge only when dropping its term significantly worsens the fit.
//! Nodes that exceed the parent cap first shed their weakest parents
//! one at a time, refitting after each removal.

use alloc::vec::Vec;

use crate::graph::Dag;
use crate::parallel::Parallelism;
use crate::smooth::DesignCache;

/// Verdict for one edge of the pre-pruning graph.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeDecision {
    pub source: usize,
    pub target: usize,
    /// Significance of the source's term in the target's regression,
    /// taken from the fit at the moment the edge was judged.
    pub p_value: f64,
    pub kept: bool,
}

/// Pruned graph plus the per-edge verdicts that produced it.
#[derive(Debug, Clone)]
pub struct PruneOutcome {
    pub dag: Dag,
    /// One entry per edge of the input graph, sorted by (source, target).
    pub decisions: Vec<EdgeDecision>,
}

/// Keeps each edge of `dag_no` iff its term's p-value is below `alpha`.
/// Targets with more than `max_parents` parents drop their weakest
/// parent (largest p-value) and refit until they are at the cap.
pub fn prune(
    cache: &DesignCache,
    dag_no: &Dag,
    alpha: f64,
    max_parents: usize,
    par: &impl Parallelism,
) -> PruneOutcome {
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1], got {alpha}");
    let p = dag_no.node_count();
    assert_eq!(p, cache.n_cols(), "graph and data disagree on variable count");

    let per_target = par.map((0..p).collect::<Vec<usize>>(), |l| {
        let mut decisions: Vec<EdgeDecision> = Vec::new();
        let mut parents = dag_no.parents(l).to_vec();
        if parents.is_empty() {
            return decisions;
        }

        while parents.len() > max_parents {
            let fit = cache.fit(l, &parents);
            let pvals: Vec<f64> =
                (0..parents.len()).map(|t| cache.drop_term_pvalue(l, &fit, t)).collect();
            let mut weakest = 0;
            for (t, &pv) in pvals.iter().enumerate() {
                if pv > pvals[weakest] {
                    weakest = t;
                }
            }
            decisions.push(EdgeDecision {
                source: parents[weakest],
                target: l,
                p_value: pvals[weakest],
                kept: false,
            });
            parents.remove(weakest);
        }

        let fit = cache.fit(l, &parents);
        for (t, &k) in parents.iter().enumerate() {
            let pv = cache.drop_term_pvalue(l, &fit, t);
            decisions.push(EdgeDecision { source: k, target: l, p_value: pv, kept: pv < alpha });
        }
        decisions
    });

    let mut decisions: Vec<EdgeDecision> = per_target.into_iter().flatten().collect();
    decisions.sort_by_key(|d| (d.source, d.target));
    let kept = decisions.iter().filter(|d| d.kept).map(|d| (d.source, d.target));
    let dag = Dag::from_edges(p, kept).expect("subset of a DAG stays acyclic");
    PruneOutcome { dag, decisions }
}
