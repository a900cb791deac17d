//! Greedy node-ordering search.
//!
//! The search walks over DAGs, repeatedly accepting the edge whose
//! addition most reduces the summed per-node regression error. In
//! tier-aware mode, every screened across-tier pair is placed up front —
//! those orientations are already decided by the process order — and the
//! greedy loop only has to resolve within-tier structure. A score matrix
//! caches the gain of every candidate edge; after an acceptance, only
//! the accepted target's column is recomputed.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{Dag, NodeOrdering};
use crate::parallel::Parallelism;
use crate::pns::NeighborSets;
use crate::smooth::DesignCache;

/// Whether the search exploits tier structure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    /// Ignore tiers: all screened pairs compete in the greedy loop.
    Cam,
    /// Pre-place screened across-tier edges, then search within tiers.
    Tcam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OrderingConfig {
    /// Hard cap on parents added per node during the search.
    pub max_parents: usize,
    /// Gains below this are treated as numerically zero.
    pub min_gain: f64,
    /// Stop when the best gain drops below `min_gain`; disable to run
    /// until no candidate pair remains.
    pub early_stop: bool,
}

impl Default for OrderingConfig {
    fn default() -> Self {
        Self { max_parents: 20, min_gain: 1e-6, early_stop: true }
    }
}

/// Candidate-edge gains with a −∞ sentinel for pairs that are excluded
/// (screened out, against the tier order, already present, cycle-forming,
/// or at the parent cap), plus the current per-target residual errors.
#[derive(Debug, Clone)]
pub struct ScoreMatrix {
    p: usize,
    m: Vec<f64>,
    base_rss: Vec<f64>,
}

impl ScoreMatrix {
    fn new(p: usize) -> Self {
        Self { p, m: vec![f64::NEG_INFINITY; p * p], base_rss: vec![0.0; p] }
    }

    /// Gain of adding `k -> l`; −∞ when the pair is excluded.
    pub fn gain(&self, k: usize, l: usize) -> f64 {
        self.m[k * self.p + l]
    }

    fn set(&mut self, k: usize, l: usize, v: f64) {
        self.m[k * self.p + l] = v;
    }

    /// Current mean squared residual of `target` given its parents.
    pub fn base_rss(&self, target: usize) -> f64 {
        self.base_rss[target]
    }

    /// Current total order score: Σ per-target residual errors.
    pub fn total_score(&self) -> f64 {
        self.base_rss.iter().sum()
    }

    /// Best finite entry; ties resolve to the smallest (k, l).
    fn best(&self) -> Option<(usize, usize, f64)> {
        let mut out: Option<(usize, usize, f64)> = None;
        for k in 0..self.p {
            for l in 0..self.p {
                let g = self.gain(k, l);
                if g.is_finite() && out.is_none_or(|(_, _, bg)| g > bg) {
                    out = Some((k, l, g));
                }
            }
        }
        out
    }
}

/// One accepted edge of the greedy loop.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub source: usize,
    pub target: usize,
    pub gain: f64,
    /// Total order score after accepting this edge.
    pub score_after: f64,
}

/// Outcome of the ordering search: the pre-pruning graph, the node
/// ordering it implies, scores before and after, and the acceptance
/// trace.
#[derive(Debug, Clone)]
pub struct OrderingResult {
    pub dag_no: Dag,
    pub ordering: NodeOrdering,
    pub initial_score: f64,
    pub final_score: f64,
    pub trace: Vec<TraceEntry>,
}

/// Order score of an explicit node ordering: each node is regressed on
/// its screened candidates that precede it.
pub fn order_score(
    cache: &DesignCache,
    neighbors: &NeighborSets,
    ordering: &NodeOrdering,
) -> f64 {
    let p = cache.n_cols();
    assert_eq!(ordering.len(), p, "ordering and data disagree on variable count");
    let mut total = 0.0;
    for l in 0..p {
        let parents: Vec<usize> = neighbors
            .candidates(l)
            .iter()
            .copied()
            .filter(|&k| ordering.rank(k) < ordering.rank(l))
            .collect();
        total += cache.rss_mean(l, &parents);
    }
    total
}

/// Gain of adding `k -> l` to `dag`: the drop in mean squared residual
/// of `l` when `k` joins its parent set.
pub fn score_gain(cache: &DesignCache, dag: &Dag, k: usize, l: usize) -> f64 {
    let parents = dag.parents(l).to_vec();
    let base = cache.rss_mean(l, &parents);
    let mut with_k = parents;
    let pos = with_k.binary_search(&k).unwrap_err();
    with_k.insert(pos, k);
    base - cache.rss_mean(l, &with_k)
}

fn eligible(
    neighbors: &NeighborSets,
    mode: SearchMode,
    config: &OrderingConfig,
    dag: &Dag,
    k: usize,
    l: usize,
) -> bool {
    let prior = neighbors.prior();
    k != l
        && neighbors.candidates(l).binary_search(&k).is_ok()
        && !prior.forbids(k, l)
        && (mode == SearchMode::Cam || prior.tier(k) == prior.tier(l))
        && !dag.has_edge(k, l)
        && !dag.reaches(l, k)
        && dag.parents(l).len() < config.max_parents
}

fn refresh_column(
    cache: &DesignCache,
    neighbors: &NeighborSets,
    mode: SearchMode,
    config: &OrderingConfig,
    par: &impl Parallelism,
    dag: &Dag,
    matrix: &mut ScoreMatrix,
    l: usize,
) {
    let parents = dag.parents(l).to_vec();
    let base = cache.rss_mean(l, &parents);
    matrix.base_rss[l] = base;
    let p = cache.n_cols();
    let ks: Vec<usize> =
        (0..p).filter(|&k| eligible(neighbors, mode, config, dag, k, l)).collect();
    let gains = par.map(ks.clone(), |k| {
        let mut with_k = parents.clone();
        let pos = with_k.binary_search(&k).unwrap_err();
        with_k.insert(pos, k);
        base - cache.rss_mean(l, &with_k)
    });
    for k in 0..p {
        matrix.set(k, l, f64::NEG_INFINITY);
    }
    for (k, g) in ks.into_iter().zip(gains) {
        matrix.set(k, l, g);
    }
}

/// Builds the starting graph and score matrix. In tier-aware mode the
/// starting graph contains every screened pair that crosses into a later
/// tier; gains are then computed for the remaining candidate pairs.
pub fn init_search(
    cache: &DesignCache,
    neighbors: &NeighborSets,
    mode: SearchMode,
    config: &OrderingConfig,
    par: &impl Parallelism,
) -> (Dag, ScoreMatrix) {
    let p = cache.n_cols();
    assert_eq!(neighbors.node_count(), p, "neighbor sets and data disagree on variable count");
    let mut dag = Dag::new(p);
    if mode == SearchMode::Tcam {
        let prior = neighbors.prior();
        for l in 0..p {
            for &k in neighbors.candidates(l) {
                if prior.crosses_tiers(k, l) {
                    dag.add_edge_checked(k, l).expect("tier-increasing edges cannot cycle");
                }
            }
        }
    }

    let mut matrix = ScoreMatrix::new(p);
    let bases = par.map((0..p).collect(), |l: usize| cache.rss_mean(l, dag.parents(l)));
    matrix.base_rss = bases;

    let pairs: Vec<(usize, usize)> = (0..p)
        .flat_map(|k| (0..p).map(move |l| (k, l)))
        .filter(|&(k, l)| eligible(neighbors, mode, config, &dag, k, l))
        .collect();
    let gains = par.map(pairs.clone(), |(k, l)| {
        let mut with_k = dag.parents(l).to_vec();
        let pos = with_k.binary_search(&k).unwrap_err();
        with_k.insert(pos, k);
        matrix.base_rss[l] - cache.rss_mean(l, &with_k)
    });
    for ((k, l), g) in pairs.into_iter().zip(gains) {
        matrix.set(k, l, g);
    }
    (dag, matrix)
}

/// Runs the greedy search to completion and returns the pre-pruning
/// graph with its acceptance trace.
pub fn greedy_order(
    cache: &DesignCache,
    neighbors: &NeighborSets,
    mode: SearchMode,
    config: &OrderingConfig,
    par: &impl Parallelism,
) -> OrderingResult {
    let (mut dag, mut matrix) = init_search(cache, neighbors, mode, config, par);
    let initial_score = matrix.total_score();
    let p = cache.n_cols();
    let mut trace = Vec::new();

    loop {
        let Some((k, l, gain)) = matrix.best() else { break };
        if config.early_stop && gain < config.min_gain {
            break;
        }
        dag.add_edge_checked(k, l).expect("eligible pairs are acyclic by construction");
        refresh_column(cache, neighbors, mode, config, par, &dag, &mut matrix, l);
        // The new edge may create fresh paths; re-apply cycle sentinels.
        for k2 in 0..p {
            for l2 in 0..p {
                if matrix.gain(k2, l2).is_finite() && dag.reaches(l2, k2) {
                    matrix.set(k2, l2, f64::NEG_INFINITY);
                }
            }
        }
        trace.push(TraceEntry { source: k, target: l, gain, score_after: matrix.total_score() });
    }

    let ordering = dag.topological_order();
    OrderingResult {
        dag_no: dag,
        ordering,
        initial_score,
        final_score: matrix.total_score(),
        trace,
    }
}
