//! End-to-end discovery pipeline.
//!
//! Wires the stages together: standardize, screen candidate parents,
//! run the greedy ordering search, prune. Callers that need to rename,
//! impute, or drop columns must do so before building the prior, since
//! the prior addresses variables by index.

use alloc::vec::Vec;

use crate::dataset::{Dataset, DatasetError};
use crate::lasso::LassoError;
use crate::ordering::{greedy_order, OrderingConfig, OrderingResult, SearchMode};
use crate::parallel::Parallelism;
use crate::pns::{select_neighbors, NeighborSets};
use crate::prior::PriorKnowledge;
use crate::pruning::{prune, PruneOutcome};
use crate::smooth::{DesignCache, SmoothError, SmootherConfig};

/// Search-mode request; `Auto` picks the tier-aware search exactly when
/// the prior carries real information.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeChoice {
    #[default]
    Auto,
    Cam,
    Tcam,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscoveryConfig {
    pub seed: u64,
    /// Coefficient magnitude below which screening discards a candidate.
    pub pns_threshold: f64,
    /// Significance level of the pruning stage.
    pub prune_alpha: f64,
    pub mode: ModeChoice,
    pub smoother: SmootherConfig,
    pub ordering: OrderingConfig,
}

impl Default for DiscoveryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            pns_threshold: 1e-2,
            prune_alpha: 0.001,
            mode: ModeChoice::Auto,
            smoother: SmootherConfig::default(),
            ordering: OrderingConfig::default(),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error("data error: {0}")]
    Data(#[from] DatasetError),
    #[error("smoother error: {0}")]
    Smooth(#[from] SmoothError),
    #[error("screening error: {0}")]
    Lasso(#[from] LassoError),
    #[error("prior describes {prior} variables but the data has {data}")]
    PriorMismatch { prior: usize, data: usize },
}

/// Everything the pipeline produced, stage by stage.
#[derive(Debug, Clone)]
pub struct Discovery {
    /// The standardized data the stages ran on.
    pub dataset: Dataset,
    /// The prior the search actually used (trivial in plain mode).
    pub prior: PriorKnowledge,
    pub mode: SearchMode,
    pub neighbors: NeighborSets,
    pub ordering: OrderingResult,
    pub pruned: PruneOutcome,
}

/// Runs screening, ordering, and pruning on `data`. The data must be
/// complete (no missing values) and free of constant columns; it is
/// standardized here, which is a no-op when already standardized.
pub fn run_discovery(
    data: &Dataset,
    prior: &PriorKnowledge,
    config: &DiscoveryConfig,
    par: &impl Parallelism,
) -> Result<Discovery, PipelineError> {
    if prior.node_count() != data.n_cols() {
        return Err(PipelineError::PriorMismatch {
            prior: prior.node_count(),
            data: data.n_cols(),
        });
    }
    let data = data.clone().standardize()?;

    let mode = match config.mode {
        ModeChoice::Cam => SearchMode::Cam,
        ModeChoice::Tcam => SearchMode::Tcam,
        ModeChoice::Auto => {
            if prior.is_informative() {
                SearchMode::Tcam
            } else {
                SearchMode::Cam
            }
        }
    };
    // Plain mode deliberately ignores the prior: it is the no-knowledge
    // baseline the tier-aware search is compared against.
    let effective_prior = match mode {
        SearchMode::Cam => PriorKnowledge::trivial(data.n_cols()),
        SearchMode::Tcam => prior.clone(),
    };

    let cache = DesignCache::new(&data, config.smoother.clone())?;
    let neighbors =
        select_neighbors(&data, &effective_prior, config.pns_threshold, config.seed, par)?;
    let ordering = greedy_order(&cache, &neighbors, mode, &config.ordering, par);
    let pruned = prune(&cache, &ordering.dag_no, config.prune_alpha, config.ordering.max_parents, par);

    Ok(Discovery { dataset: data, prior: effective_prior, mode, neighbors, ordering, pruned })
}

/// Convenience accessor: candidate counts per node after screening.
impl Discovery {
    pub fn neighbor_counts(&self) -> Vec<usize> {
        self.neighbors.counts()
    }
}
