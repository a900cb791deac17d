//! Preliminary neighborhood selection.
//!
//! Before the ordering search runs, each variable's candidate-parent set
//! is shrunk to the predictors a cross-validated LASSO keeps. Candidates
//! are restricted to tiers at or before the target's tier and to pairs
//! the prior allows; everything the screen rejects is folded back into
//! the forbidden mask so downstream stages consult a single source of
//! truth.

use alloc::vec::Vec;

use crate::dataset::Dataset;
use crate::lasso::{fit_lasso_cv, LassoError};
use crate::parallel::{derive_seed, Parallelism};
use crate::prior::PriorKnowledge;

/// Default coefficient magnitude below which a candidate is dropped.
pub const DEFAULT_COEF_THRESHOLD: f64 = 1e-2;
const CV_FOLDS: usize = 10;

/// Screened candidate parents per target plus the tightened prior.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborSets {
    candidates: Vec<Vec<usize>>,
    prior: PriorKnowledge,
}

impl NeighborSets {
    /// Candidate parents of `target`, ascending.
    pub fn candidates(&self, target: usize) -> &[usize] {
        &self.candidates[target]
    }

    /// The prior with every screened-out pair marked forbidden.
    pub fn prior(&self) -> &PriorKnowledge {
        &self.prior
    }

    pub fn node_count(&self) -> usize {
        self.candidates.len()
    }

    /// Per-target candidate counts, for reporting.
    pub fn counts(&self) -> Vec<usize> {
        self.candidates.iter().map(Vec::len).collect()
    }

    /// Unscreened sets: every pair the prior allows stays a candidate.
    pub fn all_allowed(prior: &PriorKnowledge) -> Self {
        let p = prior.node_count();
        let candidates = (0..p)
            .map(|l| (0..p).filter(|&k| !prior.forbids(k, l)).collect())
            .collect();
        Self { candidates, prior: prior.clone() }
    }
}

/// LASSO screen for every target. Per-target work is independent and
/// runs under `par`; each target derives its own fold-assignment seed
/// from (`seed`, target index), so results do not depend on scheduling.
pub fn select_neighbors(
    data: &Dataset,
    prior: &PriorKnowledge,
    coef_threshold: f64,
    seed: u64,
    par: &impl Parallelism,
) -> Result<NeighborSets, LassoError> {
    let p = data.n_cols();
    assert_eq!(prior.node_count(), p, "prior and data disagree on variable count");

    let per_target = par.map((0..p).collect(), |l: usize| -> Result<Vec<usize>, LassoError> {
        let allowed: Vec<usize> = (0..p).filter(|&k| !prior.forbids(k, l)).collect();
        if allowed.is_empty() {
            return Ok(Vec::new());
        }
        let predictors: Vec<&[f64]> = allowed.iter().map(|&k| data.column(k)).collect();
        let fit = fit_lasso_cv(data.column(l), &predictors, CV_FOLDS, derive_seed(seed, l as u64))?;
        Ok(allowed
            .into_iter()
            .zip(&fit.coefficients)
            .filter(|(_, &c)| c.abs() > coef_threshold)
            .map(|(k, _)| k)
            .collect())
    });

    let mut candidates = Vec::with_capacity(p);
    for r in per_target {
        candidates.push(r?);
    }
    let mut tightened = prior.clone();
    for (l, keep) in candidates.iter().enumerate() {
        for k in 0..p {
            if !keep.contains(&k) {
                tightened.forbid(k, l);
            }
        }
    }
    Ok(NeighborSets { candidates, prior: tightened })
}
