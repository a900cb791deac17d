//! Penalized additive-model regression.
//!
//! Each term is a cubic B-spline expansion (knots at quantiles of the
//! predictor) with a second-difference coefficient penalty. Per-term
//! penalty weights are chosen by generalized cross-validation on a fixed
//! log grid *before* the backfitting loop runs, so the whole fit is a
//! deterministic function of its inputs. [`DesignCache`] precomputes
//! bases and factorizations per dataset column once, because the ordering
//! search refits the same columns thousands of times.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::dataset::Dataset;
use crate::special;
use crate::stat;

const DEGREE: usize = 3;
/// Fewer rows than this cannot support a spline fit worth interpreting.
pub const MIN_ROWS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SmoothError {
    #[error("predictor {index} has only {distinct} distinct values; the spline basis needs {needed}")]
    SingularBasis { index: usize, distinct: usize, needed: usize },
    #[error("design matrix factorization failed for predictor {index}")]
    Factorization { index: usize },
    #[error("additive fits need at least {min} rows, got {got}")]
    TooFewRows { min: usize, got: usize },
    #[error("predictor {index} has length {got}, expected {expected}")]
    LengthMismatch { index: usize, expected: usize, got: usize },
}

/// Tuning knobs for the additive regressions.
#[derive(Debug, Clone, PartialEq)]
pub struct SmootherConfig {
    /// Number of B-spline basis functions per term.
    pub basis_size: usize,
    /// Penalty-weight candidates, as multipliers of the sample size N
    /// (the Gram matrix scales with N, so multipliers transfer across
    /// sample sizes).
    pub gcv_grid: Vec<f64>,
    /// Backfitting stops when no fitted value moves more than this.
    pub backfit_tol: f64,
    pub max_backfit_iter: usize,
}

impl Default for SmootherConfig {
    fn default() -> Self {
        Self {
            basis_size: 10,
            gcv_grid: log_spaced(1e-5, 1e2, 10),
            backfit_tol: 1e-6,
            max_backfit_iter: 50,
        }
    }
}

/// `n` points, log-uniform from `lo` to `hi` inclusive.
fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    debug_assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (libm::log(lo), libm::log(hi));
    (0..n)
        .map(|i| libm::exp(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

/// One fitted smooth component f(x_predictor).
#[derive(Debug, Clone)]
pub struct SmoothTerm {
    /// Index of the predictor this term transforms (position in the
    /// caller's predictor list, or dataset column index for cached fits).
    pub predictor: usize,
    pub coefficients: Vec<f64>,
    /// Mean of the raw spline values, subtracted so the term averages to
    /// zero over the training data.
    pub center: f64,
    pub penalty_weight: f64,
    /// Effective degrees of freedom after the mean-centering constraint.
    pub edf: f64,
}

/// Result of an additive regression y ~ intercept + Σ terms.
#[derive(Debug, Clone)]
pub struct AdditiveFit {
    pub intercept: f64,
    pub terms: Vec<SmoothTerm>,
    /// (1/N)·Σ residual².
    pub rss_mean: f64,
    /// False when backfitting hit the iteration cap before the tolerance.
    pub converged: bool,
    pub fitted: Vec<f64>,
}

impl AdditiveFit {
    pub fn edf_total(&self) -> f64 {
        self.terms.iter().map(|t| t.edf).sum()
    }
}

/// Precomputed spline design for one data column.
#[derive(Debug)]
pub(crate) struct ColumnBasis {
    nb: usize,
    /// Knot-span index per observation; only 4 basis functions are
    /// nonzero there.
    spans: Vec<u32>,
    rows: Vec<[f64; 4]>,
    gram: DMatrix<f64>,
}

impl ColumnBasis {
    pub(crate) fn build(col: &[f64], nb: usize, index: usize) -> Result<Self, SmoothError> {
        assert!(nb >= DEGREE + 2, "basis must have room for interior structure");
        let sorted = stat::sorted(col);
        let mut distinct = sorted;
        distinct.dedup();
        if distinct.len() < nb {
            return Err(SmoothError::SingularBasis {
                index,
                distinct: distinct.len(),
                needed: nb,
            });
        }

        // Clamped knot vector: boundary knots with multiplicity DEGREE+1,
        // interior knots at quantiles of the distinct values (using
        // distinct values keeps the knots strictly increasing).
        let interior = nb - DEGREE - 1;
        let lo = distinct[0];
        let hi = distinct[distinct.len() - 1];
        let mut knots = Vec::with_capacity(nb + DEGREE + 1);
        knots.extend(core::iter::repeat_n(lo, DEGREE + 1));
        for j in 1..=interior {
            knots.push(stat::quantile_sorted(&distinct, j as f64 / (interior + 1) as f64));
        }
        knots.extend(core::iter::repeat_n(hi, DEGREE + 1));

        let n = col.len();
        let mut spans = Vec::with_capacity(n);
        let mut rows = Vec::with_capacity(n);
        for &x in col {
            let (s, v) = eval_cubic(&knots, nb, x);
            spans.push(s as u32);
            rows.push(v);
        }

        let mut gram = DMatrix::zeros(nb, nb);
        for (s, v) in spans.iter().zip(&rows) {
            let base = *s as usize - DEGREE;
            for r in 0..=DEGREE {
                for c in 0..=DEGREE {
                    gram[(base + r, base + c)] += v[r] * v[c];
                }
            }
        }
        Ok(Self { nb, spans, rows, gram })
    }

    fn fitted(&self, coef: &DVector<f64>, out: &mut [f64]) {
        for ((o, s), v) in out.iter_mut().zip(&self.spans).zip(&self.rows) {
            let b = *s as usize - DEGREE;
            *o = v[0] * coef[b] + v[1] * coef[b + 1] + v[2] * coef[b + 2] + v[3] * coef[b + 3];
        }
    }

    fn bt_dot(&self, r: &[f64]) -> DVector<f64> {
        let mut out = DVector::zeros(self.nb);
        for ((ri, s), v) in r.iter().zip(&self.spans).zip(&self.rows) {
            let b = *s as usize - DEGREE;
            for c in 0..=DEGREE {
                out[b + c] += v[c] * ri;
            }
        }
        out
    }
}

/// Cubic B-spline basis values at `x`: returns the knot span `s` and the
/// values of the four basis functions with indices `s-3..=s`.
fn eval_cubic(knots: &[f64], nb: usize, x: f64) -> (usize, [f64; 4]) {
    let lo = knots[DEGREE];
    let hi = knots[nb];
    let x = x.clamp(lo, hi);
    let s = if x >= hi {
        nb - 1
    } else {
        let (mut a, mut b) = (DEGREE, nb - 1);
        while a < b {
            let mid = (a + b + 1) / 2;
            if knots[mid] <= x {
                a = mid;
            } else {
                b = mid - 1;
            }
        }
        a
    };

    let mut vals = [0.0; 4];
    let mut left = [0.0; 4];
    let mut right = [0.0; 4];
    vals[0] = 1.0;
    for j in 1..=DEGREE {
        left[j] = x - knots[s + 1 - j];
        right[j] = knots[s + j] - x;
        let mut saved = 0.0;
        for r in 0..j {
            let temp = vals[r] / (right[r + 1] + left[j - r]);
            vals[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        vals[j] = saved;
    }
    (s, vals)
}

/// DᵀD for the (nb−2)×nb second-difference matrix D.
fn second_difference_penalty(nb: usize) -> DMatrix<f64> {
    let mut p = DMatrix::zeros(nb, nb);
    for r in 0..nb - 2 {
        let idx = [r, r + 1, r + 2];
        let w = [1.0, -2.0, 1.0];
        for a in 0..3 {
            for b in 0..3 {
                p[(idx[a], idx[b])] += w[a] * w[b];
            }
        }
    }
    p
}

/// Cholesky factor of (G + λP) plus the smoother trace tr((G+λP)⁻¹G).
pub(crate) struct Factor {
    chol: Cholesky<f64, Dyn>,
    trace: f64,
    lambda: f64,
}

impl Factor {
    fn build(
        basis: &ColumnBasis,
        penalty: &DMatrix<f64>,
        lambda: f64,
        index: usize,
    ) -> Result<Self, SmoothError> {
        let a = &basis.gram + penalty * lambda;
        let chol = Cholesky::new(a).ok_or(SmoothError::Factorization { index })?;
        let trace = chol.solve(&basis.gram).trace();
        Ok(Self { chol, trace, lambda })
    }
}

/// Training RSS of the single-term fit y ~ ȳ + centered spline, with the
/// penalty baked into `factor`.
fn single_term_rss(y: &[f64], basis: &ColumnBasis, factor: &Factor) -> f64 {
    let ybar = stat::mean(y);
    let yc: Vec<f64> = y.iter().map(|v| v - ybar).collect();
    let coef = factor.chol.solve(&basis.bt_dot(&yc));
    let mut f = vec![0.0; y.len()];
    basis.fitted(&coef, &mut f);
    let m = stat::mean(&f);
    yc.iter().zip(&f).map(|(&r, &v)| {
        let e = r - (v - m);
        e * e
    }).sum()
}

/// Grid index minimizing N·RSS/(N − tr)²; first minimum wins.
fn select_by_gcv(y: &[f64], basis: &ColumnBasis, factors: &[Factor]) -> usize {
    let n = y.len() as f64;
    let mut best = 0;
    let mut best_gcv = f64::INFINITY;
    for (g, factor) in factors.iter().enumerate() {
        let rss = single_term_rss(y, basis, factor);
        let denom = n - factor.trace;
        let gcv = n * rss / (denom * denom);
        if gcv < best_gcv {
            best_gcv = gcv;
            best = g;
        }
    }
    best
}

/// Gauss–Seidel backfitting over prepared terms. Pure and deterministic;
/// the intercept is the response mean because every term is re-centered
/// after each update.
fn backfit(
    y: &[f64],
    terms: &[(usize, &ColumnBasis, &Factor)],
    tol: f64,
    max_iter: usize,
) -> AdditiveFit {
    let n = y.len();
    let intercept = stat::mean(y);
    let mut resid: Vec<f64> = y.iter().map(|v| v - intercept).collect();
    let mut term_fit: Vec<Vec<f64>> = vec![vec![0.0; n]; terms.len()];
    let mut coefs: Vec<DVector<f64>> =
        terms.iter().map(|&(_, b, _)| DVector::zeros(b.nb)).collect();
    let mut centers = vec![0.0; terms.len()];
    let mut converged = terms.is_empty();
    let mut partial = vec![0.0; n];
    let mut work = vec![0.0; n];

    for _ in 0..max_iter {
        let mut max_delta = 0.0f64;
        for (t, &(_, basis, factor)) in terms.iter().enumerate() {
            for i in 0..n {
                partial[i] = resid[i] + term_fit[t][i];
            }
            let coef = factor.chol.solve(&basis.bt_dot(&partial));
            basis.fitted(&coef, &mut work);
            let center = stat::mean(&work);
            for i in 0..n {
                let new = work[i] - center;
                max_delta = max_delta.max((new - term_fit[t][i]).abs());
                resid[i] = partial[i] - new;
                term_fit[t][i] = new;
            }
            coefs[t] = coef;
            centers[t] = center;
        }
        if max_delta < tol {
            converged = true;
            break;
        }
    }

    let fitted: Vec<f64> = y.iter().zip(&resid).map(|(v, r)| v - r).collect();
    AdditiveFit {
        intercept,
        terms: terms
            .iter()
            .enumerate()
            .map(|(t, &(pred, _, factor))| SmoothTerm {
                predictor: pred,
                coefficients: coefs[t].iter().copied().collect(),
                center: centers[t],
                penalty_weight: factor.lambda,
                edf: factor.trace - 1.0,
            })
            .collect(),
        rss_mean: stat::mean_square(&resid),
        converged,
        fitted,
    }
}

fn check_columns(y: &[f64], predictors: &[&[f64]]) -> Result<(), SmoothError> {
    if y.len() < MIN_ROWS {
        return Err(SmoothError::TooFewRows { min: MIN_ROWS, got: y.len() });
    }
    for (i, p) in predictors.iter().enumerate() {
        if p.len() != y.len() {
            return Err(SmoothError::LengthMismatch {
                index: i,
                expected: y.len(),
                got: p.len(),
            });
        }
    }
    Ok(())
}

/// Fits y on the given predictors, selecting each term's penalty weight
/// by GCV before the backfitting loop.
pub fn fit_additive(
    y: &[f64],
    predictors: &[&[f64]],
    config: &SmootherConfig,
) -> Result<AdditiveFit, SmoothError> {
    check_columns(y, predictors)?;
    let n = y.len() as f64;
    let penalty = second_difference_penalty(config.basis_size);
    let mut prepared: Vec<(ColumnBasis, Factor)> = Vec::with_capacity(predictors.len());
    for (i, p) in predictors.iter().enumerate() {
        let basis = ColumnBasis::build(p, config.basis_size, i)?;
        let factors: Vec<Factor> = config
            .gcv_grid
            .iter()
            .map(|&mult| Factor::build(&basis, &penalty, mult * n, i))
            .collect::<Result<_, _>>()?;
        let g = select_by_gcv(y, &basis, &factors);
        let chosen = factors.into_iter().nth(g).expect("grid index in range");
        prepared.push((basis, chosen));
    }
    let terms: Vec<(usize, &ColumnBasis, &Factor)> =
        prepared.iter().enumerate().map(|(i, (b, f))| (i, b, f)).collect();
    Ok(backfit(y, &terms, config.backfit_tol, config.max_backfit_iter))
}

/// As [`fit_additive`] but with the penalty weight of every term pinned
/// (used for refits that must not re-tune).
fn fit_fixed_lambdas(
    y: &[f64],
    predictors: &[(usize, &[f64])],
    lambdas: &[f64],
    config: &SmootherConfig,
) -> Result<AdditiveFit, SmoothError> {
    let penalty = second_difference_penalty(config.basis_size);
    let mut prepared = Vec::with_capacity(predictors.len());
    for (&(id, p), &lambda) in predictors.iter().zip(lambdas) {
        let basis = ColumnBasis::build(p, config.basis_size, id)?;
        let factor = Factor::build(&basis, &penalty, lambda, id)?;
        prepared.push((id, basis, factor));
    }
    let terms: Vec<(usize, &ColumnBasis, &Factor)> =
        prepared.iter().map(|(id, b, f)| (*id, b, f)).collect();
    Ok(backfit(y, &terms, config.backfit_tol, config.max_backfit_iter))
}

/// F-test of "the dropped term contributes nothing", with effective dof
/// for the numerator and residual dof N − 1 − Σedf for the denominator.
fn f_test(rss_mean_full: f64, edf_full: f64, rss_mean_reduced: f64, term_edf: f64, n: f64) -> f64 {
    let rss_full = rss_mean_full * n;
    let rss_red = rss_mean_reduced * n;
    let df1 = term_edf;
    let df2 = n - 1.0 - edf_full;
    let delta = rss_red - rss_full;
    if delta <= 0.0 || df1 <= 0.0 || df2 <= 1.0 {
        return 1.0;
    }
    let f = (delta / df1) / (rss_full / df2);
    special::f_survival(f, df1, df2)
}

/// Significance of one term of `fit`: refits without it (same penalty
/// weights for the remaining terms) and compares by F-test.
pub fn term_pvalue(
    fit: &AdditiveFit,
    y: &[f64],
    predictors: &[&[f64]],
    term: usize,
    config: &SmootherConfig,
) -> Result<f64, SmoothError> {
    assert!(term < fit.terms.len(), "term index out of range");
    let mut red_preds = Vec::new();
    let mut red_lambdas = Vec::new();
    for (t, st) in fit.terms.iter().enumerate() {
        if t != term {
            red_preds.push((st.predictor, predictors[st.predictor]));
            red_lambdas.push(st.penalty_weight);
        }
    }
    let reduced = fit_fixed_lambdas(y, &red_preds, &red_lambdas, config)?;
    Ok(f_test(
        fit.rss_mean,
        fit.edf_total(),
        reduced.rss_mean,
        fit.terms[term].edf,
        y.len() as f64,
    ))
}

/// An additive fit produced by [`DesignCache::fit`], carrying the grid
/// choices so follow-up refits reuse identical penalty weights.
#[derive(Debug, Clone)]
pub struct CachedFit {
    pub fit: AdditiveFit,
    lambda_idx: Vec<usize>,
}

/// Per-dataset cache of spline bases and penalized factorizations.
///
/// Construction does all the heavy numerical work (basis evaluation,
/// Gram matrices, one Cholesky per column per grid point); afterwards a
/// fit for any (target, parent set) pair only runs backfitting solves
/// against precomputed factors and cannot fail.
pub struct DesignCache {
    config: SmootherConfig,
    n: usize,
    columns: Vec<Vec<f64>>,
    bases: Vec<ColumnBasis>,
    factors: Vec<Vec<Factor>>,
}

impl DesignCache {
    pub fn new(data: &Dataset, config: SmootherConfig) -> Result<Self, SmoothError> {
        let n = data.n_rows();
        if n < MIN_ROWS {
            return Err(SmoothError::TooFewRows { min: MIN_ROWS, got: n });
        }
        let penalty = second_difference_penalty(config.basis_size);
        let mut columns = Vec::with_capacity(data.n_cols());
        let mut bases = Vec::with_capacity(data.n_cols());
        let mut factors = Vec::with_capacity(data.n_cols());
        for j in 0..data.n_cols() {
            let col = data.column(j);
            let basis = ColumnBasis::build(col, config.basis_size, j)?;
            let fs: Vec<Factor> = config
                .gcv_grid
                .iter()
                .map(|&mult| Factor::build(&basis, &penalty, mult * n as f64, j))
                .collect::<Result<_, _>>()?;
            columns.push(col.to_vec());
            bases.push(basis);
            factors.push(fs);
        }
        Ok(Self { config, n, columns, bases, factors })
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn config(&self) -> &SmootherConfig {
        &self.config
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    fn fit_indices(&self, target: usize, parents: &[usize], lambda_idx: &[usize]) -> AdditiveFit {
        let terms: Vec<(usize, &ColumnBasis, &Factor)> = parents
            .iter()
            .zip(lambda_idx)
            .map(|(&k, &g)| (k, &self.bases[k], &self.factors[k][g]))
            .collect();
        backfit(
            &self.columns[target],
            &terms,
            self.config.backfit_tol,
            self.config.max_backfit_iter,
        )
    }

    /// Additive fit of column `target` on the given parent columns.
    pub fn fit(&self, target: usize, parents: &[usize]) -> CachedFit {
        let y = &self.columns[target];
        let lambda_idx: Vec<usize> = parents
            .iter()
            .map(|&k| select_by_gcv(y, &self.bases[k], &self.factors[k]))
            .collect();
        let fit = self.fit_indices(target, parents, &lambda_idx);
        CachedFit { fit, lambda_idx }
    }

    /// Mean squared residual of `target` regressed on `parents`
    /// (the order-score building block).
    pub fn rss_mean(&self, target: usize, parents: &[usize]) -> f64 {
        self.fit(target, parents).fit.rss_mean
    }

    /// Significance of dropping one term from a cached fit; the refit
    /// keeps the remaining terms' penalty weights.
    pub fn drop_term_pvalue(&self, target: usize, cached: &CachedFit, term: usize) -> f64 {
        let mut red_parents = Vec::new();
        let mut red_idx = Vec::new();
        for (t, st) in cached.fit.terms.iter().enumerate() {
            if t != term {
                red_parents.push(st.predictor);
                red_idx.push(cached.lambda_idx[t]);
            }
        }
        let reduced = self.fit_indices(target, &red_parents, &red_idx);
        f_test(
            cached.fit.rss_mean,
            cached.fit.edf_total(),
            reduced.rss_mean,
            cached.fit.terms[term].edf,
            self.n as f64,
        )
    }
}
