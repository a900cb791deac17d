//! Cross-validated LASSO via cyclic coordinate descent.
//!
//! The objective is (1/2N)·‖y − β₀ − Xβ‖² + λ‖β‖₁. The penalty path is
//! geometric, starting at the smallest λ that zeroes every coefficient
//! and descending two decades; the reported coefficients are taken at
//! the one-standard-error penalty to favour sparsity. Fold assignment is
//! seeded, so the whole fit is deterministic.

use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::stat;

const PATH_LEN: usize = 50;
const PATH_DECADES: f64 = 2.0;
const CD_TOL: f64 = 1e-8;
const CD_MAX_SWEEPS: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LassoError {
    #[error("cross-validation needs 2 <= folds <= rows, got {folds} folds for {rows} rows")]
    InvalidFolds { folds: usize, rows: usize },
    #[error("fold {fold} leaves a constant training response")]
    DegenerateFold { fold: usize },
}

/// A cross-validated LASSO solution.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    /// Coefficients at `lambda_1se`, fit on the full data.
    pub coefficients: Vec<f64>,
    pub intercept: f64,
    /// Penalty minimizing the mean cross-validation error.
    pub lambda_min: f64,
    /// Largest penalty whose mean error is within one standard deviation
    /// of the minimum; never below `lambda_min`.
    pub lambda_1se: f64,
    /// The full path, descending.
    pub lambdas: Vec<f64>,
    /// Per-path-point mean and standard deviation of fold errors.
    pub cv_mean: Vec<f64>,
    pub cv_sd: Vec<f64>,
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// A centered view of (a row subset of) the regression problem.
struct Centered {
    cols: Vec<Vec<f64>>,
    col_means: Vec<f64>,
    /// (1/n)·Σ centered² per column.
    col_sq: Vec<f64>,
    y: Vec<f64>,
    y_mean: f64,
    n: f64,
}

impl Centered {
    fn build(y: &[f64], predictors: &[&[f64]], rows: Option<&[usize]>) -> Self {
        let take = |col: &[f64]| -> Vec<f64> {
            match rows {
                Some(idx) => idx.iter().map(|&i| col[i]).collect(),
                None => col.to_vec(),
            }
        };
        let mut ys = take(y);
        let y_mean = stat::mean(&ys);
        for v in &mut ys {
            *v -= y_mean;
        }
        let n = ys.len() as f64;
        let mut cols = Vec::with_capacity(predictors.len());
        let mut col_means = Vec::with_capacity(predictors.len());
        let mut col_sq = Vec::with_capacity(predictors.len());
        for p in predictors {
            let mut c = take(p);
            let m = stat::mean(&c);
            for v in &mut c {
                *v -= m;
            }
            col_means.push(m);
            col_sq.push(c.iter().map(|v| v * v).sum::<f64>() / n);
            cols.push(c);
        }
        Self { cols, col_means, col_sq, y: ys, y_mean, n }
    }

    /// Smallest penalty at which every coefficient is zero.
    fn lambda_max(&self) -> f64 {
        let mut m = 0.0f64;
        for c in &self.cols {
            let corr = c.iter().zip(&self.y).map(|(a, b)| a * b).sum::<f64>() / self.n;
            m = m.max(corr.abs());
        }
        m
    }

    /// Coordinate descent at one penalty, warm-started from `beta`;
    /// `resid` must equal y − Xβ on entry and does on exit.
    fn solve(&self, lambda: f64, beta: &mut [f64], resid: &mut [f64]) {
        for _ in 0..CD_MAX_SWEEPS {
            let mut max_delta = 0.0f64;
            for (j, col) in self.cols.iter().enumerate() {
                if self.col_sq[j] <= f64::MIN_POSITIVE {
                    continue;
                }
                let rho = col.iter().zip(resid.iter()).map(|(a, b)| a * b).sum::<f64>()
                    / self.n
                    + self.col_sq[j] * beta[j];
                let new = soft_threshold(rho, lambda) / self.col_sq[j];
                let d = new - beta[j];
                if d != 0.0 {
                    for (r, &x) in resid.iter_mut().zip(col) {
                        *r -= x * d;
                    }
                    beta[j] = new;
                    max_delta = max_delta.max(d.abs());
                }
            }
            if max_delta < CD_TOL {
                break;
            }
        }
    }

    /// Solutions along a descending penalty path (warm starts).
    fn fit_path(&self, lambdas: &[f64]) -> Vec<Vec<f64>> {
        let p = self.cols.len();
        let mut beta = vec![0.0; p];
        let mut resid = self.y.clone();
        let mut out = Vec::with_capacity(lambdas.len());
        for &l in lambdas {
            self.solve(l, &mut beta, &mut resid);
            out.push(beta.clone());
        }
        out
    }

    /// Prediction for a raw (uncentered) observation.
    fn predict(&self, beta: &[f64], predictors: &[&[f64]], row: usize) -> f64 {
        let mut v = self.y_mean;
        for (j, p) in predictors.iter().enumerate() {
            v += beta[j] * (p[row] - self.col_means[j]);
        }
        v
    }
}

/// Coefficients of a single LASSO solve on the full data at a fixed
/// penalty (cold start). Exposed for direct verification against
/// closed-form solutions.
pub fn lasso_coefficients(y: &[f64], predictors: &[&[f64]], lambda: f64) -> Vec<f64> {
    let prob = Centered::build(y, predictors, None);
    let mut beta = vec![0.0; predictors.len()];
    let mut resid = prob.y.clone();
    prob.solve(lambda, &mut beta, &mut resid);
    beta
}

/// Smallest penalty that zeroes all coefficients for this problem.
pub fn lambda_max(y: &[f64], predictors: &[&[f64]]) -> f64 {
    Centered::build(y, predictors, None).lambda_max()
}

/// Seeded k-fold cross-validated LASSO with the one-standard-error rule.
pub fn fit_lasso_cv(
    y: &[f64],
    predictors: &[&[f64]],
    k_folds: usize,
    seed: u64,
) -> Result<LassoFit, LassoError> {
    assert!(!predictors.is_empty(), "at least one candidate predictor required");
    let n = y.len();
    if k_folds < 2 || k_folds > n {
        return Err(LassoError::InvalidFolds { folds: k_folds, rows: n });
    }

    let full = Centered::build(y, predictors, None);
    let lmax = full.lambda_max().max(f64::MIN_POSITIVE);
    let lambdas: Vec<f64> = (0..PATH_LEN)
        .map(|i| lmax * libm::pow(10.0, -PATH_DECADES * i as f64 / (PATH_LEN - 1) as f64))
        .collect();

    // Seeded fold assignment: shuffle the row indices, then deal them
    // round-robin into folds.
    let mut perm: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for i in (1..n).rev() {
        let j = rng.random_range(0..=i);
        perm.swap(i, j);
    }
    let mut fold_of = vec![0usize; n];
    for (pos, &row) in perm.iter().enumerate() {
        fold_of[row] = pos % k_folds;
    }

    let mut fold_mse = vec![vec![0.0f64; k_folds]; PATH_LEN];
    for f in 0..k_folds {
        let train: Vec<usize> = (0..n).filter(|&i| fold_of[i] != f).collect();
        let test: Vec<usize> = (0..n).filter(|&i| fold_of[i] == f).collect();
        let train_y: Vec<f64> = train.iter().map(|&i| y[i]).collect();
        if train_y.iter().all(|&v| v == train_y[0]) {
            return Err(LassoError::DegenerateFold { fold: f });
        }
        let prob = Centered::build(y, predictors, Some(&train));
        let betas = prob.fit_path(&lambdas);
        for (g, beta) in betas.iter().enumerate() {
            let sse: f64 = test
                .iter()
                .map(|&row| {
                    let e = y[row] - prob.predict(beta, predictors, row);
                    e * e
                })
                .sum();
            fold_mse[g][f] = sse / test.len() as f64;
        }
    }

    let cv_mean: Vec<f64> = fold_mse.iter().map(|m| stat::mean(m)).collect();
    let cv_sd: Vec<f64> = fold_mse.iter().map(|m| stat::sd_sample(m)).collect();

    // First index = largest penalty; ties resolve toward more shrinkage.
    let mut g_min = 0;
    for (g, &m) in cv_mean.iter().enumerate() {
        if m < cv_mean[g_min] {
            g_min = g;
        }
    }
    let threshold = cv_mean[g_min] + cv_sd[g_min];
    let g_1se = (0..PATH_LEN).find(|&g| cv_mean[g] <= threshold).unwrap_or(g_min);

    let betas = full.fit_path(&lambdas);
    let coefficients = betas[g_1se].clone();
    let intercept = full.y_mean
        - coefficients
            .iter()
            .zip(&full.col_means)
            .map(|(b, m)| b * m)
            .sum::<f64>();

    Ok(LassoFit {
        coefficients,
        intercept,
        lambda_min: lambdas[g_min],
        lambda_1se: lambdas[g_1se],
        lambdas,
        cv_mean,
        cv_sd,
    })
}
