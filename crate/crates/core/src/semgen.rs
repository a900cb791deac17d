//! Synthetic ground truth: random additive structural equation models
//! and forward sampling from them.
//!
//! Every edge carries a univariate function drawn from a small dictionary
//! of smooth, non-linear shapes with bounded derivatives — the class for
//! which additive-model structure recovery is identifiable — so recovery
//! tests against these models are meaningful rather than lucky.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::Dataset;
use crate::graph::Dag;

/// One entry of the edge-function dictionary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EdgeFunction {
    /// a·sin(b·x)
    Sine { a: f64, b: f64 },
    /// a·tanh(b·x)
    Tanh { a: f64, b: f64 },
    /// a·x·exp(−x²/2)
    Bump { a: f64 },
}

impl EdgeFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            EdgeFunction::Sine { a, b } => a * libm::sin(b * x),
            EdgeFunction::Tanh { a, b } => a * libm::tanh(b * x),
            EdgeFunction::Bump { a } => a * x * libm::exp(-x * x / 2.0),
        }
    }

    /// Compact human-readable form, e.g. `1.20*sin(0.95*x)`.
    pub fn describe(&self) -> String {
        match *self {
            EdgeFunction::Sine { a, b } => format!("{a:.3}*sin({b:.3}*x)"),
            EdgeFunction::Tanh { a, b } => format!("{a:.3}*tanh({b:.3}*x)"),
            EdgeFunction::Bump { a } => format!("{a:.3}*x*exp(-x^2/2)"),
        }
    }

    fn random(rng: &mut ChaCha8Rng) -> Self {
        let a = rng.random_range(0.8..1.5);
        match rng.random_range(0..3u8) {
            0 => EdgeFunction::Sine { a, b: rng.random_range(0.8..2.0) },
            1 => EdgeFunction::Tanh { a, b: rng.random_range(0.8..2.0) },
            _ => EdgeFunction::Bump { a },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemError {
    #[error("edge {from} -> {to} has no function attached")]
    MissingFunction { from: usize, to: usize },
    #[error("function attached to non-edge {from} -> {to}")]
    FunctionWithoutEdge { from: usize, to: usize },
    #[error("node {node} needs a positive noise standard deviation")]
    InvalidNoise { node: usize },
    #[error("per-node vector has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("edge {from} -> {to} runs against the tier map")]
    TierViolation { from: usize, to: usize },
}

/// A fully specified additive SEM: graph, per-edge functions, per-node
/// noise scale and intercept, optional tier structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SemSpec {
    dag: Dag,
    functions: BTreeMap<(usize, usize), EdgeFunction>,
    noise_sd: Vec<f64>,
    intercepts: Vec<f64>,
    tiers: Option<Vec<usize>>,
}

impl SemSpec {
    pub fn new(
        dag: Dag,
        functions: BTreeMap<(usize, usize), EdgeFunction>,
        noise_sd: Vec<f64>,
        intercepts: Vec<f64>,
        tiers: Option<Vec<usize>>,
    ) -> Result<Self, SemError> {
        let p = dag.node_count();
        if noise_sd.len() != p {
            return Err(SemError::LengthMismatch { expected: p, got: noise_sd.len() });
        }
        if intercepts.len() != p {
            return Err(SemError::LengthMismatch { expected: p, got: intercepts.len() });
        }
        if let Some(t) = &tiers {
            if t.len() != p {
                return Err(SemError::LengthMismatch { expected: p, got: t.len() });
            }
        }
        for (node, &sd) in noise_sd.iter().enumerate() {
            if !(sd > 0.0) {
                return Err(SemError::InvalidNoise { node });
            }
        }
        for (from, to) in dag.edges() {
            if !functions.contains_key(&(from, to)) {
                return Err(SemError::MissingFunction { from, to });
            }
            if let Some(t) = &tiers {
                if t[from] > t[to] {
                    return Err(SemError::TierViolation { from, to });
                }
            }
        }
        for &(from, to) in functions.keys() {
            if !dag.has_edge(from, to) {
                return Err(SemError::FunctionWithoutEdge { from, to });
            }
        }
        Ok(Self { dag, functions, noise_sd, intercepts, tiers })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn node_count(&self) -> usize {
        self.dag.node_count()
    }

    pub fn function(&self, from: usize, to: usize) -> Option<&EdgeFunction> {
        self.functions.get(&(from, to))
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    pub fn tiers(&self) -> Option<&[usize]> {
        self.tiers.as_deref()
    }

    /// Column names used when this model is sampled: x1..xp.
    pub fn column_names(&self) -> Vec<String> {
        (1..=self.node_count()).map(|i| format!("x{i}")).collect()
    }
}

/// Draws a random tiered SEM. Nodes are split evenly into `tier_count`
/// consecutive tiers; every tier-respecting pair — strictly earlier tier,
/// or same tier with the smaller index first — gets an edge with
/// probability `edge_prob`.
pub fn random_sem(p: usize, edge_prob: f64, tier_count: usize, seed: u64) -> SemSpec {
    assert!(p >= 1, "need at least one node");
    assert!((0.0..=1.0).contains(&edge_prob), "edge_prob must be a probability");
    assert!(tier_count >= 1, "need at least one tier");

    let tiers: Vec<usize> = (0..p).map(|i| i * tier_count / p + 1).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dag = Dag::new(p);
    let mut functions = BTreeMap::new();
    for k in 0..p {
        for l in 0..p {
            let candidate = tiers[k] < tiers[l] || (tiers[k] == tiers[l] && k < l);
            if !candidate {
                continue;
            }
            if rng.random::<f64>() < edge_prob {
                dag.add_edge_checked(k, l).expect("tier-ordered edges cannot cycle");
                functions.insert((k, l), EdgeFunction::random(&mut rng));
            }
        }
    }
    let noise_sd: Vec<f64> = (0..p).map(|_| rng.random_range(0.2..0.5)).collect();
    SemSpec::new(dag, functions, noise_sd, vec![0.0; p], Some(tiers))
        .expect("generated spec is consistent by construction")
}

/// Ancestral sampling. Noise is drawn for every node in index order
/// before any structural evaluation, so the result is bit-identical for
/// a given (spec, n, seed) regardless of graph shape. Each edge function
/// is centered by its empirical mean over the sampled parent values, so
/// structural contributions average to zero in the realized sample.
pub fn sample(spec: &SemSpec, n: usize, seed: u64) -> Dataset {
    assert!(n >= 1, "need at least one row");
    let p = spec.node_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = (0..p)
        .map(|l| {
            let sd = spec.noise_sd[l];
            (0..n).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect()
        })
        .collect();

    for &l in spec.dag.topological_order().nodes() {
        let c = spec.intercepts[l];
        for i in 0..n {
            columns[l][i] += c;
        }
        for &k in spec.dag.parents(l) {
            let f = spec.functions[&(k, l)];
            let vals: Vec<f64> = columns[k].iter().map(|&x| f.eval(x)).collect();
            let m = crate::stat::mean(&vals);
            for i in 0..n {
                columns[l][i] += vals[i] - m;
            }
        }
    }

    Dataset::new(spec.column_names(), columns).expect("generated columns are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smooth::{fit_additive, SmootherConfig};
    use approx::assert_abs_diff_eq;

    fn correlation(a: &[f64], b: &[f64]) -> f64 {
        let ma = crate::stat::mean(a);
        let mb = crate::stat::mean(b);
        let mut num = 0.0;
        let mut va = 0.0;
        let mut vb = 0.0;
        for (x, y) in a.iter().zip(b) {
            num += (x - ma) * (y - mb);
            va += (x - ma) * (x - ma);
            vb += (y - mb) * (y - mb);
        }
        num / libm::sqrt(va * vb)
    }

    #[test]
    fn zero_edge_probability_gives_pure_noise_model() {
        let spec = random_sem(5, 0.0, 2, 1);
        assert_eq!(spec.dag().edge_count(), 0);
    }

    #[test]
    fn full_probability_with_singleton_tiers_gives_complete_dag() {
        let p = 5;
        let spec = random_sem(p, 1.0, p, 2);
        assert_eq!(spec.dag().edge_count(), p * (p - 1) / 2);
        for k in 0..p {
            for l in k + 1..p {
                assert!(spec.dag().has_edge(k, l), "missing {k} -> {l}");
            }
        }
        assert_eq!(spec.tiers().unwrap(), &[1, 2, 3, 4, 5]);
    }

    #[test]
    fn generation_and_sampling_are_deterministic() {
        let a = random_sem(6, 0.4, 3, 42);
        let b = random_sem(6, 0.4, 3, 42);
        assert_eq!(a, b);
        let da = sample(&a, 50, 9);
        let db = sample(&b, 50, 9);
        for j in 0..6 {
            assert_eq!(da.column(j), db.column(j), "column {j} must be bit-identical");
        }
        let dc = sample(&a, 50, 10);
        assert_ne!(da.column(0), dc.column(0), "different seed, different draws");
    }

    #[test]
    fn edges_respect_tiers() {
        let spec = random_sem(9, 0.7, 3, 5);
        let tiers = spec.tiers().unwrap();
        for (k, l) in spec.dag().edges() {
            assert!(tiers[k] <= tiers[l], "edge {k}->{l} against tiers");
        }
    }

    #[test]
    fn empty_dag_columns_are_independent() {
        let dag = Dag::new(2);
        let spec = SemSpec::new(
            dag,
            BTreeMap::new(),
            vec![1.0, 1.0],
            vec![0.0, 0.0],
            None,
        )
        .unwrap();
        let data = sample(&spec, 2000, 3);
        let r = correlation(data.column(0), data.column(1));
        assert!(r.abs() < 0.1, "independent columns correlate at {r}");
        assert_abs_diff_eq!(crate::stat::variance_pop(data.column(0)), 1.0, epsilon = 0.15);
    }

    #[test]
    fn single_edge_variance_decomposes() {
        let dag = Dag::from_edges(2, [(0, 1)]).unwrap();
        let mut functions = BTreeMap::new();
        functions.insert((0, 1), EdgeFunction::Sine { a: 1.0, b: 1.0 });
        let spec =
            SemSpec::new(dag, functions, vec![1.0, 0.2], vec![0.0, 0.0], None).unwrap();
        let data = sample(&spec, 5000, 4);
        let sin_vals: Vec<f64> = data.column(0).iter().map(|&x| libm::sin(x)).collect();
        let expected = crate::stat::variance_pop(&sin_vals) + 0.04;
        let got = crate::stat::variance_pop(data.column(1));
        assert!(
            (got / expected - 1.0).abs() < 0.1,
            "Var(X2) = {got}, expected about {expected}"
        );
    }

    #[test]
    fn single_row_sample_is_valid() {
        let spec = random_sem(3, 0.5, 1, 6);
        let data = sample(&spec, 1, 0);
        assert_eq!(data.n_rows(), 1);
        assert_eq!(data.n_cols(), 3);
    }

    #[test]
    fn chain_sampling_respects_markov_factorization() {
        // X1 -> X2 -> X3: given a smooth fit on X2, the residuals of X1
        // and X3 should be nearly uncorrelated.
        let dag = Dag::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut functions = BTreeMap::new();
        functions.insert((0, 1), EdgeFunction::Sine { a: 1.2, b: 1.1 });
        functions.insert((1, 2), EdgeFunction::Tanh { a: 1.3, b: 1.4 });
        let spec = SemSpec::new(
            dag,
            functions,
            vec![1.0, 0.3, 0.3],
            vec![0.0; 3],
            None,
        )
        .unwrap();
        let data = sample(&spec, 5000, 11);
        let cfg = SmootherConfig::default();
        let f1 = fit_additive(data.column(0), &[data.column(1)], &cfg).unwrap();
        let f3 = fit_additive(data.column(2), &[data.column(1)], &cfg).unwrap();
        let r1: Vec<f64> =
            data.column(0).iter().zip(&f1.fitted).map(|(y, f)| y - f).collect();
        let r3: Vec<f64> =
            data.column(2).iter().zip(&f3.fitted).map(|(y, f)| y - f).collect();
        let r = correlation(&r1, &r3);
        assert!(r.abs() < 0.1, "partial correlation {r}");
    }

    #[test]
    fn spec_validation_catches_inconsistencies() {
        let dag = Dag::from_edges(2, [(0, 1)]).unwrap();
        assert_eq!(
            SemSpec::new(dag.clone(), BTreeMap::new(), vec![1.0, 1.0], vec![0.0, 0.0], None)
                .unwrap_err(),
            SemError::MissingFunction { from: 0, to: 1 }
        );
        let mut functions = BTreeMap::new();
        functions.insert((0, 1), EdgeFunction::Bump { a: 1.0 });
        assert_eq!(
            SemSpec::new(
                dag.clone(),
                functions.clone(),
                vec![1.0, 0.0],
                vec![0.0, 0.0],
                None
            )
            .unwrap_err(),
            SemError::InvalidNoise { node: 1 }
        );
        assert_eq!(
            SemSpec::new(
                dag.clone(),
                functions.clone(),
                vec![1.0, 1.0],
                vec![0.0, 0.0],
                Some(vec![2, 1])
            )
            .unwrap_err(),
            SemError::TierViolation { from: 0, to: 1 }
        );
        let mut extra = functions.clone();
        extra.insert((1, 0), EdgeFunction::Bump { a: 1.0 });
        assert_eq!(
            SemSpec::new(dag, extra, vec![1.0, 1.0], vec![0.0, 0.0], None).unwrap_err(),
            SemError::FunctionWithoutEdge { from: 1, to: 0 }
        );
    }
}
