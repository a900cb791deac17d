//! Tabular numeric data and the preprocessing pipeline.
//!
//! A [`Dataset`] is a column-major N×p matrix with unique column names.
//! Missing entries are represented as NaN until [`Dataset::impute_mean`]
//! runs. The pipeline order is fixed: impute → drop constant columns →
//! standardize; each stage records what it did in [`Provenance`].

use alloc::string::String;
use alloc::vec::Vec;

use crate::stat;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DatasetError {
    #[error("duplicate column name `{name}`")]
    DuplicateColumn { name: String },
    #[error("column `{name}` has {got} rows, expected {expected}")]
    RaggedColumn { name: String, expected: usize, got: usize },
    #[error("dataset has no rows or no columns")]
    Empty,
    #[error("column `{name}` still contains missing values")]
    MissingValues { name: String },
    #[error("column `{name}` has zero variance and cannot be standardized")]
    ZeroVariance { name: String },
}

/// Why a column was removed during preprocessing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropReason {
    AllMissing,
    Constant,
}

impl DropReason {
    pub fn as_str(self) -> &'static str {
        match self {
            DropReason::AllMissing => "all-missing",
            DropReason::Constant => "constant",
        }
    }
}

/// Preprocessing audit trail: which columns were touched and why.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    /// `(column name, number of imputed entries)`, only columns with > 0.
    pub imputed: Vec<(String, usize)>,
    /// Columns removed from the dataset, in removal order.
    pub dropped: Vec<(String, DropReason)>,
    /// Whether standardization has been applied.
    pub standardized: bool,
}

/// Column-major numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    column_names: Vec<String>,
    columns: Vec<Vec<f64>>,
    n_rows: usize,
    provenance: Provenance,
}

impl Dataset {
    /// Builds a dataset from columns; NaN entries mean "missing".
    pub fn new(column_names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self, DatasetError> {
        if column_names.is_empty() || columns.first().is_none_or(Vec::is_empty) {
            return Err(DatasetError::Empty);
        }
        assert_eq!(column_names.len(), columns.len(), "one name per column");
        for (i, name) in column_names.iter().enumerate() {
            if column_names[..i].contains(name) {
                return Err(DatasetError::DuplicateColumn { name: name.clone() });
            }
        }
        let n_rows = columns[0].len();
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(DatasetError::RaggedColumn {
                    name: name.clone(),
                    expected: n_rows,
                    got: col.len(),
                });
            }
        }
        Ok(Self { column_names, columns, n_rows, provenance: Provenance::default() })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column_name(&self, j: usize) -> &str {
        &self.column_names[j]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    pub fn has_missing(&self) -> bool {
        self.columns.iter().flatten().any(|v| v.is_nan())
    }

    /// Replaces every missing entry with the mean of its column's observed
    /// entries. A column with no observed entries at all is dropped and the
    /// removal recorded, rather than failing the whole dataset.
    pub fn impute_mean(mut self) -> Self {
        let mut keep_names = Vec::new();
        let mut keep_cols = Vec::new();
        for (name, mut col) in self.column_names.drain(..).zip(self.columns.drain(..)) {
            let observed: Vec<f64> = col.iter().copied().filter(|v| !v.is_nan()).collect();
            if observed.is_empty() {
                self.provenance.dropped.push((name, DropReason::AllMissing));
                continue;
            }
            let n_missing = col.len() - observed.len();
            if n_missing > 0 {
                let m = stat::mean(&observed);
                for v in col.iter_mut().filter(|v| v.is_nan()) {
                    *v = m;
                }
                self.provenance.imputed.push((name.clone(), n_missing));
            }
            keep_names.push(name);
            keep_cols.push(col);
        }
        self.column_names = keep_names;
        self.columns = keep_cols;
        self
    }

    /// Removes columns with a single distinct value.
    pub fn drop_constant(mut self) -> Self {
        let mut keep_names = Vec::new();
        let mut keep_cols = Vec::new();
        for (name, col) in self.column_names.drain(..).zip(self.columns.drain(..)) {
            if col.iter().all(|&v| v == col[0]) {
                self.provenance.dropped.push((name, DropReason::Constant));
            } else {
                keep_names.push(name);
                keep_cols.push(col);
            }
        }
        self.column_names = keep_names;
        self.columns = keep_cols;
        self
    }

    /// Centers and scales each column to mean 0 and variance 1, using the
    /// population (divisor N) variance so that the mean square of a
    /// standardized column is exactly 1.
    pub fn standardize(mut self) -> Result<Self, DatasetError> {
        for (name, col) in self.column_names.iter().zip(self.columns.iter_mut()) {
            if col.iter().any(|v| v.is_nan()) {
                return Err(DatasetError::MissingValues { name: name.clone() });
            }
            let m = stat::mean(col);
            let var = stat::variance_pop(col);
            if var <= f64::MIN_POSITIVE {
                return Err(DatasetError::ZeroVariance { name: name.clone() });
            }
            let sd = libm::sqrt(var);
            for v in col.iter_mut() {
                *v = (*v - m) / sd;
            }
        }
        self.provenance.standardized = true;
        Ok(self)
    }

    /// The full preprocessing pipeline in its fixed order.
    pub fn preprocess(self) -> Result<Self, DatasetError> {
        let out = self.impute_mean().drop_constant();
        if out.n_cols() == 0 {
            return Err(DatasetError::Empty);
        }
        out.standardize()
    }
}
