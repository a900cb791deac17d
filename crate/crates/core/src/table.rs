//! Part-level measurement tables and the hierarchical bill-of-materials
//! merge that flattens them into one wide table per top-level piece.
//!
//! Children are keyed into their mother by a *position* label, so two
//! interchangeable parts mounted at the same position end up in the same
//! output column (`<position>.<measurement>`). Applying the merge level by
//! level yields dot-joined paths such as `1.2.thick` for deep hierarchies.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::dataset::{Dataset, DatasetError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MergeError {
    #[error("duplicate part id `{id}` within one table")]
    DuplicateId { id: String },
    #[error("duplicate measurement column `{name}`")]
    DuplicateColumn { name: String },
    #[error("column `{name}` has {got} rows, expected {expected}")]
    RaggedColumn { name: String, expected: usize, got: usize },
    #[error("mother `{mother}` has two children at position `{position}`")]
    DuplicatePosition { mother: String, position: String },
    #[error("bill of materials references unknown child `{id}`")]
    UnknownChild { id: String },
    #[error("bill of materials references unknown mother `{id}`")]
    UnknownMother { id: String },
    #[error("child id `{id}` appears in more than one child table")]
    AmbiguousChild { id: String },
    #[error("merged column `{name}` collides with an existing column")]
    ColumnCollision { name: String },
}

/// A non-fatal condition noticed during a merge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MergeWarning {
    /// A child part that no bill-of-materials row places anywhere; its
    /// measurements are excluded from the merged table.
    OrphanChild { id: String },
}

/// One bill-of-materials row: `child` is mounted in `mother` at `position`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BomRow {
    pub child_id: String,
    pub mother_id: String,
    pub position: String,
}

/// Measurements of one part type: a unique id per physical part plus
/// named numeric columns (NaN = missing).
#[derive(Debug, Clone, PartialEq)]
pub struct PartTable {
    ids: Vec<String>,
    column_names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl PartTable {
    pub fn new(
        ids: Vec<String>,
        column_names: Vec<String>,
        columns: Vec<Vec<f64>>,
    ) -> Result<Self, MergeError> {
        for (i, id) in ids.iter().enumerate() {
            if ids[..i].contains(id) {
                return Err(MergeError::DuplicateId { id: id.clone() });
            }
        }
        for (i, name) in column_names.iter().enumerate() {
            if column_names[..i].contains(name) {
                return Err(MergeError::DuplicateColumn { name: name.clone() });
            }
        }
        assert_eq!(column_names.len(), columns.len(), "one name per column");
        for (name, col) in column_names.iter().zip(&columns) {
            if col.len() != ids.len() {
                return Err(MergeError::RaggedColumn {
                    name: name.clone(),
                    expected: ids.len(),
                    got: col.len(),
                });
            }
        }
        Ok(Self { ids, column_names, columns })
    }

    pub fn n_rows(&self) -> usize {
        self.ids.len()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    fn row_index(&self) -> BTreeMap<&str, usize> {
        self.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect()
    }

    /// Drops the id column and hands the measurements to the modelling
    /// pipeline.
    pub fn measurement_dataset(&self) -> Result<Dataset, DatasetError> {
        Dataset::new(self.column_names.clone(), self.columns.clone())
    }
}

/// Merges child measurements into their mother table.
///
/// The output keeps one row per mother part and gains one column
/// `<position>.<name>` for every measurement a child table contributes at
/// that position. Mothers with no child at a position get NaN there.
/// Children never referenced by `bom` are excluded and reported as
/// warnings, not errors.
pub fn merge_bom(
    mother: &PartTable,
    children: &[&PartTable],
    bom: &[BomRow],
) -> Result<(PartTable, Vec<MergeWarning>), MergeError> {
    // Locate every child id once; ambiguity across tables is unresolvable.
    let mut child_home: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for (t, table) in children.iter().enumerate() {
        for (r, id) in table.ids.iter().enumerate() {
            if child_home.insert(id.as_str(), (t, r)).is_some() {
                return Err(MergeError::AmbiguousChild { id: id.clone() });
            }
        }
    }
    let mother_rows = mother.row_index();

    // (mother row, position) -> child location, rejecting double placement.
    let mut placement: BTreeMap<(usize, &str), (usize, usize)> = BTreeMap::new();
    let mut referenced: Vec<bool> = Vec::new();
    referenced.resize(child_home.len(), false);
    let id_slot: BTreeMap<&str, usize> =
        child_home.keys().enumerate().map(|(slot, &id)| (id, slot)).collect();
    for row in bom {
        let &(t, r) = child_home
            .get(row.child_id.as_str())
            .ok_or_else(|| MergeError::UnknownChild { id: row.child_id.clone() })?;
        let &m = mother_rows
            .get(row.mother_id.as_str())
            .ok_or_else(|| MergeError::UnknownMother { id: row.mother_id.clone() })?;
        if placement.insert((m, row.position.as_str()), (t, r)).is_some() {
            return Err(MergeError::DuplicatePosition {
                mother: row.mother_id.clone(),
                position: row.position.clone(),
            });
        }
        referenced[id_slot[row.child_id.as_str()]] = true;
    }

    let mut warnings = Vec::new();
    for (&id, &slot) in id_slot.iter() {
        if !referenced[slot] {
            warnings.push(MergeWarning::OrphanChild { id: String::from(id) });
        }
    }

    // Column layout: mother columns first, then per position (ascending
    // label) the union of contributing child-table columns in table order.
    let mut tables_at: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (&(_, pos), &(t, _)) in &placement {
        let ts = tables_at.entry(pos).or_default();
        if !ts.contains(&t) {
            ts.push(t);
        }
    }
    let mut names = mother.column_names.clone();
    let mut merged_cols: Vec<(&str, usize, usize)> = Vec::new(); // (pos, table, col)
    for (&pos, ts) in &tables_at {
        let mut sorted_ts = ts.clone();
        sorted_ts.sort_unstable();
        for t in sorted_ts {
            for (c, cname) in children[t].column_names.iter().enumerate() {
                let full = format!("{pos}.{cname}");
                if names.contains(&full) {
                    if merged_cols.iter().any(|&(p, tt, cc)| {
                        p == pos && children[tt].column_names[cc] == *cname && tt != t
                    }) {
                        // Same position, same measurement name, different
                        // table: interchangeable parts share the column.
                        continue;
                    }
                    return Err(MergeError::ColumnCollision { name: full });
                }
                names.push(full);
                merged_cols.push((pos, t, c));
            }
        }
    }

    let n = mother.n_rows();
    let mut columns: Vec<Vec<f64>> = mother.columns.clone();
    for &(pos, t, c) in &merged_cols {
        let mut col = alloc::vec![f64::NAN; n];
        for (m, slot) in col.iter_mut().enumerate() {
            if let Some(&(ct, cr)) = placement.get(&(m, pos)) {
                if ct == t {
                    *slot = children[ct].columns[c][cr];
                } else if let Some(cc) =
                    children[ct].column_names.iter().position(|is| is == &children[t].column_names[c])
                {
                    *slot = children[ct].columns[cc][cr];
                }
            }
        }
        columns.push(col);
    }

    let table = PartTable::new(mother.ids.clone(), names, columns)?;
    Ok((table, warnings))
}
