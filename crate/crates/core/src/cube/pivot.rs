use std::collections::{BTreeMap, HashSet};

use super::{QueryError, QueryResult};
use crate::aggregate::Cell;
use crate::value::Value;

/// A query result laid out on two axes. Cells without base data are `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PivotGrid {
    pub row_dims: Vec<String>,
    pub col_dims: Vec<String>,
    pub measures: Vec<String>,
    /// Member tuples, ascending.
    pub row_headers: Vec<Vec<Value>>,
    pub col_headers: Vec<Vec<Value>>,
    /// `cells[r][c]` holds one value per measure.
    pub cells: Vec<Vec<Option<Vec<Value>>>>,
    pub row_totals: Vec<Vec<Value>>,
    pub col_totals: Vec<Vec<Value>>,
    pub grand_total: Vec<Value>,
}

impl PivotGrid {
    /// Swaps the axes.
    pub fn transpose(&self) -> PivotGrid {
        let cells =
            (0..self.col_headers.len()).map(|c| self.cells.iter().map(|row| row[c].clone()).collect()).collect();
        PivotGrid {
            row_dims: self.col_dims.clone(),
            col_dims: self.row_dims.clone(),
            measures: self.measures.clone(),
            row_headers: self.col_headers.clone(),
            col_headers: self.row_headers.clone(),
            cells,
            row_totals: self.col_totals.clone(),
            col_totals: self.row_totals.clone(),
            grand_total: self.grand_total.clone(),
        }
    }
}

/// Places each result row at (row members, column members). Totals re-aggregate
/// the underlying partial aggregates, so AVG totals are true averages.
pub fn pivot(result: &QueryResult, rows: &[&str], cols: &[&str]) -> Result<PivotGrid, QueryError> {
    let grouped: HashSet<&str> = result.group_by.iter().map(|g| g.dimension.as_str()).collect();
    let mut axes: Vec<&str> = rows.iter().chain(cols).copied().collect();
    axes.sort_unstable();
    let before = axes.len();
    axes.dedup();
    if axes.len() != before || axes.len() != grouped.len() || !axes.iter().all(|a| grouped.contains(a)) {
        let mut expected: Vec<&str> = grouped.into_iter().collect();
        expected.sort_unstable();
        return Err(QueryError::AxisMismatch(format!("rows {rows:?} and cols {cols:?} must partition {expected:?}")));
    }
    let row_pos: Vec<usize> = rows.iter().map(|d| result.position(d).expect("checked")).collect();
    let col_pos: Vec<usize> = cols.iter().map(|d| result.position(d).expect("checked")).collect();
    let pick = |members: &[Value], pos: &[usize]| -> Vec<Value> { pos.iter().map(|&p| members[p].clone()).collect() };

    let mut row_index: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
    let mut col_index: BTreeMap<Vec<Value>, usize> = BTreeMap::new();
    for r in &result.rows {
        row_index.insert(pick(&r.members, &row_pos), 0);
        col_index.insert(pick(&r.members, &col_pos), 0);
    }
    for (i, v) in row_index.values_mut().enumerate() {
        *v = i;
    }
    for (i, v) in col_index.values_mut().enumerate() {
        *v = i;
    }
    let (nr, nc) = (row_index.len(), col_index.len());
    let mut cells = vec![vec![None; nc]; nr];
    let mut by_row: Vec<Vec<&Vec<Vec<Cell>>>> = vec![Vec::new(); nr];
    let mut by_col: Vec<Vec<&Vec<Vec<Cell>>>> = vec![Vec::new(); nc];
    for r in &result.rows {
        let ri = row_index[&pick(&r.members, &row_pos)];
        let ci = col_index[&pick(&r.members, &col_pos)];
        cells[ri][ci] = Some(r.values.clone());
        by_row[ri].push(&r.state);
        by_col[ci].push(&r.state);
    }
    let total = |states: &[&Vec<Vec<Cell>>]| -> Result<Vec<Value>, QueryError> {
        result.finish_all(&result.merge_states(states.iter().copied())?)
    };
    Ok(PivotGrid {
        row_dims: rows.iter().map(|s| s.to_string()).collect(),
        col_dims: cols.iter().map(|s| s.to_string()).collect(),
        measures: result.measures.iter().map(|m| m.name.clone()).collect(),
        row_headers: row_index.into_keys().collect(),
        col_headers: col_index.into_keys().collect(),
        cells,
        row_totals: by_row.iter().map(|s| total(s)).collect::<Result<_, _>>()?,
        col_totals: by_col.iter().map(|s| total(s)).collect::<Result<_, _>>()?,
        grand_total: total(&result.rows.iter().map(|r| &r.state).collect::<Vec<_>>())?,
    })
}
