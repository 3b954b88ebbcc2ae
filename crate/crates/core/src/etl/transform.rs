use std::collections::{BTreeMap, HashMap, HashSet};

use chrono::Datelike;

use super::extract::positions;
use super::{BuiltStar, Dataset, DimensionTable, EtlError, FactRow, FactTable, TableData};
use crate::aggregate::{merge, Cell};
use crate::catalog::RelationalCatalog;
use crate::design::{DimensionColumnContent, DimensionSpec, FactColumn, LevelDerivation, StarSchema};
use crate::graph::FkEdge;
use crate::value::Value;

/// Extract output to populated star.
pub fn run_etl(star: &StarSchema, catalog: &RelationalCatalog, data: &Dataset) -> Result<BuiltStar, EtlError> {
    let dimensions = build_dimension_tables(star, catalog, data)?;
    let fact = build_fact_table(star, catalog, data, &dimensions)?;
    Ok(BuiltStar { schema: star.clone(), dimensions, fact })
}

/// Walks FK edges from a row to the referenced row.
struct Navigator<'a> {
    catalog: &'a RelationalCatalog,
    data: &'a Dataset,
    indexes: HashMap<(String, Vec<String>), HashMap<Vec<Value>, usize>>,
}

impl<'a> Navigator<'a> {
    fn new(catalog: &'a RelationalCatalog, data: &'a Dataset) -> Self {
        Navigator { catalog, data, indexes: HashMap::new() }
    }

    fn table(&self, name: &str) -> Result<&'a TableData, EtlError> {
        self.data.table(name).ok_or_else(|| EtlError::MissingFile(format!("{name}.csv").into()))
    }

    fn column(&self, table: &str, column: &str) -> usize {
        self.catalog.table(table).and_then(|t| t.column_index(column)).expect("design columns exist in the catalog")
    }

    /// The parent row referenced by `row` through `edge`, if any.
    fn follow(&mut self, edge: &FkEdge, row: &[Value]) -> Result<Option<&'a [Value]>, EtlError> {
        let child = self.catalog.table(&edge.child).expect("edge child exists");
        let key: Vec<Value> = positions(child, &edge.columns).into_iter().map(|p| row[p].clone()).collect();
        if key.iter().any(Value::is_null) {
            return Ok(None);
        }
        let parent = self.table(&edge.parent)?;
        let index = match self.indexes.entry((edge.parent.clone(), edge.ref_columns.clone())) {
            std::collections::hash_map::Entry::Occupied(e) => e.into_mut(),
            std::collections::hash_map::Entry::Vacant(e) => {
                let def = self.catalog.table(&edge.parent).expect("edge parent exists");
                let cols = positions(def, &edge.ref_columns);
                let mut map = HashMap::with_capacity(parent.rows.len());
                for (i, r) in parent.rows.iter().enumerate() {
                    map.entry(cols.iter().map(|&c| r[c].clone()).collect()).or_insert(i);
                }
                e.insert(map)
            }
        };
        Ok(index.get(&key).map(|&i| parent.rows[i].as_slice()))
    }
}

fn derive(value: &Value, derivation: LevelDerivation) -> Value {
    match (derivation, value) {
        (LevelDerivation::Column, v) => v.clone(),
        (LevelDerivation::Month, Value::Date(d)) => Value::Text(format!("{:04}-{:02}", d.year(), d.month())),
        (LevelDerivation::Quarter, Value::Date(d)) => {
            Value::Text(format!("{:04}-Q{}", d.year(), (d.month() - 1) / 3 + 1))
        }
        (LevelDerivation::Year, Value::Date(d)) => Value::Text(format!("{:04}", d.year())),
        _ => Value::Null,
    }
}

/// One table per dimension: distinct non-NULL grain values of the grain table
/// in first-seen order, after the Unknown member.
pub fn build_dimension_tables(
    star: &StarSchema,
    catalog: &RelationalCatalog,
    data: &Dataset,
) -> Result<Vec<DimensionTable>, EtlError> {
    let mut nav = Navigator::new(catalog, data);
    star.dimensions.iter().map(|d| build_dimension(&mut nav, d)).collect()
}

fn build_dimension(nav: &mut Navigator<'_>, dim: &DimensionSpec) -> Result<DimensionTable, EtlError> {
    let columns = dim.table_columns();
    let grain_table = nav.table(dim.grain_table())?;
    let grain_col = nav.column(dim.grain_table(), &dim.natural_key.column);
    let ext = dim.extension_edges().to_vec();
    // (depth, column position, derivation) per physical column
    let sources: Vec<(usize, usize, LevelDerivation)> = columns
        .iter()
        .map(|c| match c.content {
            DimensionColumnContent::Level(i) => {
                let l = &dim.hierarchy.levels[i];
                (l.depth, nav.column(&l.source.table, &l.source.column), l.derivation)
            }
            DimensionColumnContent::Attribute(i) => {
                let a = &dim.descriptive_attributes[i];
                (a.depth, nav.column(&a.source.table, &a.source.column), LevelDerivation::Column)
            }
        })
        .collect();

    let mut rows = vec![vec![Value::Null; columns.len()]];
    let mut seen: HashSet<&Value> = HashSet::new();
    for row in &grain_table.rows {
        let natural = &row[grain_col];
        if natural.is_null() || !seen.insert(natural) {
            continue;
        }
        let mut chain: Vec<Option<&[Value]>> = vec![Some(row.as_slice())];
        for edge in &ext {
            let next = match chain.last().copied().flatten() {
                Some(r) => nav.follow(edge, r)?,
                None => None,
            };
            chain.push(next);
        }
        rows.push(
            sources
                .iter()
                .map(|&(depth, pos, derivation)| chain[depth].map_or(Value::Null, |r| derive(&r[pos], derivation)))
                .collect(),
        );
    }
    Ok(DimensionTable { name: dim.name.clone(), surrogate_key: dim.surrogate_key_name.clone(), columns, rows })
}

/// Initial accumulator of a column: 0 for counts, NULL otherwise.
pub(crate) fn empty_cell(col: &FactColumn) -> Cell {
    if col.is_count() {
        Some(0)
    } else {
        None
    }
}

/// Contribution of one source value to a column.
pub(crate) fn source_cell(col: &FactColumn, value: &Value) -> Cell {
    if col.is_count() {
        Some(i64::from(!value.is_null()))
    } else {
        value.as_scaled()
    }
}

/// Groups fact-source rows by their surrogate-key tuple and aggregates each
/// measure column. Rows whose grain cannot be resolved land on key 0.
pub fn build_fact_table(
    star: &StarSchema,
    catalog: &RelationalCatalog,
    data: &Dataset,
    dimensions: &[DimensionTable],
) -> Result<FactTable, EtlError> {
    let mut nav = Navigator::new(catalog, data);
    let source = nav.table(&star.fact.source_table)?;
    let lookups: Vec<HashMap<&Value, u32>> = dimensions
        .iter()
        .map(|d| d.rows.iter().enumerate().skip(1).map(|(k, r)| (&r[0], k as u32)).collect())
        .collect();
    let grain_cols: Vec<usize> =
        star.dimensions.iter().map(|d| nav.column(d.grain_table(), &d.natural_key.column)).collect();
    let measure_cols: Vec<usize> =
        star.fact.columns.iter().map(|c| nav.column(&c.source.table, &c.source.column)).collect();

    let mut groups: BTreeMap<Vec<u32>, Vec<Cell>> = BTreeMap::new();
    for row in &source.rows {
        let mut keys = Vec::with_capacity(star.dimensions.len());
        for (di, dim) in star.dimensions.iter().enumerate() {
            let mut current: Option<&[Value]> = Some(row.as_slice());
            for edge in dim.grain_edges() {
                current = match current {
                    Some(r) => nav.follow(edge, r)?,
                    None => None,
                };
            }
            let key = current.and_then(|r| lookups[di].get(&r[grain_cols[di]]).copied()).unwrap_or(0);
            keys.push(key);
        }
        let cells = groups.entry(keys).or_insert_with(|| star.fact.columns.iter().map(empty_cell).collect());
        for (ci, col) in star.fact.columns.iter().enumerate() {
            let v = source_cell(col, &row[measure_cols[ci]]);
            cells[ci] =
                merge(col.combine(), cells[ci], v).map_err(|_| EtlError::Overflow { column: col.name.clone() })?;
        }
    }
    Ok(FactTable {
        name: star.fact.table_name(),
        key_columns: star.fact.foreign_keys.iter().map(|(_, k)| k.clone()).collect(),
        columns: star.fact.columns.clone(),
        rows: groups.into_iter().map(|(keys, cells)| FactRow { keys, cells }).collect(),
    })
}
