//! Extract operational tables, transform them into dimension and fact rows,
//! persist the star, and check that the load conserved every measure.

mod extract;
mod persist;
mod transform;
mod verify;

use std::path::PathBuf;

use thiserror::Error;

use crate::aggregate::Cell;
use crate::design::{DimensionColumn, FactColumn, StarSchema};
use crate::value::{Decimal, Value};

pub use extract::{check_dataset, extract, Dataset, TableData};
pub use transform::{build_dimension_tables, build_fact_table, run_etl};
pub use verify::{verify, Check, VerifyReport};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EtlError {
    #[error("missing data file {0}")]
    MissingFile(PathBuf),
    #[error("{path}: {message}")]
    Io { path: PathBuf, message: String },
    #[error("{table}: header {found:?} does not match columns {expected:?}")]
    HeaderMismatch { table: String, expected: Vec<String>, found: Vec<String> },
    #[error("{table} row {row}, column {column}: {message}")]
    TypeError { table: String, row: usize, column: String, message: String },
    #[error("{table} row {row}: duplicate primary key ({key})")]
    DuplicateKey { table: String, row: usize, key: String },
    #[error("{table}.{column} row {row}: value {value} has no match in {ref_table}")]
    ReferentialError { table: String, column: String, row: usize, value: String, ref_table: String },
    #[error("overflow while aggregating {column}")]
    Overflow { column: String },
    #[error("persisted star is inconsistent: {0}")]
    Corrupt(String),
}

/// A dimension table. Row `k` holds the member with surrogate key `k`; row 0
/// is the Unknown member whose columns are all NULL.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionTable {
    pub name: String,
    pub surrogate_key: String,
    pub columns: Vec<DimensionColumn>,
    pub rows: Vec<Vec<Value>>,
}

impl DimensionTable {
    /// Number of members, Unknown included.
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct FactRow {
    /// Surrogate keys, one per dimension in star order.
    pub keys: Vec<u32>,
    /// Scaled partial aggregates, one per measure column.
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactTable {
    pub name: String,
    pub key_columns: Vec<String>,
    pub columns: Vec<FactColumn>,
    /// Sorted by key tuple; one row per distinct tuple.
    pub rows: Vec<FactRow>,
}

/// Output of the ETL: the design plus its populated tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltStar {
    pub schema: StarSchema,
    pub dimensions: Vec<DimensionTable>,
    pub fact: FactTable,
}

/// Renders a stored cell as a typed value of the column.
pub fn cell_value(column: &FactColumn, cell: Cell) -> Value {
    match (cell, column.data_type) {
        (None, _) => Value::Null,
        (Some(v), crate::value::DataType::Decimal { scale, .. }) => Value::Decimal(Decimal::new(v, scale)),
        (Some(v), _) => Value::Int(v),
    }
}
