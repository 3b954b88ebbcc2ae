//! The in-memory cube and its operator algebra: query, roll-up, drill-down,
//! slice, dice and pivot.

mod index;
mod pivot;
mod query;

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::design::{Aggregation, FactColumn, FactColumnRole, StarSchema};
use crate::etl::{BuiltStar, FactRow};
use crate::value::{DataType, Value, MAX_DECIMAL_PRECISION};

pub use index::DimensionIndex;
pub use pivot::{pivot, PivotGrid};
pub use query::{QueryResult, ResultRow};

/// Extra fractional digits an AVG carries beyond its source column.
pub const AVG_EXTRA_SCALE: u8 = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum QueryError {
    #[error("unknown dimension {0}")]
    UnknownDimension(String),
    #[error("dimension {dimension} has no level {level}")]
    UnknownLevel { dimension: String, level: String },
    #[error("{dimension}.{level} has no member {member}")]
    UnknownMember { dimension: String, level: String, member: String },
    #[error("unknown measure {0}")]
    UnknownMeasure(String),
    #[error("dimension {0} appears twice in group_by")]
    DuplicateDimension(String),
    #[error("filter on {dimension}.{level} accepts no members")]
    EmptyFilter { dimension: String, level: String },
    #[error("{0} is already at its top level")]
    AtTopLevel(String),
    #[error("{0} is already at its bottom level")]
    AtBottomLevel(String),
    #[error("pivot axes must split the group-by dimensions: {0}")]
    AxisMismatch(String),
    #[error("arithmetic overflow in {0}")]
    Overflow(String),
}

/// A dimension at one of its levels.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct LevelRef {
    pub dimension: String,
    pub level: String,
}

impl LevelRef {
    pub fn new(dimension: impl Into<String>, level: impl Into<String>) -> Self {
        LevelRef { dimension: dimension.into(), level: level.into() }
    }
}

/// Restricts base cells to those whose ancestor at `level` is one of `members`.
/// A singleton set is a slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Filter {
    pub dimension: String,
    pub level: String,
    pub members: BTreeSet<Value>,
}

impl Filter {
    pub fn new(
        dimension: impl Into<String>,
        level: impl Into<String>,
        members: impl IntoIterator<Item = Value>,
    ) -> Self {
        Filter { dimension: dimension.into(), level: level.into(), members: members.into_iter().collect() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CubeQuery {
    pub group_by: Vec<LevelRef>,
    pub filters: Vec<Filter>,
    /// Measure names; empty selects every measure.
    pub measures: Vec<String>,
}

impl CubeQuery {
    pub fn new() -> Self {
        CubeQuery::default()
    }

    pub fn group(mut self, dimension: &str, level: &str) -> Self {
        self.group_by.push(LevelRef::new(dimension, level));
        self
    }

    pub fn filter(mut self, filter: Filter) -> Self {
        self.filters.push(filter);
        self
    }

    pub fn measure(mut self, name: &str) -> Self {
        self.measures.push(name.to_string());
        self
    }
}

/// A queryable measure: `<name>_<agg>`, stored in one fact column, or two for AVG.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CubeMeasure {
    pub name: String,
    pub aggregation: Aggregation,
    #[serde(skip)]
    pub columns: Vec<usize>,
    #[serde(skip)]
    pub data_type: DataType,
}

/// An immutable cube over one built star.
#[derive(Debug, Clone)]
pub struct Cube {
    schema: StarSchema,
    dimensions: Vec<DimensionIndex>,
    measures: Vec<CubeMeasure>,
    columns: Vec<FactColumn>,
    cells: Vec<FactRow>,
}

impl Cube {
    pub fn load(built: &BuiltStar) -> Cube {
        let dimensions = built
            .schema
            .dimensions
            .iter()
            .zip(&built.dimensions)
            .map(|(spec, table)| DimensionIndex::build(spec, table))
            .collect();
        let columns = built.fact.columns.clone();
        let mut measures = Vec::new();
        for (i, c) in columns.iter().enumerate() {
            match c.role {
                FactColumnRole::Value => measures.push(CubeMeasure {
                    name: c.name.clone(),
                    aggregation: c.aggregation,
                    columns: vec![i],
                    data_type: c.data_type,
                }),
                FactColumnRole::AvgSum => {
                    let count = columns
                        .iter()
                        .position(|o| o.role == FactColumnRole::AvgCount && o.measure == c.measure)
                        .expect("AVG has a count column");
                    let scale = (c.scale() + AVG_EXTRA_SCALE).min(MAX_DECIMAL_PRECISION);
                    measures.push(CubeMeasure {
                        name: format!("{}_avg", c.measure),
                        aggregation: Aggregation::Avg,
                        columns: vec![i, count],
                        data_type: DataType::Decimal { precision: MAX_DECIMAL_PRECISION, scale },
                    });
                }
                FactColumnRole::AvgCount => {}
            }
        }
        Cube { schema: built.schema.clone(), dimensions, measures, columns, cells: built.fact.rows.clone() }
    }

    pub fn schema(&self) -> &StarSchema {
        &self.schema
    }

    pub fn dimensions(&self) -> &[DimensionIndex] {
        &self.dimensions
    }

    pub fn dimension(&self, name: &str) -> Result<&DimensionIndex, QueryError> {
        self.dimensions.iter().find(|d| d.name() == name).ok_or_else(|| QueryError::UnknownDimension(name.to_string()))
    }

    fn dimension_position(&self, name: &str) -> Result<usize, QueryError> {
        self.dimensions
            .iter()
            .position(|d| d.name() == name)
            .ok_or_else(|| QueryError::UnknownDimension(name.to_string()))
    }

    pub fn measures(&self) -> &[CubeMeasure] {
        &self.measures
    }

    pub fn measure(&self, name: &str) -> Result<&CubeMeasure, QueryError> {
        self.measures.iter().find(|m| m.name == name).ok_or_else(|| QueryError::UnknownMeasure(name.to_string()))
    }

    pub fn fact_columns(&self) -> &[FactColumn] {
        &self.columns
    }

    /// Base cells, sorted by coordinate.
    pub fn cells(&self) -> &[FactRow] {
        &self.cells
    }
}
