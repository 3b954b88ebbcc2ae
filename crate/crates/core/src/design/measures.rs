use serde::{Deserialize, Serialize};

use super::{Aggregation, ColumnRef, DesignError, DesignErrorKind, MeasureSpec};
use crate::catalog::RelationalCatalog;

/// A requested measure: a source column and the aggregations wanted over it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureRequest {
    pub table: String,
    pub column: String,
    pub aggs: Vec<Aggregation>,
    /// Output name; defaults to the column name.
    #[serde(default, rename = "as", skip_serializing_if = "Option::is_none")]
    pub output_name: Option<String>,
}

impl MeasureRequest {
    pub fn new(table: impl Into<String>, column: impl Into<String>, aggs: &[Aggregation]) -> Self {
        MeasureRequest { table: table.into(), column: column.into(), aggs: aggs.to_vec(), output_name: None }
    }
}

/// Resolves measure requests against the catalog.
///
/// SUM, MIN, MAX and AVG need a numeric column; COUNT accepts any column. All
/// measures must come from one table, which becomes the fact source.
pub fn select_measures(
    catalog: &RelationalCatalog,
    requests: &[MeasureRequest],
) -> Result<Vec<MeasureSpec>, DesignError> {
    if requests.is_empty() {
        return Err(DesignError::new("measures", DesignErrorKind::NoMeasures));
    }
    let mut out: Vec<MeasureSpec> = Vec::with_capacity(requests.len());
    for (i, req) in requests.iter().enumerate() {
        let field = format!("measures[{i}]");
        if catalog.table(&req.table).is_none() {
            return Err(DesignError::new(field, DesignErrorKind::UnknownTable(req.table.clone())));
        }
        let col = catalog.column(&req.table, &req.column).ok_or_else(|| {
            DesignError::new(
                &field,
                DesignErrorKind::UnknownColumn { table: req.table.clone(), column: req.column.clone() },
            )
        })?;
        if req.aggs.is_empty() {
            return Err(DesignError::new(field, DesignErrorKind::NoAggregation));
        }
        let mut aggs = req.aggs.clone();
        aggs.sort();
        aggs.dedup();
        if let Some(&agg) = aggs.iter().find(|a| **a != Aggregation::Count && !col.data_type.is_numeric()) {
            return Err(DesignError::new(
                field,
                DesignErrorKind::NotNumeric {
                    column: format!("{}.{}", req.table, req.column),
                    agg,
                    data_type: col.data_type,
                },
            ));
        }
        let output_name = req.output_name.clone().unwrap_or_else(|| req.column.clone());
        if out.iter().any(|m| m.output_name == output_name) {
            return Err(DesignError::new(field, DesignErrorKind::DuplicateName(output_name)));
        }
        out.push(MeasureSpec {
            source: ColumnRef::new(&req.table, &req.column),
            data_type: col.data_type,
            aggregations: aggs,
            output_name,
        });
    }
    fact_source_table(&out)?;
    Ok(out)
}

/// The single table all measures come from.
pub fn fact_source_table(measures: &[MeasureSpec]) -> Result<&str, DesignError> {
    let first = measures.first().ok_or_else(|| DesignError::new("measures", DesignErrorKind::NoMeasures))?;
    let mut tables: Vec<String> = measures.iter().map(|m| m.source.table.clone()).collect();
    tables.sort();
    tables.dedup();
    if tables.len() > 1 {
        return Err(DesignError::new("measures", DesignErrorKind::MixedSourceTables(tables)));
    }
    Ok(&first.source.table)
}
