use std::collections::HashSet;
use std::fmt;

use super::transform::{empty_cell, source_cell};
use super::{cell_value, BuiltStar, Dataset};
use crate::aggregate::merge;
use crate::catalog::RelationalCatalog;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VerifyReport {
    pub checks: Vec<Check>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "ok  " } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Compares a built star against its source data: every measure column's
/// grand total, fact key integrity, and dimension member counts.
pub fn verify(catalog: &RelationalCatalog, data: &Dataset, built: &BuiltStar) -> VerifyReport {
    let mut report = VerifyReport::default();
    let star = &built.schema;
    let Some(source) = data.table(&star.fact.source_table) else {
        report.push("source", false, format!("no data for {}", star.fact.source_table));
        return report;
    };
    let def = catalog.table(&star.fact.source_table).expect("fact source is a catalog table");

    for (ci, col) in built.fact.columns.iter().enumerate() {
        let pos = def.column_index(&col.source.column).expect("measure column exists");
        let expected =
            source.rows.iter().try_fold(empty_cell(col), |acc, r| merge(col.combine(), acc, source_cell(col, &r[pos])));
        let actual = built.fact.rows.iter().try_fold(empty_cell(col), |acc, r| merge(col.combine(), acc, r.cells[ci]));
        match (expected, actual) {
            (Ok(e), Ok(a)) => report.push(
                format!("total {}", col.name),
                e == a,
                format!("source {} star {}", show(cell_value(col, e)), show(cell_value(col, a))),
            ),
            _ => report.push(format!("total {}", col.name), false, "overflow"),
        }
    }

    let bad_keys = built
        .fact
        .rows
        .iter()
        .filter(|r| r.keys.iter().zip(&built.dimensions).any(|(&k, d)| k as usize >= d.len()))
        .count();
    report.push("fact keys", bad_keys == 0, format!("{bad_keys} rows reference missing members"));
    report.push(
        "fact rows",
        built.fact.rows.len() <= source.rows.len(),
        format!("{} fact rows from {} source rows", built.fact.rows.len(), source.rows.len()),
    );

    for (spec, dim) in star.dimensions.iter().zip(&built.dimensions) {
        let distinct = data.table(spec.grain_table()).map_or(0, |t| {
            let pos = catalog
                .table(spec.grain_table())
                .and_then(|d| d.column_index(&spec.natural_key.column))
                .expect("grain column exists");
            t.rows.iter().map(|r| &r[pos]).filter(|v| !v.is_null()).collect::<HashSet<_>>().len()
        });
        report.push(
            format!("members {}", spec.name),
            dim.len() == distinct + 1,
            format!("{} members for {distinct} distinct grain values plus Unknown", dim.len()),
        );
    }
    report
}

fn show(v: crate::value::Value) -> String {
    if v.is_null() {
        "NULL".to_string()
    } else {
        v.to_string()
    }
}
