//! The operational source schema: tables, columns and key constraints.
//!
//! Two ingestion routes produce a [`RelationalCatalog`]: the DDL subset parser
//! ([`parse_ddl`]) and the catalog JSON document ([`load_catalog`]). Both apply the
//! same structural checks and the same validation, so equivalent inputs yield
//! equal catalogs.

mod ddl;
mod json;
mod source;

use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::value::DataType;

pub use ddl::{emit_ddl, parse_ddl, parse_ddl_unchecked};
pub use json::{catalog_to_json, load_catalog, load_catalog_unchecked};
pub use source::{Backend, SourceDescriptor};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("syntax error at {line}:{column}: expected {expected}, found {found}")]
    Syntax { line: usize, column: usize, expected: String, found: String },
    #[error("unsupported feature at {line}:{column}: {feature}")]
    UnsupportedFeature { line: usize, column: usize, feature: String },
    #[error("schema violation: {0}")]
    SchemaViolation(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConstraintClass {
    Primary,
    Foreign,
    Unique,
    None,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnDef {
    pub name: String,
    pub data_type: DataType,
    pub nullable: bool,
    /// Declared with a column-level `UNIQUE`.
    pub unique: bool,
    /// Derived from the table's key declarations when the catalog is assembled.
    pub constraint_class: ConstraintClass,
}

impl ColumnDef {
    pub fn new(name: impl Into<String>, data_type: DataType, nullable: bool) -> Self {
        ColumnDef { name: name.into(), data_type, nullable, unique: false, constraint_class: ConstraintClass::None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FkDef {
    pub columns: Vec<String>,
    pub ref_table: String,
    pub ref_columns: Vec<String>,
}

impl FkDef {
    /// Local column names joined with `_`; distinguishes parallel FKs between the same tables.
    pub fn label(&self) -> String {
        self.columns.join("_")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableDef {
    pub name: String,
    pub columns: Vec<ColumnDef>,
    pub primary_key: Vec<String>,
    pub foreign_keys: Vec<FkDef>,
}

impl TableDef {
    pub fn column(&self, name: &str) -> Option<&ColumnDef> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// True when the column takes part in the primary key or any foreign key.
    pub fn is_key_column(&self, name: &str) -> bool {
        self.primary_key.iter().any(|c| c == name)
            || self.foreign_keys.iter().any(|fk| fk.columns.iter().any(|c| c == name))
    }
}

/// An immutable, structurally sound relational catalog.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RelationalCatalog {
    schema_name: String,
    tables: Vec<TableDef>,
}

impl RelationalCatalog {
    /// Assembles a catalog, enforcing the structural rules (unique names, PK and FK
    /// columns declared, FK arity) and deriving each column's constraint class.
    /// Referential problems are left for [`RelationalCatalog::validate`].
    pub fn from_tables(schema_name: impl Into<String>, mut tables: Vec<TableDef>) -> Result<Self, CatalogError> {
        let mut seen_tables = HashSet::new();
        for table in &mut tables {
            if !seen_tables.insert(table.name.to_lowercase()) {
                return Err(CatalogError::SchemaViolation(format!("duplicate table {}", table.name)));
            }
            let mut seen_columns = HashSet::new();
            for col in &table.columns {
                if !seen_columns.insert(col.name.as_str()) {
                    return Err(CatalogError::SchemaViolation(format!("duplicate column {}.{}", table.name, col.name)));
                }
            }
            let mut pk_seen = HashSet::new();
            for pk in &table.primary_key {
                if !pk_seen.insert(pk.as_str()) {
                    return Err(CatalogError::SchemaViolation(format!(
                        "column {} repeated in primary key of {}",
                        pk, table.name
                    )));
                }
                match table.column(pk) {
                    None => {
                        return Err(CatalogError::SchemaViolation(format!(
                            "primary key column {} not declared in table {}",
                            pk, table.name
                        )))
                    }
                    Some(c) if c.nullable => {
                        return Err(CatalogError::SchemaViolation(format!(
                            "primary key column {}.{} is nullable",
                            table.name, pk
                        )))
                    }
                    Some(_) => {}
                }
            }
            for fk in &table.foreign_keys {
                if fk.columns.is_empty() || fk.columns.len() != fk.ref_columns.len() {
                    return Err(CatalogError::SchemaViolation(format!(
                        "foreign key ({}) of table {} has mismatched arity",
                        fk.columns.join(", "),
                        table.name
                    )));
                }
                if let Some(missing) = fk.columns.iter().find(|c| table.column(c).is_none()) {
                    return Err(CatalogError::SchemaViolation(format!(
                        "foreign key column {} not declared in table {}",
                        missing, table.name
                    )));
                }
            }
            let classes: Vec<ConstraintClass> = table
                .columns
                .iter()
                .map(|c| {
                    if table.primary_key.contains(&c.name) {
                        ConstraintClass::Primary
                    } else if table.foreign_keys.iter().any(|fk| fk.columns.contains(&c.name)) {
                        ConstraintClass::Foreign
                    } else if c.unique {
                        ConstraintClass::Unique
                    } else {
                        ConstraintClass::None
                    }
                })
                .collect();
            for (col, class) in table.columns.iter_mut().zip(classes) {
                col.constraint_class = class;
            }
        }
        Ok(RelationalCatalog { schema_name: schema_name.into(), tables })
    }

    /// Like [`RelationalCatalog::from_tables`], but also rejects any catalog whose
    /// validation report contains an error.
    pub fn new(schema_name: impl Into<String>, tables: Vec<TableDef>) -> Result<Self, CatalogError> {
        RelationalCatalog::from_tables(schema_name, tables)?.into_valid()
    }

    pub fn into_valid(self) -> Result<Self, CatalogError> {
        let report = self.validate();
        let first = report.errors().next().map(|f| format!("{}: {}", f.table, f.message));
        match first {
            Some(message) => Err(CatalogError::SchemaViolation(message)),
            None => Ok(self),
        }
    }

    pub fn schema_name(&self) -> &str {
        &self.schema_name
    }

    pub fn with_schema_name(mut self, name: impl Into<String>) -> Self {
        self.schema_name = name.into();
        self
    }

    pub fn tables(&self) -> &[TableDef] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableDef> {
        self.tables.iter().find(|t| t.name == name)
    }

    pub fn table_index(&self, name: &str) -> Option<usize> {
        self.tables.iter().position(|t| t.name == name)
    }

    pub fn column(&self, table: &str, column: &str) -> Option<&ColumnDef> {
        self.table(table).and_then(|t| t.column(column))
    }

    pub fn fk_count(&self) -> usize {
        self.tables.iter().map(|t| t.foreign_keys.len()).sum()
    }

    /// Checks the conditions a normalized source schema must satisfy that can be
    /// decided from metadata alone.
    pub fn validate(&self) -> ValidationReport {
        let mut findings = Vec::new();
        let mut connected = vec![false; self.tables.len()];
        for (ti, table) in self.tables.iter().enumerate() {
            if table.primary_key.is_empty() {
                findings.push(Finding::error(&table.name, "missing primary key"));
            }
            for fk in &table.foreign_keys {
                let cols = fk.columns.join(", ");
                let Some(ri) = self.table_index(&fk.ref_table) else {
                    findings.push(Finding::error(
                        &table.name,
                        format!("foreign key ({cols}) references missing table {}", fk.ref_table),
                    ));
                    continue;
                };
                connected[ti] = true;
                connected[ri] = true;
                let parent = &self.tables[ri];
                if let Some(missing) = fk.ref_columns.iter().find(|c| parent.column(c).is_none()) {
                    findings.push(Finding::error(
                        &table.name,
                        format!("foreign key ({cols}) references missing column {}.{}", parent.name, missing),
                    ));
                    continue;
                }
                if fk.ref_columns != parent.primary_key {
                    findings.push(Finding::error(
                        &table.name,
                        format!(
                            "foreign key ({cols}) must reference the primary key of {} ({})",
                            parent.name,
                            parent.primary_key.join(", ")
                        ),
                    ));
                }
                for (local, remote) in fk.columns.iter().zip(&fk.ref_columns) {
                    let (Some(lc), Some(rc)) = (table.column(local), parent.column(remote)) else {
                        continue;
                    };
                    if lc.data_type != rc.data_type {
                        findings.push(Finding::error(
                            &table.name,
                            format!(
                                "type mismatch: {}.{} is {} but {}.{} is {}",
                                table.name, local, lc.data_type, parent.name, remote, rc.data_type
                            ),
                        ));
                    }
                    if lc.nullable {
                        findings.push(Finding::warning(
                            &table.name,
                            format!("nullable foreign key column {}.{}", table.name, local),
                        ));
                    }
                }
            }
        }
        if self.tables.len() > 1 {
            for (table, linked) in self.tables.iter().zip(connected) {
                if !linked {
                    findings.push(Finding::warning(&table.name, "table is not related to any other table"));
                }
            }
        }
        ValidationReport { findings }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Finding {
    pub severity: Severity,
    pub table: String,
    pub message: String,
}

impl Finding {
    fn error(table: &str, message: impl Into<String>) -> Self {
        Finding { severity: Severity::Error, table: table.to_string(), message: message.into() }
    }

    fn warning(table: &str, message: impl Into<String>) -> Self {
        Finding { severity: Severity::Warning, table: table.to_string(), message: message.into() }
    }
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{tag}: {}: {}", self.table, self.message)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub findings: Vec<Finding>,
}

impl ValidationReport {
    pub fn errors(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Error)
    }

    pub fn warnings(&self) -> impl Iterator<Item = &Finding> {
        self.findings.iter().filter(|f| f.severity == Severity::Warning)
    }

    pub fn has_errors(&self) -> bool {
        self.errors().next().is_some()
    }
}
