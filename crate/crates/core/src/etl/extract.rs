use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;

use super::EtlError;
use crate::catalog::{RelationalCatalog, TableDef};
use crate::value::{DataType, Value};

/// Rows of one operational table, columns in catalog order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableData {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Value>>,
}

/// All operational tables of a catalog.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Dataset {
    tables: Vec<TableData>,
}

impl Dataset {
    pub fn new(tables: Vec<TableData>) -> Self {
        Dataset { tables }
    }

    pub fn tables(&self) -> &[TableData] {
        &self.tables
    }

    pub fn table(&self, name: &str) -> Option<&TableData> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Writes one `<table>.csv` per table. NULL is written as an empty field, so
    /// empty strings in nullable columns do not survive a round trip.
    pub fn write_csv_dir(&self, dir: &Path) -> Result<(), EtlError> {
        let io = |e: std::io::Error| EtlError::Io { path: dir.to_path_buf(), message: e.to_string() };
        fs::create_dir_all(dir).map_err(io)?;
        for t in &self.tables {
            let path = dir.join(format!("{}.csv", t.name));
            let csv_err = |e: csv::Error| EtlError::Io { path: path.clone(), message: e.to_string() };
            let mut w = csv::Writer::from_path(&path).map_err(csv_err)?;
            w.write_record(&t.columns).map_err(csv_err)?;
            for row in &t.rows {
                w.write_record(row.iter().map(Value::to_string)).map_err(csv_err)?;
            }
            w.flush().map_err(|e| EtlError::Io { path: path.clone(), message: e.to_string() })?;
        }
        Ok(())
    }
}

/// Reads `<data_dir>/<table>.csv` for every catalog table and checks keys.
///
/// The header must list the catalog columns in order. An empty field is NULL in
/// a nullable column and the empty string in a NOT NULL VARCHAR column.
pub fn extract(catalog: &RelationalCatalog, data_dir: &Path) -> Result<Dataset, EtlError> {
    let mut tables = Vec::with_capacity(catalog.tables().len());
    for def in catalog.tables() {
        let path = data_dir.join(format!("{}.csv", def.name));
        if !path.is_file() {
            return Err(EtlError::MissingFile(path));
        }
        let csv_err = |e: csv::Error| EtlError::Io { path: path.clone(), message: e.to_string() };
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(&path).map_err(csv_err)?;
        let header: Vec<String> = reader.headers().map_err(csv_err)?.iter().map(|h| h.trim().to_string()).collect();
        let expected: Vec<String> = def.columns.iter().map(|c| c.name.clone()).collect();
        if header != expected {
            return Err(EtlError::HeaderMismatch { table: def.name.clone(), expected, found: header });
        }
        let mut rows = Vec::new();
        for (i, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let row = record
                .iter()
                .zip(&def.columns)
                .map(|(field, col)| {
                    parse_field(field, col.data_type, col.nullable).map_err(|message| EtlError::TypeError {
                        table: def.name.clone(),
                        row: i + 1,
                        column: col.name.clone(),
                        message,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(row);
        }
        tables.push(TableData { name: def.name.clone(), columns: expected, rows });
    }
    let data = Dataset { tables };
    check_dataset(catalog, &data)?;
    Ok(data)
}

fn parse_field(field: &str, ty: DataType, nullable: bool) -> Result<Value, String> {
    if field.is_empty() {
        return match ty {
            _ if nullable => Ok(Value::Null),
            DataType::Varchar(_) => Ok(Value::Text(String::new())),
            _ => Err("empty value in NOT NULL column".to_string()),
        };
    }
    Value::parse(field, &ty)
}

/// Checks primary-key uniqueness and that every non-NULL foreign key matches a
/// referenced row. Row numbers in errors count data rows from 1.
pub fn check_dataset(catalog: &RelationalCatalog, data: &Dataset) -> Result<(), EtlError> {
    let mut key_sets: HashMap<(&str, Vec<usize>), HashSet<Vec<&Value>>> = HashMap::new();
    for def in catalog.tables() {
        let t = table_of(data, def)?;
        let pk = positions(def, &def.primary_key);
        let mut seen = HashSet::with_capacity(t.rows.len());
        for (i, row) in t.rows.iter().enumerate() {
            let key: Vec<&Value> = pk.iter().map(|&p| &row[p]).collect();
            if key.iter().any(|v| v.is_null()) {
                return Err(EtlError::TypeError {
                    table: def.name.clone(),
                    row: i + 1,
                    column: def.primary_key.join(","),
                    message: "NULL in primary key".to_string(),
                });
            }
            if !seen.insert(key.clone()) {
                return Err(EtlError::DuplicateKey {
                    table: def.name.clone(),
                    row: i + 1,
                    key: key.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                });
            }
        }
        key_sets.insert((def.name.as_str(), pk), seen);
    }
    for def in catalog.tables() {
        let t = table_of(data, def)?;
        for fk in &def.foreign_keys {
            let Some(parent) = catalog.table(&fk.ref_table) else { continue };
            let local = positions(def, &fk.columns);
            let remote = positions(parent, &fk.ref_columns);
            let parent_rows = &table_of(data, parent)?.rows;
            let set = key_sets
                .entry((parent.name.as_str(), remote.clone()))
                .or_insert_with(|| parent_rows.iter().map(|r| remote.iter().map(|&p| &r[p]).collect()).collect());
            for (i, row) in t.rows.iter().enumerate() {
                let key: Vec<&Value> = local.iter().map(|&p| &row[p]).collect();
                if key.iter().any(|v| v.is_null()) {
                    continue;
                }
                if !set.contains(&key) {
                    return Err(EtlError::ReferentialError {
                        table: def.name.clone(),
                        column: fk.columns.join(","),
                        row: i + 1,
                        value: key.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(","),
                        ref_table: parent.name.clone(),
                    });
                }
            }
        }
    }
    Ok(())
}

fn table_of<'a>(data: &'a Dataset, def: &TableDef) -> Result<&'a TableData, EtlError> {
    data.table(&def.name).ok_or_else(|| EtlError::MissingFile(format!("{}.csv", def.name).into()))
}

pub(crate) fn positions(def: &TableDef, columns: &[String]) -> Vec<usize> {
    columns.iter().map(|c| def.column_index(c).expect("catalog key columns are declared")).collect()
}
