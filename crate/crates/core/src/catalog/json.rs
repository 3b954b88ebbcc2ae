//! The catalog JSON document, the data-dictionary import route.

use serde::{Deserialize, Serialize};

use super::{CatalogError, ColumnDef, FkDef, RelationalCatalog, TableDef};
use crate::value::DataType;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CatalogDoc {
    schema: String,
    tables: Vec<TableDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TableDoc {
    name: String,
    columns: Vec<ColumnDoc>,
    primary_key: Vec<String>,
    foreign_keys: Vec<FkDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ColumnDoc {
    name: String,
    #[serde(rename = "type")]
    data_type: String,
    nullable: bool,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    unique: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FkDoc {
    columns: Vec<String>,
    ref_table: String,
    ref_columns: Vec<String>,
}

/// Loads a catalog JSON document and validates it.
pub fn load_catalog(document: &str) -> Result<RelationalCatalog, CatalogError> {
    load_catalog_unchecked(document)?.into_valid()
}

/// Loads a catalog JSON document, applying only the structural catalog rules.
pub fn load_catalog_unchecked(document: &str) -> Result<RelationalCatalog, CatalogError> {
    let doc: CatalogDoc =
        serde_json::from_str(document).map_err(|e| CatalogError::SchemaViolation(format!("catalog document: {e}")))?;
    let tables = doc
        .tables
        .into_iter()
        .map(|t| {
            let columns = t
                .columns
                .into_iter()
                .map(|c| {
                    let data_type = DataType::parse(&c.data_type)
                        .map_err(|e| CatalogError::SchemaViolation(format!("{}.{}: {e}", t.name, c.name)))?;
                    let mut col = ColumnDef::new(c.name, data_type, c.nullable);
                    col.unique = c.unique;
                    Ok(col)
                })
                .collect::<Result<Vec<_>, CatalogError>>()?;
            Ok(TableDef {
                name: t.name,
                columns,
                primary_key: t.primary_key,
                foreign_keys: t
                    .foreign_keys
                    .into_iter()
                    .map(|f| FkDef { columns: f.columns, ref_table: f.ref_table, ref_columns: f.ref_columns })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, CatalogError>>()?;
    RelationalCatalog::from_tables(doc.schema, tables)
}

/// Renders a catalog as a pretty-printed catalog JSON document.
pub fn catalog_to_json(catalog: &RelationalCatalog) -> String {
    let doc = CatalogDoc {
        schema: catalog.schema_name().to_string(),
        tables: catalog
            .tables()
            .iter()
            .map(|t| TableDoc {
                name: t.name.clone(),
                columns: t
                    .columns
                    .iter()
                    .map(|c| ColumnDoc {
                        name: c.name.clone(),
                        data_type: c.data_type.to_string(),
                        nullable: c.nullable,
                        unique: c.unique,
                    })
                    .collect(),
                primary_key: t.primary_key.clone(),
                foreign_keys: t
                    .foreign_keys
                    .iter()
                    .map(|f| FkDoc {
                        columns: f.columns.clone(),
                        ref_table: f.ref_table.clone(),
                        ref_columns: f.ref_columns.clone(),
                    })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("catalog document serializes")
}
