use serde::{Deserialize, Serialize};

use super::{
    build_star_schema, select_measures, ColumnRef, DesignError, DesignErrorKind, GrainAttribute, GrainSpec,
    HierarchyOverrides, MeasureRequest, StarSchema,
};
use crate::catalog::RelationalCatalog;
use crate::graph::SchemaGraph;

/// The JSON design document: measures, grain and optional hierarchy overrides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDocument {
    pub fact_name: String,
    pub measures: Vec<MeasureRequest>,
    pub grain: Vec<GrainEntry>,
    #[serde(default, skip_serializing_if = "HierarchyOverrides::is_empty")]
    pub hierarchy_overrides: HierarchyOverrides,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrainEntry {
    pub table: String,
    pub column: String,
    /// Index into the ranked path list.
    #[serde(default)]
    pub path: usize,
    #[serde(default, rename = "as", skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl DesignDocument {
    pub fn parse(text: &str) -> Result<DesignDocument, DesignError> {
        serde_json::from_str(text).map_err(|e| DesignError::new("document", DesignErrorKind::Document(e.to_string())))
    }

    pub fn grain_spec(&self) -> GrainSpec {
        GrainSpec {
            attributes: self
                .grain
                .iter()
                .map(|g| GrainAttribute {
                    table: g.table.clone(),
                    column: g.column.clone(),
                    chosen_path_index: g.path,
                    name: g.name.clone(),
                })
                .collect(),
        }
    }

    pub fn overrides(&self) -> &HierarchyOverrides {
        &self.hierarchy_overrides
    }

    /// Runs the whole design against a catalog.
    pub fn design(&self, catalog: &RelationalCatalog) -> Result<StarSchema, DesignError> {
        let graph = SchemaGraph::build(catalog);
        let measures = select_measures(catalog, &self.measures)?;
        build_star_schema(&self.fact_name, measures, &self.grain_spec(), &graph, catalog, &self.hierarchy_overrides)
    }
}

/// Parses a design document and designs the star against `catalog`.
pub fn design_from_document(text: &str, catalog: &RelationalCatalog) -> Result<StarSchema, DesignError> {
    DesignDocument::parse(text)?.design(catalog)
}

impl From<&ColumnRef> for GrainEntry {
    fn from(c: &ColumnRef) -> Self {
        GrainEntry { table: c.table.clone(), column: c.column.clone(), path: 0, name: None }
    }
}
