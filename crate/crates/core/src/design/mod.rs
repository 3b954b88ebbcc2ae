//! Star-schema design: measure selection, grain selection, dimension and
//! hierarchy derivation, and assembly of one fact table with its dimensions.

mod dimension;
mod document;
mod measures;
mod star;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::FkPath;
use crate::value::DataType;

pub use dimension::derive_dimension;
pub use document::{design_from_document, DesignDocument, GrainEntry};
pub use measures::{fact_source_table, select_measures, MeasureRequest};
pub use star::{build_star_schema, emit_star_ddl, HierarchyOverrides};

/// A design failure, tagged with the design-document field it arose from.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{field}: {kind}")]
pub struct DesignError {
    pub field: String,
    pub kind: DesignErrorKind,
}

impl DesignError {
    pub(crate) fn new(field: impl Into<String>, kind: DesignErrorKind) -> Self {
        DesignError { field: field.into(), kind }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DesignErrorKind {
    #[error("malformed design document: {0}")]
    Document(String),
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown column {table}.{column}")]
    UnknownColumn { table: String, column: String },
    #[error("{agg} requires a numeric column but {column} is {data_type}")]
    NotNumeric { column: String, agg: Aggregation, data_type: DataType },
    #[error("measures come from different tables: {0:?}")]
    MixedSourceTables(Vec<String>),
    #[error("no aggregation requested")]
    NoAggregation,
    #[error("no measures requested")]
    NoMeasures,
    #[error("grain is empty")]
    EmptyGrain,
    #[error("duplicate name {0}")]
    DuplicateName(String),
    #[error("grain attribute repeated: {0}")]
    DuplicateGrain(String),
    #[error("no path from {from} to {to}")]
    NoPathFound { from: String, to: String },
    #[error("path index {index} out of range; available paths: {}", .available.iter().enumerate().map(|(i, p)| format!("[{i}] {p}")).collect::<Vec<_>>().join(", "))]
    PathIndexOutOfRange { index: usize, available: Vec<String> },
    #[error("unsupported: {0}")]
    UnsupportedFeature(String),
    #[error("invalid hierarchy override: {0}")]
    InvalidOverride(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Aggregation {
    #[serde(alias = "sum")]
    Sum,
    #[serde(alias = "count")]
    Count,
    #[serde(alias = "min")]
    Min,
    #[serde(alias = "max")]
    Max,
    #[serde(alias = "avg")]
    Avg,
}

impl Aggregation {
    pub fn suffix(&self) -> &'static str {
        match self {
            Aggregation::Sum => "sum",
            Aggregation::Count => "count",
            Aggregation::Min => "min",
            Aggregation::Max => "max",
            Aggregation::Avg => "avg",
        }
    }
}

impl fmt::Display for Aggregation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.suffix().to_ascii_uppercase())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnRef {
    pub table: String,
    pub column: String,
}

impl ColumnRef {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        ColumnRef { table: table.into(), column: column.into() }
    }
}

impl fmt::Display for ColumnRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.table, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeasureSpec {
    pub source: ColumnRef,
    pub data_type: DataType,
    /// Distinct, in canonical order.
    pub aggregations: Vec<Aggregation>,
    pub output_name: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrainAttribute {
    pub table: String,
    pub column: String,
    /// Index into the ranked path list from the fact-source table.
    #[serde(default)]
    pub chosen_path_index: usize,
    /// Explicit dimension name.
    #[serde(default)]
    pub name: Option<String>,
}

impl GrainAttribute {
    pub fn new(table: impl Into<String>, column: impl Into<String>) -> Self {
        GrainAttribute { table: table.into(), column: column.into(), chosen_path_index: 0, name: None }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }

    pub fn with_path(mut self, index: usize) -> Self {
        self.chosen_path_index = index;
        self
    }

    pub fn column_ref(&self) -> ColumnRef {
        ColumnRef::new(&self.table, &self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GrainSpec {
    pub attributes: Vec<GrainAttribute>,
}

/// How a level's member value is obtained from its source column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LevelDerivation {
    Column,
    /// `YYYY-MM` of a DATE.
    Month,
    /// `YYYY-Qn` of a DATE.
    Quarter,
    /// `YYYY` of a DATE.
    Year,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyLevel {
    pub name: String,
    pub source: ColumnRef,
    pub derivation: LevelDerivation,
    pub data_type: DataType,
    /// Number of FK hops from the grain table to the source table.
    pub depth: usize,
}

/// Levels ordered finest (the grain) first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchySpec {
    pub levels: Vec<HierarchyLevel>,
}

impl HierarchySpec {
    pub fn level_index(&self, name: &str) -> Option<usize> {
        self.levels.iter().position(|l| l.name == name)
    }

    pub fn level_names(&self) -> Vec<&str> {
        self.levels.iter().map(|l| l.name.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptiveAttribute {
    pub source: ColumnRef,
    pub output_name: String,
    pub data_type: DataType,
    pub depth: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DimensionSpec {
    pub name: String,
    pub surrogate_key_name: String,
    pub natural_key: ColumnRef,
    pub hierarchy: HierarchySpec,
    pub descriptive_attributes: Vec<DescriptiveAttribute>,
    /// Fact-source table to the grain table, then onward through the tables the
    /// hierarchy and attributes are drawn from.
    pub source_path: FkPath,
    /// Number of leading `source_path` edges that reach the grain table.
    pub grain_depth: usize,
}

/// A physical column of a dimension table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionColumn {
    pub name: String,
    pub data_type: DataType,
    pub content: DimensionColumnContent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DimensionColumnContent {
    Level(usize),
    Attribute(usize),
}

impl DimensionSpec {
    pub fn table_name(&self) -> String {
        format!("dim_{}", self.name)
    }

    /// Edges walked from the fact-source table to the grain table.
    pub fn grain_edges(&self) -> &[crate::graph::FkEdge] {
        &self.source_path.edges[..self.grain_depth]
    }

    /// Edges walked from the grain table up to the outermost attribute table.
    pub fn extension_edges(&self) -> &[crate::graph::FkEdge] {
        &self.source_path.edges[self.grain_depth..]
    }

    pub fn grain_table(&self) -> &str {
        &self.natural_key.table
    }

    pub fn level_for_attribute(&self, attr: &DescriptiveAttribute) -> Option<usize> {
        self.hierarchy.levels.iter().position(|l| l.derivation == LevelDerivation::Column && l.source == attr.source)
    }

    /// Physical columns after the surrogate key: every level, then the
    /// descriptive attributes not already stored as a level.
    pub fn table_columns(&self) -> Vec<DimensionColumn> {
        let mut cols: Vec<DimensionColumn> = self
            .hierarchy
            .levels
            .iter()
            .enumerate()
            .map(|(i, l)| DimensionColumn {
                name: l.name.clone(),
                data_type: l.data_type,
                content: DimensionColumnContent::Level(i),
            })
            .collect();
        for (i, a) in self.descriptive_attributes.iter().enumerate() {
            if self.level_for_attribute(a).is_none() {
                cols.push(DimensionColumn {
                    name: a.output_name.clone(),
                    data_type: a.data_type,
                    content: DimensionColumnContent::Attribute(i),
                });
            }
        }
        cols
    }
}

/// Which part of a measure a fact column stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FactColumnRole {
    Value,
    AvgSum,
    AvgCount,
}

/// A physical measure column. `combine` is the distributive aggregation that
/// merges two partial values of the column.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactColumn {
    pub name: String,
    pub measure: String,
    pub aggregation: Aggregation,
    pub role: FactColumnRole,
    pub source: ColumnRef,
    pub data_type: DataType,
}

impl FactColumn {
    pub fn combine(&self) -> Aggregation {
        match (self.aggregation, self.role) {
            (_, FactColumnRole::AvgSum) => Aggregation::Sum,
            (_, FactColumnRole::AvgCount) | (Aggregation::Count, _) => Aggregation::Sum,
            (agg, FactColumnRole::Value) => agg,
        }
    }

    pub fn scale(&self) -> u8 {
        self.data_type.scale()
    }

    /// COUNT-like columns are never NULL.
    pub fn is_count(&self) -> bool {
        self.role == FactColumnRole::AvgCount
            || (self.role == FactColumnRole::Value && self.aggregation == Aggregation::Count)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactTableSpec {
    pub name: String,
    pub source_table: String,
    pub grain: GrainSpec,
    /// (dimension name, surrogate key column), one per dimension in order.
    pub foreign_keys: Vec<(String, String)>,
    pub measures: Vec<MeasureSpec>,
    pub columns: Vec<FactColumn>,
}

impl FactTableSpec {
    pub fn table_name(&self) -> String {
        format!("fact_{}", self.name)
    }
}

/// One fact table and its dimensions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarSchema {
    pub fact: FactTableSpec,
    pub dimensions: Vec<DimensionSpec>,
}

impl StarSchema {
    pub fn dimension(&self, name: &str) -> Option<&DimensionSpec> {
        self.dimensions.iter().find(|d| d.name == name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::{parse_ddl, parse_ddl_unchecked};
    use crate::graph::SchemaGraph;

    const RETAIL_DDL: &str = include_str!("../../fixtures/retail/schema.sql");
    const RETAIL_DESIGN: &str = include_str!("../../fixtures/retail/design.json");
    const GORANNET_DDL: &str = include_str!("../../fixtures/gorannet/schema.sql");
    const GORANNET_DESIGN: &str = include_str!("../../fixtures/gorannet/design.json");

    fn retail() -> StarSchema {
        design_from_document(RETAIL_DESIGN, &parse_ddl(RETAIL_DDL).unwrap()).unwrap()
    }

    #[test]
    fn retail_dimensions_and_hierarchies() {
        let star = retail();
        let names: Vec<_> = star.dimensions.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["date", "product", "store"]);
        assert_eq!(star.dimension("date").unwrap().hierarchy.level_names(), ["day", "month", "quarter", "year"]);
        assert_eq!(star.dimension("product").unwrap().hierarchy.level_names(), ["product_name", "category_name"]);
        assert_eq!(star.dimension("store").unwrap().hierarchy.level_names(), ["store_name", "city", "region"]);
        let cols: Vec<_> = star.fact.columns.iter().map(|c| c.name.as_str()).collect();
        assert_eq!(cols, ["quantity_sum", "total_price_sum", "total_price_avg_sum", "total_price_avg_count"]);
        assert_eq!(star.fact.table_name(), "fact_sales");
    }

    #[test]
    fn retail_ddl_round_trips() {
        let star = retail();
        let ddl = emit_star_ddl(&star);
        assert_eq!(ddl.matches("CREATE TABLE").count(), 4);
        let reparsed = parse_ddl(&ddl).unwrap();
        let fact = reparsed.table("fact_sales").unwrap();
        assert_eq!(fact.foreign_keys.len(), 3);
        assert_eq!(fact.primary_key, ["date_key", "product_key", "store_key"]);
        assert_eq!(reparsed.tables(), star.to_catalog().with_schema_name("default").tables());
        assert_eq!(ddl, emit_star_ddl(&retail()));
    }

    #[test]
    fn gorannet_star() {
        let star = design_from_document(GORANNET_DESIGN, &parse_ddl(GORANNET_DDL).unwrap()).unwrap();
        let loc = star.dimension("location").unwrap();
        assert_eq!(loc.hierarchy.level_names(), ["location_name", "district_name", "governorate"]);
        let st = star.dimension("service_type").unwrap();
        assert_eq!(st.grain_depth, 2);
        assert_eq!(st.hierarchy.level_names(), ["type_name"]);
    }

    #[test]
    fn measure_errors() {
        let cat = parse_ddl(RETAIL_DDL).unwrap();
        let err =
            select_measures(&cat, &[MeasureRequest::new("stores", "store_name", &[Aggregation::Sum])]).unwrap_err();
        assert!(matches!(err.kind, DesignErrorKind::NotNumeric { .. }), "{err}");
        assert_eq!(err.field, "measures[0]");
        let ok = select_measures(&cat, &[MeasureRequest::new("stores", "store_name", &[Aggregation::Count])]);
        assert!(ok.is_ok());
        let err = select_measures(
            &cat,
            &[
                MeasureRequest::new("sales", "quantity", &[Aggregation::Sum]),
                MeasureRequest::new("promotions", "discount", &[Aggregation::Max]),
            ],
        )
        .unwrap_err();
        assert!(matches!(err.kind, DesignErrorKind::MixedSourceTables(_)));
        let err = select_measures(&cat, &[MeasureRequest::new("sales", "nope", &[Aggregation::Sum])]).unwrap_err();
        assert!(matches!(err.kind, DesignErrorKind::UnknownColumn { .. }));
    }

    #[test]
    fn grain_errors_name_the_field() {
        let cat = parse_ddl(RETAIL_DDL).unwrap();
        let mut doc = DesignDocument::parse(RETAIL_DESIGN).unwrap();
        doc.grain[1].path = 3;
        let err = doc.design(&cat).unwrap_err();
        assert_eq!(err.field, "grain[1]");
        assert!(err.to_string().contains("sales -> products"), "{err}");

        let mut doc = DesignDocument::parse(RETAIL_DESIGN).unwrap();
        doc.grain.clear();
        assert_eq!(doc.design(&cat).unwrap_err().kind, DesignErrorKind::EmptyGrain);

        let mut doc = DesignDocument::parse(RETAIL_DESIGN).unwrap();
        doc.grain.push(GrainEntry { table: "promotions".into(), column: "promotion_name".into(), path: 0, name: None });
        assert!(matches!(doc.design(&cat).unwrap_err().kind, DesignErrorKind::NoPathFound { .. }));

        let mut doc = DesignDocument::parse(RETAIL_DESIGN).unwrap();
        doc.hierarchy_overrides.insert("date".into(), vec![ColumnRef::new("sales", "quantity")]);
        let err = doc.design(&cat).unwrap_err();
        assert_eq!(err.field, "hierarchy_overrides.date");

        assert!(matches!(
            DesignDocument::parse(r#"{"fact_name": "x", "measures": [], "grain": [], "extra": 1}"#).unwrap_err().kind,
            DesignErrorKind::Document(m) if m.contains("extra")
        ));
    }

    #[test]
    fn role_playing_dimensions_get_suffixed_names() {
        let cat = parse_ddl_unchecked(
            "CREATE TABLE stores (store_id INTEGER PRIMARY KEY, name VARCHAR(20));
             CREATE TABLE sales (id INTEGER PRIMARY KEY, amount INTEGER, ship_store_id INTEGER NOT NULL, sell_store_id INTEGER NOT NULL,
                FOREIGN KEY (sell_store_id) REFERENCES stores (store_id),
                FOREIGN KEY (ship_store_id) REFERENCES stores (store_id));",
        )
        .unwrap();
        let graph = SchemaGraph::build(&cat);
        let measures = select_measures(&cat, &[MeasureRequest::new("sales", "amount", &[Aggregation::Sum])]).unwrap();
        let grain = GrainSpec {
            attributes: vec![GrainAttribute::new("stores", "name"), GrainAttribute::new("stores", "name").with_path(1)],
        };
        let star = build_star_schema("s", measures, &grain, &graph, &cat, &HierarchyOverrides::new()).unwrap();
        let names: Vec<_> = star.dimensions.iter().map(|d| d.name.as_str()).collect();
        assert_eq!(names, ["stores_sell_store_id", "stores_ship_store_id"]);
    }

    #[test]
    fn composite_path_is_unsupported() {
        let cat = parse_ddl_unchecked(
            "CREATE TABLE p (a INTEGER, b INTEGER, name VARCHAR(5), PRIMARY KEY (a, b));
             CREATE TABLE f (id INTEGER PRIMARY KEY, x INTEGER, pa INTEGER NOT NULL, pb INTEGER NOT NULL,
                FOREIGN KEY (pa, pb) REFERENCES p (a, b));",
        )
        .unwrap();
        let graph = SchemaGraph::build(&cat);
        let path = graph.find_paths("f", ("p", "name")).unwrap().remove(0);
        let err = derive_dimension(&graph, &cat, &GrainAttribute::new("p", "name"), &path, &[]).unwrap_err();
        assert!(matches!(err.kind, DesignErrorKind::UnsupportedFeature(_)));
    }
}
