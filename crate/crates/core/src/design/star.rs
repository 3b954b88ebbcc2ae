use std::collections::{BTreeMap, HashSet};

use super::dimension::default_name;
use super::{
    derive_dimension, fact_source_table, Aggregation, ColumnRef, DesignError, DesignErrorKind, DimensionSpec,
    FactColumn, FactColumnRole, FactTableSpec, GrainSpec, MeasureSpec, StarSchema,
};
use crate::catalog::{emit_ddl, ColumnDef, FkDef, RelationalCatalog, TableDef};
use crate::graph::{FkPath, GraphError, SchemaGraph};
use crate::value::{DataType, MAX_DECIMAL_PRECISION};

/// Replacement levels above the grain, keyed by dimension name.
pub type HierarchyOverrides = BTreeMap<String, Vec<ColumnRef>>;

/// Assembles the fact table and one dimension per grain attribute.
pub fn build_star_schema(
    fact_name: &str,
    measures: Vec<MeasureSpec>,
    grain: &GrainSpec,
    graph: &SchemaGraph,
    catalog: &RelationalCatalog,
    overrides: &HierarchyOverrides,
) -> Result<StarSchema, DesignError> {
    let source = fact_source_table(&measures)?.to_string();
    if grain.attributes.is_empty() {
        return Err(DesignError::new("grain", DesignErrorKind::EmptyGrain));
    }

    // Resolve each grain attribute to its chosen path.
    let mut chosen: Vec<FkPath> = Vec::with_capacity(grain.attributes.len());
    let mut seen = HashSet::new();
    for (i, attr) in grain.attributes.iter().enumerate() {
        let field = format!("grain[{i}]");
        let paths = graph.find_paths(&source, (&attr.table, &attr.column)).map_err(|e| {
            let kind = match e {
                GraphError::UnknownTable(t) => DesignErrorKind::UnknownTable(t),
                GraphError::UnknownColumn { table, column } => DesignErrorKind::UnknownColumn { table, column },
                GraphError::NoPathFound { from, to } => DesignErrorKind::NoPathFound { from, to },
            };
            DesignError::new(&field, kind)
        })?;
        let path = paths.get(attr.chosen_path_index).cloned().ok_or_else(|| {
            DesignError::new(
                &field,
                DesignErrorKind::PathIndexOutOfRange {
                    index: attr.chosen_path_index,
                    available: paths.iter().map(describe_path).collect(),
                },
            )
        })?;
        if !seen.insert((attr.column_ref(), path.clone())) {
            return Err(DesignError::new(field, DesignErrorKind::DuplicateGrain(attr.column_ref().to_string())));
        }
        chosen.push(path);
    }

    // Dimension names: explicit, else default, role-suffixed when defaults collide.
    let defaults: Vec<String> = grain.attributes.iter().zip(&chosen).map(|(a, p)| default_name(a, p)).collect();
    let mut names = Vec::with_capacity(defaults.len());
    for (i, attr) in grain.attributes.iter().enumerate() {
        let name = match &attr.name {
            Some(n) => n.clone(),
            None => {
                let clash = defaults
                    .iter()
                    .enumerate()
                    .filter(|(j, d)| grain.attributes[*j].name.is_none() && **d == defaults[i])
                    .count()
                    > 1;
                if clash && !chosen[i].role_label.is_empty() {
                    format!("{}_{}", defaults[i], chosen[i].role_label)
                } else {
                    defaults[i].clone()
                }
            }
        };
        if names.contains(&name) {
            return Err(DesignError::new(format!("grain[{i}]"), DesignErrorKind::DuplicateName(name)));
        }
        names.push(name);
    }
    if let Some(key) = overrides.keys().find(|k| !names.contains(k)) {
        return Err(DesignError::new(
            format!("hierarchy_overrides.{key}"),
            DesignErrorKind::InvalidOverride(format!("no dimension named {key}")),
        ));
    }

    let mut dimensions: Vec<DimensionSpec> = Vec::with_capacity(names.len());
    for (i, attr) in grain.attributes.iter().enumerate() {
        let mut attr = attr.clone();
        attr.name = Some(names[i].clone());
        let over = overrides.get(&names[i]).map(Vec::as_slice).unwrap_or(&[]);
        let dim = derive_dimension(graph, catalog, &attr, &chosen[i], over).map_err(|e| match e.kind {
            DesignErrorKind::InvalidOverride(_) => {
                DesignError::new(format!("hierarchy_overrides.{}", names[i]), e.kind)
            }
            kind => DesignError::new(format!("grain[{i}]"), kind),
        })?;
        dimensions.push(dim);
    }

    let foreign_keys: Vec<(String, String)> =
        dimensions.iter().map(|d| (d.name.clone(), d.surrogate_key_name.clone())).collect();
    let mut taken: HashSet<String> = foreign_keys.iter().map(|(_, k)| k.clone()).collect();
    let mut columns = Vec::new();
    for (mi, m) in measures.iter().enumerate() {
        for &agg in &m.aggregations {
            let value_type = accumulator_type(m.data_type);
            let parts: Vec<(String, FactColumnRole, DataType)> = match agg {
                Aggregation::Count => {
                    vec![(format!("{}_count", m.output_name), FactColumnRole::Value, DataType::BigInt)]
                }
                Aggregation::Avg => vec![
                    (format!("{}_avg_sum", m.output_name), FactColumnRole::AvgSum, value_type),
                    (format!("{}_avg_count", m.output_name), FactColumnRole::AvgCount, DataType::BigInt),
                ],
                _ => vec![(format!("{}_{}", m.output_name, agg.suffix()), FactColumnRole::Value, value_type)],
            };
            for (name, role, data_type) in parts {
                if !taken.insert(name.clone()) {
                    return Err(DesignError::new(format!("measures[{mi}]"), DesignErrorKind::DuplicateName(name)));
                }
                columns.push(FactColumn {
                    name,
                    measure: m.output_name.clone(),
                    aggregation: agg,
                    role,
                    source: m.source.clone(),
                    data_type,
                });
            }
        }
    }

    Ok(StarSchema {
        fact: FactTableSpec {
            name: fact_name.to_string(),
            source_table: source,
            grain: grain.clone(),
            foreign_keys,
            measures,
            columns,
        },
        dimensions,
    })
}

/// Integers widen to BIGINT, decimals to the widest precision at the same scale.
fn accumulator_type(t: DataType) -> DataType {
    match t {
        DataType::Decimal { scale, .. } => DataType::Decimal { precision: MAX_DECIMAL_PRECISION, scale },
        _ => DataType::BigInt,
    }
}

fn describe_path(p: &FkPath) -> String {
    if p.role_label.is_empty() {
        p.to_string()
    } else {
        format!("{p} via {}", p.role_label)
    }
}

impl StarSchema {
    /// The star as a relational catalog: dimension tables first, then the fact table.
    pub fn to_catalog(&self) -> RelationalCatalog {
        let mut tables = Vec::with_capacity(self.dimensions.len() + 1);
        for d in &self.dimensions {
            let mut columns = vec![ColumnDef::new(&d.surrogate_key_name, DataType::Integer, false)];
            columns.extend(d.table_columns().into_iter().map(|c| ColumnDef::new(c.name, c.data_type, true)));
            tables.push(TableDef {
                name: d.table_name(),
                columns,
                primary_key: vec![d.surrogate_key_name.clone()],
                foreign_keys: Vec::new(),
            });
        }
        let mut columns: Vec<ColumnDef> =
            self.fact.foreign_keys.iter().map(|(_, k)| ColumnDef::new(k, DataType::Integer, false)).collect();
        columns.extend(self.fact.columns.iter().map(|c| ColumnDef::new(&c.name, c.data_type, !c.is_count())));
        tables.push(TableDef {
            name: self.fact.table_name(),
            columns,
            primary_key: self.fact.foreign_keys.iter().map(|(_, k)| k.clone()).collect(),
            foreign_keys: self
                .dimensions
                .iter()
                .map(|d| FkDef {
                    columns: vec![d.surrogate_key_name.clone()],
                    ref_table: d.table_name(),
                    ref_columns: vec![d.surrogate_key_name.clone()],
                })
                .collect(),
        });
        RelationalCatalog::from_tables(format!("{}_star", self.fact.name), tables)
            .expect("star tables have unique names and declared keys")
    }
}

/// DDL for the star: one CREATE TABLE per dimension, then the fact table.
pub fn emit_star_ddl(star: &StarSchema) -> String {
    format!("-- star schema for fact {}\n\n{}", star.fact.name, emit_ddl(&star.to_catalog()))
}
