use std::collections::HashSet;

use super::{
    ColumnRef, DescriptiveAttribute, DesignError, DesignErrorKind, DimensionSpec, GrainAttribute, HierarchyLevel,
    HierarchySpec, LevelDerivation,
};
use crate::catalog::{RelationalCatalog, TableDef};
use crate::graph::{FkEdge, FkPath, SchemaGraph};
use crate::value::DataType;

/// Derives one dimension from a grain attribute and the path that reaches it.
///
/// Past the grain table the dimension follows the chain of single-column FKs
/// while each table has exactly one outgoing FK. Default levels are the grain
/// column, then the first non-key VARCHAR column of each chain table. A DATE
/// grain instead gets day, month, quarter and year. `overrides`, when not
/// empty, replaces every level above the grain.
pub fn derive_dimension(
    graph: &SchemaGraph,
    catalog: &RelationalCatalog,
    attr: &GrainAttribute,
    path: &FkPath,
    overrides: &[ColumnRef],
) -> Result<DimensionSpec, DesignError> {
    let err = |kind| DesignError::new("grain", kind);
    let grain_table =
        catalog.table(&attr.table).ok_or_else(|| err(DesignErrorKind::UnknownTable(attr.table.clone())))?;
    let grain_col = grain_table.column(&attr.column).ok_or_else(|| {
        err(DesignErrorKind::UnknownColumn { table: attr.table.clone(), column: attr.column.clone() })
    })?;
    if path.end() != attr.table || !path.is_well_formed() {
        return Err(err(DesignErrorKind::NoPathFound { from: path.start.clone(), to: attr.column_ref().to_string() }));
    }
    if let Some(e) = path.edges.iter().find(|e| e.is_composite()) {
        return Err(err(DesignErrorKind::UnsupportedFeature(format!("path through composite foreign key {e}"))));
    }

    // Chain of tables above the grain table. A same-table grain has none.
    let mut chain: Vec<(&TableDef, FkEdge)> = Vec::new();
    if !path.is_empty() {
        let mut visited: HashSet<String> = path.tables().into_iter().map(str::to_string).collect();
        let mut current = attr.table.clone();
        loop {
            let out: Vec<&FkEdge> = graph.outgoing(&current).collect();
            if out.len() != 1 || out[0].is_composite() || visited.contains(&out[0].parent) {
                break;
            }
            let edge = out[0].clone();
            visited.insert(edge.parent.clone());
            current = edge.parent.clone();
            let table = catalog.table(&edge.parent).expect("graph node is a catalog table");
            chain.push((table, edge));
        }
    }
    let depth_of = |table: &str| -> Option<usize> {
        if table == attr.table {
            Some(0)
        } else {
            chain.iter().position(|(t, _)| t.name == table).map(|i| i + 1)
        }
    };

    let is_date = grain_col.data_type == DataType::Date;
    let mut levels = vec![HierarchyLevel {
        name: if is_date { "day".to_string() } else { attr.column.clone() },
        source: attr.column_ref(),
        derivation: LevelDerivation::Column,
        data_type: grain_col.data_type,
        depth: 0,
    }];
    let mut level_names: HashSet<String> = levels.iter().map(|l| l.name.clone()).collect();
    let mut push_level = |levels: &mut Vec<HierarchyLevel>, source: ColumnRef, data_type: DataType, depth: usize| {
        let name = unique_name(&mut level_names, &source)?;
        levels.push(HierarchyLevel { name, source, derivation: LevelDerivation::Column, data_type, depth });
        Ok::<(), DesignError>(())
    };

    if is_date {
        if !overrides.is_empty() {
            return Err(err(DesignErrorKind::InvalidOverride(format!(
                "{} is a DATE grain with a fixed calendar hierarchy",
                attr.column_ref()
            ))));
        }
        for (name, derivation, width) in [
            ("month", LevelDerivation::Month, 7),
            ("quarter", LevelDerivation::Quarter, 7),
            ("year", LevelDerivation::Year, 4),
        ] {
            levels.push(HierarchyLevel {
                name: name.to_string(),
                source: attr.column_ref(),
                derivation,
                data_type: DataType::Varchar(width),
                depth: 0,
            });
        }
    } else if overrides.is_empty() {
        for (i, (table, _)) in chain.iter().enumerate() {
            if let Some(col) = table
                .columns
                .iter()
                .find(|c| matches!(c.data_type, DataType::Varchar(_)) && !table.is_key_column(&c.name))
            {
                push_level(&mut levels, ColumnRef::new(&table.name, &col.name), col.data_type, i + 1)?;
            }
        }
    } else {
        let mut seen = HashSet::new();
        seen.insert(attr.column_ref());
        for o in overrides {
            let depth = depth_of(&o.table).ok_or_else(|| {
                err(DesignErrorKind::InvalidOverride(format!(
                    "{o} is not on {} or a table it references through a single foreign key",
                    attr.table
                )))
            })?;
            let table = catalog.table(&o.table).expect("chain table exists");
            let col = table.column(&o.column).ok_or_else(|| {
                err(DesignErrorKind::UnknownColumn { table: o.table.clone(), column: o.column.clone() })
            })?;
            if !seen.insert(o.clone()) {
                return Err(err(DesignErrorKind::InvalidOverride(format!("{o} listed twice or repeats the grain"))));
            }
            push_level(&mut levels, o.clone(), col.data_type, depth)?;
        }
    }

    // Descriptive attributes.
    let mut candidates: Vec<(ColumnRef, DataType, usize)> = Vec::new();
    for col in &grain_table.columns {
        let take = if path.is_empty() {
            col.name == attr.column
        } else {
            col.name == attr.column || !grain_table.is_key_column(&col.name)
        };
        if take {
            candidates.push((ColumnRef::new(&attr.table, &col.name), col.data_type, 0));
        }
    }
    for (i, (table, _)) in chain.iter().enumerate() {
        for col in table.columns.iter().filter(|c| !table.is_key_column(&c.name)) {
            candidates.push((ColumnRef::new(&table.name, &col.name), col.data_type, i + 1));
        }
    }
    // Names of physical columns: levels first, then uncovered attributes.
    let mut taken: HashSet<String> = levels.iter().map(|l| l.name.clone()).collect();
    let mut attributes = Vec::with_capacity(candidates.len());
    for (source, data_type, depth) in candidates {
        let covering = levels.iter().find(|l| l.derivation == LevelDerivation::Column && l.source == source);
        let output_name = match covering {
            Some(level) => level.name.clone(),
            None => unique_name(&mut taken, &source)?,
        };
        attributes.push(DescriptiveAttribute { source, output_name, data_type, depth });
    }

    let name = attr.name.clone().unwrap_or_else(|| default_name(attr, path));
    let mut edges = path.edges.clone();
    edges.extend(chain.into_iter().map(|(_, e)| e));
    let source_path = FkPath::new(&path.start, edges);
    Ok(DimensionSpec {
        surrogate_key_name: format!("{name}_key"),
        name,
        natural_key: attr.column_ref(),
        hierarchy: HierarchySpec { levels },
        descriptive_attributes: attributes,
        grain_depth: path.len(),
        source_path,
    })
}

/// Grain table name, or the column name when the grain sits on the fact-source table.
pub(crate) fn default_name(attr: &GrainAttribute, path: &FkPath) -> String {
    if path.is_empty() {
        attr.column.clone()
    } else {
        attr.table.clone()
    }
}

fn unique_name(taken: &mut HashSet<String>, source: &ColumnRef) -> Result<String, DesignError> {
    for candidate in [source.column.clone(), format!("{}_{}", source.table, source.column)] {
        if taken.insert(candidate.clone()) {
            return Ok(candidate);
        }
    }
    Err(DesignError::new("grain", DesignErrorKind::DuplicateName(source.column.clone())))
}
