//! Shared test helpers: independent oracles and random query generation.
//!
//! The oracles deliberately avoid the library's aggregation, indexing and
//! formatting code. They join with nested loops, aggregate in i128 and render
//! decimals themselves, so agreement with the engine means something.

#![allow(dead_code)]

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use rand::seq::IndexedRandom;
use rand::Rng;
use starforge::catalog::{parse_ddl, RelationalCatalog};
use starforge::cube::{Cube, CubeQuery, Filter, LevelRef, QueryResult};
use starforge::design::{
    Aggregation, DimensionColumnContent, DimensionSpec, FactColumn, FactColumnRole, LevelDerivation, StarSchema,
};
use starforge::etl::{extract, run_etl, BuiltStar, Dataset, TableData};
use starforge::value::{DataType, Value};

/// Display strings, `None` for NULL.
pub type Key = Vec<Option<String>>;
pub type Table = BTreeMap<Key, Key>;

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

pub struct Fixture {
    pub catalog: RelationalCatalog,
    pub data: Dataset,
    pub star: StarSchema,
    pub built: BuiltStar,
}

pub fn load_fixture(name: &str) -> Fixture {
    let root = fixture(name);
    let catalog = parse_ddl(&std::fs::read_to_string(root.join("schema.sql")).unwrap()).unwrap();
    let data = extract(&catalog, &root.join("data")).unwrap();
    let doc =
        starforge::design::DesignDocument::parse(&std::fs::read_to_string(root.join("design.json")).unwrap()).unwrap();
    let star = doc.design(&catalog).unwrap();
    let built = run_etl(&star, &catalog, &data).unwrap();
    Fixture { catalog, data, star, built }
}

pub fn text(v: &Value) -> Option<String> {
    if v.is_null() {
        None
    } else {
        Some(v.to_string())
    }
}

/// Renders a scaled integer with `scale` fractional digits.
pub fn render(units: i128, scale: u32) -> String {
    if scale == 0 {
        return units.to_string();
    }
    let sign = if units < 0 { "-" } else { "" };
    let abs = units.unsigned_abs();
    let p = 10u128.pow(scale);
    format!("{sign}{}.{:0width$}", abs / p, abs % p, width = scale as usize)
}

fn scaled(v: &Value) -> Option<i128> {
    match v {
        Value::Int(i) => Some(*i as i128),
        Value::Decimal(d) => Some(d.units as i128),
        _ => None,
    }
}

fn scale_of(t: &DataType) -> u32 {
    match t {
        DataType::Decimal { scale, .. } => *scale as u32,
        _ => 0,
    }
}

fn is_count(c: &FactColumn) -> bool {
    c.aggregation == Aggregation::Count || c.role == FactColumnRole::AvgCount
}

fn table<'a>(data: &'a Dataset, name: &str) -> &'a TableData {
    data.tables().iter().find(|t| t.name == name).unwrap_or_else(|| panic!("no table {name}"))
}

fn col(t: &TableData, name: &str) -> usize {
    t.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {}.{name}", t.name))
}

/// Follows single-column FK edges by scanning the parent table. `None` when a
/// reference is NULL or dangling.
fn follow<'a>(
    data: &'a Dataset,
    start: &'a TableData,
    row: &'a [Value],
    edges: &[starforge::graph::FkEdge],
) -> Option<(&'a TableData, &'a [Value])> {
    let (mut t, mut r) = (start, row);
    for e in edges {
        let v = &r[col(t, &e.columns[0])];
        if v.is_null() {
            return None;
        }
        let parent = table(data, &e.parent);
        let pc = col(parent, &e.ref_columns[0]);
        let found = parent.rows.iter().find(|pr| &pr[pc] == v)?;
        t = parent;
        r = found;
    }
    Some((t, r))
}

fn grain_value(data: &Dataset, fact: &TableData, row: &[Value], dim: &DimensionSpec) -> Option<String> {
    let (t, r) = follow(data, fact, row, dim.grain_edges())?;
    text(&r[col(t, &dim.natural_key.column)])
}

/// Naive ETL: for every source row, join out to each grain value, then group
/// by the grain tuple and aggregate every fact column. Keys are grain values
/// (`None` for the Unknown member), not surrogate keys.
pub fn etl_oracle(star: &StarSchema, data: &Dataset) -> Table {
    let fact = table(data, &star.fact.source_table);
    let mut groups: BTreeMap<Key, Vec<&[Value]>> = BTreeMap::new();
    for row in &fact.rows {
        let key = star.dimensions.iter().map(|d| grain_value(data, fact, row, d)).collect();
        groups.entry(key).or_default().push(row);
    }
    groups
        .into_iter()
        .map(|(key, rows)| {
            let cells = star
                .fact
                .columns
                .iter()
                .map(|c| {
                    let i = col(fact, &c.source.column);
                    let vals: Vec<i128> = rows.iter().filter_map(|r| scaled(&r[i])).collect();
                    let non_null = rows.iter().filter(|r| !r[i].is_null()).count();
                    if is_count(c) {
                        return Some(non_null.to_string());
                    }
                    let out = match c.aggregation {
                        Aggregation::Min => vals.iter().min().copied(),
                        Aggregation::Max => vals.iter().max().copied(),
                        _ => (!vals.is_empty()).then(|| vals.iter().sum()),
                    };
                    out.map(|u| render(u, scale_of(&c.data_type)))
                })
                .collect();
            (key, cells)
        })
        .collect()
}

/// The built fact table keyed the same way as [`etl_oracle`].
pub fn built_fact(built: &BuiltStar) -> Table {
    built
        .fact
        .rows
        .iter()
        .map(|r| {
            let key = r
                .keys
                .iter()
                .zip(&built.dimensions)
                .map(|(&k, d)| if k == 0 { None } else { text(&d.rows[k as usize][0]) })
                .collect();
            let cells = r
                .cells
                .iter()
                .zip(&built.fact.columns)
                .map(|(c, fc)| c.map(|u| render(u as i128, scale_of(&fc.data_type))))
                .collect();
            (key, cells)
        })
        .collect()
}

/// Expected level values for each member: every non-NULL grain value in the
/// grain table, with levels read from the first row carrying it.
pub fn dimension_oracle(star: &StarSchema, data: &Dataset) -> Vec<BTreeMap<String, Key>> {
    star.dimensions
        .iter()
        .map(|d| {
            let gt = table(data, d.grain_table());
            let gc = col(gt, &d.natural_key.column);
            let members: BTreeSet<String> = gt.rows.iter().filter_map(|r| text(&r[gc])).collect();
            members
                .into_iter()
                .map(|m| {
                    let row = gt.rows.iter().find(|r| text(&r[gc]).as_deref() == Some(m.as_str())).expect("grain row");
                    let levels = d
                        .hierarchy
                        .levels
                        .iter()
                        .map(|l| match l.derivation {
                            LevelDerivation::Column => {
                                let (t, r) = follow(data, gt, row, &d.extension_edges()[..l.depth])?;
                                text(&r[col(t, &l.source.column)])
                            }
                            calendar => {
                                let Value::Date(day) = row[gc] else { panic!("calendar level on non-date") };
                                Some(match calendar {
                                    LevelDerivation::Month => day.format("%Y-%m").to_string(),
                                    LevelDerivation::Quarter => {
                                        format!(
                                            "{}-Q{}",
                                            day.format("%Y"),
                                            day.format("%m").to_string().parse::<u32>().unwrap().div_ceil(3)
                                        )
                                    }
                                    _ => day.format("%Y").to_string(),
                                })
                            }
                        })
                        .collect();
                    (m, levels)
                })
                .collect()
        })
        .collect()
}

/// Built dimension rows keyed by grain value, Unknown excluded.
pub fn built_dimensions(built: &BuiltStar) -> Vec<BTreeMap<String, Key>> {
    built
        .dimensions
        .iter()
        .zip(&built.schema.dimensions)
        .map(|(t, spec)| {
            let level_cols: Vec<usize> = (0..spec.hierarchy.levels.len())
                .map(|l| t.columns.iter().position(|c| c.content == DimensionColumnContent::Level(l)).unwrap())
                .collect();
            t.rows[1..]
                .iter()
                .map(|r| (text(&r[0]).expect("grain"), level_cols.iter().map(|&c| text(&r[c])).collect()))
                .collect()
        })
        .collect()
}

/// Naive query evaluation: scan every base cell, read level values straight
/// from the dimension rows, filter, group and aggregate.
pub fn query_oracle(built: &BuiltStar, q: &CubeQuery) -> Table {
    let dims = &built.schema.dimensions;
    let locate = |dim: &str, level: &str| -> (usize, usize) {
        let di = dims.iter().position(|d| d.name == dim).expect("dimension");
        let li = dims[di].hierarchy.levels.iter().position(|l| l.name == level).expect("level");
        let ci =
            built.dimensions[di].columns.iter().position(|c| c.content == DimensionColumnContent::Level(li)).unwrap();
        (di, ci)
    };
    let value_at = |keys: &[u32], (di, ci): (usize, usize)| -> Value {
        let k = keys[di] as usize;
        if k == 0 {
            Value::Null
        } else {
            built.dimensions[di].rows[k][ci].clone()
        }
    };
    let groups: Vec<(usize, usize)> = q.group_by.iter().map(|g| locate(&g.dimension, &g.level)).collect();
    let filters: Vec<((usize, usize), &BTreeSet<Value>)> =
        q.filters.iter().map(|f| (locate(&f.dimension, &f.level), &f.members)).collect();
    let columns = &built.fact.columns;
    let by_name = |n: &str| columns.iter().position(|c| c.name == n);
    // (aggregation, column indexes): Avg carries (sum, count).
    let measures: Vec<(Aggregation, Vec<usize>)> = q
        .measures
        .iter()
        .map(|m| match by_name(m) {
            Some(i) => (columns[i].combine_oracle(), vec![i]),
            None => {
                let base = m.strip_suffix("_avg").expect("avg measure");
                let s = by_name(&format!("{base}_avg_sum")).expect("avg sum");
                let c = by_name(&format!("{base}_avg_count")).expect("avg count");
                (Aggregation::Avg, vec![s, c])
            }
        })
        .collect();

    let mut acc: BTreeMap<Key, Vec<Vec<Option<i128>>>> = BTreeMap::new();
    for row in &built.fact.rows {
        if !filters.iter().all(|(at, set)| set.contains(&value_at(&row.keys, *at))) {
            continue;
        }
        let key: Key = groups.iter().map(|&at| text(&value_at(&row.keys, at))).collect();
        let state = acc.entry(key).or_insert_with(|| measures.iter().map(|(_, cols)| vec![None; cols.len()]).collect());
        for ((agg, cols), st) in measures.iter().zip(state.iter_mut()) {
            for (slot, &c) in st.iter_mut().zip(cols) {
                let Some(v) = row.cells[c].map(|u| u as i128) else { continue };
                *slot = Some(match (agg, *slot) {
                    (_, None) => v,
                    (Aggregation::Min, Some(a)) => a.min(v),
                    (Aggregation::Max, Some(a)) => a.max(v),
                    (_, Some(a)) => a + v,
                });
            }
        }
    }
    acc.into_iter()
        .map(|(key, state)| {
            let values = measures
                .iter()
                .zip(state)
                .map(|((agg, cols), st)| {
                    let scale = scale_of(&columns[cols[0]].data_type);
                    match agg {
                        Aggregation::Avg => {
                            let (sum, count) = (st[0]?, st[1].unwrap_or(0));
                            if count == 0 {
                                return None;
                            }
                            let out = (scale + 4).min(18);
                            let num = sum * 10i128.pow(out - scale);
                            let (q, r) = (num / count, num % count);
                            let q = if 2 * r.abs() >= count { q + num.signum() } else { q };
                            Some(render(q, out))
                        }
                        _ if is_count(&columns[cols[0]]) => Some(render(st[0].unwrap_or(0), 0)),
                        _ => st[0].map(|u| render(u, scale)),
                    }
                })
                .collect();
            (key, values)
        })
        .collect()
}

trait CombineOracle {
    fn combine_oracle(&self) -> Aggregation;
}

impl CombineOracle for FactColumn {
    /// How stored partial aggregates merge: everything additive except MIN and MAX.
    fn combine_oracle(&self) -> Aggregation {
        match self.aggregation {
            Aggregation::Min if self.role == FactColumnRole::Value => Aggregation::Min,
            Aggregation::Max if self.role == FactColumnRole::Value => Aggregation::Max,
            _ => Aggregation::Sum,
        }
    }
}

pub fn result_table(r: &QueryResult) -> Table {
    r.rows.iter().map(|row| (row.members.iter().map(text).collect(), row.values.iter().map(text).collect())).collect()
}

pub fn result_rows(r: &QueryResult) -> Vec<(Key, Key)> {
    r.rows.iter().map(|row| (row.members.iter().map(text).collect(), row.values.iter().map(text).collect())).collect()
}

/// Ascending within a level, NULL (Unknown) last.
pub fn member_order(a: &Value, b: &Value) -> Ordering {
    match (a, b) {
        (Value::Null, Value::Null) => Ordering::Equal,
        (Value::Null, _) => Ordering::Greater,
        (_, Value::Null) => Ordering::Less,
        (Value::Text(x), Value::Text(y)) => x.cmp(y),
        (Value::Date(x), Value::Date(y)) => x.cmp(y),
        _ => scaled(a).cmp(&scaled(b)),
    }
}

pub fn rows_sorted(r: &QueryResult) -> bool {
    r.rows.windows(2).all(|w| {
        let ord = w[0]
            .members
            .iter()
            .zip(&w[1].members)
            .map(|(a, b)| member_order(a, b))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal);
        ord == Ordering::Less
    })
}

/// A random, valid query over `cube`: a group-by subset at random levels,
/// random member-set filters (Unknown included) and at least one measure.
pub fn random_query(rng: &mut impl Rng, cube: &Cube) -> CubeQuery {
    let mut q = CubeQuery::new();
    for d in cube.dimensions() {
        let levels = d.level_names();
        if rng.random_bool(0.5) {
            q.group_by.push(LevelRef::new(d.name(), *levels.choose(rng).unwrap()));
        }
        if rng.random_bool(0.3) {
            let l = rng.random_range(0..levels.len());
            let members = d.members(l);
            let n = rng.random_range(1..=members.len());
            let picked: Vec<Value> = members.choose_multiple(rng, n).cloned().collect();
            q.filters.push(Filter::new(d.name(), levels[l], picked));
        }
    }
    let names: Vec<&str> = cube.measures().iter().map(|m| m.name.as_str()).collect();
    let n = rng.random_range(1..=names.len());
    q.measures = names.choose_multiple(rng, n).map(|s| s.to_string()).collect();
    q
}

/// A random single member of some level of `dim`.
pub fn random_member(rng: &mut impl Rng, cube: &Cube, dim: &str) -> (String, Value) {
    let d = cube.dimension(dim).unwrap();
    let l = rng.random_range(0..d.level_count());
    let m = d.members(l).choose(rng).unwrap().clone();
    (d.level_names()[l].to_string(), m)
}

/// Every combination of (absent | level) per dimension.
pub fn level_lattice(cube: &Cube) -> Vec<Vec<LevelRef>> {
    let mut out = vec![Vec::new()];
    for d in cube.dimensions() {
        let mut next = Vec::new();
        for partial in &out {
            next.push(partial.clone());
            for l in d.level_names() {
                let mut p = partial.clone();
                p.push(LevelRef::new(d.name(), l));
                next.push(p);
            }
        }
        out = next;
    }
    out
}
