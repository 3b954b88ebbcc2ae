//! Seeded random projects (catalog, data and design) for property tests and benchmarks.
//!
//! Each dimension is one of: a DATE grain on the fact table, a short chain of
//! lookup tables, or a degenerate VARCHAR column on the fact table. Lookup
//! names are unique per table, so every hierarchy is a true functional
//! dependency.

use chrono::NaiveDate;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::catalog::{parse_ddl, RelationalCatalog};
use crate::design::{Aggregation, DesignDocument, GrainEntry, MeasureRequest};
use crate::etl::{Dataset, TableData};
use crate::value::{Decimal, Value};

#[derive(Debug, Clone, Copy)]
pub struct SynthOptions {
    pub max_dimensions: usize,
    pub max_rows: usize,
    pub max_members: usize,
}

impl Default for SynthOptions {
    fn default() -> Self {
        SynthOptions { max_dimensions: 3, max_rows: 200, max_members: 5 }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCase {
    pub seed: u64,
    pub catalog: RelationalCatalog,
    pub data: Dataset,
    pub design: DesignDocument,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Date,
    Chain { tables: usize, grain_at: usize },
    Tag,
}

type Draw = Box<dyn Fn(&mut ChaCha8Rng) -> Value>;

const AGGS: [Aggregation; 5] =
    [Aggregation::Sum, Aggregation::Count, Aggregation::Min, Aggregation::Max, Aggregation::Avg];

pub fn random_case(seed: u64, opts: &SynthOptions) -> SynthCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = opts.max_members.max(1);
    let ndims = rng.random_range(1..=opts.max_dimensions.max(1));
    let mut pool = vec![Kind::Date, Kind::Tag];
    pool.extend((0..ndims).map(|_| {
        let tables = rng.random_range(1..=3);
        Kind::Chain { tables, grain_at: if tables > 1 && rng.random_bool(0.3) { 1 } else { 0 } }
    }));
    pool.shuffle(&mut rng);
    let kinds: Vec<Kind> = pool.into_iter().take(ndims).collect();

    let mut ddl = String::new();
    let mut tables = Vec::new();
    let mut fact_cols = vec!["id INTEGER PRIMARY KEY".to_string()];
    let mut fact_fks = Vec::new();
    let mut grain = Vec::new();
    // Per fact column after id: how to draw a value.
    let mut draws: Vec<Draw> = Vec::new();
    let mut fact_names = vec!["id".to_string()];

    let days: Vec<NaiveDate> = {
        let base = NaiveDate::from_ymd_opt(2020, 11, 20).expect("valid date");
        let mut d: Vec<NaiveDate> =
            (0..members).map(|_| base + chrono::Duration::days(rng.random_range(0..500))).collect();
        d.sort();
        d.dedup();
        d
    };

    for (i, kind) in kinds.iter().enumerate() {
        let dim_name = format!("dim{i}");
        match *kind {
            Kind::Date => {
                fact_cols.push("day DATE NOT NULL".into());
                fact_names.push("day".into());
                let days = days.clone();
                draws.push(Box::new(move |r| Value::Date(days[r.random_range(0..days.len())])));
                grain.push(GrainEntry { table: "f".into(), column: "day".into(), path: 0, name: Some(dim_name) });
            }
            Kind::Tag => {
                fact_cols.push("tag VARCHAR(4)".into());
                fact_names.push("tag".into());
                let n = rng.random_range(1..=members);
                draws.push(Box::new(move |r| {
                    if r.random_bool(0.1) {
                        Value::Null
                    } else {
                        Value::Text(format!("t{}", r.random_range(0..n)))
                    }
                }));
                grain.push(GrainEntry { table: "f".into(), column: "tag".into(), path: 0, name: Some(dim_name) });
            }
            Kind::Chain { tables: depth, grain_at } => {
                let sizes: Vec<usize> = (0..depth).map(|_| rng.random_range(1..=members)).collect();
                for j in 0..depth {
                    let name = format!("d{i}_{j}");
                    let mut cols = vec!["id INTEGER PRIMARY KEY".to_string(), "name VARCHAR(12) NOT NULL".to_string()];
                    let mut columns = vec!["id".to_string(), "name".to_string()];
                    let has_parent = j + 1 < depth;
                    if has_parent {
                        cols.push("parent_id INTEGER".into());
                        cols.push(format!("FOREIGN KEY (parent_id) REFERENCES d{i}_{} (id)", j + 1));
                        columns.push("parent_id".into());
                    }
                    ddl.push_str(&format!("CREATE TABLE {name} ({});\n", cols.join(", ")));
                    let rows = (0..sizes[j])
                        .map(|k| {
                            let mut row = vec![Value::Int(k as i64 + 1), Value::Text(format!("{name}_m{k}"))];
                            if has_parent {
                                row.push(if rng.random_bool(0.1) {
                                    Value::Null
                                } else {
                                    Value::Int(rng.random_range(1..=sizes[j + 1]) as i64)
                                });
                            }
                            row
                        })
                        .collect();
                    tables.push(TableData { name, columns, rows });
                }
                let col = format!("d{i}_id");
                fact_cols.push(format!("{col} INTEGER"));
                fact_fks.push(format!("FOREIGN KEY ({col}) REFERENCES d{i}_0 (id)"));
                fact_names.push(col);
                let n = sizes[0];
                draws.push(Box::new(move |r| {
                    if r.random_bool(0.1) {
                        Value::Null
                    } else {
                        Value::Int(r.random_range(1..=n) as i64)
                    }
                }));
                grain.push(GrainEntry {
                    table: format!("d{i}_{grain_at}"),
                    column: "name".into(),
                    path: 0,
                    name: Some(dim_name),
                });
            }
        }
    }

    fact_cols.push("m_int INTEGER".into());
    fact_names.push("m_int".into());
    draws.push(Box::new(|r| if r.random_bool(0.1) { Value::Null } else { Value::Int(r.random_range(-50..100)) }));
    fact_cols.push("m_dec DECIMAL(9,2)".into());
    fact_names.push("m_dec".into());
    draws.push(Box::new(|r| {
        if r.random_bool(0.1) {
            Value::Null
        } else {
            Value::Decimal(Decimal::new(r.random_range(-10_000..100_000), 2))
        }
    }));
    fact_cols.extend(fact_fks);
    ddl.push_str(&format!("CREATE TABLE f ({});\n", fact_cols.join(", ")));

    let nrows = if rng.random_bool(0.05) { 0 } else { rng.random_range(1..=opts.max_rows.max(1)) };
    let fact_rows = (0..nrows)
        .map(|k| {
            let mut row = vec![Value::Int(k as i64 + 1)];
            row.extend(draws.iter().map(|d| d(&mut rng)));
            row
        })
        .collect();
    tables.push(TableData { name: "f".into(), columns: fact_names, rows: fact_rows });

    let mut measures = Vec::new();
    for column in ["m_int", "m_dec"] {
        if measures.is_empty() && column == "m_dec" || rng.random_bool(0.7) {
            let mut aggs: Vec<Aggregation> = AGGS.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
            if aggs.is_empty() {
                aggs.push(AGGS[rng.random_range(0..AGGS.len())]);
            }
            measures.push(MeasureRequest { table: "f".into(), column: column.into(), aggs, output_name: None });
        }
    }

    let catalog = parse_ddl(&ddl).expect("generated DDL is valid");
    let data = Dataset::new(
        catalog
            .tables()
            .iter()
            .map(|t| tables.iter().find(|d| d.name == t.name).expect("table generated").clone())
            .collect(),
    );
    SynthCase {
        seed,
        catalog,
        data,
        design: DesignDocument { fact_name: "f".into(), measures, grain, hierarchy_overrides: Default::default() },
    }
}
