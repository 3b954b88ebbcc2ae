//! On-disk star: `<out>/star/` holds one CSV per table, `schema.sql` and a
//! `star.json` manifest of the design. NULL is written as `\N` so empty
//! strings survive. Output bytes depend only on the input.

use std::fs;
use std::path::{Path, PathBuf};

use super::{cell_value, BuiltStar, DimensionTable, EtlError, FactRow, FactTable};
use crate::design::{emit_star_ddl, StarSchema};
use crate::value::{DataType, Value};

const NULL: &str = "\\N";

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> EtlError + '_ {
    move |e| EtlError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> EtlError + '_ {
    move |e| EtlError::Io { path: path.to_path_buf(), message: e.to_string() }
}

fn render(v: &Value) -> String {
    if v.is_null() {
        NULL.to_string()
    } else {
        v.to_string()
    }
}

fn write_csv(path: &Path, header: Vec<String>, rows: impl Iterator<Item = Vec<String>>) -> Result<(), EtlError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(&header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn read_csv(path: &Path, types: &[DataType], header: &[String]) -> Result<Vec<Vec<Value>>, EtlError> {
    if !path.is_file() {
        return Err(EtlError::MissingFile(path.to_path_buf()));
    }
    let mut r = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let found: Vec<String> = r.headers().map_err(csv_err(path))?.iter().map(str::to_string).collect();
    if found != header {
        return Err(EtlError::HeaderMismatch { table: path.display().to_string(), expected: header.to_vec(), found });
    }
    let mut rows = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(csv_err(path))?;
        let row = rec
            .iter()
            .zip(types)
            .zip(header)
            .map(|((field, ty), col)| {
                if field == NULL {
                    Ok(Value::Null)
                } else {
                    Value::parse(field, ty).map_err(|message| EtlError::TypeError {
                        table: path.display().to_string(),
                        row: i + 1,
                        column: col.clone(),
                        message,
                    })
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        rows.push(row);
    }
    Ok(rows)
}

impl BuiltStar {
    /// Writes the star under `<out_dir>/star` and returns that directory.
    pub fn write(&self, out_dir: &Path) -> Result<PathBuf, EtlError> {
        let dir = out_dir.join("star");
        fs::create_dir_all(&dir).map_err(io_err(&dir))?;
        for d in &self.dimensions {
            let mut header = vec![d.surrogate_key.clone()];
            header.extend(d.columns.iter().map(|c| c.name.clone()));
            let rows = d
                .rows
                .iter()
                .enumerate()
                .map(|(k, r)| std::iter::once(k.to_string()).chain(r.iter().map(render)).collect());
            write_csv(&dir.join(format!("dim_{}.csv", d.name)), header, rows)?;
        }
        let f = &self.fact;
        let mut header = f.key_columns.clone();
        header.extend(f.columns.iter().map(|c| c.name.clone()));
        let rows = f.rows.iter().map(|r| {
            r.keys
                .iter()
                .map(u32::to_string)
                .chain(r.cells.iter().zip(&f.columns).map(|(c, col)| render(&cell_value(col, *c))))
                .collect()
        });
        write_csv(&dir.join(format!("{}.csv", f.name)), header, rows)?;
        let ddl_path = dir.join("schema.sql");
        fs::write(&ddl_path, emit_star_ddl(&self.schema)).map_err(io_err(&ddl_path))?;
        let manifest = dir.join("star.json");
        let json = serde_json::to_string_pretty(&self.schema).expect("star schema serializes");
        fs::write(&manifest, json + "\n").map_err(io_err(&manifest))?;
        Ok(dir)
    }

    /// Reads a star written by [`BuiltStar::write`].
    pub fn read(out_dir: &Path) -> Result<BuiltStar, EtlError> {
        let dir = out_dir.join("star");
        let manifest = dir.join("star.json");
        if !manifest.is_file() {
            return Err(EtlError::MissingFile(manifest));
        }
        let text = fs::read_to_string(&manifest).map_err(io_err(&manifest))?;
        let schema: StarSchema =
            serde_json::from_str(&text).map_err(|e| EtlError::Corrupt(format!("star.json: {e}")))?;

        let mut dimensions = Vec::with_capacity(schema.dimensions.len());
        for spec in &schema.dimensions {
            let columns = spec.table_columns();
            let mut header = vec![spec.surrogate_key_name.clone()];
            header.extend(columns.iter().map(|c| c.name.clone()));
            let mut types = vec![DataType::BigInt];
            types.extend(columns.iter().map(|c| c.data_type));
            let raw = read_csv(&dir.join(format!("{}.csv", spec.table_name())), &types, &header)?;
            let mut rows = Vec::with_capacity(raw.len());
            for (k, mut r) in raw.into_iter().enumerate() {
                if r[0] != Value::Int(k as i64) {
                    return Err(EtlError::Corrupt(format!(
                        "{}: surrogate key out of sequence at row {}",
                        spec.name,
                        k + 1
                    )));
                }
                r.remove(0);
                rows.push(r);
            }
            if rows.first().is_none_or(|r| r.iter().any(|v| !v.is_null())) {
                return Err(EtlError::Corrupt(format!("{}: missing Unknown member", spec.name)));
            }
            dimensions.push(DimensionTable {
                name: spec.name.clone(),
                surrogate_key: spec.surrogate_key_name.clone(),
                columns,
                rows,
            });
        }

        let key_columns: Vec<String> = schema.fact.foreign_keys.iter().map(|(_, k)| k.clone()).collect();
        let mut header = key_columns.clone();
        header.extend(schema.fact.columns.iter().map(|c| c.name.clone()));
        let mut types = vec![DataType::BigInt; key_columns.len()];
        types.extend(schema.fact.columns.iter().map(|c| c.data_type));
        let raw = read_csv(&dir.join(format!("{}.csv", schema.fact.table_name())), &types, &header)?;
        let n = key_columns.len();
        let mut rows = Vec::with_capacity(raw.len());
        for (i, r) in raw.into_iter().enumerate() {
            let keys = r[..n]
                .iter()
                .zip(&dimensions)
                .map(|(v, d)| match v {
                    Value::Int(k) if *k >= 0 && (*k as usize) < d.len() => Ok(*k as u32),
                    _ => Err(EtlError::Corrupt(format!("fact row {}: key {v} not in dim_{}", i + 1, d.name))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            rows.push(FactRow { keys, cells: r[n..].iter().map(Value::as_scaled).collect() });
        }
        let fact =
            FactTable { name: schema.fact.table_name(), key_columns, columns: schema.fact.columns.clone(), rows };
        Ok(BuiltStar { schema, dimensions, fact })
    }
}
