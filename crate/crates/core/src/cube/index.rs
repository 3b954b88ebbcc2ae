use std::collections::{BTreeSet, HashMap};

use super::QueryError;
use crate::design::{DimensionColumnContent, DimensionSpec};
use crate::etl::DimensionTable;
use crate::value::{DataType, Value};

/// Members of every level of one dimension and each surrogate key's ancestors.
///
/// Parents are fixed by the first member (in key order) carrying a given value,
/// so roll-up stays a function even when the source data is not. NULL level
/// values form one member, the Unknown member, which sorts last.
#[derive(Debug, Clone)]
pub struct DimensionIndex {
    name: String,
    levels: Vec<(String, DataType)>,
    /// Sorted distinct values per level.
    members: Vec<Vec<Value>>,
    lookup: Vec<HashMap<Value, u32>>,
    /// `ancestors[key][level]` indexes `members[level]`.
    ancestors: Vec<Vec<u32>>,
}

impl DimensionIndex {
    pub fn build(spec: &DimensionSpec, table: &DimensionTable) -> DimensionIndex {
        let positions: Vec<usize> = (0..spec.hierarchy.levels.len())
            .map(|l| {
                table
                    .columns
                    .iter()
                    .position(|c| c.content == DimensionColumnContent::Level(l))
                    .expect("every level is stored")
            })
            .collect();
        let n = table.rows.len();
        let mut values: Vec<Vec<Value>> = table.rows.iter().map(|r| vec![r[positions[0]].clone()]).collect();
        for l in 1..positions.len() {
            let mut parent: HashMap<Value, Value> = HashMap::new();
            for (k, row) in table.rows.iter().enumerate().skip(1) {
                let child = values[k][l - 1].clone();
                let p = parent.entry(child).or_insert_with(|| row[positions[l]].clone()).clone();
                values[k].push(p);
            }
            if n > 0 {
                values[0].push(Value::Null);
            }
            for v in values.iter_mut() {
                if v[l - 1].is_null() {
                    v[l] = Value::Null;
                }
            }
        }
        let mut members = Vec::with_capacity(positions.len());
        let mut lookup = Vec::with_capacity(positions.len());
        for l in 0..positions.len() {
            let mut set: BTreeSet<Value> = values.iter().map(|v| v[l].clone()).collect();
            set.insert(Value::Null);
            let list: Vec<Value> = set.into_iter().collect();
            lookup.push(list.iter().enumerate().map(|(i, v)| (v.clone(), i as u32)).collect::<HashMap<_, _>>());
            members.push(list);
        }
        let ancestors = values.iter().map(|v| v.iter().enumerate().map(|(l, x)| lookup[l][x]).collect()).collect();
        DimensionIndex {
            name: spec.name.clone(),
            levels: spec.hierarchy.levels.iter().map(|l| (l.name.clone(), l.data_type)).collect(),
            members,
            lookup,
            ancestors,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn level_names(&self) -> Vec<&str> {
        self.levels.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    pub fn level(&self, name: &str) -> Result<usize, QueryError> {
        self.levels
            .iter()
            .position(|(n, _)| n == name)
            .ok_or_else(|| QueryError::UnknownLevel { dimension: self.name.clone(), level: name.to_string() })
    }

    pub fn level_type(&self, level: usize) -> DataType {
        self.levels[level].1
    }

    /// Members of a level in ascending order, Unknown last.
    pub fn members(&self, level: usize) -> &[Value] {
        &self.members[level]
    }

    /// Number of surrogate keys, Unknown included.
    pub fn key_count(&self) -> usize {
        self.ancestors.len()
    }

    /// Index of the ancestor of `key` at `level` within [`DimensionIndex::members`].
    pub fn ancestor(&self, key: u32, level: usize) -> u32 {
        self.ancestors[key as usize][level]
    }

    /// Finds a member. Text is reinterpreted in the level's type, so `"2021-01-01"`
    /// finds a DATE member; NULL finds Unknown.
    pub fn member_index(&self, level: usize, member: &Value) -> Result<u32, QueryError> {
        let unknown = || QueryError::UnknownMember {
            dimension: self.name.clone(),
            level: self.levels[level].0.clone(),
            member: if member.is_null() { "NULL".to_string() } else { member.to_string() },
        };
        if let Some(&i) = self.lookup[level].get(member) {
            return Ok(i);
        }
        match (member, self.levels[level].1) {
            (Value::Text(_), DataType::Varchar(_)) => Err(unknown()),
            (Value::Text(t), ty) => {
                let v = Value::parse(t, &ty).map_err(|_| unknown())?;
                self.lookup[level].get(&v).copied().ok_or_else(unknown)
            }
            _ => Err(unknown()),
        }
    }
}
