use std::collections::{BTreeMap, HashSet};

use super::{Cube, CubeMeasure, CubeQuery, Filter, LevelRef, QueryError};
use crate::aggregate::{average, merge, Cell};
use crate::design::Aggregation;
use crate::value::{Decimal, Value};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResultRow {
    /// One member per group-by entry.
    pub members: Vec<Value>,
    /// One value per requested measure.
    pub values: Vec<Value>,
    /// Partial aggregates behind `values`, kept so totals can be re-aggregated exactly.
    pub state: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryResult {
    pub group_by: Vec<LevelRef>,
    pub measures: Vec<CubeMeasure>,
    /// Ascending by member, position by position.
    pub rows: Vec<ResultRow>,
    pub(crate) combine: Vec<Vec<Aggregation>>,
    pub(crate) source_scales: Vec<u8>,
}

impl QueryResult {
    /// Finalizes a measure's partial aggregates into its output value.
    pub(crate) fn finish(&self, m: usize, state: &[Cell]) -> Result<Value, QueryError> {
        let measure = &self.measures[m];
        if measure.aggregation == Aggregation::Avg {
            let extra = measure.data_type.scale() - self.source_scales[m];
            let avg = average(state[0], state[1], extra).map_err(|_| QueryError::Overflow(measure.name.clone()))?;
            Ok(avg.map_or(Value::Null, |u| Value::Decimal(Decimal::new(u, measure.data_type.scale()))))
        } else {
            Ok(match (state[0], measure.data_type) {
                (None, _) if measure.aggregation == Aggregation::Count => Value::Int(0),
                (None, _) => Value::Null,
                (Some(u), crate::value::DataType::Decimal { scale, .. }) => Value::Decimal(Decimal::new(u, scale)),
                (Some(u), _) => Value::Int(u),
            })
        }
    }

    /// Merges the states of many rows measure by measure.
    pub(crate) fn merge_states<'a>(
        &self,
        states: impl Iterator<Item = &'a Vec<Vec<Cell>>>,
    ) -> Result<Vec<Vec<Cell>>, QueryError> {
        let mut acc: Vec<Vec<Cell>> = self.combine.iter().map(|c| c.iter().map(|a| empty(*a)).collect()).collect();
        for s in states {
            for (m, cells) in s.iter().enumerate() {
                for (j, cell) in cells.iter().enumerate() {
                    acc[m][j] = merge(self.combine[m][j], acc[m][j], *cell)
                        .map_err(|_| QueryError::Overflow(self.measures[m].name.clone()))?;
                }
            }
        }
        Ok(acc)
    }

    pub(crate) fn finish_all(&self, state: &[Vec<Cell>]) -> Result<Vec<Value>, QueryError> {
        state.iter().enumerate().map(|(m, s)| self.finish(m, s)).collect()
    }

    /// Index of a group-by dimension.
    pub fn position(&self, dimension: &str) -> Option<usize> {
        self.group_by.iter().position(|g| g.dimension == dimension)
    }
}

/// Counts start at zero, everything else at NULL.
fn empty(combine: Aggregation) -> Cell {
    match combine {
        Aggregation::Count => Some(0),
        _ => None,
    }
}

struct ResolvedFilter {
    dim: usize,
    level: usize,
    accepted: HashSet<u32>,
}

impl Cube {
    fn resolve_filter(&self, f: &Filter) -> Result<ResolvedFilter, QueryError> {
        let dim = self.dimension_position(&f.dimension)?;
        let index = &self.dimensions()[dim];
        let level = index.level(&f.level)?;
        if f.members.is_empty() {
            return Err(QueryError::EmptyFilter { dimension: f.dimension.clone(), level: f.level.clone() });
        }
        let accepted = f.members.iter().map(|m| index.member_index(level, m)).collect::<Result<_, _>>()?;
        Ok(ResolvedFilter { dim, level, accepted })
    }

    fn check_group_by(&self, group_by: &[LevelRef]) -> Result<Vec<(usize, usize)>, QueryError> {
        let mut seen = HashSet::new();
        group_by
            .iter()
            .map(|g| {
                let d = self.dimension_position(&g.dimension)?;
                let l = self.dimensions()[d].level(&g.level)?;
                if !seen.insert(d) {
                    return Err(QueryError::DuplicateDimension(g.dimension.clone()));
                }
                Ok((d, l))
            })
            .collect()
    }

    /// Filters base cells, groups them by their ancestors at the group-by levels
    /// and aggregates. Groups without base cells are absent.
    pub fn query(&self, q: &CubeQuery) -> Result<QueryResult, QueryError> {
        let groups = self.check_group_by(&q.group_by)?;
        let filters = q.filters.iter().map(|f| self.resolve_filter(f)).collect::<Result<Vec<_>, _>>()?;
        let measures: Vec<CubeMeasure> = if q.measures.is_empty() {
            self.measures().to_vec()
        } else {
            q.measures.iter().map(|m| self.measure(m).cloned()).collect::<Result<_, _>>()?
        };
        let combine: Vec<Vec<Aggregation>> =
            measures.iter().map(|m| m.columns.iter().map(|&c| self.fact_columns()[c].combine()).collect()).collect();
        let source_scales: Vec<u8> = measures.iter().map(|m| self.fact_columns()[m.columns[0]].scale()).collect();

        let mut buckets: BTreeMap<Vec<u32>, Vec<Vec<Cell>>> = BTreeMap::new();
        for cell in self.cells() {
            let keep = filters
                .iter()
                .all(|f| f.accepted.contains(&self.dimensions()[f.dim].ancestor(cell.keys[f.dim], f.level)));
            if !keep {
                continue;
            }
            let key: Vec<u32> = groups.iter().map(|&(d, l)| self.dimensions()[d].ancestor(cell.keys[d], l)).collect();
            let acc = buckets
                .entry(key)
                .or_insert_with(|| combine.iter().map(|c| c.iter().map(|a| empty(*a)).collect()).collect());
            for (m, measure) in measures.iter().enumerate() {
                for (j, &col) in measure.columns.iter().enumerate() {
                    acc[m][j] = merge(combine[m][j], acc[m][j], cell.cells[col])
                        .map_err(|_| QueryError::Overflow(measure.name.clone()))?;
                }
            }
        }

        let mut result =
            QueryResult { group_by: q.group_by.clone(), measures, rows: Vec::new(), combine, source_scales };
        for (key, state) in buckets {
            let members = key
                .iter()
                .zip(&groups)
                .map(|(&i, &(d, l))| self.dimensions()[d].members(l)[i as usize].clone())
                .collect();
            let values = result.finish_all(&state)?;
            result.rows.push(ResultRow { members, values, state });
        }
        Ok(result)
    }

    /// Raises `dimension` one level, or drops it from the group-by at its top level.
    pub fn roll_up(&self, q: &CubeQuery, dimension: &str) -> Result<CubeQuery, QueryError> {
        let index = self.dimension(dimension)?;
        let pos = q
            .group_by
            .iter()
            .position(|g| g.dimension == dimension)
            .ok_or_else(|| QueryError::AtTopLevel(dimension.to_string()))?;
        let level = index.level(&q.group_by[pos].level)?;
        let mut out = q.clone();
        if level + 1 == index.level_count() {
            out.group_by.remove(pos);
        } else {
            out.group_by[pos].level = index.level_names()[level + 1].to_string();
        }
        Ok(out)
    }

    /// Lowers `dimension` one level. An absent dimension enters at its top level,
    /// placed among the other group-by entries in cube dimension order.
    pub fn drill_down(&self, q: &CubeQuery, dimension: &str) -> Result<CubeQuery, QueryError> {
        let d = self.dimension_position(dimension)?;
        let index = &self.dimensions()[d];
        let mut out = q.clone();
        match q.group_by.iter().position(|g| g.dimension == dimension) {
            Some(pos) => {
                let level = index.level(&q.group_by[pos].level)?;
                if level == 0 {
                    return Err(QueryError::AtBottomLevel(dimension.to_string()));
                }
                out.group_by[pos].level = index.level_names()[level - 1].to_string();
            }
            None => {
                let top = LevelRef::new(dimension, index.level_names()[index.level_count() - 1]);
                let at = q
                    .group_by
                    .iter()
                    .position(|g| self.dimension_position(&g.dimension).is_ok_and(|o| o > d))
                    .unwrap_or(q.group_by.len());
                out.group_by.insert(at, top);
            }
        }
        Ok(out)
    }

    /// Adds a singleton filter.
    pub fn slice(&self, q: &CubeQuery, dimension: &str, level: &str, member: Value) -> Result<CubeQuery, QueryError> {
        self.dice(q, vec![Filter::new(dimension, level, [member])])
    }

    /// Adds filters: conjunction across filters, disjunction within each.
    pub fn dice(&self, q: &CubeQuery, filters: Vec<Filter>) -> Result<CubeQuery, QueryError> {
        for f in &filters {
            self.resolve_filter(f)?;
        }
        let mut out = q.clone();
        out.filters.extend(filters);
        Ok(out)
    }
}
