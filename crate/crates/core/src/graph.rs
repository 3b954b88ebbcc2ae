//! Foreign-key graph over a catalog and measure-to-grain path resolution.
//!
//! Edges point from the referencing (child) table to the referenced (parent)
//! table. Paths follow edges child to parent and never revisit a table.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::RelationalCatalog;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown table {0}")]
    UnknownTable(String),
    #[error("unknown column {table}.{column}")]
    UnknownColumn { table: String, column: String },
    #[error("no path from {from} to {to}")]
    NoPathFound { from: String, to: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FkEdge {
    /// Position of the FK in catalog source order.
    pub index: usize,
    pub child: String,
    pub parent: String,
    pub columns: Vec<String>,
    pub ref_columns: Vec<String>,
}

impl FkEdge {
    pub fn label(&self) -> String {
        self.columns.join("_")
    }

    pub fn is_composite(&self) -> bool {
        self.columns.len() > 1
    }
}

impl fmt::Display for FkEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -[{}]-> {}", self.child, self.label(), self.parent)
    }
}

/// A simple chain of FK edges. An empty path means the target lives on the start table.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FkPath {
    pub start: String,
    pub edges: Vec<FkEdge>,
    pub role_label: String,
}

impl FkPath {
    pub fn new(start: impl Into<String>, edges: Vec<FkEdge>) -> Self {
        let role_label = edges.iter().map(FkEdge::label).collect::<Vec<_>>().join("_");
        FkPath { start: start.into(), edges, role_label }
    }

    pub fn empty(start: impl Into<String>) -> Self {
        FkPath::new(start, Vec::new())
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn end(&self) -> &str {
        self.edges.last().map_or(&self.start, |e| &e.parent)
    }

    /// Tables visited, start first.
    pub fn tables(&self) -> Vec<&str> {
        std::iter::once(self.start.as_str()).chain(self.edges.iter().map(|e| e.parent.as_str())).collect()
    }

    /// Chaining and simplicity hold.
    pub fn is_well_formed(&self) -> bool {
        let mut current = self.start.as_str();
        for e in &self.edges {
            if e.child != current {
                return false;
            }
            current = &e.parent;
        }
        let tables = self.tables();
        let mut sorted = tables.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() == tables.len()
    }

    /// Ordering used for path lists: shorter first, then the sequence of edge
    /// labels, then catalog order of the edges.
    pub fn rank_cmp(&self, other: &FkPath) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| {
                let a = self.edges.iter().map(FkEdge::label);
                let b = other.edges.iter().map(FkEdge::label);
                a.cmp(b)
            })
            .then_with(|| {
                let a = self.edges.iter().map(|e| e.index);
                let b = other.edges.iter().map(|e| e.index);
                a.cmp(b)
            })
    }
}

impl fmt::Display for FkPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.tables().join(" -> "))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaGraph {
    nodes: Vec<String>,
    columns: Vec<Vec<String>>,
    edges: Vec<FkEdge>,
    outgoing: Vec<Vec<usize>>,
}

impl SchemaGraph {
    /// One node per table, one edge per FK whose referenced table exists, in source order.
    pub fn build(catalog: &RelationalCatalog) -> SchemaGraph {
        let nodes: Vec<String> = catalog.tables().iter().map(|t| t.name.clone()).collect();
        let columns = catalog.tables().iter().map(|t| t.columns.iter().map(|c| c.name.clone()).collect()).collect();
        let mut edges = Vec::new();
        let mut outgoing = vec![Vec::new(); nodes.len()];
        let mut index = 0;
        for (ci, table) in catalog.tables().iter().enumerate() {
            for fk in &table.foreign_keys {
                if catalog.table_index(&fk.ref_table).is_some() {
                    outgoing[ci].push(edges.len());
                    edges.push(FkEdge {
                        index,
                        child: table.name.clone(),
                        parent: fk.ref_table.clone(),
                        columns: fk.columns.clone(),
                        ref_columns: fk.ref_columns.clone(),
                    });
                }
                index += 1;
            }
        }
        SchemaGraph { nodes, columns, edges, outgoing }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[FkEdge] {
        &self.edges
    }

    fn node(&self, name: &str) -> Result<usize, GraphError> {
        self.nodes.iter().position(|n| n == name).ok_or_else(|| GraphError::UnknownTable(name.to_string()))
    }

    fn node_of(&self, name: &str) -> usize {
        self.nodes.iter().position(|n| n == name).expect("edge endpoint is a node")
    }

    /// Edges leaving `table`, in source order.
    pub fn outgoing(&self, table: &str) -> impl Iterator<Item = &FkEdge> {
        let idx = self.nodes.iter().position(|n| n == table);
        idx.into_iter().flat_map(move |i| self.outgoing[i].iter().map(move |&e| &self.edges[e]))
    }

    /// All simple paths from `start` to the table holding `target`, best first.
    pub fn find_paths(&self, start: &str, target: (&str, &str)) -> Result<Vec<FkPath>, GraphError> {
        let s = self.node(start)?;
        let t = self.node(target.0)?;
        if !self.columns[t].iter().any(|c| c == target.1) {
            return Err(GraphError::UnknownColumn { table: target.0.to_string(), column: target.1.to_string() });
        }
        let mut found = Vec::new();
        let mut visited = vec![false; self.nodes.len()];
        let mut stack = Vec::new();
        visited[s] = true;
        self.dfs(s, t, &mut visited, &mut stack, &mut found);
        if found.is_empty() {
            return Err(GraphError::NoPathFound { from: start.to_string(), to: format!("{}.{}", target.0, target.1) });
        }
        let mut paths: Vec<FkPath> = found
            .into_iter()
            .map(|edge_ids: Vec<usize>| FkPath::new(start, edge_ids.iter().map(|&e| self.edges[e].clone()).collect()))
            .collect();
        paths.sort_by(FkPath::rank_cmp);
        Ok(paths)
    }

    fn dfs(&self, at: usize, target: usize, visited: &mut [bool], stack: &mut Vec<usize>, found: &mut Vec<Vec<usize>>) {
        if at == target {
            found.push(stack.clone());
            return;
        }
        for &e in &self.outgoing[at] {
            let next = self.node_of(&self.edges[e].parent);
            if visited[next] {
                continue;
            }
            visited[next] = true;
            stack.push(e);
            self.dfs(next, target, visited, stack, found);
            stack.pop();
            visited[next] = false;
        }
    }

    /// Every elementary cycle, each as an edge sequence starting at its lowest-ordered table.
    pub fn detect_cycles(&self) -> Vec<Vec<FkEdge>> {
        let mut cycles = Vec::new();
        for s in 0..self.nodes.len() {
            let mut visited = vec![false; self.nodes.len()];
            let mut stack = Vec::new();
            visited[s] = true;
            self.cycle_dfs(s, s, &mut visited, &mut stack, &mut cycles);
        }
        cycles.into_iter().map(|ids| ids.into_iter().map(|e| self.edges[e].clone()).collect()).collect()
    }

    fn cycle_dfs(
        &self,
        root: usize,
        at: usize,
        visited: &mut [bool],
        stack: &mut Vec<usize>,
        cycles: &mut Vec<Vec<usize>>,
    ) {
        for &e in &self.outgoing[at] {
            let next = self.node_of(&self.edges[e].parent);
            if next == root {
                let mut cycle = stack.clone();
                cycle.push(e);
                cycles.push(cycle);
            } else if next > root && !visited[next] {
                visited[next] = true;
                stack.push(e);
                self.cycle_dfs(root, next, visited, stack, cycles);
                stack.pop();
                visited[next] = false;
            }
        }
    }
}
