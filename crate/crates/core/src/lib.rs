//! Derive star schemas from relational catalogs, load them from CSV, and
//! query the resulting cube in memory or over HTTP.

pub mod aggregate;
pub mod catalog;
pub mod cli;
pub mod cube;
pub mod design;
pub mod etl;
pub mod graph;
pub mod project;
pub mod server;
pub mod synth;
pub mod value;
