//! `starforge inspect|plan|build|serve`.
//!
//! Exit codes: 0 success, 2 validation, design or configuration failure, 3 ETL failure.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::net::SocketAddr;
use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};

use crate::catalog::{RelationalCatalog, Severity};
use crate::cube::Cube;
use crate::design::{emit_star_ddl, LevelDerivation, StarSchema};
use crate::etl::{verify, BuiltStar};
use crate::graph::SchemaGraph;
use crate::project::{ProjectConfig, ProjectError};
use crate::server::{router, serve, AppState, Rebuilder};

#[derive(Debug, Parser)]
#[command(name = "starforge", version, about = "Derive a star schema from a relational catalog, load it, and query it")]
pub struct Cli {
    /// Project file.
    #[arg(long, global = true, default_value = "starforge.toml")]
    pub config: PathBuf,
    /// Output directory, overriding the project file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Report tables, keys, validation findings and the foreign-key graph.
    Inspect {
        /// List every path from --from to --to.
        #[arg(long, requires_all = ["from", "to"])]
        paths: bool,
        #[arg(long)]
        from: Option<String>,
        /// Target column as TABLE.COLUMN.
        #[arg(long)]
        to: Option<String>,
    },
    /// Resolve the design into a star schema and write its DDL.
    Plan,
    /// Run the ETL and write the star.
    Build {
        /// Check measure totals, keys and member counts against the source.
        #[arg(long)]
        verify: bool,
    },
    /// Serve the query API.
    Serve {
        #[arg(long)]
        port: Option<u16>,
        #[arg(long)]
        bind: Option<String>,
    },
}

/// Parses `args` and runs the command, writing reports to `out` and errors to `err`.
pub fn run(args: impl IntoIterator<Item = OsString>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(err, "{e}") };
            return code;
        }
    };
    match execute(&cli, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn load(cli: &Cli) -> Result<ProjectConfig, ProjectError> {
    let mut config = ProjectConfig::load(&cli.config)?;
    if let Some(out) = &cli.out {
        config.output_dir = out.clone();
    }
    Ok(config)
}

fn io(e: std::io::Error) -> ProjectError {
    ProjectError::Config { path: PathBuf::from("<stdout>"), message: e.to_string() }
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<i32, ProjectError> {
    let config = load(cli)?;
    match &cli.command {
        Command::Inspect { paths, from, to } => {
            let catalog = config.catalog_unchecked()?;
            let mut report = inspect_report(&catalog);
            let has_errors = catalog.validate().has_errors();
            if *paths {
                let (from, to) = (from.as_deref().unwrap_or_default(), to.as_deref().unwrap_or_default());
                let Some((table, column)) = to.split_once('.') else {
                    return Err(ProjectError::Config {
                        path: config.path.clone(),
                        message: format!("--to expects TABLE.COLUMN, got {to}"),
                    });
                };
                let graph = SchemaGraph::build(&catalog);
                match graph.find_paths(from, (table, column)) {
                    Ok(list) => {
                        let _ = writeln!(report, "paths from {from} to {to}:");
                        for (i, p) in list.iter().enumerate() {
                            let role = if p.role_label.is_empty() {
                                String::new()
                            } else {
                                format!("  (role {})", p.role_label)
                            };
                            let _ = writeln!(report, "  [{i}] {p}{role}");
                        }
                    }
                    Err(e) => {
                        out.write_all(report.as_bytes()).map_err(io)?;
                        return Err(ProjectError::Config { path: config.path.clone(), message: e.to_string() });
                    }
                }
            }
            out.write_all(report.as_bytes()).map_err(io)?;
            Ok(if has_errors { 2 } else { 0 })
        }
        Command::Plan => {
            let (catalog, star) = config.plan()?;
            let ddl = emit_star_ddl(&star);
            std::fs::create_dir_all(&config.output_dir)
                .map_err(|e| ProjectError::Config { path: config.output_dir.clone(), message: e.to_string() })?;
            let path = config.output_dir.join("schema.sql");
            std::fs::write(&path, &ddl)
                .map_err(|e| ProjectError::Config { path: path.clone(), message: e.to_string() })?;
            let mut text = plan_report(&catalog, &star);
            let _ = writeln!(text, "\nwrote {}\n", path.display());
            text.push_str(&ddl);
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(0)
        }
        Command::Build { verify: check } => {
            let build = config.build()?;
            let dir = build.built.write(&config.output_dir)?;
            let mut text = build_summary(&build.built);
            let _ = writeln!(text, "wrote {}", dir.display());
            let mut code = 0;
            if *check {
                let report = verify(&build.catalog, &build.data, &build.built);
                text.push_str(&report.to_string());
                if !report.passed() {
                    code = 3;
                }
            }
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(code)
        }
        Command::Serve { port, bind } => {
            let cube = load_or_build(&config)?;
            let addr_text =
                format!("{}:{}", bind.as_deref().unwrap_or(&config.serve.bind), port.unwrap_or(config.serve.port));
            let addr: SocketAddr = addr_text.parse().map_err(|_| ProjectError::Config {
                path: config.path.clone(),
                message: format!("invalid bind address {addr_text}"),
            })?;
            let rebuild_config = config.clone();
            let rebuilder: Rebuilder = Arc::new(move || rebuild_config.build_and_load().map_err(|e| e.to_string()));
            let app = router(AppState::new(cube, Some(rebuilder)), config.serve.assets.clone());
            writeln!(out, "serving on http://{addr}").map_err(io)?;
            out.flush().map_err(io)?;
            let runtime = tokio::runtime::Runtime::new().map_err(io)?;
            runtime.block_on(serve(addr, app)).map_err(|e| ProjectError::Config {
                path: config.path.clone(),
                message: format!("cannot serve on {addr}: {e}"),
            })?;
            Ok(0)
        }
    }
}

/// Loads `<out>/star` when present, otherwise builds it.
fn load_or_build(config: &ProjectConfig) -> Result<Cube, ProjectError> {
    if config.output_dir.join("star").join("star.json").is_file() {
        Ok(Cube::load(&BuiltStar::read(&config.output_dir)?))
    } else {
        config.build_and_load()
    }
}

pub fn inspect_report(catalog: &RelationalCatalog) -> String {
    let mut s = String::new();
    let graph = SchemaGraph::build(catalog);
    let _ = writeln!(
        s,
        "schema {}: {} tables, {} foreign keys",
        catalog.schema_name(),
        catalog.tables().len(),
        catalog.fk_count()
    );
    for t in catalog.tables() {
        let _ = writeln!(s, "\ntable {}", t.name);
        for c in &t.columns {
            let mut flags = Vec::new();
            if t.primary_key.contains(&c.name) {
                flags.push("PK");
            }
            if t.foreign_keys.iter().any(|f| f.columns.contains(&c.name)) {
                flags.push("FK");
            }
            if c.unique {
                flags.push("UNIQUE");
            }
            let null = if c.nullable { "" } else { " NOT NULL" };
            let _ = writeln!(
                s,
                "  {} {}{null}{}",
                c.name,
                c.data_type,
                if flags.is_empty() { String::new() } else { format!("  [{}]", flags.join(", ")) }
            );
        }
        for fk in &t.foreign_keys {
            let _ = writeln!(
                s,
                "  foreign key ({}) -> {} ({})",
                fk.columns.join(", "),
                fk.ref_table,
                fk.ref_columns.join(", ")
            );
        }
    }
    let report = catalog.validate();
    let _ = writeln!(s, "\nfindings: {} errors, {} warnings", report.errors().count(), report.warnings().count());
    for f in &report.findings {
        let tag = if f.severity == Severity::Error { "error" } else { "warning" };
        let _ = writeln!(s, "  {tag}: {}: {}", f.table, f.message);
    }
    let _ = writeln!(s, "\ngraph: {} nodes, {} edges", graph.nodes().len(), graph.edges().len());
    for e in graph.edges() {
        let _ = writeln!(s, "  {e}");
    }
    for cycle in graph.detect_cycles() {
        let tables: Vec<&str> =
            cycle.iter().map(|e| e.child.as_str()).chain(cycle.first().map(|e| e.child.as_str())).collect();
        let _ = writeln!(s, "  cycle: {}", tables.join(" -> "));
    }
    s
}

pub fn plan_report(catalog: &RelationalCatalog, star: &StarSchema) -> String {
    let mut s = String::new();
    let graph = SchemaGraph::build(catalog);
    let f = &star.fact;
    let _ = writeln!(s, "fact {} (source table {})", f.table_name(), f.source_table);
    for m in &f.measures {
        let aggs: Vec<String> = m.aggregations.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(s, "  measure {} = {}({})", m.output_name, aggs.join("|"), m.source);
    }
    let cols: Vec<&str> = f.columns.iter().map(|c| c.name.as_str()).collect();
    let _ = writeln!(s, "  columns: {}", cols.join(", "));
    for (i, d) in star.dimensions.iter().enumerate() {
        let _ = writeln!(s, "\ndimension {} ({}, key {})", d.name, d.table_name(), d.surrogate_key_name);
        let _ = writeln!(s, "  grain {}", d.natural_key);
        let levels: Vec<String> = d
            .hierarchy
            .levels
            .iter()
            .map(|l| match l.derivation {
                LevelDerivation::Column => format!("{} ({})", l.name, l.source),
                _ => l.name.clone(),
            })
            .collect();
        let _ = writeln!(s, "  hierarchy: {}", levels.join(" -> "));
        let attrs: Vec<&str> = d.descriptive_attributes.iter().map(|a| a.output_name.as_str()).collect();
        let _ = writeln!(s, "  attributes: {}", attrs.join(", "));
        let chosen = f.grain.attributes[i].chosen_path_index;
        if let Ok(paths) = graph.find_paths(&f.source_table, (&d.natural_key.table, &d.natural_key.column)) {
            for (j, p) in paths.iter().enumerate() {
                let mark = if j == chosen { "*" } else { " " };
                let role = if p.role_label.is_empty() { String::new() } else { format!("  (role {})", p.role_label) };
                let _ = writeln!(s, "  {mark} path [{j}] {p}{role}");
            }
        }
    }
    s
}

pub fn build_summary(built: &BuiltStar) -> String {
    let mut s = String::new();
    for d in &built.dimensions {
        let _ = writeln!(s, "dim_{}: {} (+unknown)", d.name, d.len() - 1);
    }
    let _ = writeln!(s, "{}: {}", built.fact.name, built.fact.rows.len());
    s
}
