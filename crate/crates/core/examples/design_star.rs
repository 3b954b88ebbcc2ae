// Build a star schema with the programmatic API and print its DDL.
//
// cargo run --example design_star

use std::error::Error;
use std::path::Path;

use starforge::catalog::parse_ddl;
use starforge::design::{
    build_star_schema, emit_star_ddl, select_measures, Aggregation, ColumnRef, GrainAttribute, GrainSpec,
    HierarchyOverrides, MeasureRequest,
};
use starforge::graph::SchemaGraph;

pub fn run() -> Result<(), Box<dyn Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail");
    let catalog = parse_ddl(&std::fs::read_to_string(root.join("schema.sql"))?)?;
    let graph = SchemaGraph::build(&catalog);

    let measures = select_measures(
        &catalog,
        &[
            MeasureRequest::new("sales", "quantity", &[Aggregation::Sum]),
            MeasureRequest::new("sales", "total_price", &[Aggregation::Sum, Aggregation::Avg]),
        ],
    )?;
    let grain = GrainSpec {
        attributes: vec![
            GrainAttribute::new("sales", "sale_date").named("date"),
            GrainAttribute::new("products", "product_name").named("product"),
            GrainAttribute::new("stores", "store_name").named("store"),
        ],
    };
    let mut overrides = HierarchyOverrides::new();
    overrides.insert("store".into(), vec![ColumnRef::new("stores", "city"), ColumnRef::new("stores", "region")]);

    let star = build_star_schema("sales", measures, &grain, &graph, &catalog, &overrides)?;
    for d in &star.dimensions {
        println!("{}: {}", d.name, d.hierarchy.level_names().join(" -> "));
    }
    print!("\n{}", emit_star_ddl(&star));

    // The emitted DDL is itself a valid catalog in which every edge leaves the fact table.
    let star_catalog = parse_ddl(&emit_star_ddl(&star))?;
    let star_graph = SchemaGraph::build(&star_catalog);
    assert!(star_graph.edges().iter().all(|e| e.child == "fact_sales"));

    let bad = select_measures(&catalog, &[MeasureRequest::new("stores", "city", &[Aggregation::Sum])]);
    println!("rejected: {}", bad.unwrap_err());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
