// Load a catalog from DDL, validate it, and print the inspection report.
//
// cargo run --example inspect_catalog

use std::error::Error;
use std::path::Path;

use starforge::catalog::{catalog_to_json, emit_ddl, parse_ddl_unchecked};
use starforge::cli::inspect_report;

pub fn run() -> Result<(), Box<dyn Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail");
    let catalog = parse_ddl_unchecked(&std::fs::read_to_string(root.join("schema.sql"))?)?.with_schema_name("retail");
    print!("{}", inspect_report(&catalog));

    let report = catalog.validate();
    assert!(!report.has_errors());

    // DDL and JSON are interchangeable catalog formats.
    let again = parse_ddl_unchecked(&emit_ddl(&catalog))?.with_schema_name("retail");
    assert_eq!(again, catalog);
    println!("\n{} bytes of JSON catalog", catalog_to_json(&catalog).len());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
