// Enumerate foreign-key paths, including role-playing ones.
//
// cargo run --example fk_paths

use std::error::Error;

use starforge::catalog::parse_ddl;
use starforge::graph::SchemaGraph;

const DDL: &str = "
CREATE TABLE region (id INTEGER PRIMARY KEY, name VARCHAR(20) NOT NULL);
CREATE TABLE store (id INTEGER PRIMARY KEY, name VARCHAR(20) NOT NULL, region_id INTEGER NOT NULL,
    FOREIGN KEY (region_id) REFERENCES region (id));
CREATE TABLE shipment (
    id INTEGER PRIMARY KEY,
    sold_at INTEGER NOT NULL,
    shipped_from INTEGER NOT NULL,
    weight DECIMAL(8,2) NOT NULL,
    FOREIGN KEY (sold_at) REFERENCES store (id),
    FOREIGN KEY (shipped_from) REFERENCES store (id));
";

pub fn run() -> Result<(), Box<dyn Error>> {
    let catalog = parse_ddl(DDL)?;
    let graph = SchemaGraph::build(&catalog);
    for e in graph.edges() {
        println!("edge {e}");
    }

    // Two ways to reach a region: the role label tells them apart.
    let paths = graph.find_paths("shipment", ("region", "name"))?;
    for (i, p) in paths.iter().enumerate() {
        println!("[{i}] {p}  role {}", p.role_label);
    }
    assert_eq!(paths.len(), 2);
    assert!(paths.iter().all(|p| p.is_well_formed() && p.end() == "region"));

    match graph.find_paths("region", ("shipment", "weight")) {
        Err(e) => println!("no path: {e}"),
        Ok(p) => println!("unexpected: {} paths", p.len()),
    }
    assert!(graph.detect_cycles().is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
