// Subscriber counts for a telecom schema with a location hierarchy.
//
// cargo run --example gorannet

use std::error::Error;
use std::path::Path;

use starforge::cube::{Cube, CubeQuery};
use starforge::project::ProjectConfig;

pub fn run() -> Result<(), Box<dyn Error>> {
    let config = ProjectConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/gorannet/starforge.toml"))?;
    let cube = Cube::load(&config.build()?.built);
    for d in cube.dimensions() {
        println!("{}: {}", d.name(), d.level_names().join(" -> "));
    }

    let total = cube.query(&CubeQuery::new().measure("subscribers_count"))?;
    println!("subscribers: {}", total.rows[0].values[0]);
    assert_eq!(total.rows[0].values[0].to_string(), "20");

    let q = CubeQuery::new()
        .group("location", "governorate")
        .group("service_type", "type_name")
        .measure("subscribers_count");
    for row in &cube.query(&q)?.rows {
        println!("{:<16} {:<12} {}", row.members[0].to_string(), row.members[1].to_string(), row.values[0]);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
