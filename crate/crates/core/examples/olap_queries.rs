// Group-by, roll-up, drill-down, slice and dice against the retail cube.
//
// cargo run --example olap_queries

use std::error::Error;
use std::path::Path;

use starforge::cube::{Cube, CubeQuery, Filter, QueryResult};
use starforge::project::ProjectConfig;

fn show(title: &str, r: &QueryResult) {
    println!("-- {title}");
    for row in &r.rows {
        let members: Vec<String> = row.members.iter().map(|m| m.to_string()).collect();
        let values: Vec<String> = row.values.iter().map(|v| v.to_string()).collect();
        println!("   {:<24} {}", members.join(" / "), values.join("  "));
    }
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let config = ProjectConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail/starforge.toml"))?;
    let cube = Cube::load(&config.build()?.built);

    let by_product =
        CubeQuery::new().group("product", "product_name").measure("total_price_sum").measure("total_price_avg");
    show("by product", &cube.query(&by_product)?);

    let by_category = cube.roll_up(&by_product, "product")?;
    show("rolled up to category", &cube.query(&by_category)?);
    assert_eq!(cube.drill_down(&by_category, "product")?, by_product);

    let month = cube.slice(&CubeQuery::new().measure("total_price_sum"), "date", "month", "2021-01".into())?;
    let tea = cube.slice(&month, "product", "product_name", "Green Tea".into())?;
    let r = cube.query(&tea)?;
    show("Green Tea in 2021-01", &r);
    assert_eq!(r.rows[0].values[0].to_string(), "30.00");

    let diced = cube.dice(
        &CubeQuery::new().group("store", "city").measure("quantity_sum"),
        vec![
            Filter::new("date", "day", ["2021-01-02".into()]),
            Filter::new("product", "category_name", ["Tea".into()]),
        ],
    )?;
    show("tea on 2021-01-02 by city", &cube.query(&diced)?);

    if let Err(e) = cube.query(&CubeQuery::new().group("product", "brand")) {
        println!("error: {e}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
