// Lay a two-dimensional result out as a grid with totals.
//
// cargo run --example pivot_grid

use std::error::Error;
use std::path::Path;

use starforge::cube::{pivot, Cube, CubeQuery, PivotGrid};
use starforge::project::ProjectConfig;
use starforge::value::Value;

fn join(vs: &[Value]) -> String {
    vs.iter().map(|v| if v.is_null() { "(unknown)".to_string() } else { v.to_string() }).collect::<Vec<_>>().join("/")
}

fn print_grid(g: &PivotGrid) {
    print!("{:<14}", "");
    for h in &g.col_headers {
        print!("{:>14}", join(h));
    }
    println!("{:>14}", "total");
    for (i, h) in g.row_headers.iter().enumerate() {
        print!("{:<14}", join(h));
        for cell in &g.cells[i] {
            print!("{:>14}", cell.as_deref().map_or("-".to_string(), join));
        }
        println!("{:>14}", join(&g.row_totals[i]));
    }
    print!("{:<14}", "total");
    for t in &g.col_totals {
        print!("{:>14}", join(t));
    }
    println!("{:>14}", join(&g.grand_total));
}

pub fn run() -> Result<(), Box<dyn Error>> {
    let config = ProjectConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail/starforge.toml"))?;
    let cube = Cube::load(&config.build()?.built);
    let q = CubeQuery::new().group("product", "product_name").group("date", "day").measure("total_price_sum");
    let result = cube.query(&q)?;

    let grid = pivot(&result, &["product"], &["date"])?;
    print_grid(&grid);
    println!();
    print_grid(&grid.transpose());
    assert_eq!(grid.grand_total[0].to_string(), "35.00");
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
