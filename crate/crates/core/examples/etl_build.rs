// Run the full pipeline from a project file, verify it, and persist the star.
//
// cargo run --example etl_build

use std::error::Error;
use std::path::Path;

use starforge::cli::build_summary;
use starforge::etl::{verify, BuiltStar};
use starforge::project::ProjectConfig;

pub fn run() -> Result<(), Box<dyn Error>> {
    let config = ProjectConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/retail/starforge.toml"))?;
    let build = config.build()?;
    print!("{}", build_summary(&build.built));

    let report = verify(&build.catalog, &build.data, &build.built);
    print!("{report}");
    assert!(report.passed());

    // Dimension row 0 is the Unknown member.
    let product = build.built.dimensions.iter().find(|d| d.name == "product").ok_or("no product dimension")?;
    println!("product members: {:?}", &product.rows[1..]);

    let out = tempdir()?;
    let dir = build.built.write(&out)?;
    println!("wrote {}", dir.display());
    let back = BuiltStar::read(&out)?;
    assert_eq!(back, build.built);
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

fn tempdir() -> std::io::Result<std::path::PathBuf> {
    let dir = std::env::temp_dir().join(format!("starforge-etl-example-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run()
}
