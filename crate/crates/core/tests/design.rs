mod support;

use starforge::catalog::{parse_ddl, RelationalCatalog};
use starforge::design::{emit_star_ddl, DesignDocument, DesignErrorKind, LevelDerivation};
use starforge::graph::SchemaGraph;
use starforge::synth::{random_case, SynthOptions};
use support::fixture;

fn retail() -> RelationalCatalog {
    parse_ddl(&std::fs::read_to_string(fixture("retail/schema.sql")).unwrap()).unwrap()
}

fn retail_doc() -> DesignDocument {
    DesignDocument::parse(&std::fs::read_to_string(fixture("retail/design.json")).unwrap()).unwrap()
}

/// Re-parses the emitted DDL and checks it is a star around `fact`.
fn assert_star_shape(ddl: &str, fact: &str, dims: usize) {
    let catalog = parse_ddl(ddl).unwrap();
    let graph = SchemaGraph::build(&catalog);
    assert_eq!(graph.edges().len(), dims);
    for e in graph.edges() {
        assert_eq!(e.child, fact, "{e}");
    }
    let parents: std::collections::BTreeSet<&str> = graph.edges().iter().map(|e| e.parent.as_str()).collect();
    assert_eq!(parents.len(), dims);
    assert!(graph.detect_cycles().is_empty());
}

#[test]
fn retail_design_is_a_three_dimension_star() {
    let star = retail_doc().design(&retail()).unwrap();
    let names: Vec<&str> = star.dimensions.iter().map(|d| d.name.as_str()).collect();
    assert_eq!(names, ["date", "product", "store"]);
    let date = &star.dimensions[0];
    assert_eq!(date.hierarchy.level_names(), ["day", "month", "quarter", "year"]);
    assert_eq!(date.hierarchy.levels[1].derivation, LevelDerivation::Month);
    assert_eq!(star.dimensions[2].hierarchy.level_names(), ["store_name", "city", "region"]);
    assert_eq!(star.fact.table_name(), "fact_sales");
    assert_star_shape(&emit_star_ddl(&star), "fact_sales", 3);
}

#[test]
fn gorannet_design_is_a_three_dimension_star() {
    let catalog = parse_ddl(&std::fs::read_to_string(fixture("gorannet/schema.sql")).unwrap()).unwrap();
    let doc = DesignDocument::parse(&std::fs::read_to_string(fixture("gorannet/design.json")).unwrap()).unwrap();
    let star = doc.design(&catalog).unwrap();
    assert_eq!(star.dimensions.len(), 3);
    let cols: Vec<&str> = star.fact.columns.iter().map(|c| c.name.as_str()).collect();
    assert_eq!(cols, ["subscribers_count"]);
    assert_star_shape(&emit_star_ddl(&star), "fact_subscriptions", 3);
}

#[test]
fn random_designs_emit_stars() {
    for seed in 0..100 {
        let case = random_case(seed, &SynthOptions::default());
        let star = case.design.design(&case.catalog).unwrap();
        assert_star_shape(&emit_star_ddl(&star), "fact_f", star.dimensions.len());
    }
}

#[test]
fn errors_carry_field_paths() {
    let catalog = retail();

    let mut doc = retail_doc();
    doc.grain[1].table = "brands".into();
    let e = doc.design(&catalog).unwrap_err();
    assert_eq!(e.field, "grain[1]");
    assert!(matches!(e.kind, DesignErrorKind::UnknownTable(_)));

    let mut doc = retail_doc();
    doc.grain[2].path = 4;
    let e = doc.design(&catalog).unwrap_err();
    assert_eq!(e.field, "grain[2]");
    assert!(e.to_string().contains("[0] sales -> stores"), "{e}");

    let mut doc = retail_doc();
    doc.measures[1].table = "products".into();
    doc.measures[1].column = "category_id".into();
    assert!(matches!(doc.design(&catalog).unwrap_err().kind, DesignErrorKind::MixedSourceTables(_)));

    let mut doc = retail_doc();
    doc.grain.push(doc.grain[0].clone());
    assert!(matches!(doc.design(&catalog).unwrap_err().kind, DesignErrorKind::DuplicateGrain(_)));

    let mut doc = retail_doc();
    doc.grain.clear();
    assert!(matches!(doc.design(&catalog).unwrap_err().kind, DesignErrorKind::EmptyGrain));

    let mut doc = retail_doc();
    doc.grain[0].table = "promotions".into();
    doc.grain[0].column = "promotion_name".into();
    let e = doc.design(&catalog).unwrap_err();
    assert!(matches!(e.kind, DesignErrorKind::NoPathFound { .. }), "{e}");

    let e = DesignDocument::parse(r#"{"fact_name": "x", "measures": [], "grain": [], "colour": 1}"#).unwrap_err();
    assert_eq!(e.field, "document");
}

#[test]
fn hierarchy_override_must_sit_on_the_chain() {
    let mut doc = retail_doc();
    doc.hierarchy_overrides.insert("product".into(), vec![starforge::design::ColumnRef::new("stores", "city")]);
    let e = doc.design(&retail()).unwrap_err();
    assert_eq!(e.field, "hierarchy_overrides.product");
    assert!(matches!(e.kind, DesignErrorKind::InvalidOverride(_)));
}
