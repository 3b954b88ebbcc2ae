mod support;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use starforge::cube::{pivot, Cube, CubeQuery, Filter, QueryError};
use starforge::etl::run_etl;
use starforge::synth::{random_case, SynthOptions};
use starforge::value::Value;
use support::{level_lattice, load_fixture, query_oracle, random_member, random_query, result_table, rows_sorted};

fn synth_cube(seed: u64) -> (starforge::etl::BuiltStar, Cube) {
    let case = random_case(seed, &SynthOptions::default());
    let star = case.design.design(&case.catalog).unwrap();
    let built = run_etl(&star, &case.catalog, &case.data).unwrap();
    let cube = Cube::load(&built);
    (built, cube)
}

#[test]
fn random_queries_match_base_cell_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for seed in 0..20 {
        let (built, cube) = synth_cube(seed);
        for _ in 0..20 {
            let q = random_query(&mut rng, &cube);
            let r = cube.query(&q).unwrap();
            assert_eq!(result_table(&r), query_oracle(&built, &q), "seed {seed} {q:?}");
            assert!(rows_sorted(&r), "seed {seed} {q:?}");
        }
    }
}

#[test]
fn fixture_queries_match_base_cell_scan() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for name in ["retail", "gorannet"] {
        let f = load_fixture(name);
        let cube = Cube::load(&f.built);
        for _ in 0..50 {
            let q = random_query(&mut rng, &cube);
            assert_eq!(result_table(&cube.query(&q).unwrap()), query_oracle(&f.built, &q), "{name} {q:?}");
        }
    }
}

#[test]
fn totals_survive_every_level_combination() {
    let f = load_fixture("retail");
    let cube = Cube::load(&f.built);
    let measures = ["quantity_sum", "total_price_sum"];
    let mut q = CubeQuery::new();
    for m in measures {
        q = q.measure(m);
    }
    let grand = cube.query(&q).unwrap().rows[0].values.clone();
    let lattice = level_lattice(&cube);
    assert_eq!(lattice.len(), 5 * 3 * 4);
    for group_by in lattice {
        let q = CubeQuery { group_by, ..q.clone() };
        let r = cube.query(&q).unwrap();
        for (i, total) in grand.iter().enumerate() {
            let sum: i64 = r.rows.iter().map(|row| row.values[i].as_scaled().unwrap()).sum();
            assert_eq!(Some(sum), total.as_scaled(), "{q:?}");
        }
    }
}

#[test]
fn average_is_not_mean_of_means() {
    let f = load_fixture("retail");
    let cube = Cube::load(&f.built);
    let by_store = cube.query(&CubeQuery::new().group("store", "store_name").measure("total_price_avg")).unwrap();
    let means: Vec<String> = by_store.rows.iter().map(|r| r.values[0].to_string()).collect();
    assert_eq!(means, ["6.666667", "15.000000"]);
    let overall = cube.query(&CubeQuery::new().measure("total_price_avg")).unwrap();
    // 35.00 over 4 sales, not (6.666667 + 15) / 2.
    assert_eq!(overall.rows[0].values[0].to_string(), "8.750000");
}

#[test]
fn algebraic_laws_hold_on_random_cubes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for seed in 0..10 {
        let (_, cube) = synth_cube(seed);
        let names: Vec<String> = cube.dimensions().iter().map(|d| d.name().to_string()).collect();
        for _ in 0..20 {
            let mut q = random_query(&mut rng, &cube);
            q.group_by.sort_by_key(|g| names.iter().position(|n| *n == g.dimension));
            let d = &names[rng.random_range(0..names.len())];
            if let Ok(rolled) = cube.roll_up(&q, d) {
                assert_eq!(cube.drill_down(&rolled, d).unwrap(), q);
            }
            let (level, member) = random_member(&mut rng, &cube, d);
            let sliced = cube.slice(&q, d, &level, member.clone()).unwrap();
            let diced = cube.dice(&q, vec![Filter::new(d.as_str(), level.as_str(), [member])]).unwrap();
            assert_eq!(cube.query(&sliced).unwrap(), cube.query(&diced).unwrap());
        }
    }
}

#[test]
fn pivot_transpose_symmetry() {
    let f = load_fixture("retail");
    let cube = Cube::load(&f.built);
    let q = CubeQuery::new()
        .group("date", "day")
        .group("store", "city")
        .group("product", "category_name")
        .measure("quantity_sum");
    let r = cube.query(&q).unwrap();
    let g = pivot(&r, &["date", "store"], &["product"]).unwrap();
    assert_eq!(pivot(&r, &["product"], &["date", "store"]).unwrap(), g.transpose());
    assert_eq!(g.transpose().transpose(), g);
    assert!(matches!(pivot(&r, &["date"], &["date", "product"]), Err(QueryError::AxisMismatch(_))));
}

#[test]
fn query_errors() {
    let f = load_fixture("retail");
    let cube = Cube::load(&f.built);
    let err = |q: CubeQuery| cube.query(&q).unwrap_err();
    assert_eq!(err(CubeQuery::new().group("customer", "name")), QueryError::UnknownDimension("customer".into()));
    assert!(matches!(err(CubeQuery::new().measure("profit")), QueryError::UnknownMeasure(_)));
    assert!(matches!(
        err(CubeQuery::new().group("date", "day").group("date", "month")),
        QueryError::DuplicateDimension(_)
    ));
    assert!(matches!(
        err(CubeQuery::new().filter(Filter::new("date", "day", Vec::<Value>::new()))),
        QueryError::EmptyFilter { .. }
    ));
    assert!(matches!(
        err(CubeQuery::new().filter(Filter::new("date", "month", ["2030-01".into()]))),
        QueryError::UnknownMember { .. }
    ));
}

#[test]
fn text_filter_members_match_typed_levels() {
    let f = load_fixture("retail");
    let cube = Cube::load(&f.built);
    let q = cube.slice(&CubeQuery::new().measure("quantity_sum"), "date", "day", "2021-01-02".into()).unwrap();
    assert_eq!(cube.query(&q).unwrap().rows[0].values[0].to_string(), "4");
}

#[test]
fn empty_source_gives_empty_results() {
    let seed = (0..500)
        .find(|&s| {
            random_case(s, &SynthOptions::default()).data.tables().iter().any(|t| t.name == "f" && t.rows.is_empty())
        })
        .unwrap();
    let (_, cube) = synth_cube(seed);
    let name = cube.measures()[0].name.clone();
    assert!(cube.query(&CubeQuery::new().measure(&name)).unwrap().rows.is_empty());
}

/// Rolling up equals regrouping the finer result through the parent map read
/// from the dimension rows, for SUM, COUNT, MIN and MAX.
#[test]
fn roll_up_equals_regrouping_the_finer_result() {
    use starforge::design::{Aggregation, DimensionColumnContent};
    use std::collections::BTreeMap;

    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut checked = 0;
    for seed in 0..30 {
        let (built, cube) = synth_cube(seed);
        for _ in 0..20 {
            let mut q = random_query(&mut rng, &cube);
            q.measures.retain(|m| !m.ends_with("_avg"));
            if q.measures.is_empty() || q.group_by.is_empty() {
                continue;
            }
            let pos = rng.random_range(0..q.group_by.len());
            let g = q.group_by[pos].clone();
            let dim = cube.dimension(&g.dimension).unwrap();
            let k = dim.level(&g.level).unwrap();
            if k + 1 == dim.level_count() {
                continue;
            }
            let di = built.schema.dimensions.iter().position(|d| d.name == g.dimension).unwrap();
            let table = &built.dimensions[di];
            let at = |l| table.columns.iter().position(|c| c.content == DimensionColumnContent::Level(l)).unwrap();
            let (ck, cp) = (at(k), at(k + 1));
            let mut parent: BTreeMap<Option<String>, Option<String>> =
                table.rows[1..].iter().map(|r| (support::text(&r[ck]), support::text(&r[cp]))).collect();
            parent.insert(None, None);

            let aggs: Vec<Aggregation> = q.measures.iter().map(|m| cube.measure(m).unwrap().aggregation).collect();
            let mut regrouped: BTreeMap<Vec<Option<String>>, Vec<Option<i64>>> = BTreeMap::new();
            for row in &cube.query(&q).unwrap().rows {
                let mut key: Vec<Option<String>> = row.members.iter().map(support::text).collect();
                key[pos] = parent[&key[pos]].clone();
                let slot = regrouped.entry(key).or_insert_with(|| vec![None; aggs.len()]);
                for ((s, v), agg) in slot.iter_mut().zip(&row.values).zip(&aggs) {
                    let Some(v) = v.as_scaled() else { continue };
                    *s = Some(match (agg, *s) {
                        (_, None) => v,
                        (Aggregation::Min, Some(a)) => a.min(v),
                        (Aggregation::Max, Some(a)) => a.max(v),
                        (_, Some(a)) => a + v,
                    });
                }
            }
            let coarse = cube.query(&cube.roll_up(&q, &g.dimension).unwrap()).unwrap();
            let got: BTreeMap<Vec<Option<String>>, Vec<Option<i64>>> = coarse
                .rows
                .iter()
                .map(|r| (r.members.iter().map(support::text).collect(), r.values.iter().map(Value::as_scaled).collect()))
                .collect();
            assert_eq!(got, regrouped, "seed {seed} {q:?}");
            checked += 1;
        }
    }
    assert!(checked > 100, "{checked}");
}

#[test]
fn queries_do_not_mutate_the_cube() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let (_, cube) = synth_cube(4);
    let before = cube.clone();
    let queries: Vec<CubeQuery> = (0..50).map(|_| random_query(&mut rng, &cube)).collect();
    let first: Vec<_> = queries.iter().map(|q| cube.query(q).unwrap()).collect();
    let second: Vec<_> = queries.iter().map(|q| cube.query(q).unwrap()).collect();
    assert_eq!(first, second);
    assert_eq!(cube.cells(), before.cells());
}
