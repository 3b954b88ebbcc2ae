use std::collections::BTreeSet;

use proptest::prelude::*;
use starforge::catalog::parse_ddl;
use starforge::graph::{GraphError, SchemaGraph};

/// Tables `t0..tn`, each with `id` and `v`, plus FK columns `r<k>` given as
/// (child, parent) pairs in declaration order.
fn ddl(n: usize, fks: &[(usize, usize)]) -> String {
    (0..n)
        .map(|t| {
            let mine: Vec<(usize, usize)> =
                fks.iter().enumerate().filter(|(_, f)| f.0 == t).map(|(k, f)| (k, f.1)).collect();
            let mut cols = vec!["id INTEGER PRIMARY KEY".to_string(), "v VARCHAR(4)".to_string()];
            cols.extend(mine.iter().map(|(k, _)| format!("r{k} INTEGER")));
            cols.extend(mine.iter().map(|(k, p)| format!("FOREIGN KEY (r{k}) REFERENCES t{p} (id)")));
            format!("CREATE TABLE t{t} ({});\n", cols.join(", "))
        })
        .collect()
}

/// Every simple path by exhaustive DFS, as sequences of FK ids.
fn brute_force(fks: &[(usize, usize)], from: usize, to: usize) -> BTreeSet<Vec<usize>> {
    fn go(
        fks: &[(usize, usize)],
        at: usize,
        to: usize,
        seen: &mut Vec<usize>,
        path: &mut Vec<usize>,
        out: &mut BTreeSet<Vec<usize>>,
    ) {
        if at == to {
            out.insert(path.clone());
            return;
        }
        for (k, &(c, p)) in fks.iter().enumerate() {
            if c == at && !seen.contains(&p) {
                seen.push(p);
                path.push(k);
                go(fks, p, to, seen, path, out);
                path.pop();
                seen.pop();
            }
        }
    }
    let mut out = BTreeSet::new();
    go(fks, from, to, &mut vec![from], &mut Vec::new(), &mut out);
    out
}

fn schema() -> impl Strategy<Value = (usize, Vec<(usize, usize)>, usize, usize)> {
    (1usize..=8).prop_flat_map(|n| (Just(n), prop::collection::vec((0..n, 0..n), 0..14), 0..n, 0..n))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn paths_match_exhaustive_search((n, fks, from, to) in schema()) {
        let catalog = parse_ddl(&ddl(n, &fks)).unwrap();
        let graph = SchemaGraph::build(&catalog);
        let expected = brute_force(&fks, from, to);
        match graph.find_paths(&format!("t{from}"), (&format!("t{to}"), "v")) {
            Ok(paths) => {
                let got: Vec<Vec<usize>> = paths
                    .iter()
                    .map(|p| p.edges.iter().map(|e| e.columns[0][1..].parse().unwrap()).collect())
                    .collect();
                prop_assert_eq!(got.iter().cloned().collect::<BTreeSet<_>>(), expected);
                prop_assert_eq!(got.len(), paths.len(), "duplicates");
                for p in &paths {
                    prop_assert!(p.is_well_formed());
                    prop_assert_eq!(p.end(), format!("t{to}"));
                }
                // Ranked by length, then by the label sequence.
                for w in paths.windows(2) {
                    let key = |p: &starforge::graph::FkPath| (p.len(), p.edges.iter().map(|e| e.label()).collect::<Vec<_>>());
                    prop_assert!(key(&w[0]) <= key(&w[1]));
                }
            }
            Err(GraphError::NoPathFound { .. }) => prop_assert!(expected.is_empty()),
            Err(e) => prop_assert!(false, "{}", e),
        }
    }

    #[test]
    fn cycles_are_reported_iff_present((n, fks, _from, _to) in schema()) {
        let catalog = parse_ddl(&ddl(n, &fks)).unwrap();
        let graph = SchemaGraph::build(&catalog);
        // A cycle exists iff some FK's parent can reach its child.
        let cyclic = fks.iter().any(|&(c, p)| c == p || !brute_force(&fks, p, c).is_empty());
        let cycles = graph.detect_cycles();
        prop_assert_eq!(!cycles.is_empty(), cyclic);
        for cycle in &cycles {
            for w in cycle.windows(2) {
                prop_assert_eq!(&w[0].parent, &w[1].child);
            }
            prop_assert_eq!(&cycle.last().unwrap().parent, &cycle[0].child);
        }
    }
}

#[test]
fn unknown_endpoints_are_named() {
    let catalog = parse_ddl(&ddl(2, &[(0, 1)])).unwrap();
    let graph = SchemaGraph::build(&catalog);
    assert_eq!(graph.find_paths("t9", ("t1", "v")), Err(GraphError::UnknownTable("t9".into())));
    assert!(matches!(graph.find_paths("t0", ("t1", "w")), Err(GraphError::UnknownColumn { .. })));
    assert_eq!(graph.find_paths("t0", ("t0", "v")).unwrap()[0].len(), 0);
}

#[test]
fn role_playing_paths_are_distinct() {
    let catalog = parse_ddl(&ddl(3, &[(0, 1), (0, 1), (1, 2)])).unwrap();
    let paths = SchemaGraph::build(&catalog).find_paths("t0", ("t2", "v")).unwrap();
    let roles: Vec<&str> = paths.iter().map(|p| p.role_label.as_str()).collect();
    assert_eq!(roles, ["r0_r2", "r1_r2"]);
    assert_eq!(paths[0].to_string(), "t0 -> t1 -> t2");
}
