//! Extraction depth equals exhaustive path enumeration on random graphs.

use medsearch_synth::{build_graph, extract_subgraph, Entity, GraphError, Relation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn lcg(state: &mut u64) -> u64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    *state >> 33
}

fn random_graph(seed: u64) -> (Vec<Entity>, Vec<Relation>) {
    let mut state = seed.wrapping_add(1);
    let n = 4 + (lcg(&mut state) % 12) as usize; // up to 15 nodes
    let entities: Vec<Entity> = (0..n)
        .map(|i| Entity {
            name: format!("n{i:02}"),
            entity_type: "t".into(),
        })
        .collect();
    let labels = ["a", "b", "c"];
    let mut edges = BTreeSet::new();
    let edge_count = n + (lcg(&mut state) % (2 * n as u64)) as usize;
    for _ in 0..edge_count {
        let head = (lcg(&mut state) % n as u64) as usize;
        let tail = (lcg(&mut state) % n as u64) as usize;
        if head == tail {
            continue;
        }
        let label = labels[(lcg(&mut state) % 3) as usize];
        edges.insert((head, label, tail));
    }
    let relations = edges
        .into_iter()
        .map(|(head, label, tail)| Relation {
            head: format!("n{head:02}"),
            label: label.into(),
            tail: format!("n{tail:02}"),
        })
        .collect();
    (entities, relations)
}

/// Independent oracle: recursive enumeration of every simple path from the
/// root, tracking the maximum length up to the cap.
fn longest_simple_path(
    relations: &[Relation],
    node: &str,
    visited: &mut BTreeSet<String>,
    cap: usize,
) -> usize {
    if cap == 0 {
        return 0;
    }
    let mut best = 0;
    for rel in relations {
        if rel.head == node && !visited.contains(&rel.tail) {
            visited.insert(rel.tail.clone());
            let depth = 1 + longest_simple_path(relations, &rel.tail, visited, cap - 1);
            visited.remove(&rel.tail);
            best = best.max(depth);
        }
    }
    best
}

#[test]
fn extraction_depth_matches_enumeration_on_100_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for seed in 0..100u64 {
        let (entities, relations) = random_graph(seed);
        let kg = build_graph(entities.clone(), relations.clone()).unwrap();
        let root = &entities[0].name;
        let mut visited = BTreeSet::from([root.clone()]);
        let oracle = longest_simple_path(&relations, root, &mut visited, 6);
        match extract_subgraph(&kg, root, (4, 6), &mut rng) {
            Ok(sub) => {
                assert_eq!(sub.depth, oracle, "graph seed {seed}");
                assert!((4..=6).contains(&sub.depth));
                // Simple path: no repeated entities.
                let mut seen = BTreeSet::from([sub.root.clone()]);
                for rel in &sub.path {
                    assert!(seen.insert(rel.tail.clone()), "repeated entity, seed {seed}");
                }
                assert_eq!(sub.terminal, sub.path.last().unwrap().tail);
            }
            Err(GraphError::TooShallow { longest, .. }) => {
                assert_eq!(longest, oracle, "graph seed {seed}");
                assert!(oracle < 4, "graph seed {seed}: extraction refused a deep graph");
            }
            Err(other) => panic!("unexpected error on seed {seed}: {other}"),
        }
    }
}

#[test]
fn tie_break_is_seed_reproducible() {
    // A diamond with two maximal paths; the same seed must pick the same one.
    let entities: Vec<Entity> = ["r", "a", "b", "c", "d", "e1", "e2", "f1", "f2"]
        .iter()
        .map(|n| Entity {
            name: n.to_string(),
            entity_type: "t".into(),
        })
        .collect();
    let mk = |h: &str, l: &str, t: &str| Relation {
        head: h.into(),
        label: l.into(),
        tail: t.into(),
    };
    let relations = vec![
        mk("r", "x", "a"),
        mk("a", "x", "b"),
        mk("b", "x", "c"),
        mk("c", "x", "d"),
        mk("d", "x", "e1"),
        mk("d", "x", "e2"),
        mk("e1", "x", "f1"),
        mk("e2", "x", "f2"),
    ];
    let kg = build_graph(entities, relations).unwrap();
    let first = {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        extract_subgraph(&kg, "r", (4, 6), &mut rng).unwrap()
    };
    let second = {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        extract_subgraph(&kg, "r", (4, 6), &mut rng).unwrap()
    };
    assert_eq!(first, second);
    assert_eq!(first.depth, 6);
}
