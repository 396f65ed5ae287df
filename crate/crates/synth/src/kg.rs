//! Knowledge graph: typed entities, labeled directed relations, degree
//! stratification, long-tail sampling, and longest-path subgraph extraction.
//!
//! Longest-path search is NP-hard in general, so extraction enumerates simple
//! paths exhaustively and refuses graphs beyond a configurable node cap —
//! desk-scale graphs are small by construction.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Entity {
    pub name: String,
    #[serde(rename = "type")]
    pub entity_type: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Relation {
    pub head: String,
    pub label: String,
    pub tail: String,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("graph has no entities")]
    EmptyGraph,
    #[error("duplicate entity {0}")]
    DuplicateEntity(String),
    #[error("relation references unknown entity {0}")]
    UnknownEntity(String),
    #[error("self-loop on entity {0}")]
    SelfLoop(String),
    #[error("long-tail stratum is empty")]
    EmptyStratum,
    #[error("no simple path from {root} reaches {min} hops (longest is {longest})")]
    TooShallow {
        root: String,
        min: usize,
        longest: usize,
    },
    #[error("graph has {0} entities, above the {1}-node enumeration cap")]
    GraphTooLarge(usize, usize),
    #[error("malformed graph file line {0}: {1}")]
    MalformedLine(usize, String),
}

/// Immutable after construction; shared freely across workers.
#[derive(Debug, Clone)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    by_name: BTreeMap<String, usize>,
    relations: Vec<Relation>,
    /// Outgoing relation indices per head, sorted by (label, tail).
    out_edges: BTreeMap<String, Vec<usize>>,
    degrees: BTreeMap<String, usize>,
}

/// Validate and index a graph: entity names unique, every edge endpoint
/// known, no self-loops.
pub fn build_graph(
    entities: Vec<Entity>,
    relations: Vec<Relation>,
) -> Result<KnowledgeGraph, GraphError> {
    if entities.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let mut by_name = BTreeMap::new();
    for (i, entity) in entities.iter().enumerate() {
        if by_name.insert(entity.name.clone(), i).is_some() {
            return Err(GraphError::DuplicateEntity(entity.name.clone()));
        }
    }
    let mut degrees: BTreeMap<String, usize> =
        entities.iter().map(|e| (e.name.clone(), 0)).collect();
    let mut out_edges: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (i, rel) in relations.iter().enumerate() {
        if !by_name.contains_key(&rel.head) {
            return Err(GraphError::UnknownEntity(rel.head.clone()));
        }
        if !by_name.contains_key(&rel.tail) {
            return Err(GraphError::UnknownEntity(rel.tail.clone()));
        }
        if rel.head == rel.tail {
            return Err(GraphError::SelfLoop(rel.head.clone()));
        }
        *degrees.get_mut(&rel.head).expect("known head") += 1;
        *degrees.get_mut(&rel.tail).expect("known tail") += 1;
        out_edges.entry(rel.head.clone()).or_default().push(i);
    }
    for indices in out_edges.values_mut() {
        indices.sort_by(|&a, &b| {
            (&relations[a].label, &relations[a].tail).cmp(&(&relations[b].label, &relations[b].tail))
        });
    }
    Ok(KnowledgeGraph {
        entities,
        by_name,
        relations,
        out_edges,
        degrees,
    })
}

impl KnowledgeGraph {
    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn relations(&self) -> &[Relation] {
        &self.relations
    }

    pub fn entity(&self, name: &str) -> Option<&Entity> {
        self.by_name.get(name).map(|&i| &self.entities[i])
    }

    /// In-degree + out-degree.
    pub fn degree(&self, name: &str) -> usize {
        self.degrees.get(name).copied().unwrap_or(0)
    }

    /// Outgoing relations of `head`, in deterministic (label, tail) order.
    pub fn out_edges(&self, head: &str) -> impl Iterator<Item = &Relation> {
        self.out_edges
            .get(head)
            .into_iter()
            .flatten()
            .map(move |&i| &self.relations[i])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stratum {
    Head,
    Torso,
    LongTail,
}

/// Degree-quantile stratification. Strata partition the entity set.
#[derive(Debug, Clone)]
pub struct FrequencyStrata {
    pub degrees: BTreeMap<String, usize>,
    pub assignment: BTreeMap<String, Stratum>,
}

impl FrequencyStrata {
    /// Members of one stratum, sorted by name.
    pub fn members(&self, stratum: Stratum) -> Vec<&str> {
        self.assignment
            .iter()
            .filter(|(_, s)| **s == stratum)
            .map(|(name, _)| name.as_str())
            .collect()
    }
}

/// Quantile value over sorted degrees: the element at 1-based rank
/// `ceil(q·n)`.
fn degree_quantile(sorted: &[usize], q: f64) -> usize {
    let n = sorted.len();
    let rank = (q * n as f64).ceil() as usize;
    sorted[rank.clamp(1, n) - 1]
}

/// Stratify entities by total degree. Entities at or below the `q_low`
/// quantile degree are long-tail; entities strictly above the `q_high`
/// quantile degree are head; the rest are torso. Equal degrees always land in
/// the same stratum, long-tail winning at the boundary.
pub fn stratify(
    kg: &KnowledgeGraph,
    quantiles: (f64, f64),
) -> Result<FrequencyStrata, GraphError> {
    let (q_low, q_high) = quantiles;
    assert!(
        0.0 < q_low && q_low < q_high && q_high < 1.0,
        "quantiles must satisfy 0 < q_low < q_high < 1"
    );
    if kg.entities.is_empty() {
        return Err(GraphError::EmptyGraph);
    }
    let mut sorted: Vec<usize> = kg.degrees.values().copied().collect();
    sorted.sort_unstable();
    let d_low = degree_quantile(&sorted, q_low);
    let d_high = degree_quantile(&sorted, q_high);
    let assignment = kg
        .degrees
        .iter()
        .map(|(name, &degree)| {
            let stratum = if degree <= d_low {
                Stratum::LongTail
            } else if degree > d_high {
                Stratum::Head
            } else {
                Stratum::Torso
            };
            (name.clone(), stratum)
        })
        .collect();
    Ok(FrequencyStrata {
        degrees: kg.degrees.clone(),
        assignment,
    })
}

/// Uniform draw from the long-tail stratum; reproducible under a fixed seed.
pub fn sample_longtail<R: Rng>(
    strata: &FrequencyStrata,
    rng: &mut R,
) -> Result<String, GraphError> {
    let pool = strata.members(Stratum::LongTail);
    if pool.is_empty() {
        return Err(GraphError::EmptyStratum);
    }
    Ok(pool[rng.gen_range(0..pool.len())].to_string())
}

/// A single simple path from a root to a terminal entity.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Subgraph {
    pub root: String,
    pub path: Vec<Relation>,
    pub depth: usize,
    pub terminal: String,
}

pub const DEFAULT_NODE_CAP: usize = 500;

/// Extract a maximal-length simple path from `root`, capped at
/// `depth_range.1` hops. Among the maximal paths one is drawn with the seeded
/// RNG. Fails with `TooShallow` when the longest simple path is below
/// `depth_range.0`.
pub fn extract_subgraph<R: Rng>(
    kg: &KnowledgeGraph,
    root: &str,
    depth_range: (usize, usize),
    rng: &mut R,
) -> Result<Subgraph, GraphError> {
    extract_subgraph_capped(kg, root, depth_range, rng, DEFAULT_NODE_CAP)
}

pub fn extract_subgraph_capped<R: Rng>(
    kg: &KnowledgeGraph,
    root: &str,
    depth_range: (usize, usize),
    rng: &mut R,
    node_cap: usize,
) -> Result<Subgraph, GraphError> {
    let (min_depth, max_depth) = depth_range;
    assert!(min_depth >= 1 && min_depth <= max_depth);
    if kg.entity(root).is_none() {
        return Err(GraphError::UnknownEntity(root.to_string()));
    }
    if kg.entities.len() > node_cap {
        return Err(GraphError::GraphTooLarge(kg.entities.len(), node_cap));
    }

    // Exhaustive DFS over simple paths, collecting every path of the best
    // length seen so far. Edge order is deterministic, so the candidate list
    // is too.
    let mut best_len = 0usize;
    let mut best_paths: Vec<Vec<Relation>> = vec![Vec::new()];
    let mut visited: BTreeSet<String> = BTreeSet::from([root.to_string()]);
    let mut current: Vec<Relation> = Vec::new();

    fn dfs(
        kg: &KnowledgeGraph,
        node: &str,
        max_depth: usize,
        visited: &mut BTreeSet<String>,
        current: &mut Vec<Relation>,
        best_len: &mut usize,
        best_paths: &mut Vec<Vec<Relation>>,
    ) {
        if current.len() > *best_len {
            *best_len = current.len();
            best_paths.clear();
        }
        if current.len() == *best_len {
            best_paths.push(current.clone());
        }
        if current.len() == max_depth {
            return;
        }
        let edges: Vec<Relation> = kg.out_edges(node).cloned().collect();
        for edge in edges {
            if visited.contains(&edge.tail) {
                continue;
            }
            visited.insert(edge.tail.clone());
            current.push(edge.clone());
            dfs(kg, &edge.tail, max_depth, visited, current, best_len, best_paths);
            current.pop();
            visited.remove(&edge.tail);
        }
    }

    dfs(
        kg,
        root,
        max_depth,
        &mut visited,
        &mut current,
        &mut best_len,
        &mut best_paths,
    );

    if best_len < min_depth {
        return Err(GraphError::TooShallow {
            root: root.to_string(),
            min: min_depth,
            longest: best_len,
        });
    }
    let path = best_paths[rng.gen_range(0..best_paths.len())].clone();
    let terminal = path.last().expect("non-empty path").tail.clone();
    Ok(Subgraph {
        root: root.to_string(),
        depth: path.len(),
        path,
        terminal,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum GraphLine {
    Entity(Entity),
    Relation(Relation),
}

/// Read a graph interchange file: one entity or relation record per line.
pub fn read_graph(input: &mut dyn BufRead) -> Result<KnowledgeGraph, GraphError> {
    let mut entities = Vec::new();
    let mut relations = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        let line = line.map_err(|e| GraphError::MalformedLine(idx + 1, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<GraphLine>(&line)
            .map_err(|e| GraphError::MalformedLine(idx + 1, e.to_string()))?
        {
            GraphLine::Entity(e) => entities.push(e),
            GraphLine::Relation(r) => relations.push(r),
        }
    }
    build_graph(entities, relations)
}

pub fn write_graph(out: &mut dyn Write, kg: &KnowledgeGraph) -> std::io::Result<()> {
    for entity in &kg.entities {
        let line = serde_json::to_string(&GraphLine::Entity(entity.clone())).expect("serializes");
        writeln!(out, "{line}")?;
    }
    for relation in &kg.relations {
        let line =
            serde_json::to_string(&GraphLine::Relation(relation.clone())).expect("serializes");
        writeln!(out, "{line}")?;
    }
    Ok(())
}
