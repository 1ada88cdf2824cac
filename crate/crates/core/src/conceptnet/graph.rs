use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::num::NonZeroUsize;

use serde::{Deserialize, Serialize};

use super::betweenness;

/// Directed concept graph. `E_ij` counts how often concept `j` followed
/// concept `i` inside the window.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConceptMap {
    nodes: BTreeSet<String>,
    edges: BTreeMap<(String, String), u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub source: String,
    pub target: String,
    pub weight: u64,
}

impl ConceptMap {
    /// Builds a map from explicit nodes and edges. Edge endpoints are added
    /// to the node set; self-loops and zero weights are dropped, repeated
    /// edges accumulate.
    pub fn from_parts<I, E>(nodes: I, edges: E) -> Self
    where
        I: IntoIterator<Item = String>,
        E: IntoIterator<Item = (String, String, u64)>,
    {
        let mut map = ConceptMap {
            nodes: nodes.into_iter().collect(),
            edges: BTreeMap::new(),
        };
        for (s, t, w) in edges {
            map.nodes.insert(s.clone());
            map.nodes.insert(t.clone());
            if s != t && w > 0 {
                *map.edges.entry((s, t)).or_insert(0) += w;
            }
        }
        map
    }

    pub fn nodes(&self) -> &BTreeSet<String> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeMap<(String, String), u64> {
        &self.edges
    }

    pub fn weight(&self, source: &str, target: &str) -> Option<u64> {
        self.edges
            .get(&(source.to_string(), target.to_string()))
            .copied()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn edge_list(&self) -> Vec<Edge> {
        self.edges
            .iter()
            .map(|((s, t), &w)| Edge {
                source: s.clone(),
                target: t.clone(),
                weight: w,
            })
            .collect()
    }

    /// Graphviz text with every node and weighted directed edge.
    pub fn to_dot(&self, name: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "digraph {name:?} {{");
        for n in &self.nodes {
            let _ = writeln!(out, "  {n:?};");
        }
        for ((s, t), w) in &self.edges {
            let _ = writeln!(out, "  {s:?} -> {t:?} [weight={w}];");
        }
        out.push_str("}\n");
        out
    }

    fn incident(&self) -> BTreeSet<&String> {
        self.edges.keys().flat_map(|(s, t)| [s, t]).collect()
    }
}

impl Serialize for ConceptMap {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr<'a> {
            nodes: &'a BTreeSet<String>,
            edges: Vec<Edge>,
        }
        Repr {
            nodes: &self.nodes,
            edges: self.edge_list(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ConceptMap {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(deny_unknown_fields)]
        struct Repr {
            nodes: Vec<String>,
            edges: Vec<Edge>,
        }
        let r = Repr::deserialize(deserializer)?;
        Ok(ConceptMap::from_parts(
            r.nodes,
            r.edges.into_iter().map(|e| (e.source, e.target, e.weight)),
        ))
    }
}

/// Links every concept to each different concept at most `window` positions
/// later. Positions run over the concatenated sentences of one block of
/// `stop_unit` consecutive sentences; links never cross blocks.
pub fn build_map(
    sentences: &[Vec<String>],
    window: NonZeroUsize,
    stop_unit: NonZeroUsize,
) -> ConceptMap {
    let mut map = ConceptMap::default();
    for block in sentences.chunks(stop_unit.get()) {
        let tokens: Vec<&String> = block.iter().flatten().collect();
        for (k, &src) in tokens.iter().enumerate() {
            map.nodes.insert(src.clone());
            for &dst in tokens.iter().skip(k + 1).take(window.get()) {
                if src != dst {
                    *map.edges.entry((src.clone(), dst.clone())).or_insert(0) += 1;
                }
            }
        }
    }
    map
}

/// Shared nodes and shared directed edges weighted by the smaller count.
pub fn intersect(a: &ConceptMap, b: &ConceptMap) -> ConceptMap {
    let nodes = a.nodes.intersection(&b.nodes).cloned().collect();
    let edges = a
        .edges
        .iter()
        .filter_map(|(k, &wa)| b.edges.get(k).map(|&wb| (k.clone(), wa.min(wb))))
        .collect();
    ConceptMap { nodes, edges }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MapStats {
    pub shared_concepts: usize,
    /// Shared concepts without any shared link.
    pub isolated_shared_concepts: usize,
    pub non_isolated_shared_concepts: usize,
    /// Sum of the minimum weights.
    pub shared_links: u64,
    /// Number of distinct shared directed edges.
    pub distinct_shared_links: usize,
    pub mean_betweenness: f64,
}

/// Statistics of an intersected map.
pub fn map_stats(intersection: &ConceptMap) -> MapStats {
    let shared_concepts = intersection.nodes.len();
    if shared_concepts == 0 {
        return MapStats::default();
    }
    let non_isolated = intersection.incident().len();
    let scores = betweenness(intersection);
    MapStats {
        shared_concepts,
        isolated_shared_concepts: shared_concepts - non_isolated,
        non_isolated_shared_concepts: non_isolated,
        shared_links: intersection.edges.values().sum(),
        distinct_shared_links: intersection.edges.len(),
        mean_betweenness: scores.values().sum::<f64>() / shared_concepts as f64,
    }
}

/// Overlap between a speaker's map and the map of a reference worksheet.
pub fn worksheet_overlap(speaker: &ConceptMap, worksheet: &ConceptMap) -> MapStats {
    map_stats(&intersect(speaker, worksheet))
}
