//! Graph-restricted computation of forward differences.
//!
//! Only node clusters are visited: sets in which one node is adjacent to all
//! others. Nodes are taken by decreasing degree and, within a node, tuples of
//! its neighbours are taken weakest first by the sum of their pairwise mutual
//! informations. Every entropy goes through the oracle's memo, so no subset is
//! evaluated twice.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::entropy::{mutual_information, EntropyOracle, MemoStats};
use crate::error::{Error, Result};
use crate::forward_diff::{forward_difference, DeltaTable};
use crate::graph::Graph;
use crate::lattice::VariableSet;
use crate::synergy::{detect_synergies, SynergyFinding};

#[derive(Debug, Clone)]
pub struct ScanResult {
    /// δ for every visited cluster and all of its subsets.
    pub table: DeltaTable,
    /// Clusters in the order they were first visited.
    pub clusters: Vec<VariableSet>,
    pub node_order: Vec<usize>,
    /// Order-3 synergies, ascending by δ.
    pub findings: Vec<SynergyFinding>,
    /// Oracle memo counters accumulated during the scan.
    pub stats: MemoStats,
}

impl ScanResult {
    /// δ values of the visited clusters of one order, in visit order.
    pub fn cluster_deltas(&self, order: usize) -> Vec<(VariableSet, f64)> {
        self.clusters
            .iter()
            .filter(|c| c.len() == order)
            .map(|&c| (c, self.table.get(c).expect("visited clusters are stored")))
            .collect()
    }
}

/// Nodes by decreasing degree, ties by ascending index.
pub fn visit_order(g: &Graph) -> Vec<usize> {
    let mut nodes: Vec<usize> = (0..g.p()).collect();
    nodes.sort_by_key(|&v| (std::cmp::Reverse(g.degree(v)), v));
    nodes
}

/// Scans the node clusters of `g` up to `max_order`.
///
/// Clusters of order four and above are visited only when they contain an
/// order-3 synergy. Findings use `threshold` as in
/// [`detect_synergies`](crate::synergy::detect_synergies).
pub fn cluster_scan(
    g: &Graph,
    oracle: &EntropyOracle,
    max_order: usize,
    threshold: f64,
) -> Result<ScanResult> {
    if max_order < 3 {
        return Err(Error::InvalidInput(format!(
            "max order {max_order} is below 3"
        )));
    }
    if oracle.dim() < g.p() {
        return Err(Error::InvalidInput(format!(
            "graph has {} nodes but the oracle only {} variables",
            g.p(),
            oracle.dim()
        )));
    }
    let before = oracle.stats();
    let node_order = visit_order(g);
    let mut table = DeltaTable::sparse(
        g.names().to_vec(),
        format!("cluster scan of {}", oracle.describe()),
    );
    let mut clusters = Vec::new();
    let mut seen = BTreeSet::new();
    let mut findings = Vec::new();

    for kappa in 3..=max_order.min(g.p()) {
        for &hub in &node_order {
            let mut tuples = g
                .neighbours(hub)
                .subsets_of_size(kappa - 1)
                .map(|t| Ok((tuple_strength(oracle, t)?, t)))
                .collect::<Result<Vec<(f64, VariableSet)>>>()?;
            tuples.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            for (_, tuple) in tuples {
                let cluster = tuple.with(hub);
                if seen.contains(&cluster) {
                    continue;
                }
                if kappa > 3
                    && !findings
                        .iter()
                        .any(|f: &SynergyFinding| f.triple.is_subset(cluster))
                {
                    continue;
                }
                seen.insert(cluster);
                clusters.push(cluster);
                for sub in cluster.subsets() {
                    if !table.contains(sub) {
                        table.insert(sub, forward_difference(oracle, sub)?);
                    }
                }
            }
        }
        if kappa == 3 {
            let triples: Vec<_> = clusters.clone();
            findings = detect_synergies(oracle, &triples, VariableSet::EMPTY, threshold)?;
        }
    }

    let after = oracle.stats();
    let stats = MemoStats {
        evaluations: after.evaluations - before.evaluations,
        hits: after.hits - before.hits,
        stored: after.stored,
    };
    Ok(ScanResult {
        table,
        clusters,
        node_order,
        findings,
        stats,
    })
}

/// Sum of pairwise mutual informations inside a tuple.
fn tuple_strength(oracle: &EntropyOracle, tuple: VariableSet) -> Result<f64> {
    tuple
        .subsets_of_size(2)
        .map(|pair| {
            let v = pair.to_vec();
            mutual_information(oracle, v[0], v[1])
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NodeColour {
    Red,
    Yellow,
    White,
}

impl NodeColour {
    pub fn as_str(self) -> &'static str {
        match self {
            NodeColour::Red => "red",
            NodeColour::Yellow => "yellow",
            NodeColour::White => "white",
        }
    }
}

/// A graph with its synergies marked: colliders red, their partners yellow.
#[derive(Debug, Clone, PartialEq)]
pub struct ColouredGraph {
    pub base: Graph,
    pub node_colours: Vec<NodeColour>,
    /// Edges `(i, j)` with `i < j`.
    pub edge_highlights: BTreeSet<(usize, usize)>,
}

/// Colours colliders red and the other members of findings yellow. A node
/// that is a collider anywhere stays red.
pub fn colour_synergies(g: &Graph, findings: &[SynergyFinding]) -> Result<ColouredGraph> {
    let mut node_colours = vec![NodeColour::White; g.p()];
    let mut edge_highlights = BTreeSet::new();
    for f in findings {
        if !f.triple.is_subset(g.nodes()) {
            let bad = f.triple.difference(g.nodes()).first().unwrap_or(0);
            return Err(Error::IndexOutOfRange {
                index: bad,
                dim: g.p(),
            });
        }
        node_colours[f.collider] = NodeColour::Red;
    }
    for f in findings {
        for other in f.others() {
            if node_colours[other] == NodeColour::White {
                node_colours[other] = NodeColour::Yellow;
            }
            if g.has_edge(f.collider, other) {
                edge_highlights.insert((f.collider.min(other), f.collider.max(other)));
            }
        }
    }
    Ok(ColouredGraph {
        base: g.clone(),
        node_colours,
        edge_highlights,
    })
}

fn quote(name: &str) -> String {
    format!("\"{}\"", name.replace('\\', "\\\\").replace('"', "\\\""))
}

impl ColouredGraph {
    pub fn colour(&self, i: usize) -> NodeColour {
        self.node_colours[i]
    }

    /// Graphviz source. Nodes and edges are written in index order with a
    /// fixed attribute order, so equal inputs give identical bytes.
    pub fn to_dot(&self) -> String {
        let names = self.base.names();
        let mut out = String::from("graph synergies {\n  node [shape=ellipse, style=filled];\n");
        for (i, colour) in self.node_colours.iter().enumerate() {
            let _ = writeln!(
                out,
                "  {} [fillcolor={}];",
                quote(&names[i]),
                colour.as_str()
            );
        }
        for (i, j) in self.base.edges() {
            let attrs = if self.edge_highlights.contains(&(i, j)) {
                " [color=red, penwidth=2]"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  {} -- {}{};",
                quote(&names[i]),
                quote(&names[j]),
                attrs
            );
        }
        out.push_str("}\n");
        out
    }
}
