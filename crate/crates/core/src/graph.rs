//! Conditional-independence graphs and node clusters.

use std::collections::{BTreeSet, VecDeque};

use crate::entropy::EntropyOracle;
use crate::error::{Error, Result};
use crate::forward_diff::{conditional_delta, ConditionalDeltaQuery};
use crate::lattice::{VariableSet, MAX_VARIABLES};

/// Simple undirected graph on `0..p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    names: Vec<String>,
    adjacency: Vec<VariableSet>,
}

fn default_names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

fn check_node_count(p: usize) -> Result<()> {
    if p > MAX_VARIABLES {
        return Err(Error::InvalidInput(format!(
            "{p} nodes exceed the limit of {MAX_VARIABLES}"
        )));
    }
    Ok(())
}

impl Graph {
    /// Edgeless graph.
    pub fn empty(names: Vec<String>) -> Result<Self> {
        check_node_count(names.len())?;
        let p = names.len();
        Ok(Graph {
            names,
            adjacency: vec![VariableSet::EMPTY; p],
        })
    }

    /// Graph on `X1..Xp`.
    pub fn with_edges(p: usize, edges: &[(usize, usize)]) -> Result<Self> {
        Self::named(default_names(p), edges)
    }

    /// Rejects loops, duplicate edges and out-of-range endpoints.
    pub fn named(names: Vec<String>, edges: &[(usize, usize)]) -> Result<Self> {
        let mut g = Self::empty(names)?;
        for &(i, j) in edges {
            g.add_edge(i, j)?;
        }
        Ok(g)
    }

    pub fn from_named_edges(names: Vec<String>, edges: &[(&str, &str)]) -> Result<Self> {
        let lookup = |n: &str| {
            names
                .iter()
                .position(|m| m == n)
                .ok_or_else(|| Error::InvalidInput(format!("unknown node {n}")))
        };
        let idx = edges
            .iter()
            .map(|(a, b)| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::named(names, &idx)
    }

    pub fn add_edge(&mut self, i: usize, j: usize) -> Result<()> {
        let p = self.p();
        for x in [i, j] {
            if x >= p {
                return Err(Error::IndexOutOfRange { index: x, dim: p });
            }
        }
        if i == j {
            return Err(Error::InvalidInput(format!(
                "loop at node {}",
                self.names[i]
            )));
        }
        if self.adjacency[i].contains(j) {
            return Err(Error::InvalidInput(format!(
                "duplicate edge {} - {}",
                self.names[i], self.names[j]
            )));
        }
        self.adjacency[i] = self.adjacency[i].with(j);
        self.adjacency[j] = self.adjacency[j].with(i);
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nodes(&self) -> VariableSet {
        VariableSet::full(self.p())
    }

    pub fn neighbours(&self, i: usize) -> VariableSet {
        self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        i < self.p() && self.adjacency[i].contains(j)
    }

    /// Edges `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.p())
            .flat_map(|i| {
                self.adjacency[i]
                    .iter()
                    .filter(move |&j| j > i)
                    .map(move |j| (i, j))
            })
            .collect()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|a| a.len()).sum::<usize>() / 2
    }

    /// True when some member of `set` is adjacent to all the others.
    pub fn is_node_cluster(&self, set: VariableSet) -> bool {
        set.iter()
            .any(|c| set.without(c).is_subset(self.adjacency[c]))
    }

    /// Nodes reachable from `from` without entering `removed`.
    pub fn reachable(&self, from: VariableSet, removed: VariableSet) -> VariableSet {
        let mut seen = from.difference(removed);
        let mut queue: VecDeque<usize> = seen.iter().collect();
        while let Some(v) = queue.pop_front() {
            let fresh = self.adjacency[v].difference(removed).difference(seen);
            seen = seen | fresh;
            queue.extend(fresh.iter());
        }
        seen
    }

    /// Vertex separation: every path from `a` to `b` meets `c`.
    pub fn separates(&self, c: VariableSet, a: VariableSet, b: VariableSet) -> bool {
        self.reachable(a, c).is_disjoint(b)
    }

    /// Whether the induced subgraph on `set` is connected.
    pub fn is_connected_within(&self, set: VariableSet) -> bool {
        match set.first() {
            None => true,
            Some(s) => {
                let outside = self.nodes().difference(set);
                self.reachable(VariableSet::singleton(s), outside) == set
            }
        }
    }
}

/// Directed graph given by parent sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DirectedGraph {
    names: Vec<String>,
    parents: Vec<VariableSet>,
}

impl DirectedGraph {
    pub fn named(names: Vec<String>, arcs: &[(usize, usize)]) -> Result<Self> {
        check_node_count(names.len())?;
        let p = names.len();
        let mut parents = vec![VariableSet::EMPTY; p];
        for &(from, to) in arcs {
            for x in [from, to] {
                if x >= p {
                    return Err(Error::IndexOutOfRange { index: x, dim: p });
                }
            }
            if from == to {
                return Err(Error::CyclicGraph(from));
            }
            if parents[to].contains(from) {
                return Err(Error::InvalidInput(format!(
                    "duplicate arc {} -> {}",
                    names[from], names[to]
                )));
            }
            parents[to] = parents[to].with(from);
        }
        Ok(DirectedGraph { names, parents })
    }

    /// Arcs `from -> to` on `X1..Xp`.
    pub fn with_arcs(p: usize, arcs: &[(usize, usize)]) -> Result<Self> {
        Self::named(default_names(p), arcs)
    }

    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn parents(&self, i: usize) -> VariableSet {
        self.parents[i]
    }

    /// Kahn order with ascending-index tie breaks.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let p = self.p();
        let mut placed = VariableSet::EMPTY;
        let mut order = Vec::with_capacity(p);
        while order.len() < p {
            let next = (0..p).find(|&v| !placed.contains(v) && self.parents[v].is_subset(placed));
            match next {
                Some(v) => {
                    placed = placed.with(v);
                    order.push(v);
                }
                None => {
                    let stuck = (0..p).find(|&v| !placed.contains(v)).unwrap_or(0);
                    return Err(Error::CyclicGraph(stuck));
                }
            }
        }
        Ok(order)
    }

    /// Same adjacencies, directions dropped.
    pub fn skeleton(&self) -> Graph {
        let mut adjacency = vec![VariableSet::EMPTY; self.p()];
        for (child, pa) in self.parents.iter().enumerate() {
            for parent in pa.iter() {
                adjacency[child] = adjacency[child].with(parent);
                adjacency[parent] = adjacency[parent].with(child);
            }
        }
        Graph {
            names: self.names.clone(),
            adjacency,
        }
    }

    /// Skeleton plus an edge between every pair of parents sharing a child.
    pub fn moral_graph(&self) -> Graph {
        let mut g = self.skeleton();
        for pa in &self.parents {
            for u in pa.iter() {
                g.adjacency[u] = g.adjacency[u] | pa.without(u);
            }
        }
        g
    }
}

/// All node clusters of `order` nodes, ascending.
pub fn enumerate_node_clusters(g: &Graph, order: usize) -> Vec<VariableSet> {
    if order == 0 || order > g.p() {
        return Vec::new();
    }
    let mut out = BTreeSet::new();
    for c in 0..g.p() {
        for tuple in g.neighbours(c).subsets_of_size(order - 1) {
            out.insert(tuple.with(c));
        }
    }
    out.into_iter().collect()
}

/// Checks that `δ_{A∪B|C}` vanishes when `C` separates `A` from `B` in `g`.
///
/// Fails with `NotSeparated` when the graph does not imply the zero.
pub fn check_separation_zero(
    g: &Graph,
    oracle: &EntropyOracle,
    a: VariableSet,
    b: VariableSet,
    c: VariableSet,
    zero_tol: f64,
) -> Result<bool> {
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if !x.is_disjoint(y) {
            return Err(Error::OverlappingSets(x, y));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "both separated sets must be nonempty".into(),
        ));
    }
    let all = a | b | c;
    if !all.is_subset(g.nodes()) {
        let bad = all.difference(g.nodes()).first().unwrap_or(0);
        return Err(Error::IndexOutOfRange {
            index: bad,
            dim: g.p(),
        });
    }
    if !g.separates(c, a, b) {
        return Err(Error::NotSeparated { a, b, separator: c });
    }
    let delta = conditional_delta(oracle, ConditionalDeltaQuery::new(a | b, c)?)?;
    Ok(delta.abs() <= zero_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn four_cycle() -> Graph {
        Graph::with_edges(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap()
    }

    /// 0-indexed pyramid: node i has parents 2i+1 and 2i+2.
    fn tree() -> DirectedGraph {
        let arcs: Vec<_> = (0..7)
            .flat_map(|i| [(2 * i + 1, i), (2 * i + 2, i)])
            .collect();
        DirectedGraph::with_arcs(15, &arcs).unwrap()
    }

    #[test]
    fn four_cycle_clusters() {
        let c = enumerate_node_clusters(&four_cycle(), 3);
        assert_eq!(c.len(), 4);
        assert!(c.contains(&VariableSet::from([3, 0, 1])));
        assert!(enumerate_node_clusters(&four_cycle(), 4).is_empty());
    }

    #[test]
    fn tree_cluster_counts() {
        let t = tree();
        assert_eq!(enumerate_node_clusters(&t.skeleton(), 3).len(), 19);
        assert_eq!(enumerate_node_clusters(&t.moral_graph(), 3).len(), 31);
        assert_eq!(t.moral_graph().edge_count(), 21);
    }

    #[test]
    fn invalid_edges() {
        assert!(Graph::with_edges(3, &[(0, 0)]).is_err());
        assert!(Graph::with_edges(3, &[(0, 1), (1, 0)]).is_err());
        assert!(matches!(
            Graph::with_edges(3, &[(0, 3)]),
            Err(Error::IndexOutOfRange { index: 3, dim: 3 })
        ));
        assert!(Graph::from_named_edges(vec!["a".into()], &[("a", "b")]).is_err());
    }

    #[test]
    fn topological_order_and_cycles() {
        let t = tree();
        let order = t.topological_order().unwrap();
        let pos = |v: usize| order.iter().position(|&x| x == v).unwrap();
        for v in 0..15 {
            assert!(t.parents(v).iter().all(|p| pos(p) < pos(v)));
        }
        let cyc = DirectedGraph::with_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert!(matches!(
            cyc.topological_order(),
            Err(Error::CyclicGraph(_))
        ));
    }

    #[test]
    fn separation() {
        let g = four_cycle();
        let (a, b) = (VariableSet::from([0]), VariableSet::from([2]));
        assert!(g.separates(VariableSet::from([1, 3]), a, b));
        assert!(!g.separates(VariableSet::from([1]), a, b));
        assert!(g.is_connected_within(VariableSet::from([0, 1, 2])));
        assert!(!g.is_connected_within(VariableSet::from([0, 2])));
    }

    #[test]
    fn separation_zero_requires_separation() {
        let g = Graph::with_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let o = EntropyOracle::gaussian(crate::CorrelationMatrix::identity(3));
        let r = check_separation_zero(
            &g,
            &o,
            VariableSet::from([0]),
            VariableSet::from([2]),
            VariableSet::EMPTY,
            1e-6,
        );
        assert!(matches!(r, Err(Error::NotSeparated { .. })));
        assert!(check_separation_zero(
            &g,
            &o,
            VariableSet::from([0]),
            VariableSet::from([2]),
            VariableSet::from([1]),
            1e-6
        )
        .unwrap());
    }

    fn arb_graph() -> impl Strategy<Value = Graph> {
        (3usize..9).prop_flat_map(|p| {
            proptest::collection::vec(any::<bool>(), p * (p - 1) / 2).prop_map(move |bits| {
                let mut g = Graph::empty(default_names(p)).unwrap();
                let mut k = 0;
                for i in 0..p {
                    for j in i + 1..p {
                        if bits[k] {
                            g.add_edge(i, j).unwrap();
                        }
                        k += 1;
                    }
                }
                g
            })
        })
    }

    proptest! {
        #[test]
        fn clusters_match_definition(g in arb_graph(), order in 3usize..5) {
            let fast = enumerate_node_clusters(&g, order);
            let brute: Vec<_> = {
                let mut v: Vec<_> = g.nodes().subsets_of_size(order)
                    .filter(|s| g.is_node_cluster(*s)).collect();
                v.sort();
                v
            };
            prop_assert_eq!(fast, brute);
        }

        #[test]
        fn clusters_are_nested(g in arb_graph()) {
            for cl in enumerate_node_clusters(&g, 4) {
                for hub in cl.iter().filter(|&c| cl.without(c).is_subset(g.neighbours(c))) {
                    for drop in cl.without(hub).iter() {
                        prop_assert!(g.is_node_cluster(cl.without(drop)));
                    }
                }
            }
        }

        #[test]
        fn clusters_are_connected(g in arb_graph()) {
            for cl in enumerate_node_clusters(&g, 3) {
                prop_assert!(g.is_connected_within(cl));
            }
        }
    }
}
