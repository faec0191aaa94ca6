//! Analytic models: linear Gaussian Bayes networks, Gaussian graphical models
//! on four nodes, a 2×2×2 table with independent bivariate margins, and the
//! worked data sets.

use std::collections::BTreeMap;

use crate::entropy::{to_millibits, CorrelationMatrix, ProbabilityTable};
use crate::error::{Error, Result};
use crate::graph::{DirectedGraph, Graph};
use crate::lattice::VariableSet;
use crate::linalg::{Cholesky, SquareMatrix};

/// `X_v = Σ_{u ∈ pa(v)} b_uv X_u + σ_v ε_v` with independent standard normal `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearGaussianDag {
    graph: DirectedGraph,
    coefficients: BTreeMap<(usize, usize), f64>,
    noise_sd: Vec<f64>,
}

impl LinearGaussianDag {
    /// `coefficients` is keyed by `(parent, child)` and must cover every arc.
    pub fn new(
        graph: DirectedGraph,
        coefficients: BTreeMap<(usize, usize), f64>,
        noise_sd: Vec<f64>,
    ) -> Result<Self> {
        let p = graph.p();
        if noise_sd.len() != p {
            return Err(Error::InvalidInput(format!(
                "{} noise scales for {p} nodes",
                noise_sd.len()
            )));
        }
        if let Some(s) = noise_sd.iter().find(|s| !(**s > 0.0 && s.is_finite())) {
            return Err(Error::InvalidInput(format!(
                "noise sd {s} must be positive"
            )));
        }
        for v in 0..p {
            for u in graph.parents(v).iter() {
                match coefficients.get(&(u, v)) {
                    Some(b) if b.is_finite() => {}
                    _ => {
                        return Err(Error::InvalidInput(format!(
                            "missing coefficient for arc {} -> {}",
                            graph.names()[u],
                            graph.names()[v]
                        )))
                    }
                }
            }
        }
        if coefficients
            .keys()
            .any(|&(u, v)| v >= p || !graph.parents(v).contains(u))
        {
            return Err(Error::InvalidInput(
                "coefficient given for a missing arc".into(),
            ));
        }
        Ok(LinearGaussianDag {
            graph,
            coefficients,
            noise_sd,
        })
    }

    /// Every arc gets `coefficient`, every node `noise_sd`.
    pub fn uniform(graph: DirectedGraph, coefficient: f64, noise_sd: f64) -> Result<Self> {
        let coefficients = (0..graph.p())
            .flat_map(|v| graph.parents(v).iter().map(move |u| ((u, v), coefficient)))
            .collect();
        let p = graph.p();
        Self::new(graph, coefficients, vec![noise_sd; p])
    }

    pub fn graph(&self) -> &DirectedGraph {
        &self.graph
    }

    pub fn p(&self) -> usize {
        self.graph.p()
    }

    pub fn coefficient(&self, parent: usize, child: usize) -> Option<f64> {
        self.coefficients.get(&(parent, child)).copied()
    }

    pub fn noise_sd(&self) -> &[f64] {
        &self.noise_sd
    }

    /// Exact covariance by forward substitution in topological order.
    pub fn covariance(&self) -> Result<SquareMatrix> {
        let order = self.graph.topological_order()?;
        let p = self.p();
        let mut cov = SquareMatrix::zeros(p);
        let mut done: Vec<usize> = Vec::with_capacity(p);
        for &v in &order {
            let pa: Vec<(usize, f64)> = self
                .graph
                .parents(v)
                .iter()
                .map(|u| (u, self.coefficients[&(u, v)]))
                .collect();
            for &w in &done {
                let c: f64 = pa.iter().map(|&(u, b)| b * cov[(u, w)]).sum();
                cov[(v, w)] = c;
                cov[(w, v)] = c;
            }
            let mut var = self.noise_sd[v] * self.noise_sd[v];
            for &(u, bu) in &pa {
                for &(w, bw) in &pa {
                    var += bu * bw * cov[(u, w)];
                }
            }
            cov[(v, v)] = var;
            done.push(v);
        }
        Ok(cov)
    }
}

/// Correlation matrix implied by a linear Gaussian DAG.
pub fn dag_to_correlation(dag: &LinearGaussianDag) -> Result<CorrelationMatrix> {
    CorrelationMatrix::from_covariance(dag.graph.names().to_vec(), &dag.covariance()?)
}

/// Fifteen-node averaging pyramid: eight independent founders, each later
/// generation `X = α (X_par1 + X_par2) + ε`. In 1-based names, `Xn` has
/// parents `X2n` and `X2n+1`, so `X1` is the final descendant.
pub fn tree_averaging(alpha: f64) -> Result<LinearGaussianDag> {
    let arcs: Vec<(usize, usize)> = (0..7)
        .flat_map(|i| [(2 * i + 1, i), (2 * i + 2, i)])
        .collect();
    LinearGaussianDag::uniform(DirectedGraph::with_arcs(15, &arcs)?, alpha, 1.0)
}

/// Default arc coefficient for the four-node Bayes networks.
pub const BAYES_NET_COEFFICIENT: f64 = 0.5;

fn four_node_net(arcs: &[(usize, usize)]) -> Result<LinearGaussianDag> {
    // arcs are 1-based, as in the figures
    let arcs: Vec<_> = arcs.iter().map(|&(a, b)| (a - 1, b - 1)).collect();
    LinearGaussianDag::uniform(
        DirectedGraph::with_arcs(4, &arcs)?,
        BAYES_NET_COEFFICIENT,
        1.0,
    )
}

/// `1→2, 1→4, 2→3, 4→3`: one unshielded collider at 3.
pub fn bayes_net_a() -> Result<LinearGaussianDag> {
    four_node_net(&[(1, 2), (1, 4), (2, 3), (4, 3)])
}

/// `2→1, 4→1, 2→3, 4→3`: colliders at 1 and 3.
pub fn bayes_net_b() -> Result<LinearGaussianDag> {
    four_node_net(&[(2, 1), (4, 1), (2, 3), (4, 3)])
}

/// `1→2, 3→2, 4→2`: three parents of one child.
pub fn bayes_net_c() -> Result<LinearGaussianDag> {
    four_node_net(&[(1, 2), (3, 2), (4, 2)])
}

/// The 2×2×2 table `(α, β, β, α, β, α, α, β)` with `β = 1/4 − α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XorTableParams {
    alpha: f64,
}

impl XorTableParams {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 0.25) {
            return Err(Error::AlphaOutOfRange(alpha));
        }
        Ok(XorTableParams { alpha })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        0.25 - self.alpha
    }

    /// `δ_123 = −4(α ln α + β ln β) − 3 ln 2`, in millibits.
    pub fn delta_closed_form(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta());
        to_millibits(-4.0 * (a * a.ln() + b * b.ln()) - 3.0 * std::f64::consts::LN_2)
    }
}

pub fn xor_table(params: XorTableParams) -> ProbabilityTable {
    let (a, b) = (params.alpha(), params.beta());
    ProbabilityTable::binary(vec![a, b, b, a, b, a, a, b]).expect("cells sum to one")
}

/// The four undirected configurations on nodes 1..4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UndirectedConfig {
    /// 2 adjacent to 1, 3 and 4.
    Cluster,
    /// 1 − 2 − 3 − 4.
    Chain,
    /// Triangle 2-3-4 with 1 hanging off 2.
    Decomp,
    /// 1 − 2 − 3 − 4 − 1.
    FourCycle,
}

impl UndirectedConfig {
    pub const ALL: [UndirectedConfig; 4] = [
        UndirectedConfig::Cluster,
        UndirectedConfig::Chain,
        UndirectedConfig::Decomp,
        UndirectedConfig::FourCycle,
    ];

    /// 0-based edges.
    pub fn edges(self) -> &'static [(usize, usize)] {
        match self {
            UndirectedConfig::Cluster => &[(0, 1), (1, 3), (1, 2)],
            UndirectedConfig::Chain => &[(0, 1), (1, 2), (2, 3)],
            UndirectedConfig::Decomp => &[(0, 1), (1, 3), (1, 2), (2, 3)],
            UndirectedConfig::FourCycle => &[(0, 1), (1, 2), (2, 3), (3, 0)],
        }
    }

    pub fn default_strength(self) -> f64 {
        match self {
            UndirectedConfig::Chain => 0.4,
            UndirectedConfig::FourCycle => 0.35,
            UndirectedConfig::Cluster | UndirectedConfig::Decomp => 0.3,
        }
    }

    pub fn graph(self) -> Graph {
        Graph::with_edges(4, self.edges()).expect("static edge lists are simple")
    }

    pub fn name(self) -> &'static str {
        match self {
            UndirectedConfig::Cluster => "cluster",
            UndirectedConfig::Chain => "chain",
            UndirectedConfig::Decomp => "decomp",
            UndirectedConfig::FourCycle => "fourcycle",
        }
    }
}

impl std::str::FromStr for UndirectedConfig {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        UndirectedConfig::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown configuration {s}")))
    }
}

/// Concentration matrix with unit diagonal and `−strength` on the edges,
/// inverted and scaled to correlations.
pub fn undirected_model(config: UndirectedConfig, strength: f64) -> Result<CorrelationMatrix> {
    let mut k = SquareMatrix::identity(4);
    for &(i, j) in config.edges() {
        k[(i, j)] = -strength;
        k[(j, i)] = -strength;
    }
    let chol = Cholesky::factor(&k).ok_or(Error::NotPositiveDefinite {
        subset: VariableSet::full(4),
    })?;
    let names = (1..=4).map(|i| format!("X{i}")).collect();
    CorrelationMatrix::from_covariance(names, &chol.inverse())
}

/// The worked data sets.
pub mod fixtures {
    use super::*;

    fn names(list: &[&str]) -> Vec<String> {
        list.iter().map(|s| s.to_string()).collect()
    }

    /// Three standardized Gaussians with `ρ13 = 0.7`, `ρ23 = 0.5`.
    pub fn gaussian_triple(r12: f64) -> Result<CorrelationMatrix> {
        CorrelationMatrix::from_lower_triangle(&[1.0, r12, 1.0, 0.7, 0.5, 1.0])
    }

    /// Job satisfaction and burn-out at two waves (207 general practitioners).
    pub fn gp_burnout() -> CorrelationMatrix {
        CorrelationMatrix::new(
            names(&["js1", "bo1", "js2", "bo2"]),
            vec![
                vec![1.000, 0.478, 0.354, 0.379],
                vec![0.478, 1.000, 0.393, 0.619],
                vec![0.354, 0.393, 1.000, 0.544],
                vec![0.379, 0.619, 0.544, 1.000],
            ],
        )
        .expect("fixture is a valid correlation matrix")
    }

    pub const WINE_NAMES: [&str; 11] = [
        "fixed.acidity",
        "volatile.acidity",
        "citric.acid",
        "residual.sugar",
        "chlorides",
        "free.sulfur.dioxide",
        "total.sulfur.dioxide",
        "density",
        "pH",
        "sulphates",
        "alcohol",
    ];

    /// Normal-score correlations of the eleven white-wine measurements.
    pub fn wine() -> CorrelationMatrix {
        let rows = [
            [
                1.0, -0.030966, 0.31742, 0.09673, 0.08979, -0.037524, 0.10117, 0.299804, -0.436098,
                -0.01824, -0.12775,
            ],
            [
                -0.030966, 1.0, -0.169748, 0.105791, 0.013938, -0.084837, 0.116342, 0.002518,
                -0.045856, -0.034665, 0.054468,
            ],
            [
                0.31742, -0.169748, 1.0, 0.04799, 0.04927, 0.089613, 0.10153, 0.120485, -0.157846,
                0.07433, -0.0588,
            ],
            [
                0.09673, 0.105791, 0.04799, 1.0, 0.20868, 0.319827, 0.41631, 0.747925, -0.163236,
                0.01986, -0.41334,
            ],
            [
                0.08979, 0.013938, 0.04927, 0.20868, 1.0, 0.162736, 0.35118, 0.47804, -0.049348,
                0.09323, -0.53105,
            ],
            [
                -0.037524, -0.084837, 0.089613, 0.319827, 0.162736, 1.0, 0.623356, 0.299242,
                0.009448, 0.068181, -0.258037,
            ],
            [
                0.10117, 0.116342, 0.10153, 0.41631, 0.35118, 0.623356, 1.0, 0.530971, 0.010136,
                0.16226, -0.4402,
            ],
            [
                0.299804, 0.002518, 0.120485, 0.747925, 0.47804, 0.299242, 0.530971, 1.0,
                -0.097515, 0.111781, -0.807506,
            ],
            [
                -0.436098, -0.045856, -0.157846, -0.163236, -0.049348, 0.009448, 0.010136,
                -0.097515, 1.0, 0.159591, 0.15053,
            ],
            [
                -0.01824, -0.034665, 0.07433, 0.01986, 0.09323, 0.068181, 0.16226, 0.111781,
                0.159591, 1.0, -0.03972,
            ],
            [
                -0.12775, 0.054468, -0.0588, -0.41334, -0.53105, -0.258037, -0.4402, -0.807506,
                0.15053, -0.03972, 1.0,
            ],
        ];
        CorrelationMatrix::new(
            names(&WINE_NAMES),
            rows.iter().map(|r| r.to_vec()).collect(),
        )
        .expect("fixture is a valid correlation matrix")
    }

    /// Edges of the wine skeleton that carry the tabulated triples.
    pub const WINE_SKELETON_EDGES: [(&str, &str); 9] = [
        ("residual.sugar", "density"),
        ("density", "alcohol"),
        ("volatile.acidity", "total.sulfur.dioxide"),
        ("free.sulfur.dioxide", "total.sulfur.dioxide"),
        ("fixed.acidity", "density"),
        ("chlorides", "density"),
        ("chlorides", "alcohol"),
        ("total.sulfur.dioxide", "alcohol"),
        ("total.sulfur.dioxide", "density"),
    ];

    pub fn wine_skeleton() -> Graph {
        Graph::from_named_edges(names(&WINE_NAMES), &WINE_SKELETON_EDGES)
            .expect("fixture edges name wine variables")
    }

    /// Outcome × treatment × stone size, from 700 patients.
    pub fn kidney_stones_counts() -> (Vec<String>, Vec<Vec<String>>, Vec<f64>) {
        // (small, A) 81/87, (small, B) 234/270, (large, A) 192/263, (large, B) 55/80
        let counts = vec![
            81.0, 192.0, 234.0, 55.0, // success: A small, A large, B small, B large
            6.0, 71.0, 36.0, 25.0, // failure
        ];
        (
            names(&["O", "T", "S"]),
            vec![
                names(&["success", "failure"]),
                names(&["A", "B"]),
                names(&["small", "large"]),
            ],
            counts,
        )
    }

    pub fn kidney_stones() -> ProbabilityTable {
        let (n, l, c) = kidney_stones_counts();
        ProbabilityTable::from_counts(n, l, &c).expect("fixture counts are valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{mutual_information, EntropyOracle};
    use crate::forward_diff::{conditional_delta, forward_differences, ConditionalDeltaQuery};
    use crate::graph::enumerate_node_clusters;
    use approx::assert_abs_diff_eq;

    fn vs<const N: usize>(one_based: [usize; N]) -> VariableSet {
        one_based.iter().map(|i| i - 1).collect()
    }

    #[test]
    fn empty_dag_is_identity() {
        let dag = LinearGaussianDag::uniform(DirectedGraph::with_arcs(5, &[]).unwrap(), 0.5, 2.0)
            .unwrap();
        assert_eq!(
            dag_to_correlation(&dag).unwrap(),
            CorrelationMatrix::identity(5)
        );
    }

    #[test]
    fn two_node_dag() {
        // X2 = b X1 + ε: ρ = b / sqrt(b² + 1)
        let dag =
            LinearGaussianDag::uniform(DirectedGraph::with_arcs(2, &[(0, 1)]).unwrap(), 0.75, 1.0)
                .unwrap();
        let c = dag_to_correlation(&dag).unwrap();
        assert_abs_diff_eq!(c.get(0, 1), 0.6, epsilon = 1e-15);
    }

    #[test]
    fn cyclic_dag_rejected() {
        let g = DirectedGraph::with_arcs(3, &[(0, 1), (1, 2), (2, 0)]).unwrap();
        let dag = LinearGaussianDag::uniform(g, 0.5, 1.0).unwrap();
        assert!(matches!(
            dag_to_correlation(&dag),
            Err(Error::CyclicGraph(_))
        ));
    }

    #[test]
    fn dag_validation() {
        let g = DirectedGraph::with_arcs(2, &[(0, 1)]).unwrap();
        assert!(LinearGaussianDag::new(g.clone(), BTreeMap::new(), vec![1.0, 1.0]).is_err());
        assert!(LinearGaussianDag::uniform(g.clone(), 0.5, 0.0).is_err());
        let extra = BTreeMap::from([((0, 1), 0.5), ((1, 0), 0.5)]);
        assert!(LinearGaussianDag::new(g, extra, vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn tree_root_variance() {
        // founders 1; generation 2: 2α²+1; generation 3: 2α²(2α²+1)+1; root: one more step
        let a2 = 0.36;
        let g2 = 2.0 * a2 + 1.0;
        let g3 = 2.0 * a2 * g2 + 1.0;
        let g4 = 2.0 * a2 * g3 + 1.0;
        let cov = tree_averaging(0.6).unwrap().covariance().unwrap();
        assert_abs_diff_eq!(cov[(0, 0)], g4, epsilon = 1e-12);
        assert_abs_diff_eq!(cov[(7, 7)], 1.0, epsilon = 1e-15);
        assert_eq!(cov[(7, 8)], 0.0);
    }

    #[test]
    fn xor_margins_are_independent() {
        for alpha in [0.01, 0.05, 0.125, 0.2] {
            let p = XorTableParams::new(alpha).unwrap();
            let o = EntropyOracle::categorical(xor_table(p));
            for (i, j) in [(0, 1), (0, 2), (1, 2)] {
                assert_abs_diff_eq!(mutual_information(&o, i, j).unwrap(), 0.0, epsilon = 1e-9);
            }
            let t = forward_differences(&o, VariableSet::full(3)).unwrap();
            assert_abs_diff_eq!(
                t.get(VariableSet::full(3)).unwrap(),
                p.delta_closed_form(),
                epsilon = 1e-9
            );
        }
        assert_abs_diff_eq!(
            XorTableParams::new(0.125).unwrap().delta_closed_form(),
            0.0,
            epsilon = 1e-9
        );
        assert!(XorTableParams::new(0.05).unwrap().delta_closed_form() < 0.0);
    }

    #[test]
    fn xor_alpha_range() {
        for bad in [0.0, 0.25, -0.1, f64::NAN] {
            assert!(matches!(
                XorTableParams::new(bad),
                Err(Error::AlphaOutOfRange(_))
            ));
        }
    }

    #[test]
    fn undirected_models_have_zero_concentrations() {
        for cfg in UndirectedConfig::ALL {
            let c = undirected_model(cfg, cfg.default_strength()).unwrap();
            let g = cfg.graph();
            for i in 0..4 {
                for j in i + 1..4 {
                    let rest = VariableSet::full(4).without(i).without(j);
                    let pc = c.partial_correlation(i, j, rest).unwrap();
                    if g.has_edge(i, j) {
                        assert!(pc.abs() > 0.1);
                    } else {
                        assert_abs_diff_eq!(pc, 0.0, epsilon = 1e-12);
                    }
                }
            }
        }
        assert!(undirected_model(UndirectedConfig::FourCycle, 0.6).is_err());
        assert_eq!(
            "decomp".parse::<UndirectedConfig>().unwrap(),
            UndirectedConfig::Decomp
        );
    }

    #[test]
    fn chain_pattern() {
        let o = EntropyOracle::gaussian(undirected_model(UndirectedConfig::Chain, 0.4).unwrap());
        let t = forward_differences(&o, VariableSet::full(4)).unwrap();
        let d = |s| t.get(s).unwrap();
        assert_abs_diff_eq!(d(vs([1, 3])) + d(vs([1, 2, 3])), 0.0, epsilon = 1e-6);
        assert!(d(vs([1, 2, 3])) > 0.01);
    }

    #[test]
    fn bayes_net_c_pattern() {
        let o = EntropyOracle::gaussian(dag_to_correlation(&bayes_net_c().unwrap()).unwrap());
        let t = forward_differences(&o, VariableSet::full(4)).unwrap();
        for s in [vs([1, 3]), vs([1, 4]), vs([3, 4]), vs([1, 3, 4])] {
            assert_abs_diff_eq!(t.get(s).unwrap(), 0.0, epsilon = 1e-9);
        }
        for s in [vs([1, 2, 3]), vs([1, 2, 4]), vs([2, 3, 4])] {
            assert!(t.get(s).unwrap() < -0.01);
        }
    }

    #[test]
    fn fourcycle_conditioned_triples_positive() {
        let o =
            EntropyOracle::gaussian(undirected_model(UndirectedConfig::FourCycle, 0.35).unwrap());
        for k in 0..4 {
            let q = ConditionalDeltaQuery::new(
                VariableSet::full(4).without(k),
                VariableSet::singleton(k),
            )
            .unwrap();
            assert!(conditional_delta(&o, q).unwrap() > 0.01);
        }
    }

    #[test]
    fn fixtures_are_valid() {
        assert_eq!(fixtures::wine().dim(), 11);
        assert_abs_diff_eq!(fixtures::wine().get(3, 7), 0.747925);
        let sk = fixtures::wine_skeleton();
        assert_eq!(sk.edge_count(), 9);
        let t = fixtures::kidney_stones();
        assert_eq!(t.levels(), vec![2, 2, 2]);
        assert_abs_diff_eq!(t.cells().iter().sum::<f64>(), 1.0, epsilon = 1e-15);
        // success in the small-stone, treatment A group
        assert_abs_diff_eq!(t.cells()[0], 81.0 / 700.0);
        assert!(fixtures::gaussian_triple(0.2).is_ok());
        assert_eq!(fixtures::gp_burnout().names()[3], "bo2");
        let tree = tree_averaging(0.6).unwrap();
        assert_eq!(
            enumerate_node_clusters(&tree.graph().skeleton(), 3).len(),
            19
        );
    }
}
