#![allow(dead_code)]

use fwdiff::linalg::{Cholesky, SquareMatrix};
use fwdiff::{CorrelationMatrix, Graph, ProbabilityTable, VariableSet};
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

pub fn names(p: usize) -> Vec<String> {
    (1..=p).map(|i| format!("X{i}")).collect()
}

pub fn set(items: &[usize]) -> VariableSet {
    VariableSet::from(items)
}

/// Correlation of `ΛΛᵀ + Ψ` with standard normal loadings and uniform uniquenesses.
pub fn factor_correlation<R: Rng>(rng: &mut R, p: usize) -> CorrelationMatrix {
    let k = rng.random_range(1..=3);
    let lambda: Vec<Vec<f64>> = (0..p)
        .map(|_| (0..k).map(|_| StandardNormal.sample(rng)).collect())
        .collect();
    let mut cov = SquareMatrix::zeros(p);
    for i in 0..p {
        for j in 0..p {
            cov[(i, j)] = (0..k).map(|f| lambda[i][f] * lambda[j][f]).sum();
        }
        cov[(i, i)] += rng.random_range(0.1..1.0);
    }
    CorrelationMatrix::from_covariance(names(p), &cov).unwrap()
}

/// Normalized independent exponentials, i.e. a flat Dirichlet draw.
pub fn dirichlet<R: Rng>(rng: &mut R, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|x| x / total).collect()
}

fn level_labels(levels: &[usize]) -> Vec<Vec<String>> {
    levels
        .iter()
        .map(|&l| (0..l).map(|v| v.to_string()).collect())
        .collect()
}

pub fn random_levels<R: Rng>(rng: &mut R, p: usize) -> Vec<usize> {
    (0..p).map(|_| rng.random_range(2..=3)).collect()
}

pub fn dirichlet_table<R: Rng>(rng: &mut R, p: usize) -> ProbabilityTable {
    let levels = random_levels(rng, p);
    let cells = dirichlet(rng, levels.iter().product());
    ProbabilityTable::from_counts(names(p), level_labels(&levels), &cells).unwrap()
}

/// Block-diagonal correlation: variables below `split` are independent of the rest.
pub fn block_correlation<R: Rng>(rng: &mut R, p: usize, split: usize) -> CorrelationMatrix {
    let a = factor_correlation(rng, split);
    let b = factor_correlation(rng, p - split);
    let mut m = SquareMatrix::identity(p);
    for i in 0..p {
        for j in 0..p {
            if i < split && j < split {
                m[(i, j)] = a.get(i, j);
            } else if i >= split && j >= split {
                m[(i, j)] = b.get(i - split, j - split);
            }
        }
    }
    CorrelationMatrix::from_matrix(names(p), m).unwrap()
}

/// Product of two independent Dirichlet tables on the variables below and
/// above `split`.
pub fn block_table<R: Rng>(rng: &mut R, p: usize, split: usize) -> ProbabilityTable {
    let levels = random_levels(rng, p);
    let left: usize = levels[..split].iter().product();
    let right: usize = levels[split..].iter().product();
    let a = dirichlet(rng, left);
    let b = dirichlet(rng, right);
    let cells: Vec<f64> = a
        .iter()
        .flat_map(|x| b.iter().map(move |y| x * y))
        .collect();
    ProbabilityTable::from_counts(names(p), level_labels(&levels), &cells).unwrap()
}

pub fn random_graph<R: Rng>(rng: &mut R, p: usize, density: f64) -> Graph {
    let mut edges = Vec::new();
    for i in 0..p {
        for j in i + 1..p {
            if rng.random_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Graph::with_edges(p, &edges).unwrap()
}

/// Gaussian graphical model on `g`: a diagonally dominant concentration
/// matrix with zeros at the non-edges.
pub fn graphical_correlation<R: Rng>(rng: &mut R, g: &Graph) -> CorrelationMatrix {
    let p = g.p();
    let mut k = SquareMatrix::zeros(p);
    for (i, j) in g.edges() {
        let w = rng.random_range(-1.0..1.0);
        k[(i, j)] = w;
        k[(j, i)] = w;
    }
    for i in 0..p {
        let off: f64 = (0..p).filter(|&j| j != i).map(|j| k[(i, j)].abs()).sum();
        k[(i, i)] = off + rng.random_range(0.3..1.5);
    }
    let cov = Cholesky::factor(&k).unwrap().inverse();
    CorrelationMatrix::from_covariance(names(p), &cov).unwrap()
}

/// A Markov chain `X1 → X2 → … → Xp` with Dirichlet initial and transition
/// distributions; its independence graph is the path.
pub fn markov_chain_table<R: Rng>(rng: &mut R, p: usize) -> (Graph, ProbabilityTable) {
    let levels = random_levels(rng, p);
    let initial = dirichlet(rng, levels[0]);
    let transitions: Vec<Vec<Vec<f64>>> = (1..p)
        .map(|v| {
            (0..levels[v - 1])
                .map(|_| dirichlet(rng, levels[v]))
                .collect()
        })
        .collect();
    let size: usize = levels.iter().product();
    let mut cells = Vec::with_capacity(size);
    for mut r in 0..size {
        let mut idx = vec![0; p];
        for v in (0..p).rev() {
            idx[v] = r % levels[v];
            r /= levels[v];
        }
        let mut prob = initial[idx[0]];
        for v in 1..p {
            prob *= transitions[v - 1][idx[v - 1]][idx[v]];
        }
        cells.push(prob);
    }
    let path: Vec<(usize, usize)> = (1..p).map(|v| (v - 1, v)).collect();
    let table = ProbabilityTable::from_counts(names(p), level_labels(&levels), &cells).unwrap();
    (Graph::with_edges(p, &path).unwrap(), table)
}

/// Assigns each variable to one of A, B, C or none.
pub fn random_partition<R: Rng>(rng: &mut R, p: usize) -> (VariableSet, VariableSet, VariableSet) {
    let (mut a, mut b, mut c) = (VariableSet::EMPTY, VariableSet::EMPTY, VariableSet::EMPTY);
    for v in 0..p {
        match rng.random_range(0..4) {
            0 => a = a.with(v),
            1 => b = b.with(v),
            2 => c = c.with(v),
            _ => {}
        }
    }
    (a, b, c)
}
