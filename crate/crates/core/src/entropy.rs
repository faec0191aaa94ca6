//! Entropy functions on the subset lattice and the mutual informations they
//! induce.
//!
//! Entropies are held in nats. Millibits (`nats · 2¹⁰ / ln 2`) appear only in
//! reported quantities: deltas, informations and reports.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::lattice::{VariableSet, MAX_VARIABLES};
use crate::linalg::{compensated_sum, Cholesky, SquareMatrix};

/// Millibits per nat.
pub const MBITS_PER_NAT: f64 = 1024.0 / std::f64::consts::LN_2;

/// Zero threshold for oracles built from exact parameters.
pub const ANALYTIC_ZERO_TOL: f64 = 1e-6;

/// Default zero threshold for oracles estimated from data.
pub const DATA_ZERO_TOL: f64 = 1.0;

pub fn to_millibits(nats: f64) -> f64 {
    nats * MBITS_PER_NAT
}

pub fn from_millibits(mbits: f64) -> f64 {
    mbits / MBITS_PER_NAT
}

/// Symmetric correlation matrix with unit diagonal and variable names.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    names: Vec<String>,
    values: SquareMatrix,
}

impl CorrelationMatrix {
    /// Validates shape, symmetry (1e-9), unit diagonal (1e-9) and `|ρ| ≤ 1`.
    /// Positive definiteness is checked when a submatrix is used.
    pub fn new(names: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        let values = SquareMatrix::from_rows(&rows)
            .ok_or_else(|| Error::InvalidInput("correlation matrix must be square".into()))?;
        Self::from_matrix(names, values)
    }

    pub fn from_matrix(names: Vec<String>, mut values: SquareMatrix) -> Result<Self> {
        let n = values.dim();
        if names.len() != n {
            return Err(Error::InvalidInput(format!(
                "{} names for a {n}x{n} matrix",
                names.len()
            )));
        }
        if n > MAX_VARIABLES {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_VARIABLES} variables"
            )));
        }
        let asym = values.max_asymmetry();
        if asym > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "correlation matrix is asymmetric by {asym:e}"
            )));
        }
        for i in 0..n {
            if (values[(i, i)] - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidInput(format!(
                    "diagonal entry {} is {}, expected 1",
                    names[i],
                    values[(i, i)]
                )));
            }
            values[(i, i)] = 1.0;
            for j in 0..i {
                let r = values[(i, j)];
                if !r.is_finite() || r.abs() > 1.0 {
                    return Err(Error::InvalidInput(format!(
                        "correlation ({}, {}) = {r} is not in [-1, 1]",
                        names[i], names[j]
                    )));
                }
                // exact symmetry from here on
                values[(j, i)] = r;
            }
        }
        Ok(CorrelationMatrix { names, values })
    }

    /// Builds from a row-wise lower triangle including the diagonal, e.g.
    /// `[1, ρ₁₂, 1, ρ₁₃, ρ₂₃, 1]`. Names default to `X1..Xp`.
    pub fn from_lower_triangle(lower: &[f64]) -> Result<Self> {
        let mut n = 0;
        while n * (n + 1) / 2 < lower.len() {
            n += 1;
        }
        if n * (n + 1) / 2 != lower.len() {
            return Err(Error::InvalidInput(format!(
                "{} entries is not a triangular number",
                lower.len()
            )));
        }
        let mut m = SquareMatrix::zeros(n);
        let mut it = lower.iter();
        for i in 0..n {
            for j in 0..=i {
                let v = *it.next().unwrap();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self::from_matrix(default_names(n), m)
    }

    pub fn identity(n: usize) -> Self {
        CorrelationMatrix {
            names: default_names(n),
            values: SquareMatrix::identity(n),
        }
    }

    /// Rescales a covariance matrix to unit diagonal.
    pub fn from_covariance(names: Vec<String>, cov: &SquareMatrix) -> Result<Self> {
        let n = cov.dim();
        let sd: Vec<f64> = (0..n).map(|i| cov[(i, i)].sqrt()).collect();
        if let Some(i) = sd.iter().position(|s| !(*s > 0.0)) {
            return Err(Error::NotPositiveDefinite {
                subset: VariableSet::singleton(i),
            });
        }
        let mut m = SquareMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = if i == j {
                    1.0
                } else {
                    cov[(i, j)] / (sd[i] * sd[j])
                };
            }
        }
        Self::from_matrix(names, m)
    }

    pub fn dim(&self) -> usize {
        self.values.dim()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::InvalidInput(
                "name count does not match dimension".into(),
            ));
        }
        self.names = names;
        Ok(self)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.values
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Relabels: variable `perm[i]` of the result is variable `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.dim();
        let mut inv = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            inv[p] = i;
        }
        let values = self.values.submatrix(&inv);
        let names = inv.iter().map(|&i| self.names[i].clone()).collect();
        CorrelationMatrix { names, values }
    }

    fn check_set(&self, a: VariableSet) -> Result<()> {
        check_range(a, self.dim())
    }

    fn factor(&self, a: VariableSet) -> Result<Cholesky> {
        self.check_set(a)?;
        Cholesky::factor(&self.values.submatrix(&a.to_vec()))
            .ok_or(Error::NotPositiveDefinite { subset: a })
    }

    /// `ρ_{ij·given}` from the inverse of the submatrix on `{i,j} ∪ given`.
    pub fn partial_correlation(&self, i: usize, j: usize, given: VariableSet) -> Result<f64> {
        if i == j {
            return Err(Error::InvalidInput(
                "partial correlation needs i != j".into(),
            ));
        }
        let pair = VariableSet::from([i, j]);
        if !pair.is_disjoint(given) {
            return Err(Error::OverlappingSets(pair, given));
        }
        if given.is_empty() {
            self.check_set(pair)?;
            return Ok(self.get(i, j));
        }
        let set = pair | given;
        let prec = self.factor(set)?.inverse();
        let (a, b) = (set.rank_index(i), set.rank_index(j));
        Ok(-prec[(a, b)] / (prec[(a, a)] * prec[(b, b)]).sqrt())
    }
}

fn default_names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

fn check_range(a: VariableSet, dim: usize) -> Result<()> {
    if a.span() > dim {
        Err(Error::IndexOutOfRange {
            index: a.span() - 1,
            dim,
        })
    } else {
        Ok(())
    }
}

/// `½ log det Σ_AA` in nats.
pub fn gaussian_entropy(corr: &CorrelationMatrix, a: VariableSet) -> Result<f64> {
    if a.len() <= 1 {
        corr.check_set(a)?;
        return Ok(0.0);
    }
    Ok(corr.factor(a)?.half_log_det())
}

/// Joint mass function over categorical variables, stored row-major with the
/// last variable varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityTable {
    names: Vec<String>,
    level_labels: Vec<Vec<String>>,
    cells: Vec<f64>,
}

impl ProbabilityTable {
    pub fn new(
        names: Vec<String>,
        level_labels: Vec<Vec<String>>,
        cells: Vec<f64>,
    ) -> Result<Self> {
        if names.len() != level_labels.len() {
            return Err(Error::InvalidInput(
                "one level list per variable required".into(),
            ));
        }
        if names.len() > MAX_VARIABLES {
            return Err(Error::InvalidInput(format!(
                "at most {MAX_VARIABLES} variables"
            )));
        }
        if level_labels.iter().any(|l| l.is_empty()) {
            return Err(Error::InvalidInput(
                "every variable needs at least one level".into(),
            ));
        }
        let size: usize = level_labels.iter().map(Vec::len).product();
        if cells.len() != size {
            return Err(Error::InvalidInput(format!(
                "expected {size} cells, found {}",
                cells.len()
            )));
        }
        if cells.iter().any(|c| !(*c >= 0.0) || !c.is_finite()) {
            return Err(Error::InvalidInput(
                "cells must be finite and nonnegative".into(),
            ));
        }
        let total = compensated_sum(cells.iter().copied());
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("cells sum to {total}, not 1")));
        }
        Ok(ProbabilityTable {
            names,
            level_labels,
            cells,
        })
    }

    /// Normalizes nonnegative counts into probabilities.
    pub fn from_counts(
        names: Vec<String>,
        level_labels: Vec<Vec<String>>,
        counts: &[f64],
    ) -> Result<Self> {
        let total = compensated_sum(counts.iter().copied());
        if !(total > 0.0) {
            return Err(Error::InvalidInput("counts sum to zero".into()));
        }
        Self::new(
            names,
            level_labels,
            counts.iter().map(|c| c / total).collect(),
        )
    }

    /// Binary variables with default names, cells in standard order.
    pub fn binary(cells: Vec<f64>) -> Result<Self> {
        let mut p = 0;
        while 1usize << p < cells.len() {
            p += 1;
        }
        let labels = vec![vec!["0".to_string(), "1".to_string()]; p];
        Self::new(default_names(p), labels, cells)
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn levels(&self) -> Vec<usize> {
        self.level_labels.iter().map(Vec::len).collect()
    }

    pub fn level_labels(&self) -> &[Vec<String>] {
        &self.level_labels
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    /// Mass function on the margin `a`, row-major over `a`'s ascending elements.
    pub fn marginal(&self, a: VariableSet) -> Result<Vec<f64>> {
        check_range(a, self.dim())?;
        let levels = self.levels();
        let keep = a.to_vec();
        let size: usize = keep.iter().map(|&i| levels[i]).product();
        // stride of each kept variable in the marginal array
        let mut stride = vec![0usize; self.dim()];
        let mut s = 1;
        for &i in keep.iter().rev() {
            stride[i] = s;
            s *= levels[i];
        }
        let mut out = vec![0.0; size];
        let mut digits = vec![0usize; self.dim()];
        let mut target = 0usize;
        for &c in &self.cells {
            out[target] += c;
            // odometer increment, last variable fastest
            for v in (0..self.dim()).rev() {
                digits[v] += 1;
                target += stride[v];
                if digits[v] < levels[v] {
                    break;
                }
                target -= stride[v] * digits[v];
                digits[v] = 0;
            }
        }
        Ok(out)
    }

    /// Relabels axes: variable `perm[i]` of the result is variable `i` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let p = self.dim();
        let mut inv = vec![0; p];
        for (i, &q) in perm.iter().enumerate() {
            inv[q] = i;
        }
        let levels = self.levels();
        let new_levels: Vec<usize> = inv.iter().map(|&i| levels[i]).collect();
        let mut new_stride = vec![0; p];
        let mut s = 1;
        for k in (0..p).rev() {
            new_stride[k] = s;
            s *= new_levels[k];
        }
        let mut cells = vec![0.0; self.cells.len()];
        let mut digits = vec![0usize; p];
        for &c in &self.cells {
            let target: usize = (0..p).map(|i| digits[i] * new_stride[perm[i]]).sum();
            cells[target] = c;
            for v in (0..p).rev() {
                digits[v] += 1;
                if digits[v] < levels[v] {
                    break;
                }
                digits[v] = 0;
            }
        }
        ProbabilityTable {
            names: inv.iter().map(|&i| self.names[i].clone()).collect(),
            level_labels: inv.iter().map(|&i| self.level_labels[i].clone()).collect(),
            cells,
        }
    }
}

/// `−Σ p log p` over the margin on `a`, with `0 log 0 = 0`.
pub fn categorical_entropy(table: &ProbabilityTable, a: VariableSet) -> Result<f64> {
    if a.is_empty() {
        return Ok(0.0);
    }
    let m = table.marginal(a)?;
    Ok(-compensated_sum(
        m.into_iter().filter(|&p| p > 0.0).map(|p| p * p.ln()),
    ))
}

/// Where entropies come from.
#[derive(Debug, Clone, PartialEq)]
pub enum EntropySource {
    Gaussian(CorrelationMatrix),
    Categorical(ProbabilityTable),
    /// Precomputed entropies in nats; `h(∅)` is always zero.
    Tabulated {
        names: Vec<String>,
        values: HashMap<VariableSet, f64>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MemoStats {
    /// Entropies actually computed from the source.
    pub evaluations: u64,
    /// Lookups answered from the memo.
    pub hits: u64,
    pub stored: usize,
}

/// A source of entropies with a per-subset memo.
///
/// Safe to share across threads. Evaluation of a missing subset happens while
/// the memo lock is held, so each subset is computed at most once regardless of
/// interleaving.
#[derive(Debug)]
pub struct EntropyOracle {
    source: EntropySource,
    memo: Mutex<HashMap<VariableSet, f64>>,
    evaluations: AtomicU64,
    hits: AtomicU64,
}

impl Clone for EntropyOracle {
    fn clone(&self) -> Self {
        EntropyOracle::new(self.source.clone())
    }
}

impl From<CorrelationMatrix> for EntropyOracle {
    fn from(c: CorrelationMatrix) -> Self {
        EntropyOracle::gaussian(c)
    }
}

impl From<ProbabilityTable> for EntropyOracle {
    fn from(t: ProbabilityTable) -> Self {
        EntropyOracle::categorical(t)
    }
}

impl EntropyOracle {
    pub fn new(source: EntropySource) -> Self {
        EntropyOracle {
            source,
            memo: Mutex::new(HashMap::new()),
            evaluations: AtomicU64::new(0),
            hits: AtomicU64::new(0),
        }
    }

    pub fn gaussian(corr: CorrelationMatrix) -> Self {
        Self::new(EntropySource::Gaussian(corr))
    }

    pub fn categorical(table: ProbabilityTable) -> Self {
        Self::new(EntropySource::Categorical(table))
    }

    pub fn tabulated(names: Vec<String>, values: HashMap<VariableSet, f64>) -> Self {
        Self::new(EntropySource::Tabulated { names, values })
    }

    pub fn source(&self) -> &EntropySource {
        &self.source
    }

    pub fn as_gaussian(&self) -> Option<&CorrelationMatrix> {
        match &self.source {
            EntropySource::Gaussian(c) => Some(c),
            _ => None,
        }
    }

    pub fn dim(&self) -> usize {
        self.names().len()
    }

    pub fn names(&self) -> &[String] {
        match &self.source {
            EntropySource::Gaussian(c) => c.names(),
            EntropySource::Categorical(t) => t.names(),
            EntropySource::Tabulated { names, .. } => names,
        }
    }

    pub fn describe(&self) -> String {
        match &self.source {
            EntropySource::Gaussian(c) => format!("gaussian({} variables)", c.dim()),
            EntropySource::Categorical(t) => format!("categorical(levels {:?})", t.levels()),
            EntropySource::Tabulated { names, values } => {
                format!(
                    "tabulated({} variables, {} entries)",
                    names.len(),
                    values.len()
                )
            }
        }
    }

    pub fn check(&self, a: VariableSet) -> Result<()> {
        check_range(a, self.dim())
    }

    /// Entropy of the margin on `a`, in nats.
    pub fn entropy(&self, a: VariableSet) -> Result<f64> {
        if a.is_empty() {
            return Ok(0.0);
        }
        let mut memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(&h) = memo.get(&a) {
            self.hits.fetch_add(1, Ordering::Relaxed);
            return Ok(h);
        }
        let h = self.compute(a)?;
        self.evaluations.fetch_add(1, Ordering::Relaxed);
        memo.insert(a, h);
        Ok(h)
    }

    /// Evaluates without touching the memo. Used by dense table construction,
    /// which keeps its own store.
    pub(crate) fn compute(&self, a: VariableSet) -> Result<f64> {
        if a.is_empty() {
            return Ok(0.0);
        }
        match &self.source {
            EntropySource::Gaussian(c) => gaussian_entropy(c, a),
            EntropySource::Categorical(t) => categorical_entropy(t, a),
            EntropySource::Tabulated { names, values } => {
                check_range(a, names.len())?;
                values
                    .get(&a)
                    .copied()
                    .ok_or(Error::MissingSubset { subset: a })
            }
        }
    }

    pub fn stats(&self) -> MemoStats {
        MemoStats {
            evaluations: self.evaluations.load(Ordering::Relaxed),
            hits: self.hits.load(Ordering::Relaxed),
            stored: self.memo.lock().map(|m| m.len()).unwrap_or(0),
        }
    }

    /// Snapshot of every memoized entropy, sorted by set.
    pub fn memoized(&self) -> Vec<(VariableSet, f64)> {
        let memo = self.memo.lock().unwrap_or_else(|e| e.into_inner());
        let mut v: Vec<_> = memo.iter().map(|(k, v)| (*k, *v)).collect();
        v.sort_by_key(|e| e.0);
        v
    }

    pub fn reset_stats(&self) {
        self.evaluations.store(0, Ordering::Relaxed);
        self.hits.store(0, Ordering::Relaxed);
    }
}

/// `I(A;B|C) = −h_{ABC} + h_{AC} + h_{BC} − h_C`, in millibits.
pub fn conditional_mutual_information(
    oracle: &EntropyOracle,
    a: VariableSet,
    b: VariableSet,
    c: VariableSet,
) -> Result<f64> {
    for (x, y) in [(a, b), (a, c), (b, c)] {
        if !x.is_disjoint(y) {
            return Err(Error::OverlappingSets(x, y));
        }
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidInput(
            "mutual information needs nonempty A and B".into(),
        ));
    }
    oracle.check(a | b | c)?;
    let terms = [
        -oracle.entropy(a | b | c)?,
        oracle.entropy(a | c)?,
        oracle.entropy(b | c)?,
        -oracle.entropy(c)?,
    ];
    Ok(to_millibits(compensated_sum(terms)))
}

/// Marginal mutual information of two variables, in millibits.
pub fn mutual_information(oracle: &EntropyOracle, i: usize, j: usize) -> Result<f64> {
    conditional_mutual_information(
        oracle,
        VariableSet::singleton(i),
        VariableSet::singleton(j),
        VariableSet::EMPTY,
    )
}
