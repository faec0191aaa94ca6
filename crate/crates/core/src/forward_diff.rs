//! Möbius inversion between entropies and forward differences.
//!
//! The forward differences `δ` of an entropy function `h` are defined by
//! `h_A = Σ_{B⊆A} δ_B` and recovered by `δ_A = Σ_{B⊆A} (−1)^{|A|−|B|} h_B`.
//! Conditional differences `δ_{A|B}` apply the same inversion to
//! `h_{·|B} = h_{·∪B} − h_B`.

use std::collections::BTreeMap;

use crate::entropy::{conditional_mutual_information, to_millibits, EntropyOracle};
use crate::error::{Error, Result};
use crate::lattice::{VariableSet, MAX_ENUMERATION};
use crate::linalg::compensated_sum;

/// Forward differences in millibits, keyed by subset. Every stored set has all
/// of its subsets stored too.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaTable {
    names: Vec<String>,
    provenance: String,
    storage: Storage,
}

#[derive(Debug, Clone, PartialEq)]
enum Storage {
    /// Full power set of `universe`, indexed by `universe.rank_within`.
    Dense {
        universe: VariableSet,
        values: Vec<f64>,
    },
    Sparse(BTreeMap<VariableSet, f64>),
}

impl DeltaTable {
    pub(crate) fn sparse(names: Vec<String>, provenance: String) -> Self {
        let mut map = BTreeMap::new();
        map.insert(VariableSet::EMPTY, 0.0);
        DeltaTable {
            names,
            provenance,
            storage: Storage::Sparse(map),
        }
    }

    /// Number of variables of the underlying oracle.
    pub fn p(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        match &self.storage {
            Storage::Dense { values, .. } => values.len(),
            Storage::Sparse(m) => m.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, a: VariableSet) -> Option<f64> {
        match &self.storage {
            Storage::Dense { universe, values } => a
                .is_subset(*universe)
                .then(|| values[universe.rank_within(a)]),
            Storage::Sparse(m) => m.get(&a).copied(),
        }
    }

    pub fn contains(&self, a: VariableSet) -> bool {
        self.get(a).is_some()
    }

    pub fn require(&self, a: VariableSet) -> Result<f64> {
        self.get(a).ok_or(Error::MissingSubset { subset: a })
    }

    /// Stores `δ_a`; only meaningful on sparse tables built by scans.
    pub(crate) fn insert(&mut self, a: VariableSet, delta: f64) {
        match &mut self.storage {
            Storage::Sparse(m) => {
                m.insert(a, delta);
            }
            Storage::Dense { .. } => unreachable!("dense tables are complete"),
        }
    }

    /// All entries in lexicographic set order.
    pub fn entries(&self) -> Vec<(VariableSet, f64)> {
        match &self.storage {
            Storage::Dense { universe, values } => {
                let mut v: Vec<_> = values
                    .iter()
                    .enumerate()
                    .map(|(r, &d)| (universe.unrank_within(r), d))
                    .collect();
                v.sort_by_key(|e| e.0);
                v
            }
            Storage::Sparse(m) => m.iter().map(|(k, v)| (*k, *v)).collect(),
        }
    }

    /// Entries of one order (set size).
    pub fn of_order(&self, order: usize) -> Vec<(VariableSet, f64)> {
        self.entries()
            .into_iter()
            .filter(|(s, _)| s.len() == order)
            .collect()
    }

    /// True when every stored set has all its subsets stored.
    pub fn is_downward_closed(&self) -> bool {
        match &self.storage {
            Storage::Dense { .. } => true,
            Storage::Sparse(m) => m.keys().all(|s| s.subsets().all(|t| m.contains_key(&t))),
        }
    }
}

/// Alternating sum `Σ_{B⊆A} (−1)^{|A|−|B|} h_B`, compensated, in millibits.
pub fn forward_difference(oracle: &EntropyOracle, a: VariableSet) -> Result<f64> {
    oracle.check(a)?;
    if a.len() > MAX_ENUMERATION {
        return Err(Error::UniverseTooLarge {
            size: a.len(),
            limit: MAX_ENUMERATION,
        });
    }
    let terms = a
        .subsets()
        .map(|b| {
            let h = oracle.entropy(b)?;
            Ok(if (a.len() - b.len()).is_multiple_of(2) {
                h
            } else {
                -h
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(to_millibits(compensated_sum(terms)))
}

/// Entropies above this size go straight into the dense table, not the memo.
const MEMO_UNIVERSE_LIMIT: usize = 16;

/// The full table of forward differences over the power set of `universe`.
pub fn forward_differences(oracle: &EntropyOracle, universe: VariableSet) -> Result<DeltaTable> {
    let u = universe.len();
    if u > MAX_ENUMERATION {
        return Err(Error::UniverseTooLarge {
            size: u,
            limit: MAX_ENUMERATION,
        });
    }
    oracle.check(universe)?;
    let n = 1usize << u;
    let mut values = Vec::with_capacity(n);
    for r in 0..n {
        let s = universe.unrank_within(r);
        values.push(if u <= MEMO_UNIVERSE_LIMIT {
            oracle.entropy(s)?
        } else {
            oracle.compute(s)?
        });
    }
    mobius_in_place(&mut values);
    for v in &mut values {
        *v = to_millibits(*v);
    }
    Ok(DeltaTable {
        names: oracle.names().to_vec(),
        provenance: oracle.describe(),
        storage: Storage::Dense { universe, values },
    })
}

/// Subset-lattice Möbius transform: `f(S) ← Σ_{T⊆S} (−1)^{|S−T|} f(T)`.
fn mobius_in_place(values: &mut [f64]) {
    let n = values.len();
    let mut bit = 1;
    while bit < n {
        for r in 0..n {
            if r & bit != 0 {
                values[r] -= values[r ^ bit];
            }
        }
        bit <<= 1;
    }
}

/// `h_A = Σ_{B⊆A} δ_B`, in millibits.
pub fn reconstruct_entropy(deltas: &DeltaTable, a: VariableSet) -> Result<f64> {
    let terms = a
        .subsets()
        .map(|b| deltas.require(b))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms))
}

/// Target and conditioning set for a conditional forward difference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConditionalDeltaQuery {
    target: VariableSet,
    given: VariableSet,
}

impl ConditionalDeltaQuery {
    pub fn new(target: VariableSet, given: VariableSet) -> Result<Self> {
        if target.is_empty() {
            return Err(Error::InvalidInput(
                "conditional delta needs a nonempty target".into(),
            ));
        }
        if !target.is_disjoint(given) {
            return Err(Error::OverlappingSets(target, given));
        }
        Ok(ConditionalDeltaQuery { target, given })
    }

    pub fn target(&self) -> VariableSet {
        self.target
    }

    pub fn given(&self) -> VariableSet {
        self.given
    }
}

/// Conditioning sets up to this size go through the recursion over subsets of
/// the conditioning set.
const RECURSION_LIMIT: usize = 12;

/// `δ_{A|B}` in millibits.
pub fn conditional_delta(oracle: &EntropyOracle, q: ConditionalDeltaQuery) -> Result<f64> {
    if q.given.len() <= RECURSION_LIMIT {
        conditional_delta_by_recursion(oracle, q)
    } else {
        conditional_delta_by_definition(oracle, q)
    }
}

/// `Σ_{C⊆A} (−1)^{|A|−|C|} (h_{C∪B} − h_B)`.
pub fn conditional_delta_by_definition(
    oracle: &EntropyOracle,
    q: ConditionalDeltaQuery,
) -> Result<f64> {
    let (a, b) = (q.target, q.given);
    if (a | b).len() > MAX_ENUMERATION {
        return Err(Error::UniverseTooLarge {
            size: (a | b).len(),
            limit: MAX_ENUMERATION,
        });
    }
    oracle.check(a | b)?;
    let hb = oracle.entropy(b)?;
    let terms = a
        .subsets()
        .map(|c| {
            let h = oracle.entropy(c | b)? - hb;
            Ok(if (a.len() - c.len()).is_multiple_of(2) {
                h
            } else {
                -h
            })
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(to_millibits(compensated_sum(terms)))
}

/// `Σ_{D⊆B} δ_{A∪D}`.
pub fn conditional_delta_by_recursion(
    oracle: &EntropyOracle,
    q: ConditionalDeltaQuery,
) -> Result<f64> {
    let (a, b) = (q.target, q.given);
    if (a | b).len() > MAX_ENUMERATION {
        return Err(Error::UniverseTooLarge {
            size: (a | b).len(),
            limit: MAX_ENUMERATION,
        });
    }
    let terms = b
        .subsets()
        .map(|d| forward_difference(oracle, a | d))
        .collect::<Result<Vec<f64>>>()?;
    Ok(compensated_sum(terms))
}

/// `I_{ij|A} = −Σ_{ij ⊆ B ⊆ A∪ij} δ_B`, in millibits.
pub fn cmi_from_deltas(deltas: &DeltaTable, i: usize, j: usize, a: VariableSet) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidInput("cmi_from_deltas needs i != j".into()));
    }
    let pair = VariableSet::from([i, j]);
    if !pair.is_disjoint(a) {
        return Err(Error::OverlappingSets(pair, a));
    }
    let terms = a
        .subsets()
        .map(|d| deltas.require(pair | d))
        .collect::<Result<Vec<f64>>>()?;
    Ok(-compensated_sum(terms))
}

/// `δ_ijk` from the 8-term entropy expansion (first) and from
/// `I_ij − I_{ij|k}` (second), both in millibits.
pub fn delta_third_order_routes(
    oracle: &EntropyOracle,
    i: usize,
    j: usize,
    k: usize,
) -> Result<(f64, f64)> {
    if i == j || j == k || i == k {
        return Err(Error::InvalidInput(format!(
            "indices {i}, {j}, {k} must be distinct"
        )));
    }
    let triple = VariableSet::from([i, j, k]);
    let by_entropies = forward_difference(oracle, triple)?;
    let (si, sj, sk) = (
        VariableSet::singleton(i),
        VariableSet::singleton(j),
        VariableSet::singleton(k),
    );
    let marginal = conditional_mutual_information(oracle, si, sj, VariableSet::EMPTY)?;
    let conditional = conditional_mutual_information(oracle, si, sj, sk)?;
    Ok((by_entropies, marginal - conditional))
}

/// Third-order forward difference `δ_ijk`, in millibits.
pub fn delta_third_order(oracle: &EntropyOracle, i: usize, j: usize, k: usize) -> Result<f64> {
    let (by_entropies, by_informations) = delta_third_order_routes(oracle, i, j, k)?;
    debug_assert!(
        (by_entropies - by_informations).abs() <= 1e-6 * (1.0 + by_entropies.abs()),
        "third-order routes disagree: {by_entropies} vs {by_informations}"
    );
    Ok(by_entropies)
}
