//! Synergies: triples whose joint explained information exceeds the sum of
//! the parts.
//!
//! For a target `k` and explainers `A`,
//! `I(k; A) = Σ_{i∈A} I(k; i) − Σ_{B⊆A, |B|>1} δ_{B∪k}`, so a negative
//! third-order difference `δ_ijk` means `i` and `j` together explain more of
//! `k` than separately. In regression this is suppression; in a Bayes network
//! with `I_{ij|A} = 0` it is an unshielded collider at `k`.

use serde::{Deserialize, Serialize};

use crate::entropy::{
    conditional_mutual_information, to_millibits, CorrelationMatrix, EntropyOracle,
    ANALYTIC_ZERO_TOL,
};
use crate::error::{Error, Result};
use crate::forward_diff::{conditional_delta, ConditionalDeltaQuery};
use crate::lattice::VariableSet;

/// Explained information in one variable, split into marginal informations and
/// higher-order corrections.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplainedDecomposition {
    pub target: usize,
    pub explainers: VariableSet,
    pub given: VariableSet,
    /// `I(k; A | given)`, computed directly from entropies.
    pub total: f64,
    /// `(i, I(k; i | given))` for each explainer.
    pub marginal_terms: Vec<(usize, f64)>,
    /// `(B, δ_{B∪k | given})` for every `B ⊆ A` with `|B| > 1`.
    pub correction_terms: Vec<(VariableSet, f64)>,
}

impl ExplainedDecomposition {
    pub fn marginal_sum(&self) -> f64 {
        self.marginal_terms.iter().map(|t| t.1).sum()
    }

    /// `Σ δ_{B∪k}`; negative when the explainers act synergistically.
    pub fn interaction(&self) -> f64 {
        self.correction_terms.iter().map(|t| t.1).sum()
    }

    /// `total − (Σ marginal − Σ correction)`; zero up to rounding.
    pub fn residual(&self) -> f64 {
        self.total - (self.marginal_sum() - self.interaction())
    }

    pub fn is_synergistic(&self, threshold: f64) -> bool {
        self.interaction() < -threshold
    }
}

/// Decomposes `I(k; A | given)`.
pub fn explained_information(
    oracle: &EntropyOracle,
    k: usize,
    explainers: VariableSet,
    given: VariableSet,
) -> Result<ExplainedDecomposition> {
    let target = VariableSet::singleton(k);
    if explainers.is_empty() {
        return Err(Error::InvalidInput(
            "at least one explainer is required".into(),
        ));
    }
    for (x, y) in [(target, explainers), (target, given), (explainers, given)] {
        if !x.is_disjoint(y) {
            return Err(Error::OverlappingSets(x, y));
        }
    }
    let total = conditional_mutual_information(oracle, target, explainers, given)?;
    let marginal_terms = explainers
        .iter()
        .map(|i| {
            conditional_mutual_information(oracle, target, VariableSet::singleton(i), given)
                .map(|v| (i, v))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut correction_terms = Vec::new();
    for size in 2..=explainers.len() {
        for b in explainers.subsets_of_size(size) {
            let q = ConditionalDeltaQuery::new(b.with(k), given)?;
            correction_terms.push((b, conditional_delta(oracle, q)?));
        }
    }
    Ok(ExplainedDecomposition {
        target: k,
        explainers,
        given,
        total,
        marginal_terms,
        correction_terms,
    })
}

/// Suppression types from the regression literature.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SuppressionType {
    /// One explainer is (nearly) uncorrelated with the response.
    Classical,
    /// A sign pattern producing a negative regression coefficient.
    Negative,
    /// Both explainers predict the response positively but correlate negatively.
    Reciprocal,
    None,
}

/// A triple with `δ_{ijk|given}` below the negative threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynergyFinding {
    pub triple: VariableSet,
    /// Millibits.
    pub delta: f64,
    pub conditioning: VariableSet,
    /// Node opposite the pair with the smallest conditional information.
    pub collider: usize,
    pub weakest_pair_info: f64,
    pub suppression_type: SuppressionType,
}

impl SynergyFinding {
    /// The two non-collider members.
    pub fn others(&self) -> [usize; 2] {
        let v = self.triple.without(self.collider).to_vec();
        [v[0], v[1]]
    }
}

/// Reports every triple with `δ_{triple|given} < −threshold`, sorted by
/// ascending delta (ties by triple).
///
/// A threshold below the analytic zero tolerance is raised to it, so exact
/// zeros that round to tiny negatives are not reported.
pub fn detect_synergies(
    oracle: &EntropyOracle,
    triples: &[VariableSet],
    given: VariableSet,
    threshold: f64,
) -> Result<Vec<SynergyFinding>> {
    if !(threshold >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "threshold {threshold} must be >= 0"
        )));
    }
    let cutoff = threshold.max(ANALYTIC_ZERO_TOL);
    let mut findings = Vec::new();
    for &triple in triples {
        if triple.len() != 3 {
            return Err(Error::InvalidInput(format!("{triple} is not a triple")));
        }
        let delta = conditional_delta(oracle, ConditionalDeltaQuery::new(triple, given)?)?;
        if delta < -cutoff {
            let (collider, weakest_pair_info) = weakest_edge_collider(oracle, triple, given)?;
            findings.push(SynergyFinding {
                triple,
                delta,
                conditioning: given,
                collider,
                weakest_pair_info,
                suppression_type: SuppressionType::None,
            });
        }
    }
    findings.sort_by(|a, b| a.delta.total_cmp(&b.delta).then(a.triple.cmp(&b.triple)));
    Ok(findings)
}

/// Node opposite the pair with minimal `I_{ab|given}`; ties go to the
/// lexicographically smallest pair.
pub fn weakest_edge_collider(
    oracle: &EntropyOracle,
    triple: VariableSet,
    given: VariableSet,
) -> Result<(usize, f64)> {
    let mut best: Option<(VariableSet, f64)> = None;
    for pair in triple.subsets_of_size(2) {
        let v = pair.to_vec();
        let info = conditional_mutual_information(
            oracle,
            VariableSet::singleton(v[0]),
            VariableSet::singleton(v[1]),
            given,
        )?;
        if best.is_none_or(|(_, b)| info < b) {
            best = Some((pair, info));
        }
    }
    let (pair, info) = best.expect("a triple has three pairs");
    let collider = triple.difference(pair).first().expect("triple minus pair");
    Ok((collider, info))
}

/// Fills `suppression_type` for marginal findings that contain `response`.
pub fn annotate_suppression(
    findings: &mut [SynergyFinding],
    corr: &CorrelationMatrix,
    response: usize,
    zero_tol: f64,
) -> Result<()> {
    for f in findings.iter_mut() {
        if f.conditioning.is_empty() && f.triple.contains(response) {
            let v = f.triple.to_vec();
            f.suppression_type = classify_suppression(corr, v[0], v[1], v[2], response, zero_tol)?;
        }
    }
    Ok(())
}

/// Types the synergy `{i,j,k}` with `response` as the dependent variable.
///
/// `zero_tol` is a correlation tolerance: a response–explainer correlation
/// within it of zero makes the suppression classical.
pub fn classify_suppression(
    corr: &CorrelationMatrix,
    i: usize,
    j: usize,
    k: usize,
    response: usize,
    zero_tol: f64,
) -> Result<SuppressionType> {
    let triple = VariableSet::from([i, j, k]);
    if triple.len() != 3 || !triple.contains(response) {
        return Err(Error::InvalidInput(format!(
            "response {response} must be one of three distinct indices {i}, {j}, {k}"
        )));
    }
    let ex = triple.without(response).to_vec();
    let (x1, x2) = (ex[0], ex[1]);
    let r1 = corr.get(response, x1);
    let r2 = corr.get(response, x2);
    let r12 = corr.get(x1, x2);
    if gaussian_delta_closed_form(r1, r2, r12)? >= 0.0 {
        return Err(Error::NotASynergy(triple));
    }
    if r1.abs() <= zero_tol || r2.abs() <= zero_tol {
        return Ok(SuppressionType::Classical);
    }
    let negatives = [r1, r2, r12].iter().filter(|r| **r < 0.0).count();
    if r1 > 0.0 && r2 > 0.0 && r12 < 0.0 {
        return Ok(SuppressionType::Reciprocal);
    }
    if negatives == 1 && (r1 < 0.0 || r2 < 0.0) {
        return Ok(SuppressionType::Negative);
    }
    if negatives == 0 {
        // standardized regression coefficients of response on (x1, x2)
        let b1 = (r1 - r2 * r12) / (1.0 - r12 * r12);
        let b2 = (r2 - r1 * r12) / (1.0 - r12 * r12);
        if b1 < 0.0 || b2 < 0.0 {
            return Ok(SuppressionType::Negative);
        }
    }
    Ok(SuppressionType::None)
}

fn check_triangle(r12: f64, r13: f64, r23: f64) -> Result<f64> {
    let det = 1.0 - r12 * r12 - r13 * r13 - r23 * r23 + 2.0 * r12 * r13 * r23;
    if [r12, r13, r23].iter().any(|r| !(r.abs() < 1.0)) || !(det > 0.0) {
        return Err(Error::NotPositiveDefinite {
            subset: VariableSet::from([0, 1, 2]),
        });
    }
    Ok(det)
}

/// `δ_123` of three standardized Gaussians from the determinant form, in
/// millibits.
pub fn gaussian_delta_closed_form(r12: f64, r13: f64, r23: f64) -> Result<f64> {
    let det = check_triangle(r12, r13, r23)?;
    let denom = (1.0 - r12 * r12) * (1.0 - r13 * r13) * (1.0 - r23 * r23);
    Ok(to_millibits(0.5 * (det / denom).ln()))
}

/// The same quantity as `½ log((1 − ρ²_{12·3}) / (1 − ρ²_12))`.
pub fn gaussian_delta_partial_form(r12: f64, r13: f64, r23: f64) -> Result<f64> {
    check_triangle(r12, r13, r23)?;
    let partial = (r12 - r13 * r23) / ((1.0 - r13 * r13) * (1.0 - r23 * r23)).sqrt();
    Ok(to_millibits(
        0.5 * ((1.0 - partial * partial) / (1.0 - r12 * r12)).ln(),
    ))
}

/// `δ_{ijk|A} = ½ log((1 − ρ²_{ij·A∪k}) / (1 − ρ²_{ij·A}))`, in millibits.
pub fn partial_gaussian_delta(
    corr: &CorrelationMatrix,
    i: usize,
    j: usize,
    k: usize,
    given: VariableSet,
) -> Result<f64> {
    let triple = VariableSet::from([i, j, k]);
    if triple.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "indices {i}, {j}, {k} must be distinct"
        )));
    }
    if !triple.is_disjoint(given) {
        return Err(Error::OverlappingSets(triple, given));
    }
    let outer = corr.partial_correlation(i, j, given)?;
    let inner = corr.partial_correlation(i, j, given.with(k))?;
    Ok(to_millibits(
        0.5 * ((1.0 - inner * inner) / (1.0 - outer * outer)).ln(),
    ))
}

/// `I_{ij|A} = 0` and `δ_{ijk|A} ≤ 0`, both judged against `zero_tol`
/// millibits: an unshielded collider at `k`.
pub fn unshielded_collider_test(
    oracle: &EntropyOracle,
    i: usize,
    j: usize,
    k: usize,
    given: VariableSet,
    zero_tol: f64,
) -> Result<bool> {
    let triple = VariableSet::from([i, j, k]);
    if triple.len() != 3 {
        return Err(Error::InvalidInput(format!(
            "indices {i}, {j}, {k} must be distinct"
        )));
    }
    if !triple.is_disjoint(given) {
        return Err(Error::OverlappingSets(triple, given));
    }
    let info = conditional_mutual_information(
        oracle,
        VariableSet::singleton(i),
        VariableSet::singleton(j),
        given,
    )?;
    let delta = conditional_delta(oracle, ConditionalDeltaQuery::new(triple, given)?)?;
    Ok(info.abs() <= zero_tol && delta <= zero_tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward_diff::delta_third_order;
    use approx::assert_abs_diff_eq;

    fn sigma(r12: f64) -> CorrelationMatrix {
        CorrelationMatrix::from_lower_triangle(&[1.0, r12, 1.0, 0.7, 0.5, 1.0]).unwrap()
    }

    #[test]
    fn closed_form_examples() {
        assert_abs_diff_eq!(
            gaussian_delta_closed_form(0.2, 0.7, 0.5).unwrap(),
            -14.63,
            epsilon = 0.005
        );
        assert_eq!(gaussian_delta_closed_form(0.0, 0.0, 0.5).unwrap(), 0.0);
        // printed as −1126.0 to four significant figures
        assert_abs_diff_eq!(
            gaussian_delta_closed_form(-0.2, 0.7, 0.5).unwrap(),
            -1125.63,
            epsilon = 0.005
        );
        assert!(matches!(
            gaussian_delta_closed_form(0.9, 0.9, -0.9),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(gaussian_delta_closed_form(1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn closed_forms_agree_with_oracle() {
        for r12 in [0.2, -0.2, 0.0, 0.45] {
            let a = gaussian_delta_closed_form(r12, 0.7, 0.5).unwrap();
            let b = gaussian_delta_partial_form(r12, 0.7, 0.5).unwrap();
            let c = delta_third_order(&EntropyOracle::gaussian(sigma(r12)), 0, 1, 2).unwrap();
            assert_abs_diff_eq!(a, b, epsilon = 1e-9);
            assert_abs_diff_eq!(a, c, epsilon = 1e-9);
        }
    }

    #[test]
    fn partial_delta_without_conditioning() {
        let c = sigma(0.2);
        let v = partial_gaussian_delta(&c, 0, 1, 2, VariableSet::EMPTY).unwrap();
        assert_abs_diff_eq!(
            v,
            gaussian_delta_closed_form(0.2, 0.7, 0.5).unwrap(),
            epsilon = 1e-9
        );
        assert!(partial_gaussian_delta(&c, 0, 1, 1, VariableSet::EMPTY).is_err());
    }

    #[test]
    fn explained_information_two_explainers() {
        let o = EntropyOracle::gaussian(sigma(0.2));
        let d =
            explained_information(&o, 2, VariableSet::from([0, 1]), VariableSet::EMPTY).unwrap();
        // 497.4 + 212.5 + 14.63
        assert_abs_diff_eq!(d.total, 724.53, epsilon = 0.05);
        assert_abs_diff_eq!(d.residual(), 0.0, epsilon = 1e-9);
        assert_eq!(d.correction_terms.len(), 1);
        assert!(d.is_synergistic(0.0));
    }

    #[test]
    fn independent_explainers() {
        let o = EntropyOracle::gaussian(CorrelationMatrix::identity(4));
        let d =
            explained_information(&o, 0, VariableSet::from([1, 2, 3]), VariableSet::EMPTY).unwrap();
        assert_eq!(d.total, 0.0);
        assert!(d.marginal_terms.iter().all(|t| t.1 == 0.0));
        assert!(d.correction_terms.iter().all(|t| t.1 == 0.0));
        assert_eq!(d.correction_terms.len(), 4);
    }

    #[test]
    fn explained_information_validation() {
        let o = EntropyOracle::gaussian(sigma(0.2));
        assert!(explained_information(&o, 0, VariableSet::EMPTY, VariableSet::EMPTY).is_err());
        assert!(matches!(
            explained_information(&o, 0, VariableSet::from([0, 1]), VariableSet::EMPTY),
            Err(Error::OverlappingSets(_, _))
        ));
        assert!(
            explained_information(&o, 0, VariableSet::from([1]), VariableSet::from([1])).is_err()
        );
    }

    #[test]
    fn suppression_types() {
        let tri = |r_r1: f64, r_r2: f64, r12: f64| {
            // response is variable 0
            CorrelationMatrix::from_lower_triangle(&[1.0, r_r1, 1.0, r_r2, r12, 1.0]).unwrap()
        };
        assert_eq!(
            classify_suppression(&tri(0.0, 0.5, 0.5), 0, 1, 2, 0, 1e-9).unwrap(),
            SuppressionType::Classical
        );
        assert_eq!(
            classify_suppression(&tri(0.4, 0.4, -0.3), 0, 1, 2, 0, 1e-9).unwrap(),
            SuppressionType::Reciprocal
        );
        assert!(gaussian_delta_closed_form(-0.2, 0.5, 0.7).unwrap() < 0.0);
        assert_eq!(
            classify_suppression(&tri(-0.2, 0.5, 0.7), 0, 1, 2, 0, 1e-9).unwrap(),
            SuppressionType::Negative
        );
        // all positive, coefficient of the weaker explainer negative
        let c = tri(0.2, 0.6, 0.7);
        assert!(gaussian_delta_closed_form(0.2, 0.6, 0.7).unwrap() < 0.0);
        assert_eq!(
            classify_suppression(&c, 2, 1, 0, 0, 1e-9).unwrap(),
            SuppressionType::Negative
        );
    }

    #[test]
    fn suppression_requires_synergy() {
        let c = sigma(0.2).permuted(&[0, 1, 2]);
        // δ(0.5, 0.5, 0.5) > 0
        let pos = CorrelationMatrix::from_lower_triangle(&[1.0, 0.5, 1.0, 0.5, 0.5, 1.0]).unwrap();
        assert!(matches!(
            classify_suppression(&pos, 0, 1, 2, 0, 1e-9),
            Err(Error::NotASynergy(_))
        ));
        assert!(classify_suppression(&c, 0, 1, 2, 5, 1e-9).is_err());
    }

    #[test]
    fn detection_and_collider() {
        let o = EntropyOracle::gaussian(sigma(0.2));
        let f = detect_synergies(&o, &[VariableSet::full(3)], VariableSet::EMPTY, 0.0).unwrap();
        assert_eq!(f.len(), 1);
        // weakest pair is {0,1} (30.15 mbits), so the collider is 2
        assert_eq!(f[0].collider, 2);
        assert_abs_diff_eq!(f[0].weakest_pair_info, 30.15, epsilon = 0.01);
        assert_eq!(f[0].others(), [0, 1]);
        let none = detect_synergies(&o, &[VariableSet::full(3)], VariableSet::EMPTY, 15.0).unwrap();
        assert!(none.is_empty());
        assert!(
            detect_synergies(&o, &[VariableSet::from([0, 1])], VariableSet::EMPTY, 0.0).is_err()
        );
        assert!(detect_synergies(&o, &[], VariableSet::EMPTY, -1.0).is_err());
    }

    #[test]
    fn identity_has_no_synergies() {
        let o = EntropyOracle::gaussian(CorrelationMatrix::identity(5));
        let triples: Vec<_> = VariableSet::full(5).subsets_of_size(3).collect();
        assert!(detect_synergies(&o, &triples, VariableSet::EMPTY, 0.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn collider_ties_break_lexicographically() {
        let o = EntropyOracle::gaussian(CorrelationMatrix::identity(3));
        assert_eq!(
            weakest_edge_collider(&o, VariableSet::full(3), VariableSet::EMPTY)
                .unwrap()
                .0,
            2
        );
    }

    #[test]
    fn annotation_sets_types() {
        let c = CorrelationMatrix::from_lower_triangle(&[1.0, 0.4, 1.0, 0.4, -0.3, 1.0]).unwrap();
        let o = EntropyOracle::gaussian(c.clone());
        let mut f = detect_synergies(&o, &[VariableSet::full(3)], VariableSet::EMPTY, 0.0).unwrap();
        annotate_suppression(&mut f, &c, 0, 1e-9).unwrap();
        assert_eq!(f[0].suppression_type, SuppressionType::Reciprocal);
    }

    #[test]
    fn chain_is_not_a_collider() {
        // 0 − 1 − 2 chain: ρ02 = ρ01 ρ12
        let c = CorrelationMatrix::from_lower_triangle(&[1.0, 0.6, 1.0, 0.3, 0.5, 1.0]).unwrap();
        let o = EntropyOracle::gaussian(c);
        assert!(!unshielded_collider_test(&o, 0, 2, 1, VariableSet::EMPTY, 1e-6).unwrap());
    }
}
