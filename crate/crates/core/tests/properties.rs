mod common;

use fwdiff::forward_diff::forward_difference;
use fwdiff::synergy::gaussian_delta_partial_form;
use fwdiff::{
    colour_synergies, detect_synergies, enumerate_node_clusters, explained_information,
    forward_differences, gaussian_delta_closed_form, mutual_information, to_millibits,
    CorrelationMatrix, EntropyOracle, NodeColour, VariableSet,
};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian(seed: u64, p: usize) -> EntropyOracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EntropyOracle::gaussian(common::factor_correlation(&mut rng, p))
}

fn categorical(seed: u64, p: usize) -> EntropyOracle {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    EntropyOracle::categorical(common::dirichlet_table(&mut rng, p))
}

/// Valid 3×3 correlation triples `(r12, r13, r23)`.
fn correlation_triple() -> impl Strategy<Value = (f64, f64, f64)> {
    (-0.95f64..0.95, -0.95f64..0.95, -0.95f64..0.95)
        .prop_filter("positive definite", |(a, b, c)| {
            1.0 + 2.0 * a * b * c - a * a - b * b - c * c > 1e-3
        })
}

/// Entropy in nats of the margin on `a`, by summing cells sharing a level
/// pattern. `levels` lists the level counts with the last variable fastest.
fn margin_entropy(cells: &[f64], levels: &[usize], a: &[usize]) -> f64 {
    let mut margin = std::collections::HashMap::<Vec<usize>, f64>::new();
    for (r, &pr) in cells.iter().enumerate() {
        let mut rest = r;
        let mut idx = vec![0; levels.len()];
        for v in (0..levels.len()).rev() {
            idx[v] = rest % levels[v];
            rest /= levels[v];
        }
        let key: Vec<usize> = a.iter().map(|&v| idx[v]).collect();
        *margin.entry(key).or_default() += pr;
    }
    margin
        .values()
        .filter(|&&q| q > 0.0)
        .map(|&q| -q * q.ln())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn brute_force_enumeration_matches_table(seed in any::<u64>(), p in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let levels = common::random_levels(&mut rng, p);
        let cells = common::dirichlet(&mut rng, levels.iter().product());
        let labels = levels.iter().map(|&l| (0..l).map(|v| v.to_string()).collect()).collect();
        let table = fwdiff::ProbabilityTable::from_counts(common::names(p), labels, &cells).unwrap();
        let deltas = forward_differences(&EntropyOracle::categorical(table), VariableSet::full(p)).unwrap();
        for mask in 1u64..(1 << p) {
            let a: Vec<usize> = (0..p).filter(|v| mask >> v & 1 == 1).collect();
            let mut sum = 0.0;
            for sub in 0u64..(1 << p) {
                if sub & !mask != 0 {
                    continue;
                }
                let b: Vec<usize> = (0..p).filter(|v| sub >> v & 1 == 1).collect();
                let sign = if (a.len() - b.len()).is_multiple_of(2) { 1.0 } else { -1.0 };
                sum += sign * margin_entropy(&cells, &levels, &b);
            }
            let want = sum * 1024.0 / std::f64::consts::LN_2;
            let got = deltas.get(VariableSet::from_bits(mask)).unwrap();
            prop_assert!((got - want).abs() < 1e-6, "{mask:b}: {got} vs {want}");
        }
    }

    #[test]
    fn relabelling_permutes_deltas(seed in any::<u64>(), p in 3usize..=5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let corr = common::factor_correlation(&mut rng, p);
        let mut perm: Vec<usize> = (0..p).collect();
        perm.shuffle(&mut rng);
        let a = EntropyOracle::gaussian(corr.clone());
        let b = EntropyOracle::gaussian(corr.permuted(&perm));
        for s in VariableSet::full(p).subsets().filter(|s| !s.is_empty()) {
            let image: VariableSet = s.iter().map(|i| perm[i]).collect();
            let (x, y) = (
                forward_difference(&a, s).unwrap(),
                forward_difference(&b, image).unwrap(),
            );
            prop_assert!((x - y).abs() < 1e-8, "{s}: {x} vs {y}");
        }
    }

    #[test]
    fn low_orders_are_entropy_and_minus_information(seed in any::<u64>(), p in 2usize..=4) {
        let o = categorical(seed, p);
        for i in 0..p {
            let s = VariableSet::singleton(i);
            let h = to_millibits(o.entropy(s).unwrap());
            prop_assert!((forward_difference(&o, s).unwrap() - h).abs() < 1e-9);
            for j in i + 1..p {
                let d = forward_difference(&o, s.with(j)).unwrap();
                let mi = mutual_information(&o, i, j).unwrap();
                prop_assert!(mi >= -1e-9);
                prop_assert!((d + mi).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn gaussian_closed_forms_agree((a, b, c) in correlation_triple()) {
        let corr = CorrelationMatrix::from_lower_triangle(&[1.0, a, 1.0, b, c, 1.0]).unwrap();
        let mobius = forward_difference(&EntropyOracle::gaussian(corr), VariableSet::full(3)).unwrap();
        let det = gaussian_delta_closed_form(a, b, c).unwrap();
        let partial = gaussian_delta_partial_form(a, b, c).unwrap();
        prop_assert!((mobius - det).abs() < 1e-7 * (1.0 + det.abs()));
        prop_assert!((det - partial).abs() < 1e-7 * (1.0 + det.abs()));
    }

    #[test]
    fn synergy_sign_matches_decomposition(seed in any::<u64>()) {
        let o = gaussian(seed, 3);
        let dec = explained_information(&o, 2, VariableSet::from([0, 1]), VariableSet::EMPTY).unwrap();
        let delta = forward_difference(&o, VariableSet::full(3)).unwrap();
        prop_assert!((dec.interaction() - delta).abs() < 1e-8);
        prop_assert_eq!(dec.is_synergistic(0.0), delta < 0.0);
    }

    #[test]
    fn findings_are_sorted_and_below_threshold(seed in any::<u64>(), threshold in 0.0f64..50.0) {
        let o = gaussian(seed, 5);
        let triples: Vec<VariableSet> = VariableSet::full(5).subsets_of_size(3).collect();
        let findings = detect_synergies(&o, &triples, VariableSet::EMPTY, threshold).unwrap();
        for w in findings.windows(2) {
            prop_assert!(w[0].delta <= w[1].delta);
        }
        for f in &findings {
            prop_assert!(f.delta < -threshold);
            prop_assert!(f.triple.contains(f.collider));
            let [i, j] = f.others();
            let weakest = mutual_information(&o, i, j).unwrap();
            prop_assert!((weakest - f.weakest_pair_info).abs() < 1e-9);
            for (x, y) in [(i, f.collider), (j, f.collider)] {
                prop_assert!(weakest <= mutual_information(&o, x, y).unwrap() + 1e-12);
            }
        }
        let expected = triples
            .iter()
            .filter(|t| forward_difference(&o, **t).unwrap() < -threshold.max(1e-6))
            .count();
        prop_assert_eq!(expected, findings.len());
    }

    #[test]
    fn colouring_marks_every_member(seed in any::<u64>(), p in 3usize..=7) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, p, 0.5);
        let o = EntropyOracle::gaussian(common::graphical_correlation(&mut rng, &g));
        let clusters = enumerate_node_clusters(&g, 3);
        let findings = detect_synergies(&o, &clusters, VariableSet::EMPTY, 0.0).unwrap();
        let coloured = colour_synergies(&g, &findings).unwrap();
        for v in 0..p {
            let collider = findings.iter().any(|f| f.collider == v);
            let member = findings.iter().any(|f| f.triple.contains(v));
            let want = if collider {
                NodeColour::Red
            } else if member {
                NodeColour::Yellow
            } else {
                NodeColour::White
            };
            prop_assert_eq!(coloured.colour(v), want);
        }
        for &(i, j) in &coloured.edge_highlights {
            prop_assert!(g.has_edge(i, j));
        }
        prop_assert_eq!(coloured.to_dot(), colour_synergies(&g, &findings).unwrap().to_dot());
    }
}
