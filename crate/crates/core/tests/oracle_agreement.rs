use std::collections::BTreeMap;

use itertools::Itertools;
use num_rational::Ratio;
use randsurf::experiment::run_samples;
use randsurf::oracle::{exact_joint, stirling_first, Outcome};
use randsurf::stats::{empirical_table, tv_distance};
use randsurf::{ModelKind, ModelParams, Permutation};

fn outcome_table(p: ModelParams, seed: u64, k: usize) -> BTreeMap<Outcome, f64> {
    let samples = run_samples(p, seed, k, None).unwrap();
    empirical_table(samples.iter().map(|s| Outcome {
        b: s.b,
        genus: s.genus,
        connected: s.connected,
    }))
}

#[test]
fn monte_carlo_converges_to_exact_tables() {
    let cases = [
        ModelParams::new(ModelKind::TPrime, 2, 2, 3).unwrap(),
        ModelParams::new(ModelKind::T, 4, 2, 3).unwrap(),
        ModelParams::new(ModelKind::S, 6, 3, 3).unwrap(),
        ModelParams::new(ModelKind::SPrime, 8, 3, 3).unwrap(),
        ModelParams::new(ModelKind::TPrime, 2, 1, 4).unwrap(),
    ];
    for (i, p) in cases.into_iter().enumerate() {
        let exact = exact_joint(&p).unwrap();
        let total: Ratio<u64> = exact.probabilities().iter().map(|(_, q)| *q).sum();
        assert_eq!(total, Ratio::new(1, 1));
        let tv = tv_distance(&outcome_table(p, 40 + i as u64, 1_000_000), &exact.table());
        assert!(tv <= 0.01, "{p:?}: TV {tv}");
    }
}

/// Brute-force the labeled construction: every rotation α of cycle type
/// (3,3) on 6 darts, every matching β, boundary at the corners of darts
/// {0..m}. Genus from χ = faces − edges + vertices on the connected closed
/// complex with m inserted edges.
#[test]
fn canonical_rotation_matches_all_labelings_at_six_darts() {
    let m = 2usize;
    let mut labeled: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut total = 0u64;
    for images in (0..6).permutations(6) {
        let alpha = Permutation::from_images(images).unwrap();
        if alpha.cycles().cycle_type() != [3, 3] {
            continue;
        }
        for beta in randsurf::oracle::enumerate_matchings(6).unwrap() {
            let gamma = alpha.compose(&beta.to_permutation()).unwrap();
            let (b, i) = gamma.min_indicator_process(m).unwrap();
            // Components: the two triangles are joined unless β pairs within each.
            let joined = beta.pairs().iter().any(|&(x, y)| {
                let same = |a: usize, c: usize| {
                    let mut k = a;
                    for _ in 0..3 {
                        if k == c {
                            return true;
                        }
                        k = alpha.image(k);
                    }
                    false
                };
                !same(x, y)
            });
            assert!(joined, "three pairs cannot close a triangle");
            let chi = 2 - (3 + m as i64) + (i + m) as i64;
            let genus = ((2 - b as i64 - chi) / 2) as usize;
            *labeled.entry((b, genus)).or_default() += 1;
            total += 1;
        }
    }
    let exact = exact_joint(&ModelParams::new(ModelKind::TPrime, 2, m, 3).unwrap()).unwrap();
    let canonical: BTreeMap<(usize, usize), Ratio<u64>> = exact
        .probabilities()
        .into_iter()
        .map(|(o, q)| ((o.b, o.genus), q))
        .collect();
    let brute: BTreeMap<(usize, usize), Ratio<u64>> = labeled
        .into_iter()
        .map(|(k, c)| (k, Ratio::new(c, total)))
        .collect();
    assert_eq!(brute, canonical);
}

#[test]
fn fixed_m_boundary_law_regression() {
    // Exact B marginal of S′(12, 2) against the order-2 Stirling law {1/2, 1/2}.
    let exact = exact_joint(&ModelParams::new(ModelKind::SPrime, 12, 2, 3).unwrap()).unwrap();
    let marginal = exact.marginal_b();
    let half = Ratio::new(1u64, 2);
    let gap = |b: usize| {
        let q = marginal.get(&b).copied().unwrap_or_default();
        if q > half {
            q - half
        } else {
            half - q
        }
    };
    let tv = (gap(1) + gap(2)) / 2;
    assert_eq!(
        marginal[&1],
        Ratio::new(FROZEN_P1.0, FROZEN_P1.1),
        "P(B=1) = {}",
        marginal[&1]
    );
    assert_eq!(tv, Ratio::new(FROZEN_TV.0, FROZEN_TV.1), "TV = {tv}");
    let law = stirling_first(2).unwrap().cycle_law();
    assert_eq!(law, BTreeMap::from([(1, 0.5), (2, 0.5)]));
}

const FROZEN_P1: (u64, u64) = (38, 77);
const FROZEN_TV: (u64, u64) = (1, 154);
