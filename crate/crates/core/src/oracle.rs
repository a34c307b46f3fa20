//! Exact ground truth by exhaustive enumeration, plus the exact reference
//! laws for cycle counts (Stirling rows, harmonic sums, parity classes).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use itertools::Itertools;
use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{One, ToPrimitive, Zero};
use thiserror::Error;

use crate::gluing::{GluingInstance, ModelError, ModelParams};
use crate::perm::Matching;

/// Largest dart count `enumerate_matchings` accepts; 15!! = 2,027,025 matchings.
pub const MAX_ENUMERATED_DARTS: usize = 16;
/// Largest number of (matching, placement) cases `exact_joint` will visit.
pub const MAX_EXACT_CASES: u128 = 10_000_000;
pub const MAX_STIRLING_ORDER: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum OracleError {
    #[error(
        "cannot enumerate matchings of {0} darts (need an even count ≤ {MAX_ENUMERATED_DARTS})"
    )]
    MatchingGuard(usize),
    #[error("{cases} cases exceed the enumeration guard of {MAX_EXACT_CASES}; use Monte Carlo sampling instead")]
    TooManyCases { cases: u128 },
    #[error("order {0} outside the supported range 1..={MAX_STIRLING_ORDER}")]
    OrderOutOfRange(usize),
    #[error("parity class is empty for N = {0}")]
    EmptyParityClass(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Lexicographic stream of all perfect matchings on `0..n`: the smallest
/// unpaired label is paired with each larger unpaired label in turn.
pub struct Matchings {
    n: usize,
    choices: Vec<usize>,
    done: bool,
}

pub fn enumerate_matchings(n: usize) -> Result<Matchings, OracleError> {
    if n == 0 || n % 2 == 1 || n > MAX_ENUMERATED_DARTS {
        return Err(OracleError::MatchingGuard(n));
    }
    Ok(Matchings {
        n,
        choices: vec![0; n / 2],
        done: false,
    })
}

impl Matchings {
    fn current(&self) -> Matching {
        let mut free: Vec<usize> = (0..self.n).collect();
        let mut pairs = Vec::with_capacity(self.n / 2);
        for &c in &self.choices {
            let a = free.remove(0);
            let b = free.remove(c);
            pairs.push((a, b));
        }
        Matching::from_pairs(self.n, &pairs).expect("enumerated pairs form a matching")
    }
}

impl Iterator for Matchings {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        let item = self.current();
        // Level j chooses among n - 2j - 1 partners.
        let mut level = self.choices.len();
        loop {
            if level == 0 {
                self.done = true;
                break;
            }
            level -= 1;
            let options = self.n - 2 * level - 1;
            if self.choices[level] + 1 < options {
                self.choices[level] += 1;
                for c in &mut self.choices[level + 1..] {
                    *c = 0;
                }
                break;
            }
        }
        Some(item)
    }
}

/// `(n-1)!!`, the number of perfect matchings on `n` darts.
pub fn double_factorial_odd(n: usize) -> u128 {
    (1..n as u128).step_by(2).product()
}

pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k as u128).fold(1u128, |acc, i| acc * (n as u128 - i) / (i + 1))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub b: usize,
    pub genus: usize,
    pub connected: bool,
}

/// Exact law of (B, genus, connected) over equally likely cases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactDistribution {
    counts: BTreeMap<Outcome, u64>,
    total: u64,
}

impl ExactDistribution {
    pub fn total_cases(&self) -> u64 {
        self.total
    }

    pub fn probabilities(&self) -> Vec<(Outcome, Ratio<u64>)> {
        self.counts
            .iter()
            .map(|(&o, &c)| (o, Ratio::new(c, self.total)))
            .collect()
    }

    pub fn probability(&self, outcome: Outcome) -> Ratio<u64> {
        Ratio::new(self.counts.get(&outcome).copied().unwrap_or(0), self.total)
    }

    pub fn table(&self) -> BTreeMap<Outcome, f64> {
        self.counts
            .iter()
            .map(|(&o, &c)| (o, c as f64 / self.total as f64))
            .collect()
    }

    pub fn marginal_b(&self) -> BTreeMap<usize, Ratio<u64>> {
        let mut counts = BTreeMap::new();
        for (o, &c) in &self.counts {
            *counts.entry(o.b).or_insert(0u64) += c;
        }
        counts
            .into_iter()
            .map(|(b, c)| (b, Ratio::new(c, self.total)))
            .collect()
    }

    pub fn marginal_genus(&self) -> BTreeMap<usize, Ratio<u64>> {
        let mut counts = BTreeMap::new();
        for (o, &c) in &self.counts {
            *counts.entry(o.genus).or_insert(0u64) += c;
        }
        counts
            .into_iter()
            .map(|(g, c)| (g, Ratio::new(c, self.total)))
            .collect()
    }

    /// CSV with columns `B,genus,connected,numerator,denominator`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("B,genus,connected,numerator,denominator\n");
        for (o, p) in self.probabilities() {
            writeln!(
                out,
                "{},{},{},{},{}",
                o.b,
                o.genus,
                o.connected,
                p.numer(),
                p.denom()
            )
            .unwrap();
        }
        out
    }
}

/// Number of equally likely (matching, placement) cases for `params`.
pub fn case_count(params: &ModelParams) -> u128 {
    let matchings = double_factorial_odd(params.matched_darts());
    let placements = match params.placement_range() {
        Some(range) => binomial(range, params.m()),
        None => 1,
    };
    matchings.saturating_mul(placements)
}

/// Exact joint law of (B, genus, connected), enumerating every matching and
/// every boundary placement.
pub fn exact_joint(params: &ModelParams) -> Result<ExactDistribution, OracleError> {
    let cases = case_count(params);
    if cases > MAX_EXACT_CASES {
        return Err(OracleError::TooManyCases { cases });
    }
    let placements: Vec<Vec<usize>> = match params.placement_range() {
        Some(range) => (0..range).combinations(params.m()).collect(),
        None => vec![Vec::new()],
    };
    let mut counts = BTreeMap::new();
    let mut total = 0u64;
    for matching in enumerate_matchings(params.matched_darts())? {
        for placement in &placements {
            let inst = GluingInstance::from_parts(*params, matching.clone(), placement)?;
            let s = inst.summarize();
            let key = Outcome {
                b: s.b,
                genus: s.genus,
                connected: s.connected,
            };
            *counts.entry(key).or_insert(0u64) += 1;
            total += 1;
        }
    }
    Ok(ExactDistribution { counts, total })
}

/// Unsigned Stirling numbers of the first kind, `[m b]` for `b = 1..=m`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StirlingRow {
    m: usize,
    values: Vec<BigUint>,
}

impl StirlingRow {
    pub fn order(&self) -> usize {
        self.m
    }

    /// `values()[b - 1] == [m b]`.
    pub fn values(&self) -> &[BigUint] {
        &self.values
    }

    pub fn get(&self, b: usize) -> BigUint {
        if b == 0 || b > self.m {
            BigUint::zero()
        } else {
            self.values[b - 1].clone()
        }
    }

    pub fn sum(&self) -> BigUint {
        self.values.iter().sum()
    }

    /// The law of the cycle count of a uniform permutation of order m.
    pub fn cycle_law(&self) -> BTreeMap<usize, f64> {
        let total = self.sum();
        (1..=self.m)
            .map(|b| (b, big_ratio_f64(&self.values[b - 1], &total)))
            .collect()
    }
}

pub fn stirling_first(m: usize) -> Result<StirlingRow, OracleError> {
    if m == 0 || m > MAX_STIRLING_ORDER {
        return Err(OracleError::OrderOutOfRange(m));
    }
    // row[b] holds [k b] for the current k, with row[0] = [k 0] = 0.
    let mut row = vec![BigUint::zero(); m + 1];
    row[1] = BigUint::one();
    for k in 2..=m {
        for b in (1..=k).rev() {
            let carried = &row[b] * BigUint::from(k - 1);
            row[b] = &row[b - 1] + carried;
        }
    }
    row.remove(0);
    Ok(StirlingRow { m, values: row })
}

/// `(H_m, H_m^(2))` as floats, summed from the small terms up.
pub fn harmonic_refs(m: usize) -> (f64, f64) {
    (1..=m).rev().fold((0.0, 0.0), |(h, h2), k| {
        let k = k as f64;
        (h + 1.0 / k, h2 + 1.0 / (k * k))
    })
}

/// `(H_m, H_m^(2))` as exact rationals.
pub fn harmonic_exact(m: usize) -> (BigRational, BigRational) {
    let mut h = BigRational::zero();
    let mut h2 = BigRational::zero();
    for k in 1..=m {
        let k = BigInt::from(k);
        h += BigRational::new(BigInt::one(), k.clone());
        h2 += BigRational::new(BigInt::one(), &k * &k);
    }
    (h, h2)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_sign(sign: i8) -> Parity {
        if sign > 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// Exact cycle-count law of a uniform permutation of order `n` conditioned
/// on its parity. Even permutations are those with `n - c` even.
pub fn parity_conditioned_cycle_dist(
    n: usize,
    parity: Parity,
) -> Result<BTreeMap<usize, BigRational>, OracleError> {
    let row = stirling_first(n)?;
    let wanted = match parity {
        Parity::Even => 0,
        Parity::Odd => 1,
    };
    let kept: Vec<(usize, BigUint)> = (1..=n)
        .filter(|c| (n - c) % 2 == wanted)
        .map(|c| (c, row.get(c)))
        .collect();
    let total: BigUint = kept.iter().map(|(_, v)| v).sum();
    if total.is_zero() {
        return Err(OracleError::EmptyParityClass(n));
    }
    let total = BigInt::from(total);
    Ok(kept
        .into_iter()
        .map(|(c, v)| (c, BigRational::new(BigInt::from(v), total.clone())))
        .collect())
}

pub fn rational_table_f64<K: Ord + Copy>(table: &BTreeMap<K, BigRational>) -> BTreeMap<K, f64> {
    table
        .iter()
        .map(|(&k, v)| (k, v.to_f64().unwrap_or(f64::NAN)))
        .collect()
}

fn big_ratio_f64(num: &BigUint, den: &BigUint) -> f64 {
    BigRational::new(BigInt::from(num.clone()), BigInt::from(den.clone()))
        .to_f64()
        .unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gluing::ModelKind;
    use std::collections::HashSet;

    fn big(v: &[u64]) -> Vec<BigUint> {
        v.iter().map(|&x| BigUint::from(x)).collect()
    }

    #[test]
    fn matching_counts() {
        assert_eq!(enumerate_matchings(2).unwrap().count(), 1);
        assert_eq!(enumerate_matchings(4).unwrap().count(), 3);
        assert_eq!(enumerate_matchings(8).unwrap().count(), 105);
        let all: HashSet<Vec<usize>> = enumerate_matchings(10)
            .unwrap()
            .map(|m| m.partners().to_vec())
            .collect();
        assert_eq!(all.len() as u128, double_factorial_odd(10));
        assert!(enumerate_matchings(5).is_err());
        assert!(enumerate_matchings(18).is_err());
        assert!(enumerate_matchings(0).is_err());
    }

    #[test]
    fn matching_order_is_lexicographic() {
        let listed: Vec<String> = enumerate_matchings(4)
            .unwrap()
            .map(|m| m.to_string())
            .collect();
        assert_eq!(listed, ["(1 2)(3 4)", "(1 3)(2 4)", "(1 4)(2 3)"]);
    }

    #[test]
    fn exact_small_models() {
        let d =
            exact_joint(&ModelParams::with_triangles(ModelKind::SPrime, 2, 0).unwrap()).unwrap();
        assert_eq!(
            d.probabilities(),
            vec![(
                Outcome {
                    b: 0,
                    genus: 0,
                    connected: true
                },
                Ratio::new(1, 1)
            )]
        );

        let d = exact_joint(&ModelParams::with_triangles(ModelKind::S, 4, 0).unwrap()).unwrap();
        assert_eq!(
            d.probabilities(),
            vec![
                (
                    Outcome {
                        b: 0,
                        genus: 0,
                        connected: true
                    },
                    Ratio::new(2, 3)
                ),
                (
                    Outcome {
                        b: 0,
                        genus: 1,
                        connected: true
                    },
                    Ratio::new(1, 3)
                ),
            ]
        );
        assert_eq!(
            d.to_csv(),
            "B,genus,connected,numerator,denominator\n0,0,true,2,3\n0,1,true,1,3\n"
        );
    }

    #[test]
    fn exact_tprime_two_triangles_one_insertion() {
        let d =
            exact_joint(&ModelParams::with_triangles(ModelKind::TPrime, 2, 1).unwrap()).unwrap();
        assert_eq!(d.total_cases(), 90);
        let sum: Ratio<u64> = d.probabilities().iter().map(|(_, p)| *p).sum();
        assert_eq!(sum, Ratio::new(1, 1));
        for (o, _) in d.probabilities() {
            assert_eq!(o.b, 1);
            assert!(o.genus <= 1);
        }
        // One inserted edge cuts a disk out of the closed surface, so the
        // genus law equals the closed one.
        let closed =
            exact_joint(&ModelParams::with_triangles(ModelKind::TPrime, 2, 0).unwrap()).unwrap();
        let torus = closed.probability(Outcome {
            b: 0,
            genus: 1,
            connected: true,
        });
        assert_eq!(
            d.probability(Outcome {
                b: 1,
                genus: 1,
                connected: true
            }),
            torus
        );
    }

    #[test]
    fn exact_guard_trips() {
        let p = ModelParams::with_triangles(ModelKind::SPrime, 16, 8).unwrap();
        assert!(matches!(
            exact_joint(&p),
            Err(OracleError::TooManyCases { .. })
        ));
    }

    #[test]
    fn stirling_rows() {
        assert_eq!(stirling_first(1).unwrap().values(), big(&[1]).as_slice());
        assert_eq!(
            stirling_first(3).unwrap().values(),
            big(&[2, 3, 1]).as_slice()
        );
        let r4 = stirling_first(4).unwrap();
        assert_eq!(r4.values(), big(&[6, 11, 6, 1]).as_slice());
        assert_eq!(r4.sum(), BigUint::from(24u32));
        assert!(stirling_first(0).is_err());
        assert!(stirling_first(65).is_err());
    }

    #[test]
    fn stirling_checksums() {
        let mut factorial = BigUint::one();
        for m in 1..=MAX_STIRLING_ORDER {
            let row = stirling_first(m).unwrap();
            assert_eq!(row.sum(), &factorial * BigUint::from(m));
            assert_eq!(row.get(1), factorial);
            assert_eq!(row.get(m), BigUint::one());
            if m >= 2 {
                // [m 2] = (m-1)! H_{m-1}
                let (h, _) = harmonic_exact(m - 1);
                let expected = h * BigRational::from_integer(BigInt::from(factorial.clone()));
                assert_eq!(
                    BigRational::from_integer(BigInt::from(row.get(2))),
                    expected
                );
            }
            factorial *= BigUint::from(m);
        }
    }

    #[test]
    fn harmonic_values() {
        assert_eq!(harmonic_refs(1), (1.0, 1.0));
        let (h, h2) = harmonic_exact(4);
        assert_eq!(h, BigRational::new(25.into(), 12.into()));
        assert_eq!(h2, BigRational::new(205.into(), 144.into()));
        let (hf, h2f) = harmonic_refs(4);
        assert!((hf - 25.0 / 12.0).abs() < 1e-15);
        assert!((h2f - 205.0 / 144.0).abs() < 1e-15);
        assert!((harmonic_refs(100).0 - 5.187_377_517_639_621).abs() < 1e-12);
    }

    #[test]
    fn parity_tables() {
        let even2 = parity_conditioned_cycle_dist(2, Parity::Even).unwrap();
        assert_eq!(even2, BTreeMap::from([(2, BigRational::one())]));
        let odd2 = parity_conditioned_cycle_dist(2, Parity::Odd).unwrap();
        assert_eq!(odd2, BTreeMap::from([(1, BigRational::one())]));
        let even4 = parity_conditioned_cycle_dist(4, Parity::Even).unwrap();
        assert_eq!(
            even4,
            BTreeMap::from([
                (2, BigRational::new(11.into(), 12.into())),
                (4, BigRational::new(1.into(), 12.into())),
            ])
        );
        assert!(parity_conditioned_cycle_dist(1, Parity::Odd).is_err());
        // Each class holds exactly N!/2 permutations.
        let row = stirling_first(10).unwrap();
        let even: BigUint = (1..=10)
            .filter(|c| (10 - c) % 2 == 0)
            .map(|c| row.get(c))
            .sum();
        assert_eq!(even * BigUint::from(2u32), row.sum());
    }
}
