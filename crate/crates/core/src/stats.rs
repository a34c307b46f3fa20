//! Normalizations of (B, genus), exact finite-size targets, moment
//! estimation and the distribution distances used to check the limit laws.
//!
//! Logarithms are natural throughout.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::gluing::{build_instance, ModelError, ModelKind, ModelParams, SurfaceSummary};
use crate::oracle::{self, harmonic_refs, OracleError, Parity};
use crate::perm::PermError;
use crate::rng::substream;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("normalization undefined: needs m ≥ 2 and n ≥ 3 (got m = {m}, n = {n})")]
    NormalizationUndefined { m: usize, n: usize },
    #[error("need at least {need} samples, got {got}")]
    TooFewSamples { need: usize, got: usize },
    #[error("finite-size targets are only available for primed models, not {0}")]
    UnprimedModel(ModelKind),
    #[error("empty input")]
    Empty,
    #[error("observed category {0} has no expected probability")]
    CategoryMismatch(String),
    #[error("expected probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("no dart count {darts} fits the {model} model")]
    BadDartCount { model: ModelKind, darts: usize },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// A sampling experiment with the limit-law constants it implies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExperimentPlan {
    pub params: ModelParams,
    pub samples: usize,
    pub master_seed: u64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Normalization {
    pub b_center: f64,
    pub b_scale: f64,
    pub genus_center: f64,
    pub genus_scale: f64,
}

impl ExperimentPlan {
    pub fn new(params: ModelParams, samples: usize, master_seed: u64) -> Result<Self, StatsError> {
        if samples < 2 {
            return Err(StatsError::TooFewSamples {
                need: 2,
                got: samples,
            });
        }
        Ok(ExperimentPlan {
            params,
            samples,
            master_seed,
        })
    }

    /// Anti-correlation `r = sqrt(log m / log n)`, capped at 1; 0 when m ≤ 1.
    pub fn r(&self) -> f64 {
        let (n, m) = (self.params.n() as f64, self.params.m() as f64);
        if m <= 1.0 || n <= 1.0 {
            return 0.0;
        }
        (m.ln() / n.ln()).sqrt().min(1.0)
    }

    /// Centers `(log m, n/4 − ½ log n)` and scales `(√log m, ½ √log n)`.
    pub fn normalization(&self) -> Result<Normalization, StatsError> {
        let (n, m) = (self.params.n(), self.params.m());
        if m < 2 || n < 3 {
            return Err(StatsError::NormalizationUndefined { m, n });
        }
        let (ln_n, ln_m) = ((n as f64).ln(), (m as f64).ln());
        Ok(Normalization {
            b_center: ln_m,
            b_scale: ln_m.sqrt(),
            genus_center: n as f64 / 4.0 - 0.5 * ln_n,
            genus_scale: 0.5 * ln_n.sqrt(),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormalizedPair {
    pub b_hat: f64,
    pub g_hat: f64,
}

impl Normalization {
    pub fn apply(&self, b: f64, genus: f64) -> NormalizedPair {
        NormalizedPair {
            b_hat: (b - self.b_center) / self.b_scale,
            g_hat: (genus - self.genus_center) / self.genus_scale,
        }
    }
}

pub fn normalize(
    summary: &SurfaceSummary,
    plan: &ExperimentPlan,
) -> Result<NormalizedPair, StatsError> {
    Ok(plan
        .normalization()?
        .apply(summary.b as f64, summary.genus as f64))
}

/// Exact moments of (B, genus) when `γ` is replaced by a uniform permutation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiniteSizeTargets {
    pub mean_b: f64,
    pub var_b: f64,
    pub mean_genus: f64,
    pub var_genus: f64,
    pub var_i: f64,
    pub corr: f64,
}

/// For primed models on a connected sample,
/// `genus = 1 − faces/2 + N/4 − (B + I)/2`, and under the uniform reference
/// the min-of-cycle indicators are independent with `P(X_k) = 1/k`.
pub fn finite_size_targets(plan: &ExperimentPlan) -> Result<FiniteSizeTargets, StatsError> {
    let p = plan.params;
    if !p.kind().is_primed() {
        return Err(StatsError::UnprimedModel(p.kind()));
    }
    let (m, darts) = (p.m(), p.matched_darts());
    let (h_m, h2_m) = harmonic_refs(m);
    let (h_n, h2_n) = harmonic_refs(darts);
    let var_b = h_m - h2_m;
    let var_i = (h_n - h_m) - (h2_n - h2_m);
    let offset = 1.0 - p.polygon_count() as f64 / 2.0 + darts as f64 / 4.0;
    let total = var_b + var_i;
    Ok(FiniteSizeTargets {
        mean_b: h_m,
        var_b,
        mean_genus: offset - h_n / 2.0,
        var_genus: total / 4.0,
        var_i,
        corr: if total > 0.0 {
            -(var_b / total).sqrt()
        } else {
            f64::NAN
        },
    })
}

/// Mergeable exact tally of integer pairs.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct MomentTally {
    pub count: u64,
    sum_x: i128,
    sum_y: i128,
    sum_xx: i128,
    sum_yy: i128,
    sum_xy: i128,
}

impl MomentTally {
    pub fn push(&mut self, x: i64, y: i64) {
        let (x, y) = (x as i128, y as i128);
        self.count += 1;
        self.sum_x += x;
        self.sum_y += y;
        self.sum_xx += x * x;
        self.sum_yy += y * y;
        self.sum_xy += x * y;
    }

    pub fn merge(&mut self, other: &MomentTally) {
        self.count += other.count;
        self.sum_x += other.sum_x;
        self.sum_y += other.sum_y;
        self.sum_xx += other.sum_xx;
        self.sum_yy += other.sum_yy;
        self.sum_xy += other.sum_xy;
    }

    pub fn report(&self) -> Result<MomentReport, StatsError> {
        let k = self.count as i128;
        if k < 2 {
            return Err(StatsError::TooFewSamples {
                need: 2,
                got: self.count as usize,
            });
        }
        // K² times the biased (co)variances, exact.
        let cxx = k * self.sum_xx - self.sum_x * self.sum_x;
        let cyy = k * self.sum_yy - self.sum_y * self.sum_y;
        let cxy = k * self.sum_xy - self.sum_x * self.sum_y;
        let kf = k as f64;
        let denom = kf * (kf - 1.0);
        let var_b = cxx as f64 / denom;
        let var_genus = cyy as f64 / denom;
        let corr = if cxx == 0 || cyy == 0 {
            None
        } else {
            Some((cxy as f64 / ((cxx as f64).sqrt() * (cyy as f64).sqrt())).clamp(-1.0, 1.0))
        };
        let var_se = |v: f64| v * (2.0 / (kf - 1.0)).sqrt();
        Ok(MomentReport {
            samples: self.count,
            mean_b: self.sum_x as f64 / kf,
            var_b,
            mean_genus: self.sum_y as f64 / kf,
            var_genus,
            corr,
            se_mean_b: (var_b / kf).sqrt(),
            se_var_b: var_se(var_b),
            se_mean_genus: (var_genus / kf).sqrt(),
            se_var_genus: var_se(var_genus),
            se_corr: corr.map(|r| (1.0 - r * r) / kf.sqrt()),
        })
    }
}

/// Sample moments of (B, genus). `corr` is `None` when either coordinate
/// is constant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentReport {
    pub samples: u64,
    pub mean_b: f64,
    pub var_b: f64,
    pub mean_genus: f64,
    pub var_genus: f64,
    pub corr: Option<f64>,
    pub se_mean_b: f64,
    pub se_var_b: f64,
    pub se_mean_genus: f64,
    pub se_var_genus: f64,
    pub se_corr: Option<f64>,
}

pub fn empirical_moments<I>(pairs: I) -> Result<MomentReport, StatsError>
where
    I: IntoIterator<Item = (i64, i64)>,
{
    let mut tally = MomentTally::default();
    for (x, y) in pairs {
        tally.push(x, y);
    }
    tally.report()
}

pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// One-sample Kolmogorov–Smirnov distance to the standard normal.
pub fn ks_statistic(values: &[f64]) -> Result<f64, StatsError> {
    ks_statistic_with(values, standard_normal_cdf)
}

pub fn ks_statistic_with<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let k = sorted.len() as f64;
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            ((i + 1) as f64 / k - f).max(f - i as f64 / k)
        })
        .fold(0.0, f64::max))
}

/// Kolmogorov–Smirnov distance between integer data standardized by
/// `(center, scale)` and the standard normal, with continuity correction:
/// the empirical CDF at each lattice point `b` is compared with `Φ` at
/// `b + ½`.
pub fn ks_lattice(values: &[i64], center: f64, scale: f64) -> Result<f64, StatsError> {
    if values.is_empty() {
        return Err(StatsError::Empty);
    }
    let counts = histogram(values.iter().copied());
    let k = values.len() as f64;
    let lo = *counts.keys().next().expect("non-empty");
    let phi = |b: i64| standard_normal_cdf((b as f64 + 0.5 - center) / scale);
    let mut d = phi(lo - 1);
    let mut below = 0u64;
    for (&b, &c) in &counts {
        below += c;
        d = d.max((below as f64 / k - phi(b)).abs());
    }
    Ok(d)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChiSquare {
    pub statistic: f64,
    pub dof: usize,
}

/// Pearson chi-square of observed counts against a probability table.
/// Categories (in key order) are pooled until each pool expects ≥ 5.
pub fn chi_square<K>(
    observed: &BTreeMap<K, u64>,
    expected: &BTreeMap<K, f64>,
) -> Result<ChiSquare, StatsError>
where
    K: Ord + std::fmt::Debug,
{
    for key in observed.keys() {
        if !expected.contains_key(key) {
            return Err(StatsError::CategoryMismatch(format!("{key:?}")));
        }
    }
    let total: u64 = observed.values().sum();
    if total == 0 {
        return Err(StatsError::Empty);
    }
    let mass: f64 = expected.values().sum();
    if (mass - 1.0).abs() > 1e-9 {
        return Err(StatsError::NotNormalized(mass));
    }
    let k = total as f64;
    let mut pools: Vec<(f64, f64)> = Vec::new();
    let mut current = (0.0, 0.0);
    for (key, &p) in expected {
        current.0 += observed.get(key).copied().unwrap_or(0) as f64;
        current.1 += p * k;
        if current.1 >= 5.0 {
            pools.push(current);
            current = (0.0, 0.0);
        }
    }
    if current.1 > 0.0 || current.0 > 0.0 {
        match pools.last_mut() {
            Some(last) => {
                last.0 += current.0;
                last.1 += current.1;
            }
            None => pools.push(current),
        }
    }
    let statistic = pools.iter().map(|&(o, e)| (o - e) * (o - e) / e).sum();
    Ok(ChiSquare {
        statistic,
        dof: pools.len().saturating_sub(1),
    })
}

/// Half the L1 distance between two probability tables.
pub fn tv_distance<K: Ord>(p: &BTreeMap<K, f64>, q: &BTreeMap<K, f64>) -> f64 {
    let mut sum = 0.0;
    for (key, &a) in p {
        sum += (a - q.get(key).copied().unwrap_or(0.0)).abs();
    }
    for (key, &b) in q {
        if !p.contains_key(key) {
            sum += b.abs();
        }
    }
    (0.5 * sum).min(1.0)
}

/// Normalized histogram of a stream of keys.
pub fn empirical_table<K: Ord, I: IntoIterator<Item = K>>(items: I) -> BTreeMap<K, f64> {
    let counts = histogram(items);
    let total: u64 = counts.values().sum();
    counts
        .into_iter()
        .map(|(k, c)| (k, c as f64 / total as f64))
        .collect()
}

pub fn histogram<K: Ord, I: IntoIterator<Item = K>>(items: I) -> BTreeMap<K, u64> {
    let mut counts = BTreeMap::new();
    for item in items {
        *counts.entry(item).or_insert(0) += 1;
    }
    counts
}

/// Model parameters with exactly `darts` glued darts and no boundary.
fn closed_params(model: ModelKind, darts: usize) -> Result<ModelParams, StatsError> {
    let params = match model {
        ModelKind::TPrime if darts.is_multiple_of(3) => {
            ModelParams::with_triangles(model, darts / 3, 0)
        }
        ModelKind::SPrime => ModelParams::with_triangles(model, darts, 0),
        _ => return Err(StatsError::BadDartCount { model, darts }),
    };
    params.map_err(|_| StatsError::BadDartCount { model, darts })
}

/// Parity class `γ = α∘β` always falls in: `sign(α)·(−1)^(N/2)`.
pub fn gamma_parity(params: &ModelParams) -> Result<Parity, StatsError> {
    let alpha = crate::perm::canonical_rotation(params.rotation_shape())?;
    let half = params.matched_darts() / 2;
    let beta_sign: i8 = if half.is_multiple_of(2) { 1 } else { -1 };
    Ok(Parity::of_sign(alpha.sign() * beta_sign))
}

/// Projected TV distance between the empirical cycle-count law of `γ` and
/// the exact cycle-count law of a uniform permutation of the same parity.
pub fn gamma_uniformity_check(
    darts: usize,
    model: ModelKind,
    samples: usize,
    seed: u64,
) -> Result<f64, StatsError> {
    if samples == 0 {
        return Err(StatsError::Empty);
    }
    let params = closed_params(model, darts)?;
    let reference = oracle::rational_table_f64(&oracle::parity_conditioned_cycle_dist(
        darts,
        gamma_parity(&params)?,
    )?);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for i in 0..samples {
        let inst = build_instance(params, &mut substream(seed, i as u64))?;
        *counts.entry(inst.gamma()?.cycle_count()).or_insert(0) += 1;
    }
    let empirical = counts
        .into_iter()
        .map(|(c, n)| (c, n as f64 / samples as f64))
        .collect();
    Ok(tv_distance(&empirical, &reference))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sprime(n: usize, m: usize) -> ModelParams {
        ModelParams::with_triangles(ModelKind::SPrime, n, m).unwrap()
    }

    #[test]
    fn plan_constants() {
        let plan = ExperimentPlan::new(sprime(10_000, 100), 10, 1).unwrap();
        let r2 = plan.r() * plan.r();
        assert!((r2 - 100f64.ln() / 10_000f64.ln()).abs() < 1e-12);
        assert!((plan.r() - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(ExperimentPlan::new(sprime(4, 2), 1, 1).is_err());
        let closed = ExperimentPlan::new(sprime(4, 0), 2, 1).unwrap();
        assert_eq!(closed.r(), 0.0);
        assert!(matches!(
            closed.normalization(),
            Err(StatsError::NormalizationUndefined { .. })
        ));
    }

    #[test]
    fn normalization_arithmetic() {
        let plan = ExperimentPlan::new(sprime(1000, 50), 2, 0).unwrap();
        let norm = plan.normalization().unwrap();
        let at_center = norm.apply(norm.b_center, norm.genus_center);
        assert_eq!((at_center.b_hat, at_center.g_hat), (0.0, 0.0));
        // m = e², B = 4: (4 − 2)/√2
        let custom = Normalization {
            b_center: 2.0,
            b_scale: 2f64.sqrt(),
            genus_center: 0.0,
            genus_scale: 1.0,
        };
        assert!((custom.apply(4.0, 0.0).b_hat - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn targets_for_sprime_reference_case() {
        let plan = ExperimentPlan::new(sprime(10_000, 100), 2, 0).unwrap();
        let t = finite_size_targets(&plan).unwrap();
        assert!((t.mean_b - 5.187_377_517_639_621).abs() < 1e-12);
        // Independent direct summation of the indicator variances.
        let var_b: f64 = (1..=100)
            .map(|k| (1.0 / k as f64) * (1.0 - 1.0 / k as f64))
            .sum();
        let var_i: f64 = (101..=10_000)
            .map(|k| (1.0 / k as f64) * (1.0 - 1.0 / k as f64))
            .sum();
        assert!((t.var_b - var_b).abs() < 1e-12);
        assert!((t.var_i - var_i).abs() < 1e-12);
        assert!(
            (t.corr + 0.660_502_406_393_288_7).abs() < 1e-12,
            "corr {}",
            t.corr
        );
        let h_n: f64 = (1..=10_000).map(|k| 1.0 / k as f64).sum();
        assert!((t.mean_genus - (2500.5 - h_n / 2.0)).abs() < 1e-9);
    }

    #[test]
    fn targets_at_ribbon_endpoint_and_errors() {
        let plan = ExperimentPlan::new(sprime(40, 40), 2, 0).unwrap();
        assert_eq!(finite_size_targets(&plan).unwrap().corr, -1.0);
        let unprimed = ModelParams::with_triangles(ModelKind::S, 40, 4).unwrap();
        let plan = ExperimentPlan::new(unprimed, 2, 0).unwrap();
        assert!(matches!(
            finite_size_targets(&plan),
            Err(StatsError::UnprimedModel(ModelKind::S))
        ));
    }

    #[test]
    fn moments_of_fixtures() {
        let r = empirical_moments(vec![(3, 4); 10]).unwrap();
        assert_eq!((r.var_b, r.var_genus, r.corr), (0.0, 0.0, None));
        let r = empirical_moments((1..=50).map(|k| (k, -k))).unwrap();
        assert!((r.corr.unwrap() + 1.0).abs() < 1e-12);
        // (k, k mod 2) for k = 1..=100: closed-form moments.
        let r = empirical_moments((1..=100).map(|k| (k, k % 2))).unwrap();
        assert!((r.mean_b - 50.5).abs() < 1e-12);
        assert!((r.var_b - 100.0 * 101.0 / 12.0).abs() < 1e-9);
        assert!((r.mean_genus - 0.5).abs() < 1e-12);
        assert!((r.var_genus - 25.0 / 99.0).abs() < 1e-12);
        // cov = (Σ odd k − 100·50.5·0.5)/99 = (2500 − 2525)/99
        let cov = -25.0 / 99.0;
        let corr = cov / (r.var_b.sqrt() * r.var_genus.sqrt());
        assert!((r.corr.unwrap() - corr).abs() < 1e-12);
        assert!(empirical_moments(vec![(1, 1)]).is_err());
    }

    #[test]
    fn tallies_merge_associatively() {
        let data: Vec<(i64, i64)> = (0..300).map(|k| (k % 7, (k * k) % 11)).collect();
        let mut whole = MomentTally::default();
        data.iter().for_each(|&(x, y)| whole.push(x, y));
        let mut parts = MomentTally::default();
        for chunk in data.chunks(37) {
            let mut t = MomentTally::default();
            chunk.iter().for_each(|&(x, y)| t.push(x, y));
            parts.merge(&t);
        }
        assert_eq!(whole, parts);
    }

    #[test]
    fn ks_edge_cases() {
        assert_eq!(ks_statistic(&[0.0]).unwrap(), 0.5);
        assert!(ks_statistic(&[10.0; 20]).unwrap() > 1.0 - 1e-12);
        assert!(matches!(ks_statistic(&[]), Err(StatsError::Empty)));
    }

    #[test]
    fn ks_of_reference_sample() {
        use rand::SeedableRng;
        use rand_chacha::ChaCha8Rng;
        use rand_distr_free::normal;
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let values: Vec<f64> = (0..10_000).map(|_| normal(&mut rng)).collect();
        let d = ks_statistic(&values).unwrap();
        assert!(d <= 1.63 / 100.0, "D = {d}");
    }

    /// Box–Muller, kept local so the check does not share code with the
    /// statistic under test.
    mod rand_distr_free {
        use rand::Rng;
        pub fn normal<R: Rng>(rng: &mut R) -> f64 {
            let u1: f64 = 1.0 - rng.gen::<f64>();
            let u2: f64 = rng.gen();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }
    }

    #[test]
    fn lattice_ks_fixtures() {
        // Every mass at 0 with center 0: F jumps to 1 where Φ(½) ≈ 0.6915.
        let d = ks_lattice(&[0; 10], 0.0, 1.0).unwrap();
        assert!((d - (1.0 - standard_normal_cdf(0.5))).abs() < 1e-15);
        assert!(matches!(ks_lattice(&[], 0.0, 1.0), Err(StatsError::Empty)));
        // A wide symmetric lattice sample approximates the normal closely.
        let values: Vec<i64> = (-400..=400)
            .flat_map(|b: i64| {
                let w = (-(b as f64 / 100.0).powi(2) / 2.0).exp();
                std::iter::repeat_n(b, (w * 1000.0).round() as usize)
            })
            .collect();
        assert!(ks_lattice(&values, 0.0, 100.0).unwrap() < 0.01);
    }

    #[test]
    fn normal_cdf_values() {
        assert!((standard_normal_cdf(0.0) - 0.5).abs() < 1e-15);
        assert!((standard_normal_cdf(1.959_963_984_540_054) - 0.975).abs() < 1e-12);
        assert!((standard_normal_cdf(-1.0) - 0.158_655_253_931_457_05).abs() < 1e-12);
    }

    #[test]
    fn chi_square_examples() {
        let expected = BTreeMap::from([(0, 0.5), (1, 0.5)]);
        let c = chi_square(&BTreeMap::from([(0, 60u64), (1, 40)]), &expected).unwrap();
        assert!((c.statistic - 4.0).abs() < 1e-12);
        assert_eq!(c.dof, 1);
        let c = chi_square(&BTreeMap::from([(0, 50u64), (1, 50)]), &expected).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert!(matches!(
            chi_square(&BTreeMap::from([(2, 1u64)]), &expected),
            Err(StatsError::CategoryMismatch(_))
        ));
    }

    #[test]
    fn chi_square_pools_sparse_tail() {
        // Expected counts 60, 30, 6, 3, 1 at K = 100: the last two merge into the third.
        let expected = BTreeMap::from([(1, 0.6), (2, 0.3), (3, 0.06), (4, 0.03), (5, 0.01)]);
        let observed = BTreeMap::from([(1, 60u64), (2, 30), (3, 5), (4, 4), (5, 1)]);
        let c = chi_square(&observed, &expected).unwrap();
        assert_eq!(c.dof, 2);
        assert!(c.statistic.abs() < 1e-12);
    }

    #[test]
    fn tv_examples() {
        let p = BTreeMap::from([(0, 0.5), (1, 0.5)]);
        assert_eq!(tv_distance(&p, &p), 0.0);
        let disjoint = BTreeMap::from([(2, 1.0)]);
        assert_eq!(tv_distance(&p, &disjoint), 1.0);
        let q = BTreeMap::from([(0, 0.75), (1, 0.25)]);
        assert!((tv_distance(&p, &q) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn gamma_check_small_cases() {
        assert_eq!(
            gamma_uniformity_check(2, ModelKind::SPrime, 50, 3).unwrap(),
            0.0
        );
        let d = gamma_uniformity_check(60, ModelKind::TPrime, 10, 3).unwrap();
        assert!(d > 0.0 && d <= 1.0);
        assert!(gamma_uniformity_check(10, ModelKind::TPrime, 10, 3).is_err());
        assert!(gamma_uniformity_check(10, ModelKind::S, 10, 3).is_err());
    }
}
