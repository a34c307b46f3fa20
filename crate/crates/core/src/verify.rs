//! The verification suite: each criterion runs an experiment and compares it
//! against an exact reference or an exact invariant at a fixed tolerance.

use std::collections::BTreeMap;
use std::time::Instant;

use crate::experiment::{run_samples, sample_instance, with_workers};
use crate::gluing::{GluingInstance, ModelKind, ModelParams, SurfaceSummary};
use crate::oracle::{self, exact_joint, harmonic_refs, Outcome};
use crate::perm::canonical_rotation;
use crate::report::{fmt_f64, json_escape, sample_json};
use crate::stats::{
    self, chi_square, empirical_table, finite_size_targets, histogram, ks_lattice, tv_distance,
    ExperimentPlan, MomentTally,
};

/// Chi-square critical value at α = 0.001 with 2 degrees of freedom.
pub const CHI2_CRIT_DOF2_ALPHA_001: f64 = 13.8;

#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub id: &'static str,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

impl Verdict {
    pub fn to_json(&self) -> String {
        format!(
            "{{\"id\":\"{}\",\"title\":\"{}\",\"passed\":{},\"seconds\":{},\"detail\":\"{}\"}}",
            self.id,
            json_escape(self.title),
            self.passed,
            fmt_f64(self.seconds),
            json_escape(&self.detail)
        )
    }

    pub fn line(&self) -> String {
        format!(
            "[{}] {:<13} {} ({:.1} s): {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.seconds,
            self.detail
        )
    }
}

type Check = fn() -> Result<(bool, String), String>;

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    check: Check,
}

pub const CRITERIA: &[Criterion] = &[
    Criterion {
        id: "oracle",
        title: "Monte Carlo matches exact enumeration",
        check: check_oracle,
    },
    Criterion {
        id: "euler",
        title: "Euler identity on every sample",
        check: check_euler,
    },
    Criterion {
        id: "shortcut",
        title: "gamma shortcut equals boundary walk",
        check: check_shortcut,
    },
    Criterion {
        id: "parity",
        title: "parity law of gamma",
        check: check_parity,
    },
    Criterion {
        id: "stirling",
        title: "fixed-m boundary law is Stirling",
        check: check_stirling,
    },
    Criterion {
        id: "theorem",
        title: "finite-size moments and normality",
        check: check_theorem,
    },
    Criterion {
        id: "corollary",
        title: "S reduces to S' for small m",
        check: check_corollary,
    },
    Criterion {
        id: "connectivity",
        title: "connectivity trend of T'",
        check: check_connectivity,
    },
    Criterion {
        id: "ribbon",
        title: "ribbon-graph endpoint m = n",
        check: check_ribbon,
    },
    Criterion {
        id: "gamma",
        title: "gamma near-uniform in cycle count",
        check: check_gamma,
    },
    Criterion {
        id: "performance",
        title: "throughput and parallel determinism",
        check: check_performance,
    },
];

pub fn criterion_ids() -> Vec<&'static str> {
    CRITERIA.iter().map(|c| c.id).collect()
}

pub fn run_criterion(criterion: &Criterion) -> Verdict {
    let start = Instant::now();
    let (passed, detail) = match (criterion.check)() {
        Ok(outcome) => outcome,
        Err(e) => (false, format!("error: {e}")),
    };
    Verdict {
        id: criterion.id,
        title: criterion.title,
        passed,
        detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

/// Runs every criterion, or only `only`. `None` when `only` names no criterion.
pub fn run_suite(only: Option<&str>) -> Option<Vec<Verdict>> {
    let selected: Vec<&Criterion> = CRITERIA
        .iter()
        .filter(|c| only.is_none_or(|id| c.id == id))
        .collect();
    if selected.is_empty() {
        return None;
    }
    Some(selected.into_iter().map(run_criterion).collect())
}

pub fn find(id: &str) -> Option<&'static Criterion> {
    CRITERIA.iter().find(|c| c.id == id)
}

fn params(kind: ModelKind, n: usize, m: usize, t: usize) -> Result<ModelParams, String> {
    ModelParams::new(kind, n, m, t).map_err(|e| e.to_string())
}

fn summaries(p: ModelParams, seed: u64, k: usize) -> Result<Vec<SurfaceSummary>, String> {
    run_samples(p, seed, k, None).map_err(|e| e.to_string())
}

fn outcome_table(samples: &[SurfaceSummary]) -> BTreeMap<Outcome, f64> {
    empirical_table(samples.iter().map(|s| Outcome {
        b: s.b,
        genus: s.genus,
        connected: s.connected,
    }))
}

fn check_oracle() -> Result<(bool, String), String> {
    const K: usize = 1_000_000;
    let start = Instant::now();
    let tprime = params(ModelKind::TPrime, 2, 1, 3)?;
    let exact = exact_joint(&tprime).map_err(|e| e.to_string())?;
    let tv_t = tv_distance(&outcome_table(&summaries(tprime, 101, K)?), &exact.table());

    let s4 = params(ModelKind::S, 4, 0, 3)?;
    let reference = BTreeMap::from([
        (
            Outcome {
                b: 0,
                genus: 0,
                connected: true,
            },
            2.0 / 3.0,
        ),
        (
            Outcome {
                b: 0,
                genus: 1,
                connected: true,
            },
            1.0 / 3.0,
        ),
    ]);
    let tv_s = tv_distance(&outcome_table(&summaries(s4, 102, K)?), &reference);
    let secs = start.elapsed().as_secs_f64();
    Ok((
        tv_t <= 0.01 && tv_s <= 0.005 && secs <= 30.0,
        format!(
            "T'(2,1) TV {tv_t:.5} (<= 0.01, {} cases); S(4,0) TV {tv_s:.5} (<= 0.005); {secs:.1} s (<= 30)",
            exact.total_cases()
        ),
    ))
}

/// Model grid covering all four models, t in {3,4,5} and
/// m in {0, 1, ⌈√n⌉, n/2}.
fn mixed_grid(kinds: &[ModelKind]) -> Vec<ModelParams> {
    let mut grid = Vec::new();
    for &kind in kinds {
        let ts: &[usize] = if kind.is_single_polygon() {
            &[3]
        } else {
            &[3, 4, 5]
        };
        for &t in ts {
            for n in [4usize, 16, 64] {
                let root = (n as f64).sqrt().ceil() as usize;
                for m in [0, 1, root, n / 2] {
                    if let Ok(p) = ModelParams::new(kind, n, m, t) {
                        grid.push(p);
                    }
                }
            }
        }
    }
    grid
}

fn check_euler() -> Result<(bool, String), String> {
    const K: usize = 100_000;
    let grid = mixed_grid(&ModelKind::ALL);
    let mut failures = 0;
    for i in 0..K {
        let p = grid[i % grid.len()];
        let inst = sample_instance(p, 202, i as u64).map_err(|e| e.to_string())?;
        let s = inst.summarize();
        if !s.euler_identity_holds() || s.b > p.m() || s.components == 0 {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!(
            "{failures} failures in {K} samples over {} configurations",
            grid.len()
        ),
    ))
}

/// Compares the `γ` shortcut against a boundary-walk implementation on
/// random primed samples; returns the number of disagreements.
pub fn shortcut_disagreements(
    samples: usize,
    seed: u64,
    walk: &dyn Fn(&GluingInstance) -> usize,
) -> Result<usize, String> {
    let grid = mixed_grid(&[ModelKind::TPrime, ModelKind::SPrime]);
    let mut failures = 0;
    for i in 0..samples {
        let p = grid[i % grid.len()];
        let inst = sample_instance(p, seed, i as u64).map_err(|e| e.to_string())?;
        let gamma = inst.gamma().map_err(|e| e.to_string())?;
        let split = crate::gluing::boundary_shortcut(&gamma, inst.insertions())
            .map_err(|e| e.to_string())?;
        let classes = inst.vertex_classes();
        if walk(&inst) != split.boundary
            || classes.internal != split.internal
            || classes.boundary != p.m()
        {
            failures += 1;
        }
    }
    Ok(failures)
}

fn check_shortcut() -> Result<(bool, String), String> {
    const K: usize = 100_000;
    let failures = shortcut_disagreements(K, 303, &|inst| inst.boundary_walk().count())?;
    Ok((
        failures == 0,
        format!("{failures} disagreements in {K} T'/S' samples"),
    ))
}

fn check_parity() -> Result<(bool, String), String> {
    const K: usize = 100_000;
    let grid = mixed_grid(&[ModelKind::TPrime, ModelKind::SPrime]);
    let mut failures = 0;
    for i in 0..K {
        let p = grid[i % grid.len()];
        let inst = sample_instance(p, 404, i as u64).map_err(|e| e.to_string())?;
        let gamma = inst.gamma().map_err(|e| e.to_string())?;
        let alpha = canonical_rotation(p.rotation_shape()).map_err(|e| e.to_string())?;
        let half = p.matched_darts() / 2;
        let expected_sign = alpha.sign() * if half.is_multiple_of(2) { 1 } else { -1 };
        let s = inst.summarize();
        // sign(γ) = (−1)^(N − cycles), and cycles = B + I.
        let cycles_parity = (p.matched_darts() + if expected_sign > 0 { 0 } else { 1 }) % 2;
        if gamma.sign() != expected_sign || (s.b + s.i) % 2 != cycles_parity {
            failures += 1;
        }
    }
    Ok((
        failures == 0,
        format!("{failures} violations in {K} samples"),
    ))
}

fn check_stirling() -> Result<(bool, String), String> {
    const K: usize = 100_000;
    let p = params(ModelKind::SPrime, 2000, 3, 3)?;
    let observed = histogram(summaries(p, 505, K)?.iter().map(|s| s.b));
    let law = oracle::stirling_first(3)
        .map_err(|e| e.to_string())?
        .cycle_law();
    let chi = chi_square(&observed, &law).map_err(|e| e.to_string())?;
    Ok((
        chi.dof == 2 && chi.statistic < CHI2_CRIT_DOF2_ALPHA_001,
        format!(
            "chi2 {:.3} with dof {} (< {CHI2_CRIT_DOF2_ALPHA_001}); counts {:?}",
            chi.statistic, chi.dof, observed
        ),
    ))
}

fn check_theorem() -> Result<(bool, String), String> {
    const K: usize = 10_000;
    let p = params(ModelKind::SPrime, 10_000, 100, 3)?;
    let plan = ExperimentPlan::new(p, K, 606).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let samples = run_samples(p, plan.master_seed, K, Some(1)).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();

    let mut tally = MomentTally::default();
    for s in &samples {
        tally.push(s.b as i64, s.genus as i64);
    }
    let report = tally.report().map_err(|e| e.to_string())?;
    let targets = finite_size_targets(&plan).map_err(|e| e.to_string())?;
    let h_100 = harmonic_refs(100).0;
    let h_n = harmonic_refs(10_000).0;
    let genus_target = 10_000.0 / 4.0 + 0.5 - h_n / 2.0;
    let corr = report.corr.unwrap_or(f64::NAN);

    let bs: Vec<i64> = samples.iter().map(|s| s.b as i64).collect();
    let ks = ks_lattice(&bs, targets.mean_b, targets.var_b.sqrt()).map_err(|e| e.to_string())?;
    let norm = plan.normalization().map_err(|e| e.to_string())?;
    let b_hat: Vec<f64> = samples
        .iter()
        .map(|s| norm.apply(s.b as f64, s.genus as f64).b_hat)
        .collect();
    let ks_asymptotic = stats::ks_statistic(&b_hat).map_err(|e| e.to_string())?;

    let d_b = (report.mean_b - h_100).abs();
    let d_g = (report.mean_genus - genus_target).abs();
    let d_c = (corr - targets.corr).abs();
    Ok((
        d_b <= 0.05 && d_g <= 0.1 && d_c <= 0.03 && ks <= 0.05 && secs <= 120.0,
        format!(
            "|mean_B - H_100| {d_b:.4} (<= 0.05); |mean_genus - target| {d_g:.4} (<= 0.1); \
             corr {corr:.4} vs {:.4}, diff {d_c:.4} (<= 0.03); KS {ks:.4} (<= 0.05, finite-size \
             centering, continuity corrected; asymptotic b_hat KS {ks_asymptotic:.4} reported only); \
             r {:.4}; sampling {secs:.1} s (<= 120)",
            targets.corr,
            plan.r()
        ),
    ))
}

/// True when no two boundary sides of an S instance are cyclically adjacent.
pub fn boundary_sides_separated(inst: &GluingInstance) -> bool {
    let free = inst.free_darts();
    let total = inst.side_count();
    let adjacent = free.windows(2).any(|w| w[1] == w[0] + 1);
    let wraps = free.len() >= 2 && free[0] == 0 && free[free.len() - 1] == total - 1;
    !(adjacent || wraps)
}

fn check_corollary() -> Result<(bool, String), String> {
    const K: usize = 100_000;
    let s = params(ModelKind::S, 10_000, 10, 3)?;
    let sp = params(ModelKind::SPrime, 10_000, 10, 3)?;
    let (separated, s_outcomes) = with_workers(None, || {
        use rayon::prelude::*;
        (0..K)
            .into_par_iter()
            .map(|i| {
                let inst = sample_instance(s, 707, i as u64).map_err(|e| e.to_string())?;
                let sum = inst.summarize();
                Ok((boundary_sides_separated(&inst), (sum.b, sum.genus)))
            })
            .collect::<Result<Vec<_>, String>>()
    })
    .map_err(|e| e.to_string())??
    .into_iter()
    .fold((0usize, Vec::with_capacity(K)), |(n, mut v), (sep, o)| {
        v.push(o);
        (n + sep as usize, v)
    });
    let fraction = separated as f64 / K as f64;
    let s_table = empirical_table(s_outcomes);
    let sp_table = empirical_table(summaries(sp, 708, K)?.iter().map(|x| (x.b, x.genus)));
    let tv = tv_distance(&s_table, &sp_table);
    Ok((
        fraction >= 0.95 && tv <= 0.05,
        format!(
            "separated fraction {fraction:.4} (>= 0.95); TV(S, S') on (B, genus) {tv:.4} (<= 0.05)"
        ),
    ))
}

fn check_connectivity() -> Result<(bool, String), String> {
    const K: usize = 10_000;
    let mut fractions = Vec::new();
    for (j, n) in [50usize, 200, 800].into_iter().enumerate() {
        let m = (n as f64).sqrt().ceil() as usize;
        let p = params(ModelKind::TPrime, n, m, 3)?;
        let connected = summaries(p, 800 + j as u64, K)?
            .iter()
            .filter(|s| s.connected)
            .count();
        fractions.push((n, connected as f64 / K as f64));
    }
    let se = |f: f64| (f * (1.0 - f) / K as f64).sqrt();
    let monotone = fractions.windows(2).all(|w| {
        let (a, b) = (w[0].1, w[1].1);
        b + 2.0 * (se(a).powi(2) + se(b).powi(2)).sqrt() >= a
    });
    let last = fractions[2].1;
    Ok((
        last >= 0.9 && monotone,
        format!("connected fractions {fractions:?}; n=800 >= 0.9; nondecreasing within 2 SE: {monotone}"),
    ))
}

fn check_ribbon() -> Result<(bool, String), String> {
    const K: usize = 10_000;
    const N: usize = 1000;
    let p = params(ModelKind::SPrime, N, N, 3)?;
    let samples = summaries(p, 909, K)?;
    let bad = samples
        .iter()
        .filter(|s| s.i != 0 || !s.connected || 2 * s.genus + s.b != N / 2 + 1)
        .count();
    Ok((
        bad == 0,
        format!("{bad} of {K} S'({N},{N}) samples violate I = 0, 2 genus + B = n/2 + 1"),
    ))
}

fn check_gamma() -> Result<(bool, String), String> {
    let d = with_workers(None, || gamma_check_parallel(60, 1_000_000, 1010))
        .map_err(|e| e.to_string())??;
    Ok((
        d <= 0.05,
        format!("cycle-count TV at N=60, K=1e6: {d:.5} (<= 0.05)"),
    ))
}

fn gamma_check_parallel(darts: usize, k: usize, seed: u64) -> Result<f64, String> {
    use rayon::prelude::*;
    let p = params(ModelKind::TPrime, darts / 3, 0, 3)?;
    let reference = oracle::rational_table_f64(
        &oracle::parity_conditioned_cycle_dist(
            darts,
            stats::gamma_parity(&p).map_err(|e| e.to_string())?,
        )
        .map_err(|e| e.to_string())?,
    );
    let counts: Vec<usize> = (0..k)
        .into_par_iter()
        .map(|i| {
            let inst = sample_instance(p, seed, i as u64).map_err(|e| e.to_string())?;
            Ok(inst.gamma().map_err(|e| e.to_string())?.cycle_count())
        })
        .collect::<Result<_, String>>()?;
    Ok(tv_distance(&empirical_table(counts), &reference))
}

/// JSONL bytes for `k` samples on `threads` workers.
pub fn jsonl_bytes(p: ModelParams, seed: u64, k: usize, threads: usize) -> Result<Vec<u8>, String> {
    let samples = run_samples(p, seed, k, Some(threads)).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (i, s) in samples.iter().enumerate() {
        out.extend_from_slice(sample_json(&p, seed, i as u64, s).as_bytes());
        out.push(b'\n');
    }
    Ok(out)
}

fn check_performance() -> Result<(bool, String), String> {
    let big = params(ModelKind::SPrime, 1_000_000, 1_000, 3)?;
    let start = Instant::now();
    let one = sample_instance(big, 1111, 0)
        .map_err(|e| e.to_string())?
        .summarize();
    let single = start.elapsed().as_secs_f64();

    let p = params(ModelKind::SPrime, 10_000, 100, 3)?;
    let start = Instant::now();
    let serial = jsonl_bytes(p, 1112, 10_000, 1)?;
    let serial_secs = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let parallel = jsonl_bytes(p, 1112, 10_000, 4)?;
    let parallel_secs = start.elapsed().as_secs_f64();
    let speedup = serial_secs / parallel_secs;
    let identical = serial == parallel;
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    Ok((
        single <= 1.0 && serial_secs <= 60.0 && speedup >= 3.0 && identical,
        format!(
            "S'(1e6,1e3) sample {single:.3} s (<= 1, genus {}); 1e4 S'(1e4) serial {serial_secs:.2} s (<= 60); \
             4 workers {parallel_secs:.2} s, speedup {speedup:.2}x (>= 3) on {cores} available cores; \
             byte-identical: {identical}",
            one.genus
        ),
    ))
}
