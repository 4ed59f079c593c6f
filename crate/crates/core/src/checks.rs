//! Randomized self-checks run by the `check` and `bench` commands: exact
//! constraint counting against enumeration, analytic loss gradients against
//! central differences, greedy against exhaustive selection, and theory
//! throughput at scale.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logic::{
    conjunction_of_ics, wmc, wmc_ic_conjunction, Domain, Fact, IcSystem, IntegrityConstraint, PredictionVector,
    TermRef, Vocabulary,
};
use crate::losses::{dl2_loss, loss_gradient, loss_of_ic_set, semantic_loss, LossKind, LossTarget};
use crate::ngp::{exhaustive_select, greedy_select, SelectionConfig};
use crate::theory::{build_complement_of_facts, TheoryStore};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Proposition1,
    Wmc,
    Gradients,
    All,
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "proposition1" => Ok(Suite::Proposition1),
            "wmc" => Ok(Suite::Wmc),
            "gradients" => Ok(Suite::Gradients),
            "all" => Ok(Suite::All),
            _ => Err(Error::Validation(format!(
                "unknown suite {s:?} (expected proposition1, wmc, gradients or all)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: Vec<String>,
    pub max_error: f64,
    pub note: String,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{:<14} {:>6} cases  {:>4} failed  max err {:.3e}  {}  {}",
            self.name,
            self.cases,
            self.failures.len(),
            self.max_error,
            if self.passed() { "PASS" } else { "FAIL" },
            self.note
        )
    }
}

/// Random activations in `[0.02, 0.98]` for one slot.
pub fn random_prediction<R: Rng + ?Sized>(sizes: [usize; 3], rng: &mut R) -> PredictionVector {
    let mut d = sizes.map(|n| (0..n).map(|_| rng.random_range(0.02..0.98)).collect::<Vec<f64>>());
    PredictionVector::single(
        std::mem::take(&mut d[0]),
        std::mem::take(&mut d[1]),
        std::mem::take(&mut d[2]),
    )
    .expect("activations in range")
}

/// Up to `max` distinct random constraints over a `sizes` vocabulary.
pub fn random_ics<R: Rng + ?Sized>(sizes: [usize; 3], max: usize, rng: &mut R) -> Vec<IntegrityConstraint> {
    let space = sizes.iter().product::<usize>();
    let n = rng.random_range(1..=max.min(space));
    let mut keys: Vec<usize> = sample(rng, space, n).into_vec();
    keys.sort_unstable();
    keys.into_iter()
        .map(|k| {
            let o = k % sizes[2];
            let p = (k / sizes[2]) % sizes[1];
            let s = k / (sizes[1] * sizes[2]);
            IntegrityConstraint::new(Fact::new(s as u32, p as u32, o as u32))
        })
        .collect()
}

fn random_sizes<R: Rng + ?Sized>(rng: &mut R, max_vars: usize) -> [usize; 3] {
    loop {
        let s = [
            rng.random_range(1..=4),
            rng.random_range(1..=4),
            rng.random_range(1..=4),
        ];
        if s.iter().sum::<usize>() <= max_vars {
            return s;
        }
    }
}

/// Constraint-conjunction counting against enumeration over all variable
/// assignments (at most 8 constraints, 12 variables).
pub fn wmc_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        name: "wmc",
        cases,
        failures: Vec::new(),
        max_error: 0.0,
        note: String::new(),
    };
    for case in 0..cases {
        let sizes = random_sizes(&mut rng, 12);
        let ics = random_ics(sizes, 8, &mut rng);
        let w = random_prediction(sizes, &mut rng);
        let fast = wmc_ic_conjunction(&ics, &w, 0)?;
        let slow = wmc(&conjunction_of_ics(&ics)?, &w, 0)?;
        let err = (fast - slow).abs();
        report.max_error = report.max_error.max(err);
        if err > 1e-12 {
            report.failures.push(format!("case {case}: {fast} vs {slow}"));
        }
    }
    Ok(report)
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-3)
}

/// Analytic gradients of both losses against central differences.
pub fn gradient_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        name: "gradients",
        cases,
        failures: Vec::new(),
        max_error: 0.0,
        note: "relative error, floor 1e-3".into(),
    };
    let h = 1e-6;
    for case in 0..cases {
        let sizes = random_sizes(&mut rng, 10);
        let ics = random_ics(sizes, 6, &mut rng);
        let w = random_prediction(sizes, &mut rng);
        let formula = conjunction_of_ics(&ics)?;
        for kind in [LossKind::Sl, LossKind::Dl2] {
            for target in [LossTarget::Ics(&ics), LossTarget::Formula(&formula)] {
                let grad = loss_gradient(kind, target, &w, 0)?;
                let value = |w: &PredictionVector| -> Result<f64> {
                    match target {
                        LossTarget::Ics(ics) => loss_of_ic_set(kind, ics, w, 0),
                        LossTarget::Formula(f) => match kind {
                            LossKind::Sl => semantic_loss(f, w, 0),
                            LossKind::Dl2 => dl2_loss(f, w, 0),
                        },
                    }
                };
                for (d, n) in sizes.iter().enumerate() {
                    for id in 0..*n as u32 {
                        let t = TermRef {
                            domain: Domain::ALL[d],
                            id,
                        };
                        let x = w.get(0, t).unwrap();
                        let fd =
                            (value(&w.with_value(0, t, x + h)?)? - value(&w.with_value(0, t, x - h)?)?) / (2.0 * h);
                        let an = grad.get(&t).copied().unwrap_or(0.0);
                        let err = rel_err(an, fd);
                        report.max_error = report.max_error.max(err);
                        if err > 1e-5 {
                            report
                                .failures
                                .push(format!("case {case} {kind} {t}: analytic {an}, numeric {fd}"));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

/// Greedy selection against the exhaustive subset maximum. DL2 must match
/// exactly; SL within 1e-12 whenever the greedy constraints share no
/// variables.
pub fn proposition1_suite(cases: usize, seed: u64) -> Result<SuiteReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = SuiteReport {
        name: "proposition1",
        cases,
        failures: Vec::new(),
        max_error: 0.0,
        note: String::new(),
    };
    let mut disjoint = 0;
    for case in 0..cases {
        let sizes = [
            rng.random_range(2..=4),
            rng.random_range(2..=4),
            rng.random_range(2..=4),
        ];
        let ics = random_ics(sizes, 12, &mut rng);
        let w = random_prediction(sizes, &mut rng);
        let rho = rng.random_range(1..=3);
        let vocab = Arc::new(Vocabulary::with_sizes(sizes[0], sizes[1], sizes[2])?);
        let store = TheoryStore::explicit(vocab, ics.iter().map(|ic| ic.fact))?;
        for kind in [LossKind::Dl2, LossKind::Sl] {
            let cfg = SelectionConfig::new(rho, kind)?;
            let greedy = greedy_select(&w, 0, &store, &cfg)?;
            let best = exhaustive_select(&w, 0, &ics, rho, kind)?;
            let lg = loss_of_ic_set(kind, &greedy, &w, 0)?;
            let lb = loss_of_ic_set(kind, &best, &w, 0)?;
            match kind {
                LossKind::Dl2 => {
                    if lg != lb {
                        report
                            .failures
                            .push(format!("case {case} dl2: greedy {lg} vs exhaustive {lb}"));
                    }
                }
                LossKind::Sl => {
                    if IcSystem::new(&greedy)?.all_disjoint() {
                        disjoint += 1;
                        let err = (lg - lb).abs();
                        report.max_error = report.max_error.max(err);
                        if err > 1e-12 {
                            report
                                .failures
                                .push(format!("case {case} sl: greedy {lg} vs exhaustive {lb}"));
                        }
                    }
                }
            }
        }
    }
    report.note = format!(
        "sl disjoint cases {disjoint}/{cases} ({:.1}%)",
        100.0 * disjoint as f64 / cases.max(1) as f64
    );
    Ok(report)
}

pub fn run_suites(suite: Suite, cases: usize, seed: u64) -> Result<Vec<SuiteReport>> {
    let mut out = Vec::new();
    if matches!(suite, Suite::Proposition1 | Suite::All) {
        out.push(proposition1_suite(cases, seed)?);
    }
    if matches!(suite, Suite::Wmc | Suite::All) {
        out.push(wmc_suite(cases, seed)?);
    }
    if matches!(suite, Suite::Gradients | Suite::All) {
        out.push(gradient_suite(cases, seed)?);
    }
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: [usize; 3],
    pub positives: usize,
    pub queries: usize,
    pub samples: usize,
    pub rho: usize,
    /// Threads used for the membership probes.
    pub jobs: usize,
    pub seed: u64,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            sizes: [150, 50, 150],
            positives: 100_000,
            queries: 1_000_000,
            samples: 10_000,
            rho: 3,
            jobs: 1,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    pub ic_count: u64,
    pub build_seconds: f64,
    pub queries_per_second: f64,
    pub select_ms_per_sample: f64,
}

/// Peaked random activations: one softmax per domain over Gaussian logits.
pub fn random_softmax_prediction<R: Rng + ?Sized>(sizes: [usize; 3], scale: f64, rng: &mut R) -> PredictionVector {
    let mut d = sizes.map(|n| {
        let z: Vec<f64> = (0..n).map(|_| scale * (rng.random::<f64>() - 0.5)).collect();
        let m = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = z.iter().map(|v| (v - m).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|v| v / s).collect::<Vec<f64>>()
    });
    PredictionVector::single(
        std::mem::take(&mut d[0]),
        std::mem::take(&mut d[1]),
        std::mem::take(&mut d[2]),
    )
    .expect("softmax output in range")
}

/// Fact-complement theory build, membership throughput and greedy selection
/// latency.
pub fn scale_bench(cfg: &BenchConfig) -> Result<BenchReport> {
    let [ns, np, no] = cfg.sizes;
    let space = ns * np * no;
    if cfg.positives > space {
        return Err(Error::Validation(format!(
            "{} positives exceed the fact space {space}",
            cfg.positives
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = Arc::new(Vocabulary::with_sizes(ns, np, no)?);
    let positives: HashSet<Fact> = sample(&mut rng, space, cfg.positives)
        .into_iter()
        .map(|k| Fact::new((k / (np * no)) as u32, ((k / no) % np) as u32, (k % no) as u32))
        .collect();

    let t = Instant::now();
    let store = build_complement_of_facts(vocab, &positives)?;
    let build_seconds = t.elapsed().as_secs_f64();

    let probes: Vec<Fact> = (0..cfg.queries.max(1))
        .map(|_| {
            Fact::new(
                rng.random_range(0..ns as u32),
                rng.random_range(0..np as u32),
                rng.random_range(0..no as u32),
            )
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    let chunk = probes.len().div_ceil(cfg.jobs.max(1));
    let t = Instant::now();
    let hits: usize = pool.install(|| {
        probes
            .par_chunks(chunk)
            .map(|c| c.iter().filter(|f| store.contains_ic(**f)).count())
            .sum()
    });
    let q_secs = t.elapsed().as_secs_f64().max(1e-9);
    std::hint::black_box(hits);

    let sel = SelectionConfig::new(cfg.rho, LossKind::Sl)?;
    let preds: Vec<PredictionVector> = (0..cfg.samples.max(1))
        .map(|_| random_softmax_prediction(cfg.sizes, 8.0, &mut rng))
        .collect();
    let t = Instant::now();
    for w in &preds {
        std::hint::black_box(greedy_select(w, 0, &store, &sel)?);
    }
    let sel_secs = t.elapsed().as_secs_f64();

    Ok(BenchReport {
        ic_count: store.ic_count(),
        build_seconds,
        queries_per_second: probes.len() as f64 / q_secs,
        select_ms_per_sample: 1e3 * sel_secs / preds.len() as f64,
    })
}
