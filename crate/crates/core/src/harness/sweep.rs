use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::harness::{evaluate, generate_dataset, train, training_theory, Regularizer, Split, TrainConfig};

/// Label-reduction experiment: every (retention, seed, regularizer) cell
/// trains one model from scratch and is scored on the test split.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub base: TrainConfig,
    pub retentions: Vec<f64>,
    pub seeds: Vec<u64>,
    pub regularizers: Vec<Regularizer>,
    pub jobs: usize,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            base: TrainConfig::default(),
            retentions: vec![1.0, 0.9, 0.8, 0.7, 0.6, 0.5],
            seeds: (0..5).collect(),
            regularizers: vec![Regularizer::None, Regularizer::NgpSl],
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub retention: f64,
    pub seed: u64,
    pub regularizer: Regularizer,
    /// Training samples that kept their labels.
    pub labelled: usize,
    pub mr20: f64,
    pub zsr20: f64,
    pub mr100: f64,
    pub zsr100: f64,
}

fn run_cell(base: &TrainConfig, retention: f64, seed: u64, regularizer: Regularizer) -> Result<SweepRow> {
    let mut cfg = base.clone();
    cfg.world.retention = retention;
    cfg.world.seed = seed;
    cfg.regularizer = regularizer;
    let data = generate_dataset(&cfg.world)?;
    let store = training_theory(&cfg, &data)?;
    let out = train(&cfg, &data, &store)?;
    let r = evaluate(&out.model, &data, Split::Test, &[20, 100])?;
    Ok(SweepRow {
        retention,
        seed,
        regularizer,
        labelled: cfg.world.labelled_count(),
        mr20: r[0].mean_recall.mean,
        zsr20: r[0].zero_shot.value,
        mr100: r[1].mean_recall.mean,
        zsr100: r[1].zero_shot.value,
    })
}

/// Runs every cell, `jobs` at a time. Rows come back in (retention, seed,
/// regularizer) input order regardless of scheduling.
pub fn run_reduction_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    if cfg.retentions.is_empty() || cfg.seeds.is_empty() || cfg.regularizers.is_empty() {
        return Err(Error::Validation(
            "sweep needs retentions, seeds and regularizers".into(),
        ));
    }
    if let Some(r) = cfg.retentions.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Validation(format!("retention {r} outside [0, 1]")));
    }
    let cells: Vec<(f64, u64, Regularizer)> = cfg
        .retentions
        .iter()
        .flat_map(|&r| {
            cfg.seeds
                .iter()
                .flat_map(move |&s| cfg.regularizers.iter().map(move |&g| (r, s, g)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs.max(1))
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    pool.install(|| {
        cells
            .par_iter()
            .map(|&(r, s, g)| run_cell(&cfg.base, r, s, g))
            .collect::<Result<Vec<_>>>()
    })
}

/// `retention,seed,regularizer,mR@100,zsR@100`.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("retention,seed,regularizer,mR@100,zsR@100\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{:?},{:?}",
            r.retention, r.seed, r.regularizer, r.mr100, r.zsr100
        )
        .unwrap();
    }
    s
}

/// Same rows with the k = 20 metrics and the labelled-sample count.
pub fn sweep_detail_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("retention,seed,regularizer,labelled,mR@20,zsR@20,mR@100,zsR@100\n");
    for r in rows {
        writeln!(
            s,
            "{},{},{},{},{:?},{:?},{:?},{:?}",
            r.retention, r.seed, r.regularizer, r.labelled, r.mr20, r.zsr20, r.mr100, r.zsr100
        )
        .unwrap();
    }
    s
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    match v.len() {
        0 => f64::NAN,
        n if n % 2 == 1 => v[n / 2],
        n => (v[n / 2 - 1] + v[n / 2]) / 2.0,
    }
}
