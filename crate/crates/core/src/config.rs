//! `key = value` configuration files for training and sweeps.
//!
//! Blank lines and `#` comments are ignored. Every key is optional; absent
//! keys keep their defaults. Command-line flags are applied afterwards.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::harness::SweepConfig;
use crate::losses::LossWeights;

fn value<T: FromStr>(key: &str, raw: &str) -> Result<T> {
    raw.parse()
        .map_err(|_| Error::Validation(format!("invalid value {raw:?} for {key}")))
}

fn parsed<T>(key: &str, raw: &str) -> Result<T>
where
    T: FromStr<Err = Error>,
{
    raw.parse().map_err(|e: Error| Error::Validation(format!("{key}: {e}")))
}

fn list<T: FromStr>(key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|v| value(key, v.trim())).collect()
}

/// Sets one key on `cfg`.
pub fn apply(cfg: &mut SweepConfig, key: &str, raw: &str) -> Result<()> {
    let t = &mut cfg.base;
    let w = &mut t.world;
    match key {
        "n_subjects" => w.n_subjects = value(key, raw)?,
        "n_predicates" => w.n_predicates = value(key, raw)?,
        "n_objects" => w.n_objects = value(key, raw)?,
        "subjects_per_predicate" => w.subjects_per_predicate = value(key, raw)?,
        "objects_per_predicate" => w.objects_per_predicate = value(key, raw)?,
        "n_slots" => w.n_slots = value(key, raw)?,
        "block_dim" => w.block_dim = value(key, raw)?,
        "noise" => w.noise = value(key, raw)?,
        "predicate_signal" => w.predicate_signal = value(key, raw)?,
        "predicate_skew" => w.predicate_skew = value(key, raw)?,
        "zero_shot_fraction" => w.zero_shot_fraction = value(key, raw)?,
        "n_train" => w.n_train = value(key, raw)?,
        "n_val" => w.n_val = value(key, raw)?,
        "n_test" => w.n_test = value(key, raw)?,
        "retention" => w.retention = value(key, raw)?,
        "seed" => w.seed = value(key, raw)?,
        "rho" => t.selection.rho = value(key, raw)?,
        "loss" => t.selection.loss = parsed(key, raw)?,
        "strategy" => t.selection.strategy = parsed(key, raw)?,
        "budget" => t.selection.budget = parsed(key, raw)?,
        "beta1" => t.weights = LossWeights::new(value(key, raw)?, t.weights.beta2())?,
        "beta2" => t.weights = LossWeights::new(t.weights.beta1(), value(key, raw)?)?,
        "regularizer" => t.regularizer = parsed(key, raw)?,
        "theory" => t.theory = parsed(key, raw)?,
        "lr" => t.lr = value(key, raw)?,
        "epochs" => t.epochs = value(key, raw)?,
        "init_scale" => t.init_scale = value(key, raw)?,
        "eval_k" => t.eval_k = value(key, raw)?,
        "retentions" => cfg.retentions = list(key, raw)?,
        "seeds" => cfg.seeds = list(key, raw)?,
        "regularizers" => cfg.regularizers = raw.split(',').map(|v| parsed(key, v.trim())).collect::<Result<_>>()?,
        "jobs" => cfg.jobs = value(key, raw)?,
        _ => return Err(Error::Validation(format!("unknown configuration key {key:?}"))),
    }
    Ok(())
}

pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let mut cfg = SweepConfig::default();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::parse(i + 1, format!("expected key = value, found {line:?}")))?;
        apply(&mut cfg, k.trim(), v.trim()).map_err(|e| Error::parse(i + 1, e.to_string()))?;
    }
    cfg.base.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<SweepConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_config(&text).map_err(|e| e.with_path(path))
}

/// Every key with its current value; parses back to an equal configuration.
pub fn to_text(cfg: &SweepConfig) -> String {
    let t = &cfg.base;
    let w = &t.world;
    let join = |v: Vec<String>| v.join(",");
    let mut s = String::new();
    let mut put = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
    put("n_subjects", w.n_subjects.to_string());
    put("n_predicates", w.n_predicates.to_string());
    put("n_objects", w.n_objects.to_string());
    put("subjects_per_predicate", w.subjects_per_predicate.to_string());
    put("objects_per_predicate", w.objects_per_predicate.to_string());
    put("n_slots", w.n_slots.to_string());
    put("block_dim", w.block_dim.to_string());
    put("noise", format!("{:?}", w.noise));
    put("predicate_signal", format!("{:?}", w.predicate_signal));
    put("predicate_skew", format!("{:?}", w.predicate_skew));
    put("zero_shot_fraction", format!("{:?}", w.zero_shot_fraction));
    put("n_train", w.n_train.to_string());
    put("n_val", w.n_val.to_string());
    put("n_test", w.n_test.to_string());
    put("retention", format!("{:?}", w.retention));
    put("seed", w.seed.to_string());
    put("rho", t.selection.rho.to_string());
    put("loss", t.selection.loss.to_string());
    put("strategy", t.selection.strategy.to_string());
    put("budget", t.selection.budget.to_string());
    put("beta1", format!("{:?}", t.weights.beta1()));
    put("beta2", format!("{:?}", t.weights.beta2()));
    put("regularizer", t.regularizer.to_string());
    put("theory", t.theory.to_string());
    put("lr", format!("{:?}", t.lr));
    put("epochs", t.epochs.to_string());
    put("init_scale", format!("{:?}", t.init_scale));
    put("eval_k", t.eval_k.to_string());
    put(
        "retentions",
        join(cfg.retentions.iter().map(|r| format!("{r:?}")).collect()),
    );
    put("seeds", join(cfg.seeds.iter().map(u64::to_string).collect()));
    put(
        "regularizers",
        join(cfg.regularizers.iter().map(|r| r.to_string()).collect()),
    );
    put("jobs", cfg.jobs.to_string());
    s
}
