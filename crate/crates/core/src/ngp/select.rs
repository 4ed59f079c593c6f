use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::logic::{Fact, IntegrityConstraint, PredictionVector};
use crate::losses::{loss_of_ic_set, LossKind};
use crate::ngp::topk::{FrontierStats, MergedTopFacts, ScoredFact, TopFacts};
use crate::theory::TheoryStore;

/// Largest constraint list the exhaustive selector accepts.
pub const EXHAUSTIVE_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    Greedy,
    Random,
    Exhaustive,
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "greedy" => Ok(Strategy::Greedy),
            "random" => Ok(Strategy::Random),
            "exhaustive" => Ok(Strategy::Exhaustive),
            _ => Err(Error::Validation(format!(
                "unknown strategy {s:?} (expected greedy, random or exhaustive)"
            ))),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Strategy::Greedy => "greedy",
            Strategy::Random => "random",
            Strategy::Exhaustive => "exhaustive",
        })
    }
}

/// How the `rho` budget is spent over the relation slots of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Budget {
    /// One descending stream over all slots, `rho` constraints in total.
    Sample,
    /// `rho` constraints per slot.
    PerSlot,
}

impl FromStr for Budget {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sample" | "global" => Ok(Budget::Sample),
            "per-slot" | "slot" => Ok(Budget::PerSlot),
            _ => Err(Error::Validation(format!(
                "unknown budget {s:?} (expected sample or per-slot)"
            ))),
        }
    }
}

impl fmt::Display for Budget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Budget::Sample => "sample",
            Budget::PerSlot => "per-slot",
        })
    }
}

/// Equal likelihoods are ordered by ascending `(s, p, o)` ids; that is the
/// only rule implemented.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    #[default]
    Lexicographic,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub rho: usize,
    pub loss: LossKind,
    pub tie_break: TieBreak,
    pub strategy: Strategy,
    pub budget: Budget,
}

impl SelectionConfig {
    pub fn new(rho: usize, loss: LossKind) -> Result<Self> {
        if rho == 0 {
            return Err(Error::Validation("rho must be at least 1".into()));
        }
        Ok(SelectionConfig {
            rho,
            loss,
            ..Default::default()
        })
    }
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            rho: 3,
            loss: LossKind::Sl,
            tie_break: TieBreak::Lexicographic,
            strategy: Strategy::Greedy,
            budget: Budget::Sample,
        }
    }
}

/// A constraint bound to the slot whose variables it penalizes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotConstraint {
    pub slot: usize,
    pub ic: IntegrityConstraint,
    pub likelihood: f64,
}

/// Walks `stream` and keeps the facts whose negation is in `store`, until
/// `rho` are collected or the stream ends.
pub fn greedy_select_from<I>(stream: I, store: &TheoryStore, rho: usize) -> Vec<ScoredFact>
where
    I: IntoIterator<Item = ScoredFact>,
{
    let mut out = Vec::with_capacity(rho);
    if rho == 0 || store.is_empty() {
        return out;
    }
    for sf in stream {
        if store.contains_ic(sf.fact) {
            out.push(sf);
            if out.len() == rho {
                break;
            }
        }
    }
    out
}

/// The `rho` most likely facts of `slot` that the theory forbids, as
/// constraints in selection order. Returns fewer when the fact space runs out.
pub fn greedy_select(
    w: &PredictionVector,
    slot: usize,
    store: &TheoryStore,
    cfg: &SelectionConfig,
) -> Result<Vec<IntegrityConstraint>> {
    Ok(greedy_select_with_stats(w, slot, store, cfg)?.0)
}

pub fn greedy_select_with_stats(
    w: &PredictionVector,
    slot: usize,
    store: &TheoryStore,
    cfg: &SelectionConfig,
) -> Result<(Vec<IntegrityConstraint>, FrontierStats)> {
    let mut stream = TopFacts::new(w, slot)?;
    let picked = greedy_select_from(&mut stream, store, cfg.rho);
    Ok((
        picked.into_iter().map(|sf| IntegrityConstraint::new(sf.fact)).collect(),
        stream.stats(),
    ))
}

/// Every subset of size `min(rho, n)`, plus all smaller sizes when `n < rho`,
/// scored with `loss_of_ic_set`; returns a maximizer. Ties go to the subset
/// whose sorted packed keys compare lowest.
pub fn exhaustive_select(
    w: &PredictionVector,
    slot: usize,
    ics: &[IntegrityConstraint],
    rho: usize,
    kind: LossKind,
) -> Result<Vec<IntegrityConstraint>> {
    let mut uniq: Vec<IntegrityConstraint> = ics.to_vec();
    uniq.sort_by_key(|ic| ic.fact.packed());
    uniq.dedup();
    let n = uniq.len();
    if n > EXHAUSTIVE_CAP {
        return Err(Error::Capacity {
            what: "constraints for exhaustive selection",
            size: n,
            limit: EXHAUSTIVE_CAP,
        });
    }
    if rho == 0 || n == 0 {
        return Ok(Vec::new());
    }
    let sizes = if n < rho { 1..=n } else { rho..=rho };
    let mut best: Option<(f64, Vec<u64>, u32)> = None;
    for mask in 1u32..1 << n {
        if !sizes.contains(&(mask.count_ones() as usize)) {
            continue;
        }
        let subset: Vec<IntegrityConstraint> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| uniq[i]).collect();
        let loss = loss_of_ic_set(kind, &subset, w, slot)?;
        let keys: Vec<u64> = subset.iter().map(|ic| ic.fact.packed()).collect();
        let better = match &best {
            None => true,
            Some((bl, bk, _)) => loss > *bl || (loss == *bl && keys < *bk),
        };
        if better {
            best = Some((loss, keys, mask));
        }
    }
    let (_, _, mask) = best.expect("at least one subset");
    Ok((0..n).filter(|i| mask >> i & 1 == 1).map(|i| uniq[i]).collect())
}

/// Constraints for one sample under `cfg`. Constraints are deduplicated by
/// `(slot, fact)`.
pub fn select_for_sample<R: Rng + ?Sized>(
    w: &PredictionVector,
    store: &TheoryStore,
    cfg: &SelectionConfig,
    rng: &mut R,
) -> Result<Vec<SlotConstraint>> {
    let to_slot = |sf: ScoredFact| SlotConstraint {
        slot: sf.slot,
        ic: IntegrityConstraint::new(sf.fact),
        likelihood: sf.likelihood,
    };
    match (cfg.strategy, cfg.budget) {
        (Strategy::Greedy, Budget::Sample) => Ok(greedy_select_from(MergedTopFacts::new(w), store, cfg.rho)
            .into_iter()
            .map(to_slot)
            .collect()),
        (Strategy::Greedy, Budget::PerSlot) => {
            let mut out = Vec::new();
            for slot in 0..w.n_slots() {
                out.extend(
                    greedy_select_from(TopFacts::new(w, slot)?, store, cfg.rho)
                        .into_iter()
                        .map(to_slot),
                );
            }
            Ok(out)
        }
        (Strategy::Random, budget) => {
            let mut out = Vec::new();
            let mut seen = HashSet::new();
            match budget {
                Budget::PerSlot => {
                    for slot in 0..w.n_slots() {
                        draw_random(w, store, slot, cfg.rho, rng, &mut seen, &mut out);
                    }
                }
                Budget::Sample => {
                    for _ in 0..cfg.rho {
                        let slot = rng.random_range(0..w.n_slots());
                        draw_random(w, store, slot, 1, rng, &mut seen, &mut out);
                    }
                }
            }
            Ok(out)
        }
        (Strategy::Exhaustive, _) => {
            if store.ic_count() > EXHAUSTIVE_CAP as u64 {
                return Err(Error::Capacity {
                    what: "theory size for exhaustive selection",
                    size: store.ic_count() as usize,
                    limit: EXHAUSTIVE_CAP,
                });
            }
            let ics: Vec<IntegrityConstraint> = store.iter_ics().map(IntegrityConstraint::new).collect();
            let mut out = Vec::new();
            for slot in 0..w.n_slots() {
                for ic in exhaustive_select(w, slot, &ics, cfg.rho, cfg.loss)? {
                    out.push(SlotConstraint {
                        slot,
                        ic,
                        likelihood: w.slots()[slot].likelihood(ic.fact),
                    });
                }
            }
            Ok(out)
        }
    }
}

fn draw_random<R: Rng + ?Sized>(
    w: &PredictionVector,
    store: &TheoryStore,
    slot: usize,
    count: usize,
    rng: &mut R,
    seen: &mut HashSet<(usize, Fact)>,
    out: &mut Vec<SlotConstraint>,
) {
    // a small theory may not have `count` distinct members left
    let mut got = 0;
    for _ in 0..64 * count {
        if got == count {
            break;
        }
        let Some(fact) = store.sample_ic(rng) else {
            break;
        };
        if seen.insert((slot, fact)) {
            out.push(SlotConstraint {
                slot,
                ic: IntegrityConstraint::new(fact),
                likelihood: w.slots()[slot].likelihood(fact),
            });
            got += 1;
        }
    }
}

/// First fact of `stream` that the theory does not forbid.
pub fn itr_project_from<I>(stream: I, store: &TheoryStore) -> Option<ScoredFact>
where
    I: IntoIterator<Item = ScoredFact>,
{
    stream.into_iter().find(|sf| !store.contains_ic(sf.fact))
}

/// Most likely fact of `slot` that violates no constraint, or `None` when the
/// theory forbids the whole fact space.
pub fn itr_project(w: &PredictionVector, slot: usize, store: &TheoryStore) -> Result<Option<Fact>> {
    Ok(itr_project_from(TopFacts::new(w, slot)?, store).map(|sf| sf.fact))
}
