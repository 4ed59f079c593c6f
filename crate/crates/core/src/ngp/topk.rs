//! Lazy enumeration of `(s, p, o)` facts in nonincreasing order of
//! `w(s)·w(p)·w(o)`.
//!
//! Each domain's terms are grouped into levels of equal activation, sorted
//! descending. A max-heap frontier walks the lattice of level triples; every
//! level triple whose product ties the current maximum is drained into one
//! group, and the group's facts are merged in lexicographic id order. Ties
//! are therefore always broken by `(s, p, o)`, even when equal products come
//! from unequal activations (zeros, rounding).

use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::logic::{Fact, PredictionVector, SlotActivations};

/// A candidate fact with its likelihood `w(s)·w(p)·w(o)` in one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoredFact {
    pub slot: usize,
    pub fact: Fact,
    pub likelihood: f64,
}

impl ScoredFact {
    /// Descending likelihood, then ascending slot, then ascending ids.
    pub fn rank_cmp(&self, other: &Self) -> Ordering {
        other
            .likelihood
            .total_cmp(&self.likelihood)
            .then(self.slot.cmp(&other.slot))
            .then(self.fact.cmp(&other.fact))
    }
}

struct Levels {
    values: Vec<f64>,
    ids: Vec<Vec<u32>>,
}

impl Levels {
    fn new(acts: &[f64]) -> Self {
        let mut order: Vec<u32> = (0..acts.len() as u32).collect();
        order.sort_by(|&a, &b| acts[b as usize].total_cmp(&acts[a as usize]).then(a.cmp(&b)));
        let mut values: Vec<f64> = Vec::new();
        let mut ids: Vec<Vec<u32>> = Vec::new();
        for id in order {
            let v = acts[id as usize];
            if values.last() == Some(&v) {
                ids.last_mut().unwrap().push(id);
            } else {
                values.push(v);
                ids.push(vec![id]);
            }
        }
        Levels { values, ids }
    }
}

#[derive(PartialEq)]
struct LatticeNode {
    product: f64,
    level: [u32; 3],
}

impl Eq for LatticeNode {}

impl Ord for LatticeNode {
    fn cmp(&self, other: &Self) -> Ordering {
        self.product
            .total_cmp(&other.product)
            .then_with(|| other.level.cmp(&self.level))
    }
}

impl PartialOrd for LatticeNode {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Odometer over the id lists of one level triple; yields facts in
/// lexicographic order.
#[derive(PartialEq, Eq)]
struct Cursor {
    fact: (u32, u32, u32),
    level: [u32; 3],
    pos: [u32; 3],
}

impl Ord for Cursor {
    fn cmp(&self, other: &Self) -> Ordering {
        self.fact.cmp(&other.fact).then(self.level.cmp(&other.level))
    }
}

impl PartialOrd for Cursor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Work done by the frontier so far.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct FrontierStats {
    /// Level triples popped from the frontier.
    pub expanded: usize,
    /// Level triples pushed onto the frontier.
    pub pushed: usize,
    /// Facts emitted.
    pub emitted: usize,
}

/// Iterator over one slot's facts, best first.
pub struct TopFacts<'a> {
    acts: &'a SlotActivations,
    slot: usize,
    levels: [Levels; 3],
    frontier: BinaryHeap<LatticeNode>,
    visited: HashSet<[u32; 3]>,
    group: BinaryHeap<Reverse<Cursor>>,
    stats: FrontierStats,
}

impl<'a> TopFacts<'a> {
    pub fn new(w: &'a PredictionVector, slot: usize) -> Result<Self> {
        let acts = w.slot(slot)?;
        Ok(Self::over(acts, slot))
    }

    pub fn over(acts: &'a SlotActivations, slot: usize) -> Self {
        let levels = acts.domains.each_ref().map(|d| Levels::new(d));
        let mut it = TopFacts {
            acts,
            slot,
            levels,
            frontier: BinaryHeap::new(),
            visited: HashSet::new(),
            group: BinaryHeap::new(),
            stats: FrontierStats::default(),
        };
        if it.levels.iter().all(|l| !l.values.is_empty()) {
            it.push([0, 0, 0]);
        }
        it
    }

    pub fn stats(&self) -> FrontierStats {
        self.stats
    }

    fn level_product(&self, level: [u32; 3]) -> f64 {
        self.levels[0].values[level[0] as usize]
            * self.levels[1].values[level[1] as usize]
            * self.levels[2].values[level[2] as usize]
    }

    fn push(&mut self, level: [u32; 3]) {
        if self.visited.insert(level) {
            self.stats.pushed += 1;
            self.frontier.push(LatticeNode {
                product: self.level_product(level),
                level,
            });
        }
    }

    fn cursor(&self, level: [u32; 3], pos: [u32; 3]) -> Cursor {
        let id = |d: usize| self.levels[d].ids[level[d] as usize][pos[d] as usize];
        Cursor {
            fact: (id(0), id(1), id(2)),
            level,
            pos,
        }
    }

    /// Drains every frontier node tied with the current maximum into the
    /// merge group.
    fn fill_group(&mut self) -> bool {
        let Some(top) = self.frontier.pop() else {
            return false;
        };
        let target = top.product;
        let mut node = Some(top);
        while let Some(n) = node {
            self.stats.expanded += 1;
            for d in 0..3 {
                let mut next = n.level;
                next[d] += 1;
                if (next[d] as usize) < self.levels[d].values.len() {
                    self.push(next);
                }
            }
            let c = self.cursor(n.level, [0, 0, 0]);
            self.group.push(Reverse(c));
            node = match self.frontier.peek() {
                Some(p) if p.product.total_cmp(&target) == Ordering::Equal => self.frontier.pop(),
                _ => None,
            };
        }
        true
    }
}

impl Iterator for TopFacts<'_> {
    type Item = ScoredFact;

    fn next(&mut self) -> Option<ScoredFact> {
        if self.group.is_empty() && !self.fill_group() {
            return None;
        }
        let Reverse(cur) = self.group.pop()?;
        // advance the odometer, last coordinate fastest
        let mut pos = cur.pos;
        for d in (0..3).rev() {
            pos[d] += 1;
            if (pos[d] as usize) < self.levels[d].ids[cur.level[d] as usize].len() {
                let next = self.cursor(cur.level, pos);
                self.group.push(Reverse(next));
                break;
            }
            pos[d] = 0;
        }
        self.stats.emitted += 1;
        let fact = Fact::new(cur.fact.0, cur.fact.1, cur.fact.2);
        Some(ScoredFact {
            slot: self.slot,
            fact,
            likelihood: self.acts.likelihood(fact),
        })
    }
}

/// Merges the per-slot streams of a prediction vector into one stream
/// ordered by [`ScoredFact::rank_cmp`].
pub struct MergedTopFacts<'a> {
    streams: Vec<TopFacts<'a>>,
    heads: BinaryHeap<Reverse<HeadEntry>>,
}

struct HeadEntry(ScoredFact);

impl PartialEq for HeadEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for HeadEntry {}
impl Ord for HeadEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.rank_cmp(&other.0)
    }
}
impl PartialOrd for HeadEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<'a> MergedTopFacts<'a> {
    pub fn new(w: &'a PredictionVector) -> Self {
        let mut streams: Vec<TopFacts<'a>> = w
            .slots()
            .iter()
            .enumerate()
            .map(|(i, a)| TopFacts::over(a, i))
            .collect();
        let heads = streams
            .iter_mut()
            .filter_map(|s| s.next())
            .map(|f| Reverse(HeadEntry(f)))
            .collect();
        MergedTopFacts { streams, heads }
    }

    pub fn stats(&self) -> FrontierStats {
        self.streams.iter().fold(FrontierStats::default(), |a, s| {
            let b = s.stats();
            FrontierStats {
                expanded: a.expanded + b.expanded,
                pushed: a.pushed + b.pushed,
                emitted: a.emitted + b.emitted,
            }
        })
    }
}

impl Iterator for MergedTopFacts<'_> {
    type Item = ScoredFact;

    fn next(&mut self) -> Option<ScoredFact> {
        let Reverse(HeadEntry(best)) = self.heads.pop()?;
        if let Some(n) = self.streams[best.slot].next() {
            self.heads.push(Reverse(HeadEntry(n)));
        }
        Some(best)
    }
}

/// The `k` most likely facts of one slot, best first, ties in `(s, p, o)`
/// order.
pub fn topk_facts(w: &PredictionVector, slot: usize, k: usize) -> Result<Vec<ScoredFact>> {
    let space: u64 = w.sizes().iter().map(|&n| n as u64).product();
    if k == 0 || k as u64 > space {
        return Err(Error::Contract(format!("k = {k} must lie in 1..={space}")));
    }
    Ok(TopFacts::new(w, slot)?.take(k).collect())
}
