//! Theories of negative atomic integrity constraints.
//!
//! A [`TheoryStore`] either lists its forbidden facts explicitly or represents
//! them implicitly as every fact of `S × P × O` that is not in a positive set.
//! Both answer [`TheoryStore::contains_ic`] in expected constant time.

mod build;
mod io;

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use rand::Rng;

use crate::error::Result;
use crate::logic::{Fact, IntegrityConstraint, Vocabulary};

pub use build::{build_complement_of_facts, build_from_kg_complement, KgLoadReport, KgTripleSet, DEFAULT_KAPPA};
pub use io::{load_theory, parse_facts_tsv, parse_theory, save_theory, write_theory, SIZES_PREFIX};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    ExplicitNegative,
    ComplementOfPositive,
}

impl Representation {
    pub fn header(self) -> &'static str {
        match self {
            Representation::ExplicitNegative => "format=explicit-negative",
            Representation::ComplementOfPositive => "format=complement",
        }
    }
}

impl fmt::Display for Representation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Representation::ExplicitNegative => "explicit-negative",
            Representation::ComplementOfPositive => "complement",
        })
    }
}

/// A term pair used to look up the constraints that complete it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TermPair {
    SubjectObject { s: u32, o: u32 },
    SubjectPredicate { s: u32, p: u32 },
    PredicateObject { p: u32, o: u32 },
}

impl TermPair {
    fn of(fact: Fact) -> [TermPair; 3] {
        [
            TermPair::SubjectObject { s: fact.s, o: fact.o },
            TermPair::SubjectPredicate { s: fact.s, p: fact.p },
            TermPair::PredicateObject { p: fact.p, o: fact.o },
        ]
    }

    fn complete(self, third: u32) -> Fact {
        match self {
            TermPair::SubjectObject { s, o } => Fact::new(s, third, o),
            TermPair::SubjectPredicate { s, p } => Fact::new(s, p, third),
            TermPair::PredicateObject { p, o } => Fact::new(third, p, o),
        }
    }
}

/// Facts stored under a pair key, for both representations.
#[derive(Debug, Clone, Default)]
struct PairIndex(HashMap<TermPair, Vec<u32>>);

#[derive(Debug, Clone)]
struct FactSet {
    lookup: HashSet<u64>,
    sorted: Vec<u64>,
}

impl FactSet {
    fn from_keys(mut keys: Vec<u64>) -> Self {
        keys.sort_unstable();
        keys.dedup();
        FactSet {
            lookup: keys.iter().copied().collect(),
            sorted: keys,
        }
    }
}

/// Queryable set of negative atomic constraints over a vocabulary.
#[derive(Debug, Clone)]
pub struct TheoryStore {
    vocab: Arc<Vocabulary>,
    repr: Representation,
    /// Forbidden facts (explicit) or permitted facts (complement).
    facts: FactSet,
    pairs: Option<PairIndex>,
}

/// Summary counts of a theory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoryStats {
    pub ic_count: u64,
    pub representation: Representation,
    pub per_predicate: Vec<u64>,
}

impl TheoryStore {
    fn from_facts(vocab: Arc<Vocabulary>, repr: Representation, facts: impl IntoIterator<Item = Fact>) -> Result<Self> {
        let keys = facts
            .into_iter()
            .map(|f| vocab.validate_fact(f).map(|_| f.packed()))
            .collect::<Result<Vec<_>>>()?;
        Ok(TheoryStore {
            vocab,
            repr,
            facts: FactSet::from_keys(keys),
            pairs: None,
        })
    }

    /// Theory forbidding exactly `forbidden`.
    pub fn explicit(vocab: Arc<Vocabulary>, forbidden: impl IntoIterator<Item = Fact>) -> Result<Self> {
        Self::from_facts(vocab, Representation::ExplicitNegative, forbidden)
    }

    /// Theory forbidding every fact outside `positive`.
    pub fn complement(vocab: Arc<Vocabulary>, positive: impl IntoIterator<Item = Fact>) -> Result<Self> {
        Self::from_facts(vocab, Representation::ComplementOfPositive, positive)
    }

    pub fn vocabulary(&self) -> &Arc<Vocabulary> {
        &self.vocab
    }

    pub fn representation(&self) -> Representation {
        self.repr
    }

    /// Is `¬fact` in the theory?
    pub fn contains_ic(&self, fact: Fact) -> bool {
        let stored = self.facts.lookup.contains(&fact.packed());
        match self.repr {
            Representation::ExplicitNegative => stored,
            Representation::ComplementOfPositive => !stored && self.vocab.validate_fact(fact).is_ok(),
        }
    }

    pub fn contains(&self, ic: IntegrityConstraint) -> bool {
        self.contains_ic(ic.fact)
    }

    pub fn ic_count(&self) -> u64 {
        let n = self.facts.sorted.len() as u64;
        match self.repr {
            Representation::ExplicitNegative => n,
            Representation::ComplementOfPositive => self.vocab.fact_space() - n,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.ic_count() == 0
    }

    /// Facts stored by the representation: the forbidden facts of an explicit
    /// theory, the permitted facts of a complement theory. Sorted by packed key.
    pub fn stored_facts(&self) -> impl ExactSizeIterator<Item = Fact> + '_ {
        self.facts.sorted.iter().map(|&k| Fact::from_packed(k))
    }

    /// Every forbidden fact in packed-key order. Lazy for complement theories.
    pub fn iter_ics(&self) -> Box<dyn Iterator<Item = Fact> + '_> {
        match self.repr {
            Representation::ExplicitNegative => Box::new(self.stored_facts()),
            Representation::ComplementOfPositive => {
                let [ns, np, no] = self.vocab.sizes();
                Box::new(
                    (0..ns as u32)
                        .flat_map(move |s| {
                            (0..np as u32).flat_map(move |p| (0..no as u32).map(move |o| Fact::new(s, p, o)))
                        })
                        .filter(move |f| !self.facts.lookup.contains(&f.packed())),
                )
            }
        }
    }

    /// Explicit copy listing every forbidden fact.
    pub fn materialize(&self) -> TheoryStore {
        match self.repr {
            Representation::ExplicitNegative => self.clone(),
            Representation::ComplementOfPositive => TheoryStore {
                vocab: self.vocab.clone(),
                repr: Representation::ExplicitNegative,
                facts: FactSet::from_keys(self.iter_ics().map(Fact::packed).collect()),
                pairs: None,
            },
        }
    }

    /// Uniformly random forbidden fact, or `None` for an empty theory.
    pub fn sample_ic<R: Rng + ?Sized>(&self, rng: &mut R) -> Option<Fact> {
        if self.is_empty() {
            return None;
        }
        match self.repr {
            Representation::ExplicitNegative => {
                let i = rng.random_range(0..self.facts.sorted.len());
                Some(Fact::from_packed(self.facts.sorted[i]))
            }
            Representation::ComplementOfPositive => {
                let [ns, np, no] = self.vocab.sizes();
                let space = self.vocab.fact_space();
                if self.ic_count() * 8 >= space {
                    loop {
                        let f = Fact::new(
                            rng.random_range(0..ns as u32),
                            rng.random_range(0..np as u32),
                            rng.random_range(0..no as u32),
                        );
                        if self.contains_ic(f) {
                            return Some(f);
                        }
                    }
                }
                // dense positive set: pick by rank among the forbidden facts
                let rank = rng.random_range(0..self.ic_count());
                self.iter_ics().nth(rank as usize)
            }
        }
    }

    /// Builds the `(s,o)`, `(s,p)` and `(p,o)` secondary indices.
    pub fn with_pair_index(mut self) -> Self {
        let mut idx = PairIndex::default();
        for f in self.stored_facts() {
            for (pair, third) in TermPair::of(f).into_iter().zip([f.p, f.o, f.s]) {
                idx.0.entry(pair).or_default().push(third);
            }
        }
        self.pairs = Some(idx);
        self
    }

    /// Every forbidden fact that completes `pair`, in ascending id order of
    /// the missing term.
    pub fn ics_for_pair(&self, pair: TermPair) -> Vec<Fact> {
        let [ns, np, no] = self.vocab.sizes();
        let third_len = match pair {
            TermPair::SubjectObject { .. } => np,
            TermPair::SubjectPredicate { .. } => no,
            TermPair::PredicateObject { .. } => ns,
        } as u32;
        match (&self.pairs, self.repr) {
            (Some(idx), Representation::ExplicitNegative) => {
                let mut ids = idx.0.get(&pair).cloned().unwrap_or_default();
                ids.sort_unstable();
                ids.into_iter().map(|t| pair.complete(t)).collect()
            }
            (Some(idx), Representation::ComplementOfPositive) => {
                let stored: HashSet<u32> = idx.0.get(&pair).into_iter().flatten().copied().collect();
                (0..third_len)
                    .filter(|t| !stored.contains(t))
                    .map(|t| pair.complete(t))
                    .collect()
            }
            (None, _) => (0..third_len)
                .map(|t| pair.complete(t))
                .filter(|f| self.contains_ic(*f))
                .collect(),
        }
    }

    pub fn stats(&self) -> TheoryStats {
        let [ns, np, no] = self.vocab.sizes();
        let mut stored = vec![0u64; np];
        for f in self.stored_facts() {
            stored[f.p as usize] += 1;
        }
        let per_predicate = match self.repr {
            Representation::ExplicitNegative => stored,
            Representation::ComplementOfPositive => stored.into_iter().map(|n| (ns * no) as u64 - n).collect(),
        };
        TheoryStats {
            ic_count: self.ic_count(),
            representation: self.repr,
            per_predicate,
        }
    }
}

/// Counts of a theory without materializing complement entries.
pub fn theory_stats(store: &TheoryStore) -> TheoryStats {
    store.stats()
}
