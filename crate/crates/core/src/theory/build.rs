use std::collections::{HashMap, HashSet};
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::{Fact, Vocabulary};
use crate::theory::TheoryStore;

/// Pairs with at most this many supporting facts enter the complementation
/// pass.
pub const DEFAULT_KAPPA: u32 = 9;

/// Raw `(subject, predicate, object)` name triples from a knowledge graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KgTripleSet {
    pub triples: Vec<(String, String, String)>,
}

impl KgTripleSet {
    pub fn new(triples: Vec<(String, String, String)>) -> Self {
        KgTripleSet { triples }
    }

    /// Tab-separated `subject<TAB>predicate<TAB>object` lines. Blank lines and
    /// `#` comments are skipped.
    pub fn parse_tsv(text: &str) -> Result<Self> {
        let mut triples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() || line.trim_start().starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = line.split('\t').collect();
            let [s, p, o] = fields.as_slice() else {
                return Err(Error::parse(
                    i + 1,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            };
            triples.push((s.trim().to_string(), p.trim().to_string(), o.trim().to_string()));
        }
        Ok(KgTripleSet { triples })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_tsv(&text).map_err(|e| e.with_path(path))
    }
}

/// What happened to the input triples during vocabulary restriction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct KgLoadReport {
    pub kept: usize,
    pub duplicates: usize,
    pub dropped_out_of_vocabulary: usize,
}

/// Theory of every fact in `S × P × O` that is not a positive fact. Nothing
/// is materialized.
pub fn build_complement_of_facts(vocab: Arc<Vocabulary>, positive: &HashSet<Fact>) -> Result<TheoryStore> {
    TheoryStore::complement(vocab, positive.iter().copied())
}

/// Complements a knowledge graph around its sparse term pairs.
///
/// The graph is restricted to the vocabulary; every `(s,o)`, `(s,p)` and
/// `(p,o)` pair with at most `kappa` supporting facts (zero included) is then
/// completed with each missing third term, and each completion absent from
/// the restricted graph becomes a constraint.
pub fn build_from_kg_complement(
    kg: &KgTripleSet,
    vocab: Arc<Vocabulary>,
    kappa: u32,
) -> Result<(TheoryStore, KgLoadReport)> {
    let mut report = KgLoadReport::default();
    let mut known: HashSet<u64> = HashSet::new();
    for (s, p, o) in &kg.triples {
        match vocab.fact(s, p, o) {
            Some(f) => {
                if known.insert(f.packed()) {
                    report.kept += 1;
                } else {
                    report.duplicates += 1;
                }
            }
            None => report.dropped_out_of_vocabulary += 1,
        }
    }

    let mut so: HashMap<(u32, u32), u32> = HashMap::new();
    let mut sp: HashMap<(u32, u32), u32> = HashMap::new();
    let mut po: HashMap<(u32, u32), u32> = HashMap::new();
    for &k in &known {
        let f = Fact::from_packed(k);
        *so.entry((f.s, f.o)).or_default() += 1;
        *sp.entry((f.s, f.p)).or_default() += 1;
        *po.entry((f.p, f.o)).or_default() += 1;
    }
    let sparse = |m: &HashMap<(u32, u32), u32>, a: u32, b: u32| m.get(&(a, b)).copied().unwrap_or(0) <= kappa;

    let [ns, np, no] = vocab.sizes().map(|n| n as u32);
    let mut out: Vec<u64> = Vec::new();
    let mut emit = |f: Fact| {
        let k = f.packed();
        if !known.contains(&k) {
            out.push(k);
        }
    };
    for s in 0..ns {
        for o in 0..no {
            if sparse(&so, s, o) {
                (0..np).for_each(|p| emit(Fact::new(s, p, o)));
            }
        }
        for p in 0..np {
            if sparse(&sp, s, p) {
                (0..no).for_each(|o| emit(Fact::new(s, p, o)));
            }
        }
    }
    for p in 0..np {
        for o in 0..no {
            if sparse(&po, p, o) {
                (0..ns).for_each(|s| emit(Fact::new(s, p, o)));
            }
        }
    }
    let store = TheoryStore::explicit(vocab, out.into_iter().map(Fact::from_packed))?;
    Ok((store, report))
}
