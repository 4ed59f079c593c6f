//! Theory files: a one-line header naming the representation followed by
//! `subject<TAB>predicate<TAB>object` name triples. Explicit theories list
//! forbidden facts, complement theories list positive facts.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logic::{Fact, Vocabulary};
use crate::theory::{Representation, TheoryStore};

/// Comment line recording the vocabulary sizes, so a theory's constraint
/// count is known without its vocabulary.
pub const SIZES_PREFIX: &str = "# sizes ";

pub fn write_theory<W: Write>(store: &TheoryStore, mut out: W) -> std::io::Result<()> {
    let vocab = store.vocabulary();
    let [ns, np, no] = vocab.sizes();
    writeln!(out, "{}", store.representation().header())?;
    writeln!(out, "{SIZES_PREFIX}{ns} {np} {no}")?;
    for f in store.stored_facts() {
        let (s, p, o) = vocab.fact_names(f);
        writeln!(out, "{s}\t{p}\t{o}")?;
    }
    out.flush()
}

pub fn save_theory(store: &TheoryStore, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_theory(store, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

/// Parses name triples against `vocab`; every name must be known.
pub fn parse_facts_tsv(text: &str, vocab: &Vocabulary, first_line: usize) -> Result<Vec<Fact>> {
    let mut facts = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let n = first_line + i;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').map(str::trim).collect();
        let [s, p, o] = fields.as_slice() else {
            return Err(Error::parse(
                n,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        };
        let fact = vocab
            .fact(s, p, o)
            .ok_or_else(|| Error::parse(n, format!("unknown term in {s}\t{p}\t{o}")))?;
        facts.push(fact);
    }
    Ok(facts)
}

pub fn parse_theory(text: &str, vocab: Arc<Vocabulary>) -> Result<TheoryStore> {
    let (header, body) = text.split_once('\n').unwrap_or((text, ""));
    let repr = match header.trim() {
        "format=explicit-negative" => Representation::ExplicitNegative,
        "format=complement" => Representation::ComplementOfPositive,
        other => {
            return Err(Error::parse(
                1,
                format!("expected `format=explicit-negative` or `format=complement`, found {other:?}"),
            ))
        }
    };
    let facts = parse_facts_tsv(body, &vocab, 2)?;
    match repr {
        Representation::ExplicitNegative => TheoryStore::explicit(vocab, facts),
        Representation::ComplementOfPositive => TheoryStore::complement(vocab, facts),
    }
}

pub fn load_theory(path: &Path, vocab: Arc<Vocabulary>) -> Result<TheoryStore> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_theory(&text, vocab).map_err(|e| e.with_path(path))
}
