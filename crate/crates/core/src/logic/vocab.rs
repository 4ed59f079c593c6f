use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};

/// Largest number of terms a single domain may hold. Fact keys pack each id
/// into 21 bits.
pub const MAX_DOMAIN_SIZE: usize = 1 << 21;

/// One of the three term domains.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Domain {
    Subject,
    Predicate,
    Object,
}

impl Domain {
    pub const ALL: [Domain; 3] = [Domain::Subject, Domain::Predicate, Domain::Object];

    pub fn prefix(self) -> &'static str {
        match self {
            Domain::Subject => "s",
            Domain::Predicate => "p",
            Domain::Object => "o",
        }
    }

    fn section(self) -> &'static str {
        match self {
            Domain::Subject => "subjects",
            Domain::Predicate => "predicates",
            Domain::Object => "objects",
        }
    }
}

/// Reference to a single term: a domain plus a dense id within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TermRef {
    pub domain: Domain,
    pub id: u32,
}

impl TermRef {
    pub fn subject(id: u32) -> Self {
        TermRef {
            domain: Domain::Subject,
            id,
        }
    }
    pub fn predicate(id: u32) -> Self {
        TermRef {
            domain: Domain::Predicate,
            id,
        }
    }
    pub fn object(id: u32) -> Self {
        TermRef {
            domain: Domain::Object,
            id,
        }
    }
}

impl fmt::Display for TermRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.domain.prefix(), self.id)
    }
}

/// A ground `predicate(subject, object)` atom, stored as ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Fact {
    pub s: u32,
    pub p: u32,
    pub o: u32,
}

impl Fact {
    pub fn new(s: u32, p: u32, o: u32) -> Self {
        Fact { s, p, o }
    }

    /// Injective key ordering facts lexicographically by `(s, p, o)`.
    pub fn packed(self) -> u64 {
        ((self.s as u64) << 42) | ((self.p as u64) << 21) | self.o as u64
    }

    pub fn from_packed(key: u64) -> Self {
        const MASK: u64 = (1 << 21) - 1;
        Fact {
            s: (key >> 42) as u32,
            p: ((key >> 21) & MASK) as u32,
            o: (key & MASK) as u32,
        }
    }

    pub fn terms(self) -> [TermRef; 3] {
        [
            TermRef::subject(self.s),
            TermRef::predicate(self.p),
            TermRef::object(self.o),
        ]
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "p{}(s{},o{})", self.p, self.s, self.o)
    }
}

/// The subject, predicate and object term sets with dense ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    names: [Vec<String>; 3],
    index: [HashMap<String, u32>; 3],
}

impl Vocabulary {
    pub fn new(subjects: Vec<String>, predicates: Vec<String>, objects: Vec<String>) -> Result<Self> {
        let names = [subjects, predicates, objects];
        let mut index: [HashMap<String, u32>; 3] = Default::default();
        for (d, list) in Domain::ALL.iter().zip(&names) {
            if list.len() > MAX_DOMAIN_SIZE {
                return Err(Error::Capacity {
                    what: "vocabulary domain size",
                    size: list.len(),
                    limit: MAX_DOMAIN_SIZE,
                });
            }
            let map = &mut index[*d as usize];
            for (i, name) in list.iter().enumerate() {
                if name.is_empty() || name.contains(['\t', '\n', '\r']) {
                    return Err(Error::Validation(format!("invalid {} name {name:?}", d.section())));
                }
                if map.insert(name.clone(), i as u32).is_some() {
                    return Err(Error::Validation(format!("duplicate name {name:?} in {}", d.section())));
                }
            }
        }
        Ok(Vocabulary { names, index })
    }

    /// Vocabulary with generated names `s0..`, `p0..`, `o0..`.
    pub fn with_sizes(n_subjects: usize, n_predicates: usize, n_objects: usize) -> Result<Self> {
        let gen = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect();
        Self::new(gen("s", n_subjects), gen("p", n_predicates), gen("o", n_objects))
    }

    pub fn len(&self, domain: Domain) -> usize {
        self.names[domain as usize].len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.iter().any(Vec::is_empty)
    }

    pub fn sizes(&self) -> [usize; 3] {
        [self.names[0].len(), self.names[1].len(), self.names[2].len()]
    }

    /// Number of facts in `S × P × O`.
    pub fn fact_space(&self) -> u64 {
        self.sizes().iter().map(|&n| n as u64).product()
    }

    pub fn names(&self, domain: Domain) -> &[String] {
        &self.names[domain as usize]
    }

    pub fn name(&self, term: TermRef) -> Option<&str> {
        self.names[term.domain as usize]
            .get(term.id as usize)
            .map(String::as_str)
    }

    pub fn lookup(&self, domain: Domain, name: &str) -> Option<u32> {
        self.index[domain as usize].get(name).copied()
    }

    pub fn contains(&self, term: TermRef) -> bool {
        (term.id as usize) < self.len(term.domain)
    }

    pub fn fact(&self, s: &str, p: &str, o: &str) -> Option<Fact> {
        Some(Fact::new(
            self.lookup(Domain::Subject, s)?,
            self.lookup(Domain::Predicate, p)?,
            self.lookup(Domain::Object, o)?,
        ))
    }

    pub fn validate_fact(&self, fact: Fact) -> Result<()> {
        if fact.terms().iter().all(|t| self.contains(*t)) {
            Ok(())
        } else {
            Err(Error::Validation(format!(
                "fact {fact} out of range for vocabulary of size {:?}",
                self.sizes()
            )))
        }
    }

    pub fn fact_names(&self, fact: Fact) -> (&str, &str, &str) {
        (
            &self.names[0][fact.s as usize],
            &self.names[1][fact.p as usize],
            &self.names[2][fact.o as usize],
        )
    }

    /// Parses the sectioned vocabulary format:
    ///
    /// ```text
    /// [subjects]
    /// horse
    /// [predicates]
    /// drinks
    /// [objects]
    /// eye
    /// ```
    ///
    /// Blank lines and lines starting with `#` are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lists: [Option<Vec<String>>; 3] = Default::default();
        let mut current: Option<usize> = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(section) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                let d = Domain::ALL
                    .iter()
                    .find(|d| d.section() == section)
                    .ok_or_else(|| Error::parse(i + 1, format!("unknown section [{section}]")))?;
                if lists[*d as usize].is_some() {
                    return Err(Error::parse(i + 1, format!("repeated section [{section}]")));
                }
                lists[*d as usize] = Some(Vec::new());
                current = Some(*d as usize);
                continue;
            }
            let Some(c) = current else {
                return Err(Error::parse(i + 1, "name outside of a section"));
            };
            lists[c].as_mut().unwrap().push(line.to_string());
        }
        let [s, p, o] = lists;
        match (s, p, o) {
            (Some(s), Some(p), Some(o)) => Self::new(s, p, o),
            _ => Err(Error::parse(
                text.lines().count().max(1),
                "vocabulary needs [subjects], [predicates] and [objects] sections",
            )),
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| e.with_path(path))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for d in Domain::ALL {
            out.push('[');
            out.push_str(d.section());
            out.push_str("]\n");
            for n in self.names(d) {
                out.push_str(n);
                out.push('\n');
            }
        }
        out
    }
}
