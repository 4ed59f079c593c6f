use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};
use crate::logic::{Fact, PredictionVector, TermRef, Vocabulary};

/// Propositional formula over term variables.
///
/// `And` and `Or` always carry at least two children; the [`Formula::and`]
/// and [`Formula::or`] constructors collapse a single child to itself.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Var(TermRef),
    Not(Box<Formula>),
    And(Vec<Formula>),
    Or(Vec<Formula>),
}

impl Formula {
    pub fn var(t: TermRef) -> Self {
        Formula::Var(t)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(children: impl IntoIterator<Item = Formula>) -> Result<Self> {
        Self::nary(children, Formula::And, "and")
    }

    pub fn or(children: impl IntoIterator<Item = Formula>) -> Result<Self> {
        Self::nary(children, Formula::Or, "or")
    }

    fn nary(
        children: impl IntoIterator<Item = Formula>,
        make: fn(Vec<Formula>) -> Formula,
        name: &str,
    ) -> Result<Self> {
        let mut children: Vec<Formula> = children.into_iter().collect();
        match children.len() {
            0 => Err(Error::Contract(format!("`{name}` needs at least one child"))),
            1 => Ok(children.pop().unwrap()),
            _ => Ok(make(children)),
        }
    }

    /// Sorted, deduplicated variable set.
    pub fn variables(&self) -> Vec<TermRef> {
        let mut acc = BTreeSet::new();
        self.collect_vars(&mut acc);
        acc.into_iter().collect()
    }

    fn collect_vars(&self, acc: &mut BTreeSet<TermRef>) {
        match self {
            Formula::Var(t) => {
                acc.insert(*t);
            }
            Formula::Not(c) => c.collect_vars(acc),
            Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| c.collect_vars(acc)),
        }
    }

    pub fn validate(&self, vocab: &Vocabulary) -> Result<()> {
        match self.variables().into_iter().find(|t| !vocab.contains(*t)) {
            Some(t) => Err(Error::Validation(format!("variable {t} not in vocabulary"))),
            None => Ok(()),
        }
    }

    /// Prefix rendering with vocabulary names, e.g.
    /// `(not (and s:horse p:drinks o:eye))`.
    pub fn display_with<'a>(&'a self, vocab: &'a Vocabulary) -> impl fmt::Display + 'a {
        Named { f: self, vocab }
    }

    fn write_prefix(&self, f: &mut fmt::Formatter<'_>, name: &dyn Fn(TermRef) -> String) -> fmt::Result {
        match self {
            Formula::Var(t) => write!(f, "{}:{}", t.domain.prefix(), name(*t)),
            Formula::Not(c) => {
                write!(f, "(not ")?;
                c.write_prefix(f, name)?;
                write!(f, ")")
            }
            Formula::And(cs) | Formula::Or(cs) => {
                let op = if matches!(self, Formula::And(_)) { "and" } else { "or" };
                write!(f, "({op}")?;
                for c in cs {
                    write!(f, " ")?;
                    c.write_prefix(f, name)?;
                }
                write!(f, ")")
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prefix(f, &|t| t.id.to_string())
    }
}

struct Named<'a> {
    f: &'a Formula,
    vocab: &'a Vocabulary,
}

impl fmt::Display for Named<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.f.write_prefix(f, &|t| {
            self.vocab
                .name(t)
                .map(str::to_string)
                .unwrap_or_else(|| format!("?{}", t.id))
        })
    }
}

/// Negative atomic integrity constraint `¬p(s,o)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntegrityConstraint {
    pub fact: Fact,
}

impl IntegrityConstraint {
    pub fn new(fact: Fact) -> Self {
        IntegrityConstraint { fact }
    }

    /// `Not(And(s, p, o))`.
    pub fn to_formula(self) -> Formula {
        let [s, p, o] = self.fact.terms();
        Formula::Not(Box::new(Formula::And(vec![
            Formula::Var(s),
            Formula::Var(p),
            Formula::Var(o),
        ])))
    }

    pub fn variables(self) -> [TermRef; 3] {
        self.fact.terms()
    }

    pub fn shares_variables(self, other: IntegrityConstraint) -> bool {
        let (a, b) = (self.fact, other.fact);
        a.s == b.s || a.p == b.p || a.o == b.o
    }
}

impl fmt::Display for IntegrityConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "¬{}", self.fact)
    }
}

/// Recognizes the exact shape produced by [`IntegrityConstraint::to_formula`].
pub fn formula_of_ic(f: &Formula) -> Option<IntegrityConstraint> {
    let Formula::Not(inner) = f else { return None };
    let Formula::And(cs) = inner.as_ref() else {
        return None;
    };
    match cs.as_slice() {
        [Formula::Var(s), Formula::Var(p), Formula::Var(o)] => {
            let expected = [s.domain, p.domain, o.domain];
            (expected == crate::logic::Domain::ALL).then(|| IntegrityConstraint::new(Fact::new(s.id, p.id, o.id)))
        }
        _ => None,
    }
}

/// Conjunction of the expanded constraints.
pub fn conjunction_of_ics(ics: &[IntegrityConstraint]) -> Result<Formula> {
    Formula::and(ics.iter().map(|ic| ic.to_formula()))
}

pub type Assignment = HashMap<TermRef, bool>;

/// Classical evaluation: is `a` a model of `f`?
pub fn eval_boolean(f: &Formula, a: &Assignment) -> Result<bool> {
    Ok(match f {
        Formula::Var(t) => *a.get(t).ok_or(Error::MissingAssignment(*t))?,
        Formula::Not(c) => !eval_boolean(c, a)?,
        Formula::And(cs) => {
            // evaluate every child so an unassigned variable is always reported
            let mut v = true;
            for c in cs {
                v &= eval_boolean(c, a)?;
            }
            v
        }
        Formula::Or(cs) => {
            let mut v = false;
            for c in cs {
                v |= eval_boolean(c, a)?;
            }
            v
        }
    })
}

/// Łukasiewicz evaluation. N-ary connectives fold left in child order.
pub fn eval_fuzzy(f: &Formula, w: &PredictionVector, slot: usize) -> Result<f64> {
    let acts = w.slot(slot)?;
    fuzzy_rec(f, &|t| acts.get(t).ok_or(Error::MissingAssignment(t)))
}

fn fuzzy_rec(f: &Formula, w: &dyn Fn(TermRef) -> Result<f64>) -> Result<f64> {
    Ok(match f {
        Formula::Var(t) => w(*t)?,
        Formula::Not(c) => 1.0 - fuzzy_rec(c, w)?,
        Formula::And(cs) => {
            let mut acc = fuzzy_rec(&cs[0], w)?;
            for c in &cs[1..] {
                acc = (acc + fuzzy_rec(c, w)? - 1.0).max(0.0);
            }
            acc
        }
        Formula::Or(cs) => {
            let mut acc = fuzzy_rec(&cs[0], w)?;
            for c in &cs[1..] {
                acc = (acc + fuzzy_rec(c, w)?).min(1.0);
            }
            acc
        }
    })
}
