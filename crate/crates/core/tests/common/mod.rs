//! Brute-force oracles and generators shared by the integration tests. The
//! oracles use only the public data types, never the library's algorithms.

#![allow(dead_code)]

use std::collections::BTreeSet;

use ngpkit::logic::{Domain, Fact, Formula, IntegrityConstraint, PredictionVector, SlotActivations, TermRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn term(d: usize, id: u32) -> TermRef {
    TermRef {
        domain: Domain::ALL[d],
        id,
    }
}

/// Single-slot prediction with activations drawn uniformly from `[lo, hi)`.
pub fn random_prediction<R: Rng>(sizes: [usize; 3], lo: f64, hi: f64, rng: &mut R) -> PredictionVector {
    let [s, p, o] = sizes.map(|n| (0..n).map(|_| rng.random_range(lo..hi)).collect::<Vec<f64>>());
    PredictionVector::single(s, p, o).unwrap()
}

/// Domain sizes with at most `max_vars` terms in total.
pub fn random_sizes<R: Rng>(max_per_domain: usize, max_vars: usize, rng: &mut R) -> [usize; 3] {
    loop {
        let s = [0; 3].map(|_| rng.random_range(1..=max_per_domain));
        if s.iter().sum::<usize>() <= max_vars {
            return s;
        }
    }
}

/// Between 1 and `max` distinct constraints.
pub fn random_ics<R: Rng>(sizes: [usize; 3], max: usize, rng: &mut R) -> Vec<IntegrityConstraint> {
    let space = sizes.iter().product::<usize>();
    let n = rng.random_range(1..=max.min(space));
    let mut chosen = BTreeSet::new();
    while chosen.len() < n {
        chosen.insert(random_fact(sizes, rng));
    }
    chosen.into_iter().map(IntegrityConstraint::new).collect()
}

pub fn random_fact<R: Rng>(sizes: [usize; 3], rng: &mut R) -> Fact {
    Fact::new(
        rng.random_range(0..sizes[0] as u32),
        rng.random_range(0..sizes[1] as u32),
        rng.random_range(0..sizes[2] as u32),
    )
}

pub fn all_facts(sizes: [usize; 3]) -> Vec<Fact> {
    let mut out = Vec::new();
    for s in 0..sizes[0] as u32 {
        for p in 0..sizes[1] as u32 {
            for o in 0..sizes[2] as u32 {
                out.push(Fact::new(s, p, o));
            }
        }
    }
    out
}

pub fn ic_terms(ic: IntegrityConstraint) -> [TermRef; 3] {
    let f = ic.fact;
    [term(0, f.s), term(1, f.p), term(2, f.o)]
}

fn formula_vars(f: &Formula, acc: &mut BTreeSet<TermRef>) {
    match f {
        Formula::Var(t) => {
            acc.insert(*t);
        }
        Formula::Not(g) => formula_vars(g, acc),
        Formula::And(cs) | Formula::Or(cs) => cs.iter().for_each(|c| formula_vars(c, acc)),
    }
}

fn holds(f: &Formula, value: &dyn Fn(TermRef) -> bool) -> bool {
    match f {
        Formula::Var(t) => value(*t),
        Formula::Not(g) => !holds(g, value),
        Formula::And(cs) => cs.iter().all(|c| holds(c, value)),
        Formula::Or(cs) => cs.iter().any(|c| holds(c, value)),
    }
}

/// Decides satisfaction given a truth value per variable.
type Model<'a> = &'a dyn Fn(&dyn Fn(TermRef) -> bool) -> bool;

/// Weighted model count by enumerating every assignment of the variables
/// `vars`; `model` decides satisfaction.
fn enumerate(vars: &[TermRef], acts: &SlotActivations, model: Model) -> f64 {
    assert!(vars.len() <= 20, "oracle limited to 20 variables");
    let mut total = 0.0;
    for mask in 0u32..1 << vars.len() {
        let on = |t: TermRef| {
            let i = vars.iter().position(|v| *v == t).unwrap();
            mask >> i & 1 == 1
        };
        if model(&on) {
            let weight: f64 = vars
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let w = acts.get(*t).unwrap();
                    if mask >> i & 1 == 1 {
                        w
                    } else {
                        1.0 - w
                    }
                })
                .product();
            total += weight;
        }
    }
    total
}

pub fn brute_probability(f: &Formula, acts: &SlotActivations) -> f64 {
    let mut vars = BTreeSet::new();
    formula_vars(f, &mut vars);
    let vars: Vec<TermRef> = vars.into_iter().collect();
    enumerate(&vars, acts, &|on| holds(f, on))
}

/// Probability that none of the constraints is violated.
pub fn brute_probability_ics(ics: &[IntegrityConstraint], acts: &SlotActivations) -> f64 {
    let vars: Vec<TermRef> = ics
        .iter()
        .flat_map(|ic| ic_terms(*ic))
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    enumerate(&vars, acts, &|on| {
        ics.iter().all(|ic| !ic_terms(*ic).iter().all(|t| on(*t)))
    })
}

/// DL2 by its recursive definition on negation normal form.
pub fn dl2_oracle(f: &Formula, acts: &SlotActivations) -> f64 {
    fn rec(f: &Formula, negated: bool, acts: &SlotActivations) -> f64 {
        match (f, negated) {
            (Formula::Var(t), false) => 1.0 - acts.get(*t).unwrap(),
            (Formula::Var(t), true) => acts.get(*t).unwrap(),
            (Formula::Not(g), n) => rec(g, !n, acts),
            (Formula::And(cs), false) | (Formula::Or(cs), true) => cs.iter().map(|c| rec(c, negated, acts)).sum(),
            (Formula::Or(cs), false) | (Formula::And(cs), true) => cs.iter().map(|c| rec(c, negated, acts)).product(),
        }
    }
    rec(f, false, acts)
}

/// Every fact in descending likelihood, ties by ascending `(s, p, o)`.
pub fn brute_ranking(acts: &SlotActivations, sizes: [usize; 3]) -> Vec<(Fact, f64)> {
    let mut v: Vec<(Fact, f64)> = all_facts(sizes).into_iter().map(|f| (f, acts.likelihood(f))).collect();
    v.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    v
}

/// Random formula over the given terms with at most `depth` levels.
pub fn random_formula<R: Rng>(terms: &[TermRef], depth: usize, rng: &mut R) -> Formula {
    if depth == 0 || rng.random_bool(0.3) {
        let v = Formula::var(terms[rng.random_range(0..terms.len())]);
        return if rng.random_bool(0.5) { Formula::not(v) } else { v };
    }
    match rng.random_range(0..3) {
        0 => Formula::not(random_formula(terms, depth - 1, rng)),
        k => {
            let n = rng.random_range(2..=3);
            let children: Vec<Formula> = (0..n).map(|_| random_formula(terms, depth - 1, rng)).collect();
            if k == 1 {
                Formula::and(children).unwrap()
            } else {
                Formula::or(children).unwrap()
            }
        }
    }
}

/// `|a − b| / max(|a|, |b|, floor)`.
pub fn rel_err(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

/// Central difference of `f` at `x` along coordinate `i`.
pub fn central_difference(f: &dyn Fn(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut a = x.to_vec();
    let mut b = x.to_vec();
    a[i] += h;
    b[i] -= h;
    (f(&a) - f(&b)) / (2.0 * h)
}
