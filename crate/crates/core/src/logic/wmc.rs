//! Exact weighted model counting.
//!
//! General formulas are counted by enumerating every assignment of their
//! variables, so they are limited to [`DEFAULT_VAR_CAP`] variables. Conjunctions
//! of negative atomic constraints take a dedicated route: constraints are
//! grouped into variable-connected components, each component is counted by
//! inclusion–exclusion over its positive conjunctions, and the component
//! probabilities multiply.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::logic::{Formula, IntegrityConstraint, PredictionVector, SlotActivations, TermRef};

pub const DEFAULT_VAR_CAP: usize = 20;

/// Largest connected group of constraints handled by inclusion–exclusion.
pub const IC_COMPONENT_CAP: usize = 24;

/// Formula over dense local variable indices.
enum Node {
    Var(usize),
    Not(Box<Node>),
    And(Vec<Node>),
    Or(Vec<Node>),
}

impl Node {
    fn eval(&self, mask: u32) -> bool {
        match self {
            Node::Var(i) => mask >> i & 1 == 1,
            Node::Not(c) => !c.eval(mask),
            Node::And(cs) => cs.iter().all(|c| c.eval(mask)),
            Node::Or(cs) => cs.iter().any(|c| c.eval(mask)),
        }
    }
}

struct Compiled {
    vars: Vec<TermRef>,
    root: Node,
}

impl Compiled {
    fn new(f: &Formula, cap: usize) -> Result<Self> {
        let vars = f.variables();
        if vars.len() > cap {
            return Err(Error::Capacity {
                what: "formula variable count for exact WMC",
                size: vars.len(),
                limit: cap,
            });
        }
        let root = Self::lower(f, &vars);
        Ok(Compiled { vars, root })
    }

    fn lower(f: &Formula, vars: &[TermRef]) -> Node {
        match f {
            Formula::Var(t) => Node::Var(vars.binary_search(t).expect("variable collected")),
            Formula::Not(c) => Node::Not(Box::new(Self::lower(c, vars))),
            Formula::And(cs) => Node::And(cs.iter().map(|c| Self::lower(c, vars)).collect()),
            Formula::Or(cs) => Node::Or(cs.iter().map(|c| Self::lower(c, vars)).collect()),
        }
    }

    fn weights(&self, acts: &SlotActivations) -> Result<Vec<f64>> {
        self.vars
            .iter()
            .map(|t| acts.get(*t).ok_or(Error::MissingAssignment(*t)))
            .collect()
    }

    /// Sum of `P(J)` over all models `J`.
    fn count(&self, weights: &[f64]) -> f64 {
        let n = self.vars.len();
        // P(J) factors into a low-half and a high-half product table.
        let lo_bits = n / 2;
        let hi_bits = n - lo_bits;
        let table = |offset: usize, bits: usize| -> Vec<f64> {
            (0..1usize << bits)
                .map(|m| {
                    (0..bits)
                        .map(|i| {
                            let w = weights[offset + i];
                            if m >> i & 1 == 1 {
                                w
                            } else {
                                1.0 - w
                            }
                        })
                        .product()
                })
                .collect()
        };
        let lo = table(0, lo_bits);
        let hi = table(lo_bits, hi_bits);
        let lo_mask = (1u32 << lo_bits) - 1;
        let mut total = 0.0;
        for mask in 0..1u32 << n {
            if self.root.eval(mask) {
                total += lo[(mask & lo_mask) as usize] * hi[(mask >> lo_bits) as usize];
            }
        }
        total
    }
}

/// Probability that `f` holds when each variable is an independent Bernoulli
/// with the activation as its success probability.
pub fn wmc(f: &Formula, w: &PredictionVector, slot: usize) -> Result<f64> {
    wmc_with_cap(f, w, slot, DEFAULT_VAR_CAP)
}

pub fn wmc_with_cap(f: &Formula, w: &PredictionVector, slot: usize, cap: usize) -> Result<f64> {
    let compiled = Compiled::new(f, cap.min(31))?;
    let weights = compiled.weights(w.slot(slot)?)?;
    Ok(compiled.count(&weights))
}

/// `∂P/∂w(t)` for every variable `t` of `f`. WMC is multilinear, so each
/// partial derivative is `P|w(t)=1 − P|w(t)=0`. Terms not in `f` have zero
/// gradient and are omitted from the map.
pub fn wmc_gradient(f: &Formula, w: &PredictionVector, slot: usize) -> Result<BTreeMap<TermRef, f64>> {
    let compiled = Compiled::new(f, DEFAULT_VAR_CAP)?;
    let mut weights = compiled.weights(w.slot(slot)?)?;
    let mut grad = BTreeMap::new();
    for (i, t) in compiled.vars.iter().enumerate() {
        let saved = weights[i];
        weights[i] = 1.0;
        let hi = compiled.count(&weights);
        weights[i] = 0.0;
        let lo = compiled.count(&weights);
        weights[i] = saved;
        grad.insert(*t, hi - lo);
    }
    Ok(grad)
}

/// A deduplicated set of constraints over local variable indices, split into
/// variable-connected components.
pub(crate) struct IcSystem {
    pub vars: Vec<TermRef>,
    /// Per component: each constraint's three local variable indices.
    components: Vec<Vec<[usize; 3]>>,
    /// Component owning each local variable.
    var_component: Vec<usize>,
}

impl IcSystem {
    pub fn new(ics: &[IntegrityConstraint]) -> Result<Self> {
        if ics.is_empty() {
            return Err(Error::Contract("constraint list must be non-empty".into()));
        }
        let mut uniq = ics.to_vec();
        uniq.sort_unstable();
        uniq.dedup();

        let mut vars: Vec<TermRef> = uniq.iter().flat_map(|c| c.variables()).collect();
        vars.sort_unstable();
        vars.dedup();
        let local: Vec<[usize; 3]> = uniq
            .iter()
            .map(|c| c.variables().map(|t| vars.binary_search(&t).unwrap()))
            .collect();

        // union-find over variables
        let mut parent: Vec<usize> = (0..vars.len()).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for [a, b, c] in &local {
            for y in [b, c] {
                let (ra, ry) = (find(&mut parent, *a), find(&mut parent, *y));
                if ra != ry {
                    parent[ry] = ra;
                }
            }
        }
        let mut root_to_comp = BTreeMap::new();
        let mut components: Vec<Vec<[usize; 3]>> = Vec::new();
        for ic in &local {
            let r = find(&mut parent, ic[0]);
            let idx = *root_to_comp.entry(r).or_insert_with(|| {
                components.push(Vec::new());
                components.len() - 1
            });
            components[idx].push(*ic);
        }
        let var_component = (0..vars.len()).map(|v| root_to_comp[&find(&mut parent, v)]).collect();
        if let Some(big) = components.iter().map(Vec::len).max().filter(|&n| n > IC_COMPONENT_CAP) {
            return Err(Error::Capacity {
                what: "connected constraints for inclusion–exclusion",
                size: big,
                limit: IC_COMPONENT_CAP,
            });
        }
        Ok(IcSystem {
            vars,
            components,
            var_component,
        })
    }

    pub fn weights(&self, acts: &SlotActivations) -> Result<Vec<f64>> {
        self.vars
            .iter()
            .map(|t| acts.get(*t).ok_or(Error::MissingAssignment(*t)))
            .collect()
    }

    pub fn all_disjoint(&self) -> bool {
        self.components.iter().all(|c| c.len() == 1)
    }

    /// `P(⋀ ¬C_i)` for one component:
    /// `Σ_{A ⊆ comp} (−1)^{|A|} Π_{t ∈ vars(A)} w(t)`.
    fn component_probability(comp: &[[usize; 3]], weights: &[f64]) -> f64 {
        if let [ic] = comp {
            return 1.0 - weights[ic[0]] * weights[ic[1]] * weights[ic[2]];
        }
        fn rec(comp: &[[usize; 3]], weights: &[f64], covered: u128, prod: f64, negative: bool) -> f64 {
            let Some((ic, rest)) = comp.split_first() else {
                return if negative { -prod } else { prod };
            };
            let skip = rec(rest, weights, covered, prod, negative);
            let mut p = prod;
            let mut cov = covered;
            for &v in ic {
                if cov >> v & 1 == 0 {
                    cov |= 1 << v;
                    p *= weights[v];
                }
            }
            skip + rec(rest, weights, cov, p, !negative)
        }
        // local indices inside a component fit in 72 bits, remap to be safe
        let mut ids: Vec<usize> = comp.iter().flatten().copied().collect();
        ids.sort_unstable();
        ids.dedup();
        let remapped: Vec<[usize; 3]> = comp
            .iter()
            .map(|ic| ic.map(|v| ids.binary_search(&v).unwrap()))
            .collect();
        let w: Vec<f64> = ids.iter().map(|&v| weights[v]).collect();
        rec(&remapped, &w, 0, 1.0, false)
    }

    pub fn probability(&self, weights: &[f64]) -> f64 {
        self.components
            .iter()
            .map(|c| Self::component_probability(c, weights))
            .product()
    }

    /// Gradient of [`IcSystem::probability`] w.r.t. every local variable.
    pub fn gradient(&self, weights: &[f64]) -> Vec<f64> {
        let per_comp: Vec<f64> = self
            .components
            .iter()
            .map(|c| Self::component_probability(c, weights))
            .collect();
        let mut w = weights.to_vec();
        (0..self.vars.len())
            .map(|v| {
                let c = self.var_component[v];
                let others: f64 = per_comp
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != c)
                    .map(|(_, p)| p)
                    .product();
                let saved = w[v];
                w[v] = 1.0;
                let hi = Self::component_probability(&self.components[c], &w);
                w[v] = 0.0;
                let lo = Self::component_probability(&self.components[c], &w);
                w[v] = saved;
                (hi - lo) * others
            })
            .collect()
    }
}

/// `P(⋀_i ¬C_i | w)` for a set of negative atomic constraints.
///
/// Agrees with [`wmc`] on the expanded conjunction but needs no enumeration
/// over variables. Pairwise variable-disjoint constraints reduce to
/// `Π_i (1 − w(s_i)·w(p_i)·w(o_i))`.
pub fn wmc_ic_conjunction(ics: &[IntegrityConstraint], w: &PredictionVector, slot: usize) -> Result<f64> {
    let sys = IcSystem::new(ics)?;
    let weights = sys.weights(w.slot(slot)?)?;
    Ok(sys.probability(&weights))
}

/// Gradient of [`wmc_ic_conjunction`] over the constraints' variables.
pub fn wmc_ic_conjunction_gradient(
    ics: &[IntegrityConstraint],
    w: &PredictionVector,
    slot: usize,
) -> Result<BTreeMap<TermRef, f64>> {
    let sys = IcSystem::new(ics)?;
    let weights = sys.weights(w.slot(slot)?)?;
    Ok(sys.vars.iter().copied().zip(sys.gradient(&weights)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::{conjunction_of_ics, Fact};

    fn w3(x: f64) -> PredictionVector {
        PredictionVector::single(vec![x; 2], vec![x; 2], vec![x; 2]).unwrap()
    }

    fn ic(s: u32, p: u32, o: u32) -> IntegrityConstraint {
        IntegrityConstraint::new(Fact::new(s, p, o))
    }

    #[test]
    fn running_example_values() {
        let f = ic(0, 0, 0).to_formula();
        assert_eq!(wmc(&f, &w3(1.0), 0).unwrap(), 0.0);
        assert!((wmc(&f, &w3(0.5), 0).unwrap() - 0.875).abs() < 1e-15);
        let x = PredictionVector::single(vec![0.3], vec![1.0], vec![1.0]).unwrap();
        assert_eq!(wmc(&Formula::var(TermRef::subject(0)), &x, 0).unwrap(), 0.3);
    }

    #[test]
    fn gradient_of_running_example() {
        let g = wmc_gradient(&ic(0, 0, 0).to_formula(), &w3(0.5), 0).unwrap();
        assert_eq!(g.len(), 3);
        for v in g.values() {
            assert!((v + 0.25).abs() < 1e-15);
        }
        let gx = wmc_gradient(&Formula::var(TermRef::object(1)), &w3(0.2), 0).unwrap();
        assert_eq!(gx[&TermRef::object(1)], 1.0);
    }

    #[test]
    fn capacity_error() {
        let vars: Vec<Formula> = (0..21).map(|i| Formula::var(TermRef::subject(i))).collect();
        let f = Formula::or(vars).unwrap();
        let w = PredictionVector::single(vec![0.5; 21], vec![0.5], vec![0.5]).unwrap();
        assert!(matches!(wmc(&f, &w, 0), Err(Error::Capacity { .. })));
        assert!(wmc_with_cap(&f, &w, 0, 21).is_ok());
    }

    #[test]
    fn ic_conjunction_examples() {
        let w = w3(0.5);
        assert!((wmc_ic_conjunction(&[ic(0, 0, 0)], &w, 0).unwrap() - 0.875).abs() < 1e-15);
        let two = [ic(0, 0, 0), ic(1, 1, 1)];
        assert!((wmc_ic_conjunction(&two, &w, 0).unwrap() - 0.765625).abs() < 1e-15);
        let expanded = wmc(&conjunction_of_ics(&two).unwrap(), &w, 0).unwrap();
        assert!((expanded - 0.765625).abs() < 1e-15);
        let same = [ic(0, 0, 0), ic(0, 0, 0)];
        assert_eq!(
            wmc_ic_conjunction(&same, &w, 0).unwrap(),
            wmc_ic_conjunction(&same[..1], &w, 0).unwrap()
        );
        assert!(matches!(wmc_ic_conjunction(&[], &w, 0), Err(Error::Contract(_))));
    }

    #[test]
    fn overlapping_constraints_match_enumeration() {
        let w = PredictionVector::single(vec![0.3, 0.8], vec![0.6, 0.1], vec![0.9, 0.45]).unwrap();
        let ics = [ic(0, 0, 0), ic(0, 1, 0), ic(1, 0, 1), ic(0, 0, 1)];
        let fast = wmc_ic_conjunction(&ics, &w, 0).unwrap();
        let slow = wmc(&conjunction_of_ics(&ics).unwrap(), &w, 0).unwrap();
        assert!((fast - slow).abs() < 1e-14, "{fast} vs {slow}");
        let g_fast = wmc_ic_conjunction_gradient(&ics, &w, 0).unwrap();
        let g_slow = wmc_gradient(&conjunction_of_ics(&ics).unwrap(), &w, 0).unwrap();
        assert_eq!(g_fast.len(), g_slow.len());
        for (t, v) in &g_fast {
            assert!((v - g_slow[t]).abs() < 1e-14);
        }
    }
}
