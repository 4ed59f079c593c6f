//! Semantic loss, DL2 loss and the combined training objective.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::logic::{
    wmc, wmc_gradient, Formula, IcSystem, IntegrityConstraint, PredictionVector, SlotActivations, TermRef,
};

/// Floor applied inside every logarithm during training.
pub const LOG_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// Semantic loss: `−ln P(φ | w)`.
    Sl,
    /// DL2 fuzzy loss.
    Dl2,
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sl" => Ok(LossKind::Sl),
            "dl2" => Ok(LossKind::Dl2),
            _ => Err(Error::Validation(format!("unknown loss {s:?} (expected sl or dl2)"))),
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Sl => "sl",
            LossKind::Dl2 => "dl2",
        })
    }
}

/// Importance of the supervised (`beta1`) and logic (`beta2`) terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossWeights {
    beta1: f64,
    beta2: f64,
}

impl LossWeights {
    pub fn new(beta1: f64, beta2: f64) -> Result<Self> {
        let ok = |b: f64| b.is_finite() && b >= 0.0;
        if !ok(beta1) || !ok(beta2) {
            return Err(Error::Validation(format!(
                "loss weights must be finite and nonnegative, got ({beta1}, {beta2})"
            )));
        }
        if beta1 == 0.0 && beta2 == 0.0 {
            return Err(Error::Validation("beta1 and beta2 cannot both be zero".into()));
        }
        Ok(LossWeights { beta1, beta2 })
    }

    pub fn beta1(&self) -> f64 {
        self.beta1
    }

    pub fn beta2(&self) -> f64 {
        self.beta2
    }
}

impl Default for LossWeights {
    fn default() -> Self {
        LossWeights { beta1: 1.0, beta2: 1.0 }
    }
}

/// `β1·ln + β2·ls`.
pub fn combined_loss(ln_value: f64, ls_value: f64, weights: LossWeights) -> f64 {
    weights.beta1 * ln_value + weights.beta2 * ls_value
}

fn neg_ln(p: f64) -> f64 {
    if p <= 0.0 {
        f64::INFINITY
    } else {
        (-p.ln()).max(0.0)
    }
}

/// `−ln P(f | w)`, or `+∞` when the formula has probability zero.
pub fn semantic_loss(f: &Formula, w: &PredictionVector, slot: usize) -> Result<f64> {
    Ok(neg_ln(wmc(f, w, slot)?))
}

/// Rewrites `f` so negations only apply to variables.
pub fn to_nnf(f: &Formula) -> Formula {
    fn pos(f: &Formula) -> Formula {
        match f {
            Formula::Var(_) => f.clone(),
            Formula::Not(c) => neg(c),
            Formula::And(cs) => Formula::And(cs.iter().map(pos).collect()),
            Formula::Or(cs) => Formula::Or(cs.iter().map(pos).collect()),
        }
    }
    fn neg(f: &Formula) -> Formula {
        match f {
            Formula::Var(_) => Formula::Not(Box::new(f.clone())),
            Formula::Not(c) => pos(c),
            Formula::And(cs) => Formula::Or(cs.iter().map(neg).collect()),
            Formula::Or(cs) => Formula::And(cs.iter().map(neg).collect()),
        }
    }
    pos(f)
}

type Grad = BTreeMap<TermRef, f64>;

/// DL2 value and gradient of an NNF formula.
fn dl2_rec(f: &Formula, acts: &SlotActivations, want_grad: bool) -> Result<(f64, Grad)> {
    let get = |t: &TermRef| acts.get(*t).ok_or(Error::MissingAssignment(*t));
    Ok(match f {
        Formula::Var(t) => {
            let g = if want_grad {
                Grad::from([(*t, -1.0)])
            } else {
                Grad::new()
            };
            (1.0 - get(t)?, g)
        }
        Formula::Not(c) => match c.as_ref() {
            Formula::Var(t) => {
                let g = if want_grad {
                    Grad::from([(*t, 1.0)])
                } else {
                    Grad::new()
                };
                (get(t)?, g)
            }
            _ => unreachable!("input is in negation normal form"),
        },
        Formula::And(cs) => {
            let (mut acc, mut grad) = dl2_rec(&cs[0], acts, want_grad)?;
            for c in &cs[1..] {
                let (v, g) = dl2_rec(c, acts, want_grad)?;
                acc += v;
                for (t, d) in g {
                    *grad.entry(t).or_default() += d;
                }
            }
            (acc, grad)
        }
        Formula::Or(cs) => {
            let (mut acc, mut grad) = dl2_rec(&cs[0], acts, want_grad)?;
            for c in &cs[1..] {
                let (v, g) = dl2_rec(c, acts, want_grad)?;
                if want_grad {
                    // d(acc·v) = v·d(acc) + acc·d(v)
                    grad.values_mut().for_each(|d| *d *= v);
                    for (t, d) in g {
                        *grad.entry(t).or_default() += acc * d;
                    }
                }
                acc *= v;
            }
            (acc, grad)
        }
    })
}

/// DL2 loss: rewrite to NNF, then `L(X)=1−w(X)`, `L(¬X)=w(X)`, conjunction
/// adds and disjunction multiplies.
pub fn dl2_loss(f: &Formula, w: &PredictionVector, slot: usize) -> Result<f64> {
    Ok(dl2_rec(&to_nnf(f), w.slot(slot)?, false)?.0)
}

fn ic_likelihoods(ics: &[IntegrityConstraint], acts: &SlotActivations) -> Result<Vec<f64>> {
    ics.iter()
        .map(|ic| {
            for t in ic.variables() {
                acts.get(t).ok_or(Error::MissingAssignment(t))?;
            }
            Ok(acts.likelihood(ic.fact))
        })
        .collect()
}

/// DL2 over a conjunction of constraints: the sum of their likelihoods,
/// added in descending order so equal multisets give bit-identical sums.
fn dl2_ic_sum(mut likelihoods: Vec<f64>) -> f64 {
    likelihoods.sort_unstable_by(|a, b| b.total_cmp(a));
    likelihoods.iter().sum()
}

/// Loss of the conjunction of `ics`.
pub fn loss_of_ic_set(kind: LossKind, ics: &[IntegrityConstraint], w: &PredictionVector, slot: usize) -> Result<f64> {
    if ics.is_empty() {
        return Err(Error::Contract("constraint set must be non-empty".into()));
    }
    let acts = w.slot(slot)?;
    match kind {
        LossKind::Sl => {
            let sys = IcSystem::new(ics)?;
            Ok(neg_ln(sys.probability(&sys.weights(acts)?)))
        }
        LossKind::Dl2 => Ok(dl2_ic_sum(ic_likelihoods(ics, acts)?)),
    }
}

/// What a loss is evaluated on.
#[derive(Debug, Clone, Copy)]
pub enum LossTarget<'a> {
    Formula(&'a Formula),
    Ics(&'a [IntegrityConstraint]),
}

fn dl2_ic_gradient(ics: &[IntegrityConstraint], acts: &SlotActivations) -> Result<Grad> {
    ic_likelihoods(ics, acts)?;
    let mut grad = Grad::new();
    for ic in ics {
        let [s, p, o] = ic.variables();
        let (ws, wp, wo) = (acts.get(s).unwrap(), acts.get(p).unwrap(), acts.get(o).unwrap());
        *grad.entry(s).or_default() += wp * wo;
        *grad.entry(p).or_default() += ws * wo;
        *grad.entry(o).or_default() += ws * wp;
    }
    Ok(grad)
}

/// Exact gradient of the loss w.r.t. the activations. Terms that do not occur
/// in the target are absent (their gradient is zero).
///
/// The semantic loss has no finite gradient when the probability is zero;
/// that case returns [`Error::SaturatedGradient`].
pub fn loss_gradient(kind: LossKind, target: LossTarget<'_>, w: &PredictionVector, slot: usize) -> Result<Grad> {
    let acts = w.slot(slot)?;
    match (kind, target) {
        (LossKind::Dl2, LossTarget::Formula(f)) => Ok(dl2_rec(&to_nnf(f), acts, true)?.1),
        (LossKind::Dl2, LossTarget::Ics(ics)) => {
            if ics.is_empty() {
                return Err(Error::Contract("constraint set must be non-empty".into()));
            }
            dl2_ic_gradient(ics, acts)
        }
        (LossKind::Sl, LossTarget::Formula(f)) => {
            let p = wmc(f, w, slot)?;
            if p <= 0.0 {
                return Err(Error::SaturatedGradient);
            }
            let mut g = wmc_gradient(f, w, slot)?;
            g.values_mut().for_each(|d| *d = -*d / p);
            Ok(g)
        }
        (LossKind::Sl, LossTarget::Ics(ics)) => {
            let sys = IcSystem::new(ics)?;
            let weights = sys.weights(acts)?;
            let p = sys.probability(&weights);
            if p <= 0.0 {
                return Err(Error::SaturatedGradient);
            }
            Ok(sys
                .vars
                .iter()
                .copied()
                .zip(sys.gradient(&weights).into_iter().map(|d| -d / p))
                .collect())
        }
    }
}

/// Loss and gradient of a constraint set as used during training: the
/// semantic loss floors the probability at [`LOG_EPSILON`], so both value and
/// gradient stay finite on saturated violations.
pub fn training_loss_of_ic_set(
    kind: LossKind,
    ics: &[IntegrityConstraint],
    w: &PredictionVector,
    slot: usize,
) -> Result<(f64, Grad)> {
    if ics.is_empty() {
        return Err(Error::Contract("constraint set must be non-empty".into()));
    }
    let acts = w.slot(slot)?;
    match kind {
        LossKind::Dl2 => Ok((dl2_ic_sum(ic_likelihoods(ics, acts)?), dl2_ic_gradient(ics, acts)?)),
        LossKind::Sl => {
            let sys = IcSystem::new(ics)?;
            let weights = sys.weights(acts)?;
            let p = sys.probability(&weights).max(LOG_EPSILON);
            let grad = sys
                .vars
                .iter()
                .copied()
                .zip(sys.gradient(&weights).into_iter().map(|d| -d / p))
                .collect();
            Ok(((-p.ln()).max(0.0), grad))
        }
    }
}
