use crate::error::{Error, Result};
use crate::logic::{Domain, Fact, TermRef, Vocabulary};

/// Activations for one relation slot, one vector per domain.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotActivations {
    pub domains: [Vec<f64>; 3],
}

impl SlotActivations {
    pub fn new(subjects: Vec<f64>, predicates: Vec<f64>, objects: Vec<f64>) -> Self {
        SlotActivations {
            domains: [subjects, predicates, objects],
        }
    }

    pub fn domain(&self, d: Domain) -> &[f64] {
        &self.domains[d as usize]
    }

    pub fn get(&self, t: TermRef) -> Option<f64> {
        self.domains[t.domain as usize].get(t.id as usize).copied()
    }

    /// `w(s)·w(p)·w(o)`, always multiplied in that order.
    pub fn likelihood(&self, fact: Fact) -> f64 {
        self.domains[0][fact.s as usize] * self.domains[1][fact.p as usize] * self.domains[2][fact.o as usize]
    }
}

/// The network's output activations, grouped into relation slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionVector {
    slots: Vec<SlotActivations>,
}

impl PredictionVector {
    /// Every activation must be finite and lie in `[0, 1]`; every slot must
    /// have the same domain sizes.
    pub fn new(slots: Vec<SlotActivations>) -> Result<Self> {
        let Some(first) = slots.first() else {
            return Err(Error::Validation("prediction vector needs at least one slot".into()));
        };
        let sizes = first.domains.each_ref().map(Vec::len);
        for (i, slot) in slots.iter().enumerate() {
            for (d, values) in slot.domains.iter().enumerate() {
                if values.len() != sizes[d] {
                    return Err(Error::DimensionMismatch {
                        expected: sizes[d],
                        got: values.len(),
                    });
                }
                if let Some(bad) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                    return Err(Error::Validation(format!(
                        "activation {bad} in slot {i} is outside [0, 1]"
                    )));
                }
            }
        }
        Ok(PredictionVector { slots })
    }

    pub fn single(subjects: Vec<f64>, predicates: Vec<f64>, objects: Vec<f64>) -> Result<Self> {
        Self::new(vec![SlotActivations::new(subjects, predicates, objects)])
    }

    /// Uniform distribution over every domain of `vocab`.
    pub fn uniform(vocab: &Vocabulary, n_slots: usize) -> Result<Self> {
        let [ns, np, no] = vocab.sizes();
        let u = |n: usize| vec![1.0 / n as f64; n];
        Self::new(vec![SlotActivations::new(u(ns), u(np), u(no)); n_slots])
    }

    pub fn n_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn sizes(&self) -> [usize; 3] {
        self.slots[0].domains.each_ref().map(Vec::len)
    }

    pub fn slot(&self, slot: usize) -> Result<&SlotActivations> {
        self.slots
            .get(slot)
            .ok_or_else(|| Error::Contract(format!("slot {slot} out of range ({} slots)", self.slots.len())))
    }

    pub fn slots(&self) -> &[SlotActivations] {
        &self.slots
    }

    pub fn get(&self, slot: usize, term: TermRef) -> Option<f64> {
        self.slots.get(slot)?.get(term)
    }

    pub fn covers(&self, vocab: &Vocabulary) -> bool {
        self.sizes() == vocab.sizes()
    }

    /// Copy of `self` with one activation replaced.
    pub fn with_value(&self, slot: usize, term: TermRef, value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::Validation(format!("activation {value} outside [0, 1]")));
        }
        let mut out = self.clone();
        let cell = out
            .slots
            .get_mut(slot)
            .and_then(|s| s.domains[term.domain as usize].get_mut(term.id as usize))
            .ok_or(Error::MissingAssignment(term))?;
        *cell = value;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_out_of_range_activation() {
        assert!(PredictionVector::single(vec![1.2], vec![0.5], vec![0.5]).is_err());
        assert!(PredictionVector::single(vec![f64::NAN], vec![0.5], vec![0.5]).is_err());
        assert!(PredictionVector::single(vec![0.0], vec![1.0], vec![0.5]).is_ok());
    }

    #[test]
    fn rejects_ragged_slots() {
        let a = SlotActivations::new(vec![0.5, 0.5], vec![1.0], vec![1.0]);
        let b = SlotActivations::new(vec![1.0], vec![1.0], vec![1.0]);
        assert!(matches!(
            PredictionVector::new(vec![a, b]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn likelihood_is_product() {
        let w = PredictionVector::single(vec![0.6, 0.4], vec![0.7, 0.3], vec![0.9, 0.1]).unwrap();
        let l = w.slot(0).unwrap().likelihood(Fact::new(1, 0, 0));
        assert!((l - 0.4 * 0.7 * 0.9).abs() < 1e-15);
    }
}
