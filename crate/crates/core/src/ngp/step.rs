use std::collections::BTreeMap;

use rand::Rng;

use crate::error::Result;
use crate::harness::{backward_and_update, supervised_loss_and_grad, ActivationGrad, HarnessModel, SceneSample};
use crate::logic::{IntegrityConstraint, PredictionVector};
use crate::losses::{training_loss_of_ic_set, LossKind, LossWeights};
use crate::ngp::{select_for_sample, SelectionConfig, SlotConstraint};
use crate::theory::TheoryStore;

/// What one training step did.
#[derive(Debug, Clone, PartialEq)]
pub struct StepDiagnostics {
    /// Supervised loss (zero when the sample has no ground truth).
    pub ln: f64,
    /// Logic loss of the selected constraints.
    pub ls: f64,
    pub selected: Vec<SlotConstraint>,
    pub grad_norm: f64,
}

/// Value and activation gradient of `β1·Ln + β2·Ls` for fixed selected
/// constraints.
#[derive(Debug, Clone)]
pub struct Objective {
    pub ln: f64,
    pub ls: f64,
    pub total: f64,
    pub grad: ActivationGrad,
}

/// Evaluates the training objective at `w` with the constraint set fixed.
/// The supervised term is dropped when the sample carries no ground truth;
/// the logic term is dropped when `β2 = 0` or nothing is selected.
pub fn ngp_objective(
    sample: &SceneSample,
    w: &PredictionVector,
    selected: &[SlotConstraint],
    kind: LossKind,
    weights: LossWeights,
) -> Result<Objective> {
    let labelled = sample.slots.iter().any(Option::is_some);
    let (ln, mut grad) = supervised_loss_and_grad(sample, w)?;
    if weights.beta1() != 1.0 {
        grad.scale(weights.beta1());
    }
    let mut total = if labelled { weights.beta1() * ln } else { 0.0 };

    let mut ls = 0.0;
    if weights.beta2() != 0.0 && !selected.is_empty() {
        let mut by_slot: BTreeMap<usize, Vec<IntegrityConstraint>> = BTreeMap::new();
        for c in selected {
            by_slot.entry(c.slot).or_default().push(c.ic);
        }
        for (slot, ics) in by_slot {
            let (value, g) = training_loss_of_ic_set(kind, &ics, w, slot)?;
            ls += value;
            grad.add_map(slot, &g, weights.beta2());
        }
        total += weights.beta2() * ls;
    }
    Ok(Objective { ln, ls, total, grad })
}

/// One step of neural-guided projection on `sample`: forward, select the
/// most violated constraints, backpropagate `β1·Ln + β2·Ls`, and update.
pub fn ngp_step<R: Rng + ?Sized>(
    sample: &SceneSample,
    store: &TheoryStore,
    model: &mut HarnessModel,
    cfg: &SelectionConfig,
    weights: LossWeights,
    lr: f64,
    rng: &mut R,
) -> Result<StepDiagnostics> {
    let w = model.forward(sample)?;
    let selected = if weights.beta2() != 0.0 {
        select_for_sample(&w, store, cfg, rng)?
    } else {
        Vec::new()
    };
    let obj = ngp_objective(sample, &w, &selected, cfg.loss, weights)?;
    let grad_norm = backward_and_update(model, sample, &w, &obj.grad, lr)?;
    Ok(StepDiagnostics {
        ln: obj.ln,
        ls: obj.ls,
        selected,
        grad_norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Split;
    use crate::logic::{Fact, Vocabulary};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn setup(truth: Option<Fact>) -> (SceneSample, TheoryStore, HarnessModel) {
        let vocab = Arc::new(Vocabulary::with_sizes(3, 3, 3).unwrap());
        let store = TheoryStore::complement(vocab, [Fact::new(0, 0, 0), Fact::new(1, 1, 1)]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let model = HarnessModel::random(4, 1, [3, 3, 3], 0.3, &mut rng);
        let sample = SceneSample {
            id: 0,
            split: Split::Train,
            features: vec![0.5, -0.1, 0.3, 0.9],
            slots: vec![truth],
        };
        (sample, store, model)
    }

    #[test]
    fn beta2_zero_is_supervised_step() {
        let (sample, store, mut a) = setup(Some(Fact::new(1, 1, 1)));
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = ngp_step(
            &sample,
            &store,
            &mut a,
            &SelectionConfig::default(),
            LossWeights::new(1.0, 0.0).unwrap(),
            0.1,
            &mut rng,
        )
        .unwrap();
        assert!(d.selected.is_empty());
        let w = b.forward(&sample).unwrap();
        let (_, g) = supervised_loss_and_grad(&sample, &w).unwrap();
        backward_and_update(&mut b, &sample, &w, &g, 0.1).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unlabelled_sample_uses_only_logic_loss() {
        let (sample, store, mut m) = setup(None);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = ngp_step(
            &sample,
            &store,
            &mut m,
            &SelectionConfig::default(),
            LossWeights::default(),
            0.1,
            &mut rng,
        )
        .unwrap();
        assert_eq!(d.ln, 0.0);
        assert_eq!(d.selected.len(), 3);
        assert!(d.ls > 0.0 && d.grad_norm > 0.0);
    }

    #[test]
    fn no_violations_is_pure_supervised() {
        let (sample, _, mut a) = setup(Some(Fact::new(0, 0, 0)));
        let vocab = Arc::new(Vocabulary::with_sizes(3, 3, 3).unwrap());
        let empty = TheoryStore::explicit(vocab, []).unwrap();
        let mut b = a.clone();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let d = ngp_step(
            &sample,
            &empty,
            &mut a,
            &SelectionConfig::default(),
            LossWeights::default(),
            0.1,
            &mut rng,
        )
        .unwrap();
        assert_eq!(d.ls, 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        ngp_step(
            &sample,
            &empty,
            &mut b,
            &SelectionConfig::default(),
            LossWeights::new(1.0, 0.0).unwrap(),
            0.1,
            &mut rng,
        )
        .unwrap();
        assert_eq!(a, b);
    }
}
