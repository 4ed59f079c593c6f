mod common;

use std::collections::HashSet;

use common::*;
use ngpkit::harness::{
    backward_and_update, generate_dataset, init_model, mean_recall_at_k, parse_samples_tsv, rng_for,
    run_reduction_sweep, supervised_loss_and_grad, train, training_theory, write_samples_tsv, zero_shot_recall_at_k,
    Regularizer, Split, Stream, SweepConfig, TrainConfig, WorldSpec,
};
use ngpkit::logic::Fact;
use ngpkit::ngp::ScoredFact;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn small_config(seed: u64, retention: f64) -> TrainConfig {
    TrainConfig {
        world: WorldSpec {
            n_train: 150,
            n_val: 20,
            n_test: 40,
            retention,
            seed,
            ..WorldSpec::default()
        },
        epochs: 2,
        ..TrainConfig::default()
    }
}

type EvalCase = (Vec<Vec<ScoredFact>>, Vec<Vec<(usize, Fact)>>);

/// Random per-sample score lists with ground truth drawn from the same facts.
fn random_eval(rng: &mut impl Rng) -> EvalCase {
    let sizes = [4, 5, 4];
    let mut preds = Vec::new();
    let mut truth = Vec::new();
    for _ in 0..rng.random_range(1..12) {
        let n = rng.random_range(1..15);
        let facts: Vec<ScoredFact> = (0..n)
            .map(|_| ScoredFact {
                slot: rng.random_range(0..2),
                fact: random_fact(sizes, rng),
                likelihood: rng.random_range(0.0..1.0),
            })
            .collect();
        let gt = (0..rng.random_range(0..4))
            .map(|_| {
                if rng.random_bool(0.6) {
                    let sf = facts[rng.random_range(0..facts.len())];
                    (sf.slot, sf.fact)
                } else {
                    (rng.random_range(0..2), random_fact(sizes, rng))
                }
            })
            .collect();
        preds.push(facts);
        truth.push(gt);
    }
    (preds, truth)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn metrics_ignore_order_and_monotone_rescaling(seed in any::<u64>(), k in 1usize..10) {
        let mut rng = rng(seed);
        let (preds, truth) = random_eval(&mut rng);
        let train_facts: HashSet<Fact> = (0..6).map(|_| random_fact([4, 5, 4], &mut rng)).collect();
        let mr = mean_recall_at_k(&preds, &truth, 5, k);
        let zs = zero_shot_recall_at_k(&preds, &truth, &train_facts, k);
        prop_assert!((0.0..=1.0).contains(&mr.mean) && (0.0..=1.0).contains(&zs.value));

        let shuffled: Vec<Vec<ScoredFact>> = preds
            .iter()
            .map(|p| {
                let mut q = p.clone();
                q.shuffle(&mut rng);
                q.iter_mut().for_each(|sf| sf.likelihood = sf.likelihood.powi(3) * 0.5);
                q
            })
            .collect();
        prop_assert_eq!(mean_recall_at_k(&shuffled, &truth, 5, k), mr);
        prop_assert_eq!(zero_shot_recall_at_k(&shuffled, &truth, &train_facts, k), zs);
    }

    #[test]
    fn sample_tsv_roundtrips(seed in any::<u64>()) {
        let spec = WorldSpec { n_train: 30, n_val: 5, n_test: 5, retention: 0.5, seed, ..WorldSpec::default() };
        let data = generate_dataset(&spec).unwrap();
        let text = write_samples_tsv(&data.samples);
        prop_assert_eq!(parse_samples_tsv(&text).unwrap(), data.samples);
    }
}

#[test]
fn recall_grows_with_cutoff() {
    let mut rng = rng(3);
    for _ in 0..50 {
        let (preds, truth) = random_eval(&mut rng);
        let mut last = 0.0;
        for k in 1..16 {
            let m = mean_recall_at_k(&preds, &truth, 5, k).mean;
            assert!(m >= last - 1e-15);
            last = m;
        }
    }
}

#[test]
fn unregularized_training_is_plain_supervised_sgd() {
    let mut cfg = small_config(11, 1.0);
    cfg.regularizer = Regularizer::None;
    assert_eq!(cfg.effective_weights().beta1(), 1.0);
    let data = generate_dataset(&cfg.world).unwrap();
    let store = training_theory(&cfg, &data).unwrap();
    let trained = train(&cfg, &data, &store).unwrap().model;

    let mut model = init_model(&cfg);
    let mut shuffle = rng_for(cfg.world.seed, Stream::Shuffle);
    let mut order: Vec<usize> = (0..data.samples.len())
        .filter(|&i| data.samples[i].split == Split::Train)
        .collect();
    for _ in 0..cfg.epochs {
        order.shuffle(&mut shuffle);
        for &i in &order {
            let s = &data.samples[i];
            let w = model.forward(s).unwrap();
            let (_, grad) = supervised_loss_and_grad(s, &w).unwrap();
            backward_and_update(&mut model, s, &w, &grad, cfg.lr).unwrap();
        }
    }
    assert_eq!(model.params(), trained.params());
}

#[test]
fn generation_is_seeded() {
    let spec = WorldSpec {
        n_train: 50,
        n_val: 5,
        n_test: 5,
        retention: 0.6,
        seed: 4,
        ..WorldSpec::default()
    };
    let a = generate_dataset(&spec).unwrap();
    let b = generate_dataset(&spec).unwrap();
    assert_eq!(a.samples, b.samples);
    assert_eq!(a.permitted, b.permitted);
    let other = generate_dataset(&WorldSpec {
        seed: 5,
        ..spec.clone()
    })
    .unwrap();
    assert_ne!(a.samples, other.samples);
    assert_eq!(
        a.split(Split::Train).filter(|s| s.is_labelled()).count(),
        spec.labelled_count()
    );
    // zero-shot facts never appear in training
    let zero: HashSet<Fact> = a.zero_shot.iter().copied().collect();
    assert!(a.train_facts.is_disjoint(&zero));
}

#[test]
fn sweep_rows_do_not_depend_on_jobs() {
    let mut cfg = SweepConfig {
        base: small_config(0, 1.0),
        retentions: vec![1.0, 0.5],
        seeds: vec![0, 1],
        regularizers: vec![Regularizer::None, Regularizer::NgpSl],
        jobs: 1,
    };
    cfg.base.epochs = 1;
    let serial = run_reduction_sweep(&cfg).unwrap();
    cfg.jobs = 2;
    let parallel = run_reduction_sweep(&cfg).unwrap();
    assert_eq!(serial.len(), 8);
    assert_eq!(serial, parallel);
    assert_eq!(
        (serial[0].retention, serial[0].seed, serial[0].regularizer),
        (1.0, 0, Regularizer::None)
    );
}
