mod common;

use std::sync::Arc;

use common::*;
use ngpkit::logic::{Fact, PredictionVector, Vocabulary};
use ngpkit::losses::LossKind;
use ngpkit::ngp::{
    greedy_select, greedy_select_with_stats, itr_project, topk_facts, MergedTopFacts, SelectionConfig, TopFacts,
};
use ngpkit::theory::TheoryStore;
use proptest::prelude::*;
use rand::Rng;

fn vocab(sizes: [usize; 3]) -> Arc<Vocabulary> {
    Arc::new(Vocabulary::with_sizes(sizes[0], sizes[1], sizes[2]).unwrap())
}

/// Activations on a 1/16 grid so that ties are common.
fn grid_prediction(sizes: [usize; 3], rng: &mut impl Rng) -> PredictionVector {
    let [s, p, o] = sizes.map(|n| (0..n).map(|_| rng.random_range(0..=16) as f64 / 16.0).collect());
    PredictionVector::single(s, p, o).unwrap()
}

fn random_theory(sizes: [usize; 3], rng: &mut impl Rng) -> TheoryStore {
    let density = rng.random_range(0.0..1.0);
    let forbidden: Vec<Fact> = all_facts(sizes)
        .into_iter()
        .filter(|_| rng.random_bool(density))
        .collect();
    TheoryStore::explicit(vocab(sizes), forbidden).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn topk_matches_brute_ranking(seed in any::<u64>(), grid in any::<bool>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(12, 36, &mut rng);
        let w = if grid { grid_prediction(sizes, &mut rng) } else { random_prediction(sizes, 0.0, 1.0, &mut rng) };
        let want = brute_ranking(&w.slots()[0], sizes);
        for k in 1..=want.len() {
            let got: Vec<(Fact, f64)> =
                topk_facts(&w, 0, k).unwrap().into_iter().map(|sf| (sf.fact, sf.likelihood)).collect();
            prop_assert_eq!(&got[..], &want[..k]);
        }
        prop_assert!(topk_facts(&w, 0, 0).is_err());
        prop_assert!(topk_facts(&w, 0, want.len() + 1).is_err());
    }

    #[test]
    fn greedy_is_top_forbidden_and_itr_is_top_allowed(seed in any::<u64>(), rho in 1usize..12) {
        let mut rng = rng(seed);
        let sizes = random_sizes(6, 15, &mut rng);
        let w = grid_prediction(sizes, &mut rng);
        let store = random_theory(sizes, &mut rng);
        let ranking = brute_ranking(&w.slots()[0], sizes);

        let cfg = SelectionConfig::new(rho, LossKind::Sl).unwrap();
        let got: Vec<Fact> = greedy_select(&w, 0, &store, &cfg).unwrap().into_iter().map(|ic| ic.fact).collect();
        let want: Vec<Fact> = ranking.iter().map(|r| r.0).filter(|f| store.contains_ic(*f)).take(rho).collect();
        prop_assert_eq!(got, want);

        let projected = itr_project(&w, 0, &store).unwrap();
        let first_allowed = ranking.iter().map(|r| r.0).find(|f| !store.contains_ic(*f));
        prop_assert_eq!(projected, first_allowed);
        if let Some(f) = projected {
            prop_assert!(!store.contains_ic(f));
        }
    }

    #[test]
    fn selection_invariant_under_monotone_transform(seed in any::<u64>(), power in 2i32..=3) {
        let mut rng = rng(seed);
        let sizes = random_sizes(6, 15, &mut rng);
        let w = grid_prediction(sizes, &mut rng);
        let store = random_theory(sizes, &mut rng);
        let slot = &w.slots()[0];
        // integer powers of grid values keep every product exact, so ties survive
        let [s, p, o] = ngpkit::logic::Domain::ALL.map(|d| slot.domain(d).iter().map(|x| x.powi(power)).collect());
        let warped = PredictionVector::single(s, p, o).unwrap();
        let cfg = SelectionConfig::new(5, LossKind::Dl2).unwrap();
        prop_assert_eq!(greedy_select(&w, 0, &store, &cfg).unwrap(), greedy_select(&warped, 0, &store, &cfg).unwrap());
        prop_assert_eq!(itr_project(&w, 0, &store).unwrap(), itr_project(&warped, 0, &store).unwrap());
    }

    #[test]
    fn merged_stream_interleaves_slots(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(4, 10, &mut rng);
        let slots: Vec<_> = (0..rng.random_range(1..4))
            .map(|_| random_prediction(sizes, 0.0, 1.0, &mut rng).slots()[0].clone())
            .collect();
        let w = PredictionVector::new(slots).unwrap();
        let mut want: Vec<(usize, Fact, f64)> = (0..w.n_slots())
            .flat_map(|i| brute_ranking(&w.slots()[i], sizes).into_iter().map(move |(f, l)| (i, f, l)))
            .collect();
        want.sort_by(|a, b| b.2.total_cmp(&a.2).then(a.0.cmp(&b.0)).then(a.1.cmp(&b.1)));
        let got: Vec<(usize, Fact, f64)> = MergedTopFacts::new(&w).map(|sf| (sf.slot, sf.fact, sf.likelihood)).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn frontier_work_is_linear_in_rho() {
    let mut rng = rng(7);
    let sizes = [150, 50, 150];
    let w = random_prediction(sizes, 0.0, 1.0, &mut rng);
    // forbids everything, so greedy stops after exactly rho facts
    let store = TheoryStore::complement(vocab(sizes), std::iter::empty()).unwrap();
    for rho in [1, 10, 100, 1000] {
        let cfg = SelectionConfig::new(rho, LossKind::Sl).unwrap();
        let (ics, stats) = greedy_select_with_stats(&w, 0, &store, &cfg).unwrap();
        assert_eq!(ics.len(), rho);
        assert_eq!(stats.emitted, rho);
        assert!(stats.expanded <= rho, "rho {rho}: expanded {}", stats.expanded);
        assert!(stats.pushed <= 3 * rho + 1, "rho {rho}: pushed {}", stats.pushed);
    }
}

#[test]
fn stream_is_lazy_and_exhaustive() {
    let w = PredictionVector::single(vec![0.9, 0.1], vec![0.5], vec![0.5, 0.5]).unwrap();
    let mut it = TopFacts::new(&w, 0).unwrap();
    let first = it.next().unwrap();
    assert_eq!(first.fact, Fact::new(0, 0, 0));
    assert_eq!(it.stats().emitted, 1);
    assert_eq!(it.count(), 3);
    assert!(TopFacts::new(&w, 1).is_err());
}
