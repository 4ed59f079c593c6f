mod common;

use std::collections::HashMap;

use common::*;
use ngpkit::logic::{
    eval_boolean, eval_fuzzy, wmc, wmc_gradient, wmc_ic_conjunction, wmc_ic_conjunction_gradient, Formula,
    PredictionVector, TermRef, Vocabulary,
};
use proptest::prelude::*;
use rand::Rng;

fn terms(sizes: [usize; 3]) -> Vec<TermRef> {
    (0..3)
        .flat_map(|d| (0..sizes[d] as u32).map(move |id| term(d, id)))
        .collect()
}

fn crisp(sizes: [usize; 3], rng: &mut impl Rng) -> (PredictionVector, HashMap<TermRef, bool>) {
    let mut a = HashMap::new();
    let mut d: [Vec<f64>; 3] = Default::default();
    for t in terms(sizes) {
        let v = rng.random_bool(0.5);
        a.insert(t, v);
        d[t.domain as usize].push(if v { 1.0 } else { 0.0 });
    }
    let [s, p, o] = d;
    (PredictionVector::single(s, p, o).unwrap(), a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn wmc_is_a_probability_matching_enumeration(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(4, 12, &mut rng);
        let f = random_formula(&terms(sizes), 4, &mut rng);
        let w = random_prediction(sizes, 0.0, 1.0, &mut rng);
        let p = wmc(&f, &w, 0).unwrap();
        prop_assert!((0.0..=1.0 + 1e-12).contains(&p));
        prop_assert!((p - brute_probability(&f, &w.slots()[0])).abs() < 1e-12);
        let q = wmc(&Formula::not(f.clone()), &w, 0).unwrap();
        prop_assert!((p + q - 1.0).abs() < 1e-12);
    }

    #[test]
    fn crisp_semantics_agree(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(3, 9, &mut rng);
        let f = random_formula(&terms(sizes), 4, &mut rng);
        let (w, a) = crisp(sizes, &mut rng);
        let truth = eval_boolean(&f, &a).unwrap();
        let p = wmc(&f, &w, 0).unwrap();
        prop_assert_eq!(p, if truth { 1.0 } else { 0.0 });
        let fuzzy = eval_fuzzy(&f, &w, 0).unwrap();
        prop_assert_eq!(fuzzy, if truth { 1.0 } else { 0.0 });
    }

    #[test]
    fn fuzzy_values_stay_in_unit_interval(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(4, 12, &mut rng);
        let f = random_formula(&terms(sizes), 5, &mut rng);
        let w = random_prediction(sizes, 0.0, 1.0, &mut rng);
        let v = eval_fuzzy(&f, &w, 0).unwrap();
        prop_assert!((0.0..=1.0).contains(&v));
    }

    #[test]
    fn wmc_gradient_matches_differences(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(4, 10, &mut rng);
        let all = terms(sizes);
        let f = random_formula(&all, 4, &mut rng);
        let w = random_prediction(sizes, 0.05, 0.95, &mut rng);
        let grad = wmc_gradient(&f, &w, 0).unwrap();
        for t in &all {
            let x = w.get(0, *t).unwrap();
            let h = 1e-6;
            let fd = (wmc(&f, &w.with_value(0, *t, x + h).unwrap(), 0).unwrap()
                - wmc(&f, &w.with_value(0, *t, x - h).unwrap(), 0).unwrap())
                / (2.0 * h);
            let an = grad.get(t).copied().unwrap_or(0.0);
            prop_assert!(rel_err(an, fd, 1e-3) < 1e-5, "{t}: {an} vs {fd}");
        }
    }

    #[test]
    fn constraint_conjunction_gradient_matches_general(seed in any::<u64>()) {
        let mut rng = rng(seed);
        let sizes = random_sizes(4, 12, &mut rng);
        let ics = random_ics(sizes, 8, &mut rng);
        let w = random_prediction(sizes, 0.0, 1.0, &mut rng);
        let fast = wmc_ic_conjunction_gradient(&ics, &w, 0).unwrap();
        let general = wmc_gradient(&ngpkit::logic::conjunction_of_ics(&ics).unwrap(), &w, 0).unwrap();
        prop_assert_eq!(fast.len(), general.len());
        for (t, g) in &general {
            prop_assert!((fast[t] - g).abs() < 1e-12);
        }
        let p = wmc_ic_conjunction(&ics, &w, 0).unwrap();
        prop_assert!((p - brute_probability_ics(&ics, &w.slots()[0])).abs() < 1e-12);
    }
}

#[test]
fn enumeration_cap_is_enforced() {
    let w = PredictionVector::single(vec![0.5; 21], vec![0.5], vec![0.5]).unwrap();
    let f = Formula::and((0..21).map(|i| Formula::var(term(0, i)))).unwrap();
    assert!(matches!(wmc(&f, &w, 0), Err(ngpkit::Error::Capacity { .. })));
}

#[test]
fn vocabulary_text_roundtrips() {
    let v = Vocabulary::parse("[subjects]\nhorse\nperson\n[predicates]\ndrinks\n[objects]\neye\nwater\n").unwrap();
    assert_eq!(Vocabulary::parse(&v.to_text()).unwrap(), v);
    assert_eq!(v.sizes(), [2, 1, 2]);
    assert!(Vocabulary::parse("[subjects]\na\na\n[predicates]\np\n[objects]\no\n").is_err());
}

#[test]
fn prefix_notation_display() {
    let v = Vocabulary::parse("[subjects]\nhorse\n[predicates]\ndrinks\n[objects]\neye\n").unwrap();
    let f = ngpkit::logic::IntegrityConstraint::new(v.fact("horse", "drinks", "eye").unwrap()).to_formula();
    assert_eq!(f.display_with(&v).to_string(), "(not (and s:horse p:drinks o:eye))");
}
