use std::ffi::{CStr, CString};
use std::ptr;

use ngpkit_ffi::*;

struct Handles {
    vocab: *mut NgpVocabulary,
    theory: *mut NgpTheory,
    pred: *mut NgpPrediction,
}

impl Drop for Handles {
    fn drop(&mut self) {
        unsafe {
            ngp_prediction_free(self.pred);
            ngp_theory_free(self.theory);
            ngp_vocabulary_free(self.vocab);
        }
    }
}

fn fact(subject: u32, predicate: u32, object: u32) -> NgpFact {
    NgpFact {
        subject,
        predicate,
        object,
    }
}

const S: [f64; 3] = [0.5, 0.3, 0.2];
const P: [f64; 2] = [0.6, 0.4];
const O: [f64; 3] = [0.1, 0.7, 0.2];

fn all_facts() -> Vec<NgpFact> {
    let mut v = Vec::new();
    for s in 0..3 {
        for p in 0..2 {
            for o in 0..3 {
                v.push(fact(s, p, o));
            }
        }
    }
    v
}

fn likelihood(f: NgpFact) -> f64 {
    S[f.subject as usize] * P[f.predicate as usize] * O[f.object as usize]
}

/// Facts in descending likelihood, ties by `(s, p, o)`.
fn ranked() -> Vec<NgpFact> {
    let mut v = all_facts();
    v.sort_by(|a, b| {
        likelihood(*b)
            .total_cmp(&likelihood(*a))
            .then((a.subject, a.predicate, a.object).cmp(&(b.subject, b.predicate, b.object)))
    });
    v
}

fn setup(allowed: &[NgpFact]) -> Handles {
    let mut h = Handles {
        vocab: ptr::null_mut(),
        theory: ptr::null_mut(),
        pred: ptr::null_mut(),
    };
    unsafe {
        assert_eq!(ngp_vocabulary_from_sizes(3, 2, 3, &mut h.vocab), NgpStatus::Ok);
        assert_eq!(
            ngp_theory_fact_complement(h.vocab, allowed.as_ptr(), allowed.len(), &mut h.theory),
            NgpStatus::Ok
        );
        assert_eq!(
            ngp_prediction_new(1, S.as_ptr(), 3, P.as_ptr(), 2, O.as_ptr(), 3, &mut h.pred),
            NgpStatus::Ok
        );
    }
    h
}

fn last_error() -> String {
    let p = ngp_last_error_message();
    assert!(!p.is_null(), "expected an error message");
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn topk_matches_sorted_enumeration() {
    let h = setup(&[]);
    let mut buf = vec![
        NgpScoredFact {
            fact: fact(0, 0, 0),
            likelihood: 0.0
        };
        18
    ];
    let mut len = 0;
    let s = unsafe { ngp_topk_facts(h.pred, 0, 18, buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(s, NgpStatus::Ok);
    assert_eq!(len, 18);
    let expected = ranked();
    for (got, want) in buf.iter().zip(&expected) {
        assert_eq!(got.fact, *want);
        assert!((got.likelihood - likelihood(*want)).abs() < 1e-15);
    }
}

#[test]
fn greedy_and_projection_follow_theory() {
    let allowed = [fact(0, 0, 1), fact(2, 1, 2)];
    let h = setup(&allowed);
    let order = ranked();
    let forbidden: Vec<NgpFact> = order.iter().copied().filter(|f| !allowed.contains(f)).collect();

    let mut buf = [fact(0, 0, 0); 4];
    let mut len = 0;
    let s = unsafe { ngp_greedy_select(h.pred, 0, h.theory, 3, buf.as_mut_ptr(), buf.len(), &mut len) };
    assert_eq!(s, NgpStatus::Ok);
    assert_eq!(&buf[..len], &forbidden[..3]);

    let mut best = fact(9, 9, 9);
    let mut found = false;
    let s = unsafe { ngp_itr_project(h.pred, 0, h.theory, &mut best, &mut found) };
    assert_eq!(s, NgpStatus::Ok);
    assert!(found);
    assert_eq!(best, *order.iter().find(|f| allowed.contains(f)).unwrap());

    let mut count = 0;
    assert_eq!(unsafe { ngp_theory_ic_count(h.theory, &mut count) }, NgpStatus::Ok);
    assert_eq!(count, 16);
    let mut contains = false;
    unsafe { ngp_theory_contains(h.theory, fact(0, 0, 1), &mut contains) };
    assert!(!contains);
    unsafe { ngp_theory_contains(h.theory, fact(0, 0, 0), &mut contains) };
    assert!(contains);
}

#[test]
fn projection_reports_fully_forbidden_space() {
    let h = setup(&[]);
    let mut best = fact(0, 0, 0);
    let mut found = true;
    assert_eq!(
        unsafe { ngp_itr_project(h.pred, 0, h.theory, &mut best, &mut found) },
        NgpStatus::Ok
    );
    assert!(!found);
}

#[test]
fn losses_match_closed_forms() {
    let h = setup(&[]);
    // Variable-disjoint constraints: the probability factorizes.
    let ics = [fact(0, 0, 0), fact(1, 1, 1)];
    let expected: f64 = ics.iter().map(|&f| 1.0 - likelihood(f)).product();
    let mut p = 0.0;
    assert_eq!(
        unsafe { ngp_wmc_ic_conjunction(h.pred, 0, ics.as_ptr(), 2, &mut p) },
        NgpStatus::Ok
    );
    assert!((p - expected).abs() < 1e-12);

    let mut sl = 0.0;
    assert_eq!(
        unsafe { ngp_loss_of_ic_set(NgpLoss::Sl, h.pred, 0, ics.as_ptr(), 2, &mut sl) },
        NgpStatus::Ok
    );
    assert!((sl + expected.ln()).abs() < 1e-12);

    let mut dl2 = 0.0;
    assert_eq!(
        unsafe { ngp_loss_of_ic_set(NgpLoss::Dl2, h.pred, 0, ics.as_ptr(), 2, &mut dl2) },
        NgpStatus::Ok
    );
    assert!((dl2 - ics.iter().map(|&f| likelihood(f)).sum::<f64>()).abs() < 1e-12);

    // Overlapping constraints against brute-force enumeration of the 8 variables.
    let ics = [fact(0, 0, 0), fact(0, 0, 1), fact(1, 0, 1)];
    let vals = [S[0], S[1], P[0], O[0], O[1]];
    let mut total = 0.0;
    for mask in 0u32..32 {
        let on = |i: usize| mask >> i & 1 == 1;
        let weight: f64 = (0..5).map(|i| if on(i) { vals[i] } else { 1.0 - vals[i] }).product();
        let violated = (on(0) && on(2) && on(3)) || (on(0) && on(2) && on(4)) || (on(1) && on(2) && on(4));
        if !violated {
            total += weight;
        }
    }
    assert_eq!(
        unsafe { ngp_wmc_ic_conjunction(h.pred, 0, ics.as_ptr(), 3, &mut p) },
        NgpStatus::Ok
    );
    assert!((p - total).abs() < 1e-12, "{p} vs {total}");
}

#[test]
fn errors_set_status_and_message() {
    let h = setup(&[]);
    let mut v = 0.0;
    assert_eq!(
        unsafe { ngp_loss_of_ic_set(NgpLoss::Sl, h.pred, 0, ptr::null(), 0, &mut v) },
        NgpStatus::InvalidArgument
    );
    assert!(last_error().contains("non-empty"));

    let ics = [fact(0, 0, 0)];
    assert_eq!(
        unsafe { ngp_wmc_ic_conjunction(h.pred, 5, ics.as_ptr(), 1, &mut v) },
        NgpStatus::InvalidArgument
    );
    assert_eq!(
        unsafe { ngp_wmc_ic_conjunction(h.pred, 0, ptr::null(), 1, &mut v) },
        NgpStatus::NullPointer
    );

    let mut buf = [fact(0, 0, 0); 1];
    let mut len = 0;
    assert_eq!(
        unsafe { ngp_greedy_select(h.pred, 0, h.theory, 3, buf.as_mut_ptr(), 1, &mut len) },
        NgpStatus::BufferTooSmall
    );
    assert_eq!(len, 3);
    assert_eq!(
        unsafe { ngp_greedy_select(h.pred, 0, h.theory, 0, buf.as_mut_ptr(), 1, &mut len) },
        NgpStatus::InvalidArgument
    );

    let bad = [1.5, 0.0, 0.0];
    let mut pred = ptr::null_mut();
    assert_eq!(
        unsafe { ngp_prediction_new(1, bad.as_ptr(), 3, P.as_ptr(), 2, O.as_ptr(), 3, &mut pred) },
        NgpStatus::InvalidArgument
    );
    assert!(pred.is_null());

    let mut id = 0;
    let name = CString::new("nobody").unwrap();
    assert_eq!(
        unsafe { ngp_vocabulary_lookup(h.vocab, NgpDomain::Subject, name.as_ptr(), &mut id) },
        NgpStatus::InvalidArgument
    );
    let name = CString::new("p1").unwrap();
    assert_eq!(
        unsafe { ngp_vocabulary_lookup(h.vocab, NgpDomain::Predicate, name.as_ptr(), &mut id) },
        NgpStatus::Ok
    );
    assert_eq!(id, 1);
    assert!(ngp_last_error_message().is_null());
}

#[test]
fn mismatched_sizes_are_rejected() {
    let h = setup(&[]);
    let mut small = ptr::null_mut();
    let mut theory = ptr::null_mut();
    unsafe {
        ngp_vocabulary_from_sizes(2, 2, 2, &mut small);
        ngp_theory_fact_complement(small, ptr::null(), 0, &mut theory);
    }
    let mut best = fact(0, 0, 0);
    let mut found = false;
    let s = unsafe { ngp_itr_project(h.pred, 0, theory, &mut best, &mut found) };
    assert_eq!(s, NgpStatus::InvalidArgument);
    assert!(last_error().contains("sizes"));
    unsafe {
        ngp_theory_free(theory);
        ngp_vocabulary_free(small);
    }
}

#[test]
fn multi_slot_prediction_splits_arrays() {
    let s = [1.0, 0.0, 0.0, 1.0];
    let p = [1.0, 0.5];
    let o = [0.5, 1.0];
    let mut pred = ptr::null_mut();
    assert_eq!(
        unsafe { ngp_prediction_new(2, s.as_ptr(), 2, p.as_ptr(), 1, o.as_ptr(), 1, &mut pred) },
        NgpStatus::Ok
    );
    let mut out = [NgpScoredFact {
        fact: fact(0, 0, 0),
        likelihood: 0.0,
    }; 1];
    let mut len = 0;
    unsafe { ngp_topk_facts(pred, 1, 1, out.as_mut_ptr(), 1, &mut len) };
    assert_eq!((out[0].fact, out[0].likelihood), (fact(1, 0, 0), 0.5));
    unsafe { ngp_topk_facts(pred, 0, 1, out.as_mut_ptr(), 1, &mut len) };
    assert_eq!((out[0].fact, out[0].likelihood), (fact(0, 0, 0), 0.5));
    unsafe { ngp_prediction_free(pred) };
}

#[test]
fn theory_and_vocabulary_files_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let vocab_path = dir.path().join("vocab.txt");
    std::fs::write(
        &vocab_path,
        "[subjects]\ncat\ndog\n[predicates]\neats\n[objects]\nfish\nbone\n",
    )
    .unwrap();
    let mut vocab = ptr::null_mut();
    let path = CString::new(vocab_path.to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ngp_vocabulary_load(path.as_ptr(), &mut vocab) }, NgpStatus::Ok);
    let mut sizes = [0usize; 3];
    unsafe { ngp_vocabulary_sizes(vocab, sizes.as_mut_ptr()) };
    assert_eq!(sizes, [2, 1, 2]);

    let forbidden = [fact(0, 0, 1), fact(1, 0, 0)];
    let mut theory = ptr::null_mut();
    unsafe { ngp_theory_explicit(vocab, forbidden.as_ptr(), 2, &mut theory) };
    let theory_path = CString::new(dir.path().join("t.tsv").to_str().unwrap()).unwrap();
    assert_eq!(unsafe { ngp_theory_save(theory, theory_path.as_ptr()) }, NgpStatus::Ok);
    let text = std::fs::read_to_string(dir.path().join("t.tsv")).unwrap();
    assert!(text.contains("cat\teats\tbone\n") && text.contains("dog\teats\tfish\n"));

    let mut loaded = ptr::null_mut();
    assert_eq!(
        unsafe { ngp_theory_load(vocab, theory_path.as_ptr(), &mut loaded) },
        NgpStatus::Ok
    );
    let mut count = 0;
    unsafe { ngp_theory_ic_count(loaded, &mut count) };
    assert_eq!(count, 2);

    let kg_path = dir.path().join("kg.tsv");
    std::fs::write(&kg_path, "cat\teats\tfish\n").unwrap();
    let kg = CString::new(kg_path.to_str().unwrap()).unwrap();
    let mut kg_theory = ptr::null_mut();
    assert_eq!(
        unsafe { ngp_theory_kg_complement(vocab, kg.as_ptr(), 9, &mut kg_theory) },
        NgpStatus::Ok
    );
    let mut contains = true;
    unsafe { ngp_theory_contains(kg_theory, fact(0, 0, 0), &mut contains) };
    assert!(!contains);

    let missing = CString::new(dir.path().join("none.tsv").to_str().unwrap()).unwrap();
    let mut none = ptr::null_mut();
    assert_eq!(
        unsafe { ngp_theory_load(vocab, missing.as_ptr(), &mut none) },
        NgpStatus::Io
    );
    let garbage = dir.path().join("bad.tsv");
    std::fs::write(&garbage, "format=explicit-negative\ncat\tbarks\tfish\n").unwrap();
    let garbage = CString::new(garbage.to_str().unwrap()).unwrap();
    assert_eq!(
        unsafe { ngp_theory_load(vocab, garbage.as_ptr(), &mut none) },
        NgpStatus::Parse
    );
    assert!(last_error().contains("line 2"));

    unsafe {
        ngp_theory_free(kg_theory);
        ngp_theory_free(loaded);
        ngp_theory_free(theory);
        ngp_vocabulary_free(vocab);
        ngp_vocabulary_free(ptr::null_mut());
    }
}

#[test]
fn errors_are_thread_local() {
    let mut v = 0.0;
    unsafe { ngp_wmc_ic_conjunction(ptr::null(), 0, ptr::null(), 0, &mut v) };
    assert!(last_error().contains("prediction"));
    std::thread::spawn(|| assert!(ngp_last_error_message().is_null()))
        .join()
        .unwrap();
    assert!(last_error().contains("prediction"));
}
