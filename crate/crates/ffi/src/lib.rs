//! C ABI for `ngpkit`.
//!
//! Every fallible function returns an [`NgpStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`ngp_last_error_message`]. Objects are opaque handles created by
//! `*_new`/`*_load`/`*_from_*` functions and released with the matching
//! `*_free`. Passing a null handle to `*_free` is a no-op.
//!
//! Handles are immutable once created and may be shared across threads.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use ngpkit::logic::{
    wmc_ic_conjunction, Domain, Fact, IntegrityConstraint, PredictionVector, SlotActivations, Vocabulary,
};
use ngpkit::losses::{loss_of_ic_set, LossKind};
use ngpkit::ngp::{greedy_select, itr_project, topk_facts, SelectionConfig};
use ngpkit::theory::{build_from_kg_complement, load_theory, save_theory, KgTripleSet, TheoryStore};
use ngpkit::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgpStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or inconsistent.
    InvalidArgument = 2,
    /// A size limit of the library was exceeded.
    Capacity = 3,
    /// A file or string could not be parsed.
    Parse = 4,
    /// A file could not be read or written.
    Io = 5,
    /// A computation produced a non-finite or undefined value.
    Numeric = 6,
    /// The output buffer is too small; the required length was written.
    BufferTooSmall = 7,
    /// A Rust panic was caught at the boundary.
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgpDomain {
    Subject = 0,
    Predicate = 1,
    Object = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NgpLoss {
    /// Semantic loss.
    Sl = 0,
    /// DL2 fuzzy loss.
    Dl2 = 1,
}

/// A `predicate(subject, object)` atom by term ids.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NgpFact {
    pub subject: u32,
    pub predicate: u32,
    pub object: u32,
}

/// A fact with its likelihood under one slot of a prediction.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NgpScoredFact {
    pub fact: NgpFact,
    pub likelihood: f64,
}

/// Opaque term vocabulary.
pub struct NgpVocabulary(Arc<Vocabulary>);

/// Opaque theory of negative integrity constraints.
pub struct NgpTheory(TheoryStore);

/// Opaque per-slot activation vectors.
pub struct NgpPrediction(PredictionVector);

impl From<NgpFact> for Fact {
    fn from(f: NgpFact) -> Self {
        Fact::new(f.subject, f.predicate, f.object)
    }
}

impl From<Fact> for NgpFact {
    fn from(f: Fact) -> Self {
        NgpFact {
            subject: f.s,
            predicate: f.p,
            object: f.o,
        }
    }
}

impl From<NgpDomain> for Domain {
    fn from(d: NgpDomain) -> Self {
        match d {
            NgpDomain::Subject => Domain::Subject,
            NgpDomain::Predicate => Domain::Predicate,
            NgpDomain::Object => Domain::Object,
        }
    }
}

impl From<NgpLoss> for LossKind {
    fn from(l: NgpLoss) -> Self {
        match l {
            NgpLoss::Sl => LossKind::Sl,
            NgpLoss::Dl2 => LossKind::Dl2,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Failure inside the boundary, before it becomes a status code.
struct Failure(NgpStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Capacity { .. } => NgpStatus::Capacity,
            Error::Parse { .. } => NgpStatus::Parse,
            Error::Io { .. } => NgpStatus::Io,
            Error::NonFinite(_) | Error::SaturatedGradient => NgpStatus::Numeric,
            _ => NgpStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

type FfiResult<T> = Result<T, Failure>;

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(NgpStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Failure {
    Failure(NgpStatus::NullPointer, format!("{name} is null"))
}

/// Runs `f`, converting errors and panics into a status and a last-error
/// message.
fn guard(f: impl FnOnce() -> FfiResult<()>) -> NgpStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            clear_last_error();
            NgpStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("panic: {msg}"));
            NgpStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, name: &str) -> FfiResult<&'a T> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn out<'a, T>(p: *mut T, name: &str) -> FfiResult<&'a mut T> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn slice<'a, T>(p: *const T, len: usize, name: &str) -> FfiResult<&'a [T]> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn string<'a>(p: *const c_char, name: &str) -> FfiResult<&'a str> {
    if p.is_null() {
        return Err(null(name));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(format!("{name} is not valid UTF-8")))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

unsafe fn free<T>(p: *mut T) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

unsafe fn ics(p: *const NgpFact, len: usize) -> FfiResult<Vec<IntegrityConstraint>> {
    Ok(slice(p, len, "ics")?
        .iter()
        .map(|&f| IntegrityConstraint::new(f.into()))
        .collect())
}

fn check_space(w: &NgpPrediction, t: &NgpTheory) -> FfiResult<()> {
    let (ws, ts) = (w.0.sizes(), t.0.vocabulary().sizes());
    if ws != ts {
        return Err(invalid(format!(
            "prediction sizes {ws:?} differ from theory vocabulary sizes {ts:?}"
        )));
    }
    Ok(())
}

/// Copies `items` into a caller buffer of `capacity` entries. Always writes
/// the full count to `out_len`.
unsafe fn fill<T: Copy>(items: &[T], buf: *mut T, capacity: usize, out_len: *mut usize) -> FfiResult<()> {
    *out(out_len, "out_len")? = items.len();
    if items.len() > capacity {
        return Err(Failure(
            NgpStatus::BufferTooSmall,
            format!("buffer holds {capacity} entries, {} needed", items.len()),
        ));
    }
    if !items.is_empty() {
        if buf.is_null() {
            return Err(null("buffer"));
        }
        std::ptr::copy_nonoverlapping(items.as_ptr(), buf, items.len());
    }
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ngp_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if the last call
/// succeeded. Valid until the next call into the library on this thread.
#[no_mangle]
pub extern "C" fn ngp_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |s| s.as_ptr()))
}

/// Vocabulary with generated names `s0..`, `p0..`, `o0..`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_vocabulary_from_sizes(
    n_subjects: usize,
    n_predicates: usize,
    n_objects: usize,
    out_vocab: *mut *mut NgpVocabulary,
) -> NgpStatus {
    guard(|| {
        let slot = out(out_vocab, "out_vocab")?;
        let v = Vocabulary::with_sizes(n_subjects, n_predicates, n_objects)?;
        *slot = boxed(NgpVocabulary(Arc::new(v)));
        Ok(())
    })
}

/// Loads a sectioned vocabulary file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_vocab` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_vocabulary_load(path: *const c_char, out_vocab: *mut *mut NgpVocabulary) -> NgpStatus {
    guard(|| {
        let slot = out(out_vocab, "out_vocab")?;
        let v = Vocabulary::load(&PathBuf::from(string(path, "path")?))?;
        *slot = boxed(NgpVocabulary(Arc::new(v)));
        Ok(())
    })
}

/// # Safety
/// `vocab` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ngp_vocabulary_free(vocab: *mut NgpVocabulary) {
    free(vocab)
}

/// Writes the subject, predicate and object counts to `out_sizes[0..3]`.
///
/// # Safety
/// `vocab` must be a live handle and `out_sizes` point to three `size_t`.
#[no_mangle]
pub unsafe extern "C" fn ngp_vocabulary_sizes(vocab: *const NgpVocabulary, out_sizes: *mut usize) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        if out_sizes.is_null() {
            return Err(null("out_sizes"));
        }
        let sizes = v.0.sizes();
        std::ptr::copy_nonoverlapping(sizes.as_ptr(), out_sizes, 3);
        Ok(())
    })
}

/// Id of `name` in `domain`. Unknown names give `NGP_STATUS_INVALID_ARGUMENT`.
///
/// # Safety
/// `vocab` must be a live handle, `name` a NUL-terminated string and `out_id`
/// a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_vocabulary_lookup(
    vocab: *const NgpVocabulary,
    domain: NgpDomain,
    name: *const c_char,
    out_id: *mut u32,
) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        let name = string(name, "name")?;
        let id =
            v.0.lookup(domain.into(), name)
                .ok_or_else(|| invalid(format!("unknown term {name:?}")))?;
        *out(out_id, "out_id")? = id;
        Ok(())
    })
}

/// Loads a theory file against `vocab`.
///
/// # Safety
/// `vocab` must be a live handle, `path` a NUL-terminated string and
/// `out_theory` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_load(
    vocab: *const NgpVocabulary,
    path: *const c_char,
    out_theory: *mut *mut NgpTheory,
) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        let slot = out(out_theory, "out_theory")?;
        let t = load_theory(&PathBuf::from(string(path, "path")?), v.0.clone())?;
        *slot = boxed(NgpTheory(t));
        Ok(())
    })
}

/// Theory forbidding every fact that is not among `positives`.
///
/// # Safety
/// `vocab` must be a live handle, `positives` point to `n_positives` facts
/// (or be null when zero) and `out_theory` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_fact_complement(
    vocab: *const NgpVocabulary,
    positives: *const NgpFact,
    n_positives: usize,
    out_theory: *mut *mut NgpTheory,
) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        let facts = slice(positives, n_positives, "positives")?;
        let slot = out(out_theory, "out_theory")?;
        let t = TheoryStore::complement(v.0.clone(), facts.iter().map(|&f| f.into()))?;
        *slot = boxed(NgpTheory(t));
        Ok(())
    })
}

/// Theory forbidding exactly `forbidden`.
///
/// # Safety
/// As for [`ngp_theory_fact_complement`].
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_explicit(
    vocab: *const NgpVocabulary,
    forbidden: *const NgpFact,
    n_forbidden: usize,
    out_theory: *mut *mut NgpTheory,
) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        let facts = slice(forbidden, n_forbidden, "forbidden")?;
        let slot = out(out_theory, "out_theory")?;
        let t = TheoryStore::explicit(v.0.clone(), facts.iter().map(|&f| f.into()))?;
        *slot = boxed(NgpTheory(t));
        Ok(())
    })
}

/// Theory completing the sparse term pairs of a knowledge graph read from a
/// `s<TAB>p<TAB>o` file; pairs with at most `kappa` facts are completed.
///
/// # Safety
/// `vocab` must be a live handle, `kg_path` a NUL-terminated string and
/// `out_theory` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_kg_complement(
    vocab: *const NgpVocabulary,
    kg_path: *const c_char,
    kappa: u32,
    out_theory: *mut *mut NgpTheory,
) -> NgpStatus {
    guard(|| {
        let v = as_ref(vocab, "vocab")?;
        let slot = out(out_theory, "out_theory")?;
        let kg = KgTripleSet::load(&PathBuf::from(string(kg_path, "kg_path")?))?;
        let (t, _) = build_from_kg_complement(&kg, v.0.clone(), kappa)?;
        *slot = boxed(NgpTheory(t));
        Ok(())
    })
}

/// Writes the theory to `path`, replacing any existing file.
///
/// # Safety
/// `theory` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_save(theory: *const NgpTheory, path: *const c_char) -> NgpStatus {
    guard(|| {
        let t = as_ref(theory, "theory")?;
        save_theory(&t.0, &PathBuf::from(string(path, "path")?))?;
        Ok(())
    })
}

/// # Safety
/// `theory` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_free(theory: *mut NgpTheory) {
    free(theory)
}

/// Whether the theory contains the constraint `¬fact`.
///
/// # Safety
/// `theory` must be a live handle and `out_contains` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_contains(
    theory: *const NgpTheory,
    fact: NgpFact,
    out_contains: *mut bool,
) -> NgpStatus {
    guard(|| {
        let t = as_ref(theory, "theory")?;
        *out(out_contains, "out_contains")? = t.0.contains_ic(fact.into());
        Ok(())
    })
}

/// Number of constraints in the theory.
///
/// # Safety
/// `theory` must be a live handle and `out_count` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_theory_ic_count(theory: *const NgpTheory, out_count: *mut u64) -> NgpStatus {
    guard(|| {
        let t = as_ref(theory, "theory")?;
        *out(out_count, "out_count")? = t.0.ic_count();
        Ok(())
    })
}

/// Prediction over `n_slots` slots. Each domain array holds the slots back
/// to back: `subjects` has `n_slots * n_subjects` entries, slot 0 first.
/// Activations must lie in `[0, 1]`.
///
/// # Safety
/// Each array must hold `n_slots` times its domain size and `out_prediction`
/// must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_prediction_new(
    n_slots: usize,
    subjects: *const f64,
    n_subjects: usize,
    predicates: *const f64,
    n_predicates: usize,
    objects: *const f64,
    n_objects: usize,
    out_prediction: *mut *mut NgpPrediction,
) -> NgpStatus {
    guard(|| {
        let slot_out = out(out_prediction, "out_prediction")?;
        let total = |n: usize| {
            n.checked_mul(n_slots)
                .ok_or_else(|| invalid("activation array length overflows"))
        };
        let s = slice(subjects, total(n_subjects)?, "subjects")?;
        let p = slice(predicates, total(n_predicates)?, "predicates")?;
        let o = slice(objects, total(n_objects)?, "objects")?;
        let part = |a: &[f64], n: usize, i: usize| a[i * n..(i + 1) * n].to_vec();
        let slots = (0..n_slots)
            .map(|i| SlotActivations::new(part(s, n_subjects, i), part(p, n_predicates, i), part(o, n_objects, i)))
            .collect();
        *slot_out = boxed(NgpPrediction(PredictionVector::new(slots)?));
        Ok(())
    })
}

/// # Safety
/// `prediction` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ngp_prediction_free(prediction: *mut NgpPrediction) {
    free(prediction)
}

/// Probability that no constraint `¬ics[i]` is violated in `slot`.
///
/// # Safety
/// `prediction` must be a live handle, `ics` point to `n_ics` facts and
/// `out_value` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_wmc_ic_conjunction(
    prediction: *const NgpPrediction,
    slot: usize,
    ics: *const NgpFact,
    n_ics: usize,
    out_value: *mut f64,
) -> NgpStatus {
    guard(|| {
        let w = as_ref(prediction, "prediction")?;
        let set = self::ics(ics, n_ics)?;
        *out(out_value, "out_value")? = wmc_ic_conjunction(&set, &w.0, slot)?;
        Ok(())
    })
}

/// Loss of the conjunction of the constraints `¬ics[i]` in `slot`. The set
/// must be non-empty.
///
/// # Safety
/// As for [`ngp_wmc_ic_conjunction`].
#[no_mangle]
pub unsafe extern "C" fn ngp_loss_of_ic_set(
    loss: NgpLoss,
    prediction: *const NgpPrediction,
    slot: usize,
    ics: *const NgpFact,
    n_ics: usize,
    out_value: *mut f64,
) -> NgpStatus {
    guard(|| {
        let w = as_ref(prediction, "prediction")?;
        let set = self::ics(ics, n_ics)?;
        *out(out_value, "out_value")? = loss_of_ic_set(loss.into(), &set, &w.0, slot)?;
        Ok(())
    })
}

/// The `rho` most likely facts of `slot` that the theory forbids, in
/// descending likelihood. Fewer are returned when the fact space runs out.
/// The prediction's domain sizes must match the theory's vocabulary.
///
/// # Safety
/// `prediction` and `theory` must be live handles, `out_ics` hold `capacity`
/// facts and `out_len` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_greedy_select(
    prediction: *const NgpPrediction,
    slot: usize,
    theory: *const NgpTheory,
    rho: usize,
    out_ics: *mut NgpFact,
    capacity: usize,
    out_len: *mut usize,
) -> NgpStatus {
    guard(|| {
        let w = as_ref(prediction, "prediction")?;
        let t = as_ref(theory, "theory")?;
        check_space(w, t)?;
        let cfg = SelectionConfig::new(rho, LossKind::Sl)?;
        let picked: Vec<NgpFact> = greedy_select(&w.0, slot, &t.0, &cfg)?
            .into_iter()
            .map(|ic| ic.fact.into())
            .collect();
        fill(&picked, out_ics, capacity, out_len)
    })
}

/// Most likely fact of `slot` that violates no constraint. `out_found` is
/// false when the theory forbids every fact.
///
/// # Safety
/// `prediction` and `theory` must be live handles; the out-pointers must be
/// valid.
#[no_mangle]
pub unsafe extern "C" fn ngp_itr_project(
    prediction: *const NgpPrediction,
    slot: usize,
    theory: *const NgpTheory,
    out_fact: *mut NgpFact,
    out_found: *mut bool,
) -> NgpStatus {
    guard(|| {
        let w = as_ref(prediction, "prediction")?;
        let t = as_ref(theory, "theory")?;
        check_space(w, t)?;
        let found = out(out_found, "out_found")?;
        let fact = out(out_fact, "out_fact")?;
        match itr_project(&w.0, slot, &t.0)? {
            Some(f) => {
                *fact = f.into();
                *found = true;
            }
            None => *found = false,
        }
        Ok(())
    })
}

/// The `k` most likely facts of `slot` in descending order.
///
/// # Safety
/// `prediction` must be a live handle, `out_facts` hold `capacity` entries
/// and `out_len` be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn ngp_topk_facts(
    prediction: *const NgpPrediction,
    slot: usize,
    k: usize,
    out_facts: *mut NgpScoredFact,
    capacity: usize,
    out_len: *mut usize,
) -> NgpStatus {
    guard(|| {
        let w = as_ref(prediction, "prediction")?;
        let top: Vec<NgpScoredFact> = topk_facts(&w.0, slot, k)?
            .into_iter()
            .map(|sf| NgpScoredFact {
                fact: sf.fact.into(),
                likelihood: sf.likelihood,
            })
            .collect();
        fill(&top, out_facts, capacity, out_len)
    })
}
