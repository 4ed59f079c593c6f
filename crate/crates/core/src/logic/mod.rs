//! Formulas over subject/predicate/object terms and their classical,
//! Łukasiewicz and probabilistic semantics.

mod formula;
mod prediction;
mod vocab;
mod wmc;

pub use formula::{
    conjunction_of_ics, eval_boolean, eval_fuzzy, formula_of_ic, Assignment, Formula, IntegrityConstraint,
};
pub use prediction::{PredictionVector, SlotActivations};
pub use vocab::{Domain, Fact, TermRef, Vocabulary, MAX_DOMAIN_SIZE};
pub use wmc::{
    wmc, wmc_gradient, wmc_ic_conjunction, wmc_ic_conjunction_gradient, wmc_with_cap, DEFAULT_VAR_CAP, IC_COMPONENT_CAP,
};

pub(crate) use wmc::IcSystem;
