//! Neural-guided projection: enumerate a model's most likely facts, select
//! the constraints it violates most, and penalize only those.

mod select;
mod step;
mod topk;

pub use select::{
    exhaustive_select, greedy_select, greedy_select_from, greedy_select_with_stats, itr_project, itr_project_from,
    select_for_sample, Budget, SelectionConfig, SlotConstraint, Strategy, TieBreak, EXHAUSTIVE_CAP,
};
pub use step::{ngp_objective, ngp_step, Objective, StepDiagnostics};
pub use topk::{topk_facts, FrontierStats, MergedTopFacts, ScoredFact, TopFacts};
