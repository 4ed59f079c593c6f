//! Synthetic fact-classification harness: world and dataset generation, a
//! softmax relation model with hand-written gradients, training, recall
//! metrics and the label-reduction sweep.

mod metrics;
mod model;
mod sweep;
mod train;
mod world;

pub use metrics::{mean_recall_at_k, zero_shot_recall_at_k, RecallReport, ZeroShotReport};
pub use model::{backward_and_update, supervised_loss, supervised_loss_and_grad, ActivationGrad, HarnessModel};
pub use sweep::{median, run_reduction_sweep, sweep_csv, sweep_detail_csv, SweepConfig, SweepRow};
pub use train::{
    evaluate, init_model, predict_top, train, training_theory, EpochRecord, EvalReport, Regularizer, TheorySource,
    TrainConfig, TrainOutcome,
};
pub use world::{
    generate_dataset, load_samples, parse_samples_tsv, rng_for, selection_rng, write_samples_tsv, Dataset, SceneSample,
    Split, Stream, WorldSpec,
};
