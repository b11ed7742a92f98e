//! Evaluation: metrics, cross-validation and the experiment harness.

mod cv;
mod metrics;
mod pipeline;

pub use cv::{fold_indices, kfold_split, CvMode};
pub use metrics::{auc, roc_and_eer, RocCurve, RocPoint};
pub use pipeline::{
    ablate_features, compare_classifiers, evaluate_observations, evaluate_pipeline, external_auc,
    extract_observations, sweep_window, AgeFilter, Approach, BundleScores, CompareRow,
    CompareTable, CurvePoint, EvalConfig, EvalReport, ExternalScore, FoldAudit, LeakageCheck,
    Observation, ObservationSet, SessionInfo, SweepRow, SweepTable,
};
