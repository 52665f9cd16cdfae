//! Prediction accuracy and monotonicity criteria.

mod correlation;
mod logistic;
mod report;

pub use correlation::{average_ranks, plcc, rmse, srcc};
pub use logistic::{fit_logistic, initial_guesses, LogisticFit, LogisticParams};
pub use report::{
    evaluate, stratified_split, EvalOptions, FitScope, GroupResult, GroupStatus, QualityReport, REPORT_GROUPS,
    REPORT_METRICS,
};
