//! Binary classifiers and the out-of-time evaluation protocol.

pub mod dataset;
pub mod error;
pub mod logistic;
pub mod metrics;
pub mod model;
pub mod protocol;
pub mod split;
pub mod tree;

pub use dataset::{Dataset, Imputer, Matrix};
pub use error::{Error, Result};
pub use metrics::{auroc, evaluate_scores, Confusion, Metrics};
pub use model::{FeatureImportance, Hyper, ModelKind, Params, TrainedModel};
pub use protocol::{run_matrix, run_target, EvalReport, GridConfig, MatrixResult, ProtocolConfig, SkippedTarget};
pub use split::{balance_training, split_out_of_time, Split, SplitPlan};
