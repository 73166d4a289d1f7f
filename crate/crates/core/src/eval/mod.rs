//! Batched evaluation over MQuAKE-style benchmarks.

pub mod batch;
pub mod dataset;
pub mod report;
pub mod runner;
pub mod synthetic;

pub use batch::{batch_indices, check_batch_size, group_into_batches};
pub use dataset::{
    load_dataset, parse_dataset, save_dataset, DatasetKind, FieldMapping, Layout, LoadedDataset,
    QaInstance,
};
pub use report::{emit_report, write_trace, EvalReport, OutcomeCounts};
pub use runner::{
    build_base_graph, score_instance, EvalConfig, EvalRun, Evaluator, GroupResult, InstanceResult,
    Mode, Ports,
};
pub use synthetic::{generate, SyntheticCase, SyntheticConfig, SyntheticSuite};
