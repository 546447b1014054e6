//! Batch orchestration: configuration, dataset discovery, the per-image
//! pipeline, ablation runs, synthetic fixtures and CSV reports.

pub mod ablation;
pub mod config;
pub mod dataset;
pub mod fixtures;
pub mod pipeline;
pub mod report;

pub use ablation::{run_ablation, AblationRow, AblationTable};
pub use config::PipelineConfig;
pub use dataset::{discover_dataset, DatasetIndex, Layout, Sample, SkipEntry};
pub use fixtures::{generate_fixtures, FixtureSample};
pub use pipeline::{
    detect, detect_dataset, evaluate_maps, run_pipeline, BatchSummary, PipelineOutput, SampleResult,
    StageTimings,
};
