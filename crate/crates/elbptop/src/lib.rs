//! File-facing side of the ELBPTOP pipeline: manifests, image decoding,
//! feature caching, run configuration, evaluation orchestration, fusion
//! search and synthetic data. Numerics live in `elbptop-core`.

pub mod cache;
pub mod config;
pub mod error;
pub mod fusion;
pub mod ingest;
pub mod manifest;
pub mod pipeline;
pub mod report;
pub mod synth;

pub use config::{Protocol, RunConfig, WpcaSettings};
pub use error::{Error, Result};
pub use fusion::{enumerate_schemes, fusion_search, FusionRanking, Scheme, SchemeResult};
pub use manifest::{DatasetManifest, ManifestEntry};
pub use pipeline::{extract_features, run_pipeline, FeatureSet};
pub use report::RunReport;
pub use synth::{synth_generate, SynthSpec};
