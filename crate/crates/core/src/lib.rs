//! Spatiotemporal binary-pattern descriptors for micro-expression analysis.
//!
//! The crate computes three complementary binary codes (LBP, angular
//! difference LBP and radial difference LBP) on the three orthogonal planes
//! of a grayscale video volume, pools them into block histograms, reduces
//! them with whitened PCA and evaluates fused features with a one-vs-one
//! linear SVM under leave-one-subject-out protocols. Clip conditioning
//! (Eulerian motion magnification and temporal interpolation) is included.
//!
//! Everything here is `no_std` + `alloc`; file formats, ingestion and the
//! command line live in the `elbptop` crate.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod classify;
pub mod codes;
pub mod embed;
pub mod error;
pub mod linalg;
pub mod preprocess;
pub mod volume;

pub use classify::{EvalReport, LabeledFeature, LinearSvm, Metrics};
pub use codes::{CodeKind, EncodingKind, EncodingTable, NeighborSpec};
pub use embed::{wpca_fit, wpca_transform, FeatureMatrix, WpcaModel};
pub use error::{Error, Result};
pub use volume::{extract_descriptor, fuse_concat, BlockGrid, DescriptorConfig, DescriptorHistogram, PlaneKind, PlaneSet, VideoVolume};
