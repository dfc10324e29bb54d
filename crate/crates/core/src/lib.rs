//! Rotation-invariance analysis for image embedding models.
//!
//! The crate turns RGB images into tissue patches, compares embeddings of
//! rotated patches against their unrotated control with two alignment
//! scores (mutual k-nearest-neighbour overlap and mean cosine distance),
//! sweeps a grid of angles per model, and tests whether models trained with
//! rotation augmentation align better than those without.
//!
//! | module       | role                                                  |
//! |--------------|-------------------------------------------------------|
//! | [`store`]    | embedding sets, `EMB1` files, manifest, synthetic data |
//! | [`metrics`]  | exact k-NN, mutual k-NN, cosine distance              |
//! | [`patchgen`] | segmentation, region selection, tiling, rotation      |
//! | [`protocol`] | angle grid, per-model sweep, aggregation              |
//! | [`stats`]    | two-sample t-tests with a from-scratch t distribution |
//! | [`report`]   | CSV / JSON / SVG emission                             |

pub mod error;
pub mod metrics;
pub mod patchgen;
pub mod protocol;
pub mod report;
pub mod stats;
pub mod store;

pub use error::{Error, Result};
pub use metrics::{
    alignment, cosine_distance_mean, knn_indices, mutual_knn, mutual_knn_from_indices, AlignmentScore, Metric,
    NeighborIndex,
};
pub use protocol::{aggregate, evaluate_model, run_sweep, AlignmentTable, AngleGrid, ModelAggregate};
pub use stats::{t_sf, two_sample_ttest, TTestResult, TTestVariant};
pub use store::{read_embeddings, synthesize_pair, write_embeddings, EmbeddingMeta, EmbeddingSet, ModelManifest};

/// Neighbourhood size used when none is given.
pub const DEFAULT_K: usize = 10;
