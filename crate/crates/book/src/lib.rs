//! Doc-tests for the guide in `book/`.
//!
//! Each chapter is included as the docs of an empty module, so every `rust`
//! block in the book runs as a doc-test of this crate.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/embedding-files.md")]
pub mod embedding_files {}

#[doc = include_str!("../../../book/src/alignment-metrics.md")]
pub mod alignment_metrics {}

#[doc = include_str!("../../../book/src/neighbours-and-ties.md")]
pub mod neighbours_and_ties {}

#[doc = include_str!("../../../book/src/patch-pipeline.md")]
pub mod patch_pipeline {}

#[doc = include_str!("../../../book/src/rotation-sweep.md")]
pub mod rotation_sweep {}

#[doc = include_str!("../../../book/src/t-test.md")]
pub mod t_test {}

#[doc = include_str!("../../../book/src/cli.md")]
pub mod cli {}
