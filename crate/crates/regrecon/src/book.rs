//! Runs the guide's code listings as doctests so the book stays in sync with
//! the library. Chapters are included verbatim; `cargo test --doc` executes
//! every fenced Rust block.

#[doc = include_str!("../../../book/src/introduction.md")]
pub mod introduction {}

#[doc = include_str!("../../../book/src/trees-and-characters.md")]
pub mod trees_and_characters {}

#[doc = include_str!("../../../book/src/structures-and-models.md")]
pub mod structures_and_models {}

#[doc = include_str!("../../../book/src/mollification.md")]
pub mod mollification {}

#[doc = include_str!("../../../book/src/modelled-distributions.md")]
pub mod modelled_distributions {}

#[doc = include_str!("../../../book/src/reconstruction.md")]
pub mod reconstruction {}

#[doc = include_str!("../../../book/src/rough-paths.md")]
pub mod rough_paths {}

#[doc = include_str!("../../../book/src/experiments.md")]
pub mod experiments_guide {}
