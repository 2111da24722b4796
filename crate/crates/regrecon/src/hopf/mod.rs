//! Labeled rooted trees, commutative forests, and the character group of the
//! Connes–Kreimer Hopf algebra, truncated at a fixed node count.
//!
//! Trees carry node labels in `1..=d`. A forest is an unordered product of
//! trees; the empty forest is the algebra unit. Everything is kept in a
//! canonical sorted form so forests can serve as map keys.

mod character;
mod coproduct;
mod tree;

pub use character::{random_f64_character, random_rational_character, Character};
pub use coproduct::{coproduct, enumerate_forests, enumerate_trees, graft, TensorExpansion};
pub use tree::{parse_forest, Forest, Tree};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum HopfError {
    #[error("forest has {nodes} nodes, exceeding the truncation bound {max}")]
    TruncationExceeded { nodes: usize, max: usize },
    #[error("characters live in different truncated groups (d {d_a} vs {d_b}, N {n_a} vs {n_b})")]
    MismatchedTruncation {
        d_a: u32,
        d_b: u32,
        n_a: usize,
        n_b: usize,
    },
    #[error("label {label} out of range 1..={d}")]
    LabelOutOfRange { label: u32, d: u32 },
    #[error("cannot parse forest notation: {0}")]
    Parse(String),
}
