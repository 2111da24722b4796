use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{FromPrimitive, One, Zero};
use rand::Rng;

use super::coproduct::{coproduct, enumerate_trees};
use super::tree::{Forest, Tree};
use super::HopfError;

/// Scalars a character can take values in: exact rationals for the algebraic
/// test suites, floats for path-valued characters.
pub trait Scalar:
    Clone
    + PartialEq
    + std::fmt::Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Zero
    + One
    + FromPrimitive
{
}

impl<T> Scalar for T where
    T: Clone
        + PartialEq
        + std::fmt::Debug
        + Add<Output = T>
        + Sub<Output = T>
        + Mul<Output = T>
        + Neg<Output = T>
        + Zero
        + One
        + FromPrimitive
{
}

/// A multiplicative functional on forests with at most `max_nodes` nodes, an
/// element of the truncated character group. Multiplicativity pins the values
/// on forests, so only tree values are stored.
#[derive(Clone, Debug, PartialEq)]
pub struct Character<S: Scalar> {
    d: u32,
    max_nodes: usize,
    tree_values: BTreeMap<Tree, S>,
}

impl<S: Scalar> Character<S> {
    /// The counit: value 1 on the empty forest, 0 on every nonempty tree.
    pub fn counit(d: u32, max_nodes: usize) -> Self {
        let tree_values = enumerate_trees(d, max_nodes)
            .into_iter()
            .map(|t| (t, S::zero()))
            .collect();
        Character {
            d,
            max_nodes,
            tree_values,
        }
    }

    /// Builds a character from explicit tree values; trees left out get 0.
    pub fn from_tree_values(
        d: u32,
        max_nodes: usize,
        values: impl IntoIterator<Item = (Tree, S)>,
    ) -> Result<Self, HopfError> {
        let mut c = Character::counit(d, max_nodes);
        for (tree, value) in values {
            if tree.label() > d || tree.label() == 0 {
                return Err(HopfError::LabelOutOfRange {
                    label: tree.label(),
                    d,
                });
            }
            let nodes = tree.node_count();
            if nodes > max_nodes {
                return Err(HopfError::TruncationExceeded {
                    nodes,
                    max: max_nodes,
                });
            }
            c.tree_values.insert(tree, value);
        }
        Ok(c)
    }

    pub fn d(&self) -> u32 {
        self.d
    }

    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    pub fn set_tree_value(&mut self, tree: Tree, value: S) {
        debug_assert!(tree.node_count() <= self.max_nodes);
        self.tree_values.insert(tree, value);
    }

    pub fn tree_value(&self, tree: &Tree) -> S {
        self.tree_values
            .get(tree)
            .cloned()
            .unwrap_or_else(S::zero)
    }

    /// Value on a forest: the product of its tree values; 1 on the unit.
    pub fn value(&self, forest: &Forest) -> S {
        let mut out = S::one();
        for tree in forest.trees() {
            out = out * self.tree_value(tree);
        }
        out
    }

    pub fn trees(&self) -> impl Iterator<Item = (&Tree, &S)> {
        self.tree_values.iter()
    }

    fn check_compatible(&self, other: &Self) -> Result<(), HopfError> {
        if self.d != other.d || self.max_nodes != other.max_nodes {
            return Err(HopfError::MismatchedTruncation {
                d_a: self.d,
                d_b: other.d,
                n_a: self.max_nodes,
                n_b: other.max_nodes,
            });
        }
        Ok(())
    }

    /// Convolution product `(g ⋆ h)(τ) = (g ⊗ h) Δτ` in the truncated group;
    /// cut terms never exceed the truncation because the coproduct is graded.
    pub fn product(&self, other: &Self) -> Result<Self, HopfError> {
        self.check_compatible(other)?;
        let mut out = Character::counit(self.d, self.max_nodes);
        let trees: Vec<Tree> = self.tree_values.keys().cloned().collect();
        for tree in trees {
            let cp = coproduct(&Forest::single(tree.clone()), self.max_nodes)?;
            let mut acc = S::zero();
            for (left, right, coeff) in cp.terms() {
                let term = self.value(left) * other.value(right);
                acc = acc + S::from_i64(coeff).expect("small coproduct coefficient") * term;
            }
            out.tree_values.insert(tree, acc);
        }
        Ok(out)
    }

    /// Group inverse, solved level by level in the node-count grading from
    /// `(g ⋆ g^{-1})(τ) = 0` for nonempty τ.
    pub fn inverse(&self) -> Self {
        let mut inv = Character::counit(self.d, self.max_nodes);
        let mut trees: Vec<Tree> = self.tree_values.keys().cloned().collect();
        trees.sort_by_key(|t| (t.node_count(), t.clone()));
        for tree in trees {
            let cp = coproduct(&Forest::single(tree.clone()), self.max_nodes)
                .expect("stored tree within truncation");
            // Δτ = τ⊗1 + 1⊗τ + proper cuts; the 1⊗τ term carries inv(τ).
            let mut acc = S::zero();
            for (left, right, coeff) in cp.terms() {
                if left.is_empty() && right == &Forest::single(tree.clone()) {
                    continue;
                }
                let term = self.value(left) * inv.value(right);
                acc = acc + S::from_i64(coeff).expect("small coproduct coefficient") * term;
            }
            inv.tree_values.insert(tree, -acc);
        }
        inv
    }

    /// Increment `g^{-1} ⋆ h` of a character path.
    pub fn increment(&self, other: &Self) -> Result<Self, HopfError> {
        self.inverse().product(other)
    }

    pub fn map_values<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Character<T> {
        Character {
            d: self.d,
            max_nodes: self.max_nodes,
            tree_values: self
                .tree_values
                .iter()
                .map(|(t, v)| (t.clone(), f(v)))
                .collect(),
        }
    }
}

/// A character with float tree values drawn uniformly from [-1, 1].
pub fn random_f64_character(d: u32, max_nodes: usize, rng: &mut impl Rng) -> Character<f64> {
    let values = enumerate_trees(d, max_nodes)
        .into_iter()
        .map(|t| (t, rng.gen_range(-1.0..=1.0)));
    Character::from_tree_values(d, max_nodes, values).expect("enumerated trees are in range")
}

/// A character with small exact rational tree values, for the exact group-law
/// checks.
pub fn random_rational_character(
    d: u32,
    max_nodes: usize,
    rng: &mut impl Rng,
) -> Character<num_rational::BigRational> {
    use num_bigint::BigInt;
    let values = enumerate_trees(d, max_nodes).into_iter().map(|t| {
        let numer: i64 = rng.gen_range(-8..=8);
        let denom: i64 = rng.gen_range(1..=8);
        (
            t,
            num_rational::BigRational::new(BigInt::from(numer), BigInt::from(denom)),
        )
    });
    Character::from_tree_values(d, max_nodes, values).expect("enumerated trees are in range")
}
