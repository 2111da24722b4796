//! Property tests for the combinatorial layer and the scaling invariants.

use proptest::prelude::*;

use regrecon::hopf::{coproduct, parse_forest, Forest, Tree};
use regrecon::structures::{MultiIndex, Scaling};

fn arb_tree(max_depth: u32, d: u32) -> impl Strategy<Value = Tree> {
    let leaf = (1..=d).prop_map(Tree::leaf);
    leaf.prop_recursive(max_depth, 8, 3, move |inner| {
        ((1..=d), prop::collection::vec(inner, 0..3))
            .prop_map(|(label, children)| Tree::new(label, children))
    })
}

fn arb_forest(d: u32) -> impl Strategy<Value = Forest> {
    prop::collection::vec(arb_tree(2, d), 0..3).prop_map(Forest::new)
}

proptest! {
    /// printing and parsing the bracket notation is the identity on
    /// canonical forests
    #[test]
    fn notation_round_trips(forest in arb_forest(3)) {
        let printed = forest.to_string();
        let parsed = parse_forest(&printed).unwrap();
        prop_assert_eq!(parsed, forest);
    }

    /// every coproduct term splits the node count and carries a positive
    /// coefficient
    #[test]
    fn coproduct_grading_and_positivity(forest in arb_forest(2)) {
        let nodes = forest.node_count();
        prop_assume!(nodes <= 6);
        let cp = coproduct(&forest, 6).unwrap();
        for (left, right, coeff) in cp.terms() {
            prop_assert!(coeff > 0);
            prop_assert_eq!(left.node_count() + right.node_count(), nodes);
        }
    }

    /// the scaled norm is homogeneous of degree one under the anisotropic
    /// dilation
    #[test]
    fn scaled_norm_dilates(
        exps in prop::collection::vec(1u32..=3, 1..=3),
        coords in prop::collection::vec(-10.0f64..10.0, 3),
        lambda in 0.1f64..4.0,
    ) {
        let scaling = Scaling::new(exps.clone());
        let x = &coords[..exps.len()];
        let scaled = scaling.dilate(lambda, x);
        let lhs = scaling.scaled_norm(&scaled);
        let rhs = lambda * scaling.scaled_norm(x);
        prop_assert!((lhs - rhs).abs() <= 1e-9 * rhs.max(1.0));
    }

    /// binomial transport coefficients multiply the way Pascal's rule says
    #[test]
    fn multi_index_binomial_consistency(k in 0u32..8, l in 0u32..8) {
        prop_assume!(l <= k);
        let k_idx = MultiIndex(vec![k]);
        let l_idx = MultiIndex(vec![l]);
        let direct = k_idx.binomial(&l_idx);
        let factorial = k_idx.factorial() / (l_idx.factorial() * k_idx.sub(&l_idx).factorial());
        prop_assert!((direct - factorial).abs() < 1e-9 * factorial.max(1.0));
    }
}
