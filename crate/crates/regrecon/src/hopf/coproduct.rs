use std::collections::BTreeMap;

use super::tree::{Forest, Tree};
use super::HopfError;

/// An element of `H ⊗ H` with integer coefficients, stored with combined like
/// terms. For the coproduct of a basis forest all coefficients are positive.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorExpansion {
    terms: BTreeMap<(Forest, Forest), i64>,
}

impl TensorExpansion {
    pub fn zero() -> Self {
        TensorExpansion {
            terms: BTreeMap::new(),
        }
    }

    pub fn unit() -> Self {
        let mut terms = BTreeMap::new();
        terms.insert((Forest::empty(), Forest::empty()), 1);
        TensorExpansion { terms }
    }

    pub fn add_term(&mut self, left: Forest, right: Forest, coeff: i64) {
        if coeff == 0 {
            return;
        }
        let key = (left, right);
        let entry = self.terms.entry(key.clone()).or_insert(0);
        *entry += coeff;
        if *entry == 0 {
            self.terms.remove(&key);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Forest, &Forest, i64)> {
        self.terms.iter().map(|((l, r), &c)| (l, r, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Tensor product in `H ⊗ H`: legs multiply componentwise.
    pub fn tensor_product(&self, other: &TensorExpansion) -> TensorExpansion {
        let mut out = TensorExpansion::zero();
        for (l1, r1, c1) in self.terms() {
            for (l2, r2, c2) in other.terms() {
                out.add_term(l1.product(l2), r1.product(r2), c1 * c2);
            }
        }
        out
    }
}

/// Attaches the forest under a fresh root with the given label.
pub fn graft(forest: &Forest, label: u32, max_nodes: usize) -> Result<Tree, HopfError> {
    let nodes = forest.node_count() + 1;
    if nodes > max_nodes {
        return Err(HopfError::TruncationExceeded {
            nodes,
            max: max_nodes,
        });
    }
    Ok(Tree::new(label, forest.trees().to_vec()))
}

/// Coproduct of a single tree via the root recursion
/// `Δ B_+(F) = B_+(F) ⊗ 1 + (id ⊗ B_+)(ΔF)`,
/// which enumerates the admissible cuts: the left leg collects the pruned
/// branches, the right leg is the trunk containing the root.
fn tree_coproduct(tree: &Tree) -> TensorExpansion {
    let mut inner = TensorExpansion::unit();
    for child in tree.children() {
        inner = inner.tensor_product(&tree_coproduct(child));
    }
    let mut out = TensorExpansion::zero();
    out.add_term(Forest::single(tree.clone()), Forest::empty(), 1);
    for (left, right, coeff) in inner.terms() {
        let trunk = Tree::new(tree.label(), right.trees().to_vec());
        out.add_term(left.clone(), Forest::single(trunk), coeff);
    }
    out
}

/// Connes–Kreimer coproduct of a forest, multiplicative over tree factors.
/// Both tensor legs stay within the `max_nodes` truncation automatically
/// because the cut legs partition the nodes of the input.
pub fn coproduct(forest: &Forest, max_nodes: usize) -> Result<TensorExpansion, HopfError> {
    let nodes = forest.node_count();
    if nodes > max_nodes {
        return Err(HopfError::TruncationExceeded {
            nodes,
            max: max_nodes,
        });
    }
    let mut out = TensorExpansion::unit();
    for tree in forest.trees() {
        out = out.tensor_product(&tree_coproduct(tree));
    }
    Ok(out)
}

/// All distinct canonical labeled rooted trees with at most `max_nodes` nodes
/// and labels in `1..=d`, sorted by (node count, canonical order), each
/// exactly once.
pub fn enumerate_trees(d: u32, max_nodes: usize) -> Vec<Tree> {
    assert!(d >= 1 && max_nodes >= 1);
    // by_size[n] holds all canonical trees with exactly n nodes.
    let mut by_size: Vec<Vec<Tree>> = vec![Vec::new(); max_nodes + 1];
    for n in 1..=max_nodes {
        let mut level: Vec<Tree> = Vec::new();
        let smaller: Vec<Tree> = by_size[1..n].iter().flatten().cloned().collect();
        for label in 1..=d {
            for children in multisets_with_total(&smaller, n - 1, 0) {
                level.push(Tree::new(label, children));
            }
        }
        level.sort();
        level.dedup();
        by_size[n] = level;
    }
    by_size.into_iter().flatten().collect()
}

/// Non-decreasing (by index) selections from `pool` whose node counts sum to
/// `total`; repetition allowed so identical branches are produced once.
fn multisets_with_total(pool: &[Tree], total: usize, min_index: usize) -> Vec<Vec<Tree>> {
    if total == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, tree) in pool.iter().enumerate().skip(min_index) {
        let size = tree.node_count();
        if size > total {
            continue;
        }
        for mut rest in multisets_with_total(pool, total - size, i) {
            rest.push(tree.clone());
            out.push(rest);
        }
    }
    out
}

/// All canonical forests with at most `max_nodes` nodes, including the unit.
pub fn enumerate_forests(d: u32, max_nodes: usize) -> Vec<Forest> {
    let trees = enumerate_trees(d, max_nodes);
    let mut out = vec![Forest::empty()];
    for total in 1..=max_nodes {
        for combo in multisets_with_total(&trees, total, 0) {
            out.push(Forest::new(combo));
        }
    }
    out.sort_by_key(|f| (f.node_count(), f.clone()));
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent generator: ordered trees by brute force over compositions,
    /// canonicalized and deduplicated afterwards.
    fn brute_force_trees(d: u32, max_nodes: usize) -> Vec<Tree> {
        fn gen(d: u32, nodes: usize) -> Vec<Tree> {
            let mut out = Vec::new();
            if nodes == 0 {
                return out;
            }
            for label in 1..=d {
                for parts in compositions(nodes - 1) {
                    let mut child_lists: Vec<Vec<Tree>> = vec![Vec::new()];
                    for part in &parts {
                        let sub = gen(d, *part);
                        let mut next = Vec::new();
                        for list in &child_lists {
                            for t in &sub {
                                let mut l = list.clone();
                                l.push(t.clone());
                                next.push(l);
                            }
                        }
                        child_lists = next;
                    }
                    for list in child_lists {
                        out.push(Tree::new(label, list));
                    }
                }
            }
            out
        }
        fn compositions(total: usize) -> Vec<Vec<usize>> {
            if total == 0 {
                return vec![Vec::new()];
            }
            let mut out = Vec::new();
            for first in 1..=total {
                for mut rest in compositions(total - first) {
                    rest.insert(0, first);
                    out.push(rest);
                }
            }
            out
        }
        let mut all = Vec::new();
        for n in 1..=max_nodes {
            let mut level = gen(d, n);
            level.sort();
            level.dedup();
            all.extend(level);
        }
        all.sort_by_key(|t| (t.node_count(), t.clone()));
        all
    }

    #[test]
    fn single_label_counts() {
        let trees = enumerate_trees(1, 4);
        let count = |n: usize| trees.iter().filter(|t| t.node_count() == n).count();
        assert_eq!(trees.iter().filter(|t| t.node_count() <= 1).count(), 1);
        assert_eq!([count(1), count(2), count(3), count(4)], [1, 1, 2, 4]);
    }

    #[test]
    fn two_label_two_node_count() {
        let trees = enumerate_trees(2, 2);
        assert_eq!(trees.len(), 6);
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for (d, n) in [(1u32, 4usize), (2, 4), (3, 3)] {
            let mut fast = enumerate_trees(d, n);
            fast.sort_by_key(|t| (t.node_count(), t.clone()));
            assert_eq!(fast, brute_force_trees(d, n), "d={d} N={n}");
        }
    }

    #[test]
    fn coproduct_of_unit_and_primitive() {
        let unit = coproduct(&Forest::empty(), 4).unwrap();
        assert_eq!(unit, TensorExpansion::unit());

        let bullet = Forest::single(Tree::leaf(1));
        let cp = coproduct(&bullet, 4).unwrap();
        let mut expected = TensorExpansion::zero();
        expected.add_term(bullet.clone(), Forest::empty(), 1);
        expected.add_term(Forest::empty(), bullet.clone(), 1);
        assert_eq!(cp, expected);
    }

    #[test]
    fn coproduct_of_cherry_matches_admissible_cuts() {
        // Δ [•i]j = [•i]j ⊗ 1 + •i ⊗ •j + 1 ⊗ [•i]j, here with i=1, j=2.
        let cherry = Tree::new(2, vec![Tree::leaf(1)]);
        let cp = coproduct(&Forest::single(cherry.clone()), 4).unwrap();
        let mut expected = TensorExpansion::zero();
        expected.add_term(Forest::single(cherry.clone()), Forest::empty(), 1);
        expected.add_term(
            Forest::single(Tree::leaf(1)),
            Forest::single(Tree::leaf(2)),
            1,
        );
        expected.add_term(Forest::empty(), Forest::single(cherry), 1);
        assert_eq!(cp, expected);
    }

    #[test]
    fn coproduct_multiplicative_on_forests() {
        let s = Forest::single(Tree::leaf(1));
        let t = Forest::single(Tree::new(2, vec![Tree::leaf(1)]));
        let product = s.product(&t);
        let lhs = coproduct(&product, 4).unwrap();
        let rhs = coproduct(&s, 4)
            .unwrap()
            .tensor_product(&coproduct(&t, 4).unwrap());
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn coproduct_rejects_oversized_forest() {
        let big = Forest::new(vec![Tree::leaf(1), Tree::leaf(1), Tree::leaf(1)]);
        assert!(coproduct(&big, 2).is_err());
    }

    #[test]
    fn grading_splits_node_count() {
        for forest in enumerate_forests(2, 4) {
            let cp = coproduct(&forest, 4).unwrap();
            for (l, r, c) in cp.terms() {
                assert!(c > 0);
                assert_eq!(l.node_count() + r.node_count(), forest.node_count());
            }
        }
    }

    #[test]
    fn coassociativity_up_to_four_nodes() {
        // (Δ ⊗ id)Δ = (id ⊗ Δ)Δ with exact integer coefficients.
        for forest in enumerate_forests(2, 4) {
            let cp = coproduct(&forest, 4).unwrap();
            let mut lhs: BTreeMap<(Forest, Forest, Forest), i64> = BTreeMap::new();
            for (l, r, c) in cp.terms() {
                for (ll, lr, c2) in coproduct(l, 4).unwrap().terms() {
                    *lhs.entry((ll.clone(), lr.clone(), r.clone())).or_insert(0) += c * c2;
                }
            }
            let mut rhs: BTreeMap<(Forest, Forest, Forest), i64> = BTreeMap::new();
            for (l, r, c) in cp.terms() {
                for (rl, rr, c2) in coproduct(r, 4).unwrap().terms() {
                    *rhs.entry((l.clone(), rl.clone(), rr.clone())).or_insert(0) += c * c2;
                }
            }
            lhs.retain(|_, v| *v != 0);
            rhs.retain(|_, v| *v != 0);
            assert_eq!(lhs, rhs, "coassociativity failed on {forest}");
        }
    }

    #[test]
    fn counit_laws() {
        // ε kills nonempty legs; contracting either leg must return the input.
        for forest in enumerate_forests(2, 4) {
            let cp = coproduct(&forest, 4).unwrap();
            let mut left = BTreeMap::new();
            let mut right = BTreeMap::new();
            for (l, r, c) in cp.terms() {
                if l.is_empty() {
                    *left.entry(r.clone()).or_insert(0) += c;
                }
                if r.is_empty() {
                    *right.entry(l.clone()).or_insert(0) += c;
                }
            }
            left.retain(|_, v| *v != 0);
            right.retain(|_, v| *v != 0);
            let expected: BTreeMap<Forest, i64> = [(forest.clone(), 1)].into_iter().collect();
            assert_eq!(left, expected);
            assert_eq!(right, expected);
        }
    }

    #[test]
    fn graft_builds_canonical_trees() {
        let f = Forest::new(vec![Tree::leaf(1), Tree::leaf(1)]);
        let t = graft(&f, 2, 4).unwrap();
        assert_eq!(t.node_count(), 3);
        assert_eq!(t.children().len(), 2);
        assert_eq!(t.to_string(), "[\u{2022}1\u{00b7}\u{2022}1]2");
        assert!(graft(&f, 2, 2).is_err());
    }
}
