use std::fmt;

use super::HopfError;

/// A labeled rooted tree in canonical form: children are themselves canonical
/// and sorted, so structural equality coincides with isomorphism of labeled
/// trees with unordered branches.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tree {
    label: u32,
    children: Vec<Tree>,
}

impl Tree {
    pub fn new(label: u32, mut children: Vec<Tree>) -> Self {
        children.sort();
        Tree { label, children }
    }

    pub fn leaf(label: u32) -> Self {
        Tree {
            label,
            children: Vec::new(),
        }
    }

    pub fn label(&self) -> u32 {
        self.label
    }

    pub fn children(&self) -> &[Tree] {
        &self.children
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(Tree::node_count).sum::<usize>()
    }

    /// The forest obtained by removing the root.
    pub fn prune_root(&self) -> Forest {
        Forest::new(self.children.clone())
    }

    /// The tree factorial τ! = |τ| · Π τ_i!, the normalization of iterated
    /// integrals of a linear path.
    pub fn factorial(&self) -> f64 {
        self.node_count() as f64
            * self
                .children
                .iter()
                .map(Tree::factorial)
                .product::<f64>()
    }
}

/// A commutative product of trees; the empty forest is the unit `1`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Forest {
    trees: Vec<Tree>,
}

impl Forest {
    pub fn new(mut trees: Vec<Tree>) -> Self {
        trees.sort();
        Forest { trees }
    }

    pub fn empty() -> Self {
        Forest { trees: Vec::new() }
    }

    pub fn single(tree: Tree) -> Self {
        Forest { trees: vec![tree] }
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    pub fn trees(&self) -> &[Tree] {
        &self.trees
    }

    pub fn node_count(&self) -> usize {
        self.trees.iter().map(Tree::node_count).sum()
    }

    /// Forest product: concatenation followed by canonical sorting.
    pub fn product(&self, other: &Forest) -> Forest {
        let mut trees = self.trees.clone();
        trees.extend_from_slice(&other.trees);
        Forest::new(trees)
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            write!(f, "\u{2022}{}", self.label)
        } else {
            write!(f, "[{}]{}", Forest::new(self.children.clone()), self.label)
        }
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.trees.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.trees.iter().map(Tree::to_string).collect();
        write!(f, "{}", parts.join("\u{00b7}"))
    }
}

/// Parses the forest notation produced by `Display`: `1` is the empty forest,
/// `•i` a single node, `[f]j` grafts the forest `f` under a `j`-labeled root,
/// and `·` separates forest factors.
pub fn parse_forest(input: &str) -> Result<Forest, HopfError> {
    let chars: Vec<char> = input.trim().chars().collect();
    let mut pos = 0;
    let forest = parse_forest_inner(&chars, &mut pos)?;
    if pos != chars.len() {
        return Err(HopfError::Parse(format!(
            "trailing input at position {pos} in {input:?}"
        )));
    }
    Ok(forest)
}

fn parse_forest_inner(chars: &[char], pos: &mut usize) -> Result<Forest, HopfError> {
    if chars.get(*pos) == Some(&'1') {
        *pos += 1;
        return Ok(Forest::empty());
    }
    let mut trees = vec![parse_tree(chars, pos)?];
    while chars.get(*pos) == Some(&'\u{00b7}') {
        *pos += 1;
        trees.push(parse_tree(chars, pos)?);
    }
    Ok(Forest::new(trees))
}

fn parse_tree(chars: &[char], pos: &mut usize) -> Result<Tree, HopfError> {
    match chars.get(*pos) {
        Some('\u{2022}') => {
            *pos += 1;
            let label = parse_label(chars, pos)?;
            Ok(Tree::leaf(label))
        }
        Some('[') => {
            *pos += 1;
            let inner = parse_forest_inner(chars, pos)?;
            if chars.get(*pos) != Some(&']') {
                return Err(HopfError::Parse(format!(
                    "expected ']' at position {}",
                    *pos
                )));
            }
            *pos += 1;
            let label = parse_label(chars, pos)?;
            Ok(Tree::new(label, inner.trees))
        }
        other => Err(HopfError::Parse(format!(
            "expected '\u{2022}' or '[' at position {}, found {other:?}",
            *pos
        ))),
    }
}

fn parse_label(chars: &[char], pos: &mut usize) -> Result<u32, HopfError> {
    let start = *pos;
    while chars.get(*pos).is_some_and(|c| c.is_ascii_digit()) {
        *pos += 1;
    }
    if start == *pos {
        return Err(HopfError::Parse(format!(
            "expected a label at position {start}"
        )));
    }
    let digits: String = chars[start..*pos].iter().collect();
    digits
        .parse::<u32>()
        .map_err(|e| HopfError::Parse(format!("bad label {digits:?}: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_form_ignores_child_order() {
        let a = Tree::new(1, vec![Tree::leaf(2), Tree::leaf(1)]);
        let b = Tree::new(1, vec![Tree::leaf(1), Tree::leaf(2)]);
        assert_eq!(a, b);
    }

    #[test]
    fn node_counts_add_up() {
        let t = Tree::new(1, vec![Tree::leaf(1), Tree::new(2, vec![Tree::leaf(1)])]);
        assert_eq!(t.node_count(), 4);
        let f = Forest::new(vec![t.clone(), Tree::leaf(2)]);
        assert_eq!(f.node_count(), 5);
    }

    #[test]
    fn notation_round_trips() {
        let t = Tree::new(2, vec![Tree::leaf(1), Tree::leaf(1)]);
        let f = Forest::new(vec![t, Tree::leaf(2)]);
        let printed = f.to_string();
        assert_eq!(printed, "\u{2022}2\u{00b7}[\u{2022}1\u{00b7}\u{2022}1]2");
        assert_eq!(parse_forest(&printed).unwrap(), f);
        assert_eq!(parse_forest("1").unwrap(), Forest::empty());
    }

    #[test]
    fn graft_notation_accepts_empty_forest() {
        assert_eq!(parse_forest("[1]3").unwrap(), Forest::single(Tree::leaf(3)));
    }
}
