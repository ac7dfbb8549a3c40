//! Set-theoretic syntax: lexical items, binary set-trees, workspaces and
//! MERGE derivations.
//!
//! A [`SyntacticObject`] is either a lexical leaf or an unordered pair of
//! objects. Children are kept in a canonical order internally so that
//! `{a, b}` and `{b, a}` compare equal and hash identically.

mod item;
mod json;
mod label;
mod merge;
mod metrics;
pub mod random;

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use item::{Feature, FeatureKind, LexicalError, LexicalItem};
pub use json::TreeJsonError;
pub use label::LabelingRules;
pub use merge::{Derivation, DerivationStep, Workspace};

/// A syntactic category such as `N`, `V` or `T`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Category(String);

impl Category {
    pub fn new(name: impl Into<String>) -> Self {
        Category(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Category {
    fn from(s: &str) -> Self {
        Category(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntaxError {
    #[error("merge: object {0} is not a member of the workspace")]
    NotInWorkspace(String),
    #[error("merge: cannot merge an object with itself")]
    SelfMerge,
    #[error("workspace already contains {0}")]
    DuplicateObject(String),
    #[error("no labeling rule applies to {{{left}, {right}}}")]
    Unlabelable { left: String, right: String },
    #[error("node is not labeled")]
    MissingLabel,
    #[error("label {label} does not project from either child")]
    NotEndocentric { label: Category },
    #[error("order is not a linearization of the tree: {0}")]
    OrderMismatch(String),
    #[error(transparent)]
    Lexical(#[from] LexicalError),
}

/// Internal binary node. Children are stored in canonical order.
#[derive(Debug)]
pub struct Node {
    children: [SyntacticObject; 2],
    label: Option<Category>,
}

impl Node {
    pub fn children(&self) -> &[SyntacticObject; 2] {
        &self.children
    }

    pub fn label(&self) -> Option<&Category> {
        self.label.as_ref()
    }
}

/// A lexical leaf or an unordered, optionally labeled pair.
///
/// Cloning is cheap: subtrees are shared.
#[derive(Debug, Clone)]
pub enum SyntacticObject {
    Leaf(Arc<LexicalItem>),
    Node(Arc<Node>),
}

impl SyntacticObject {
    pub fn leaf(item: LexicalItem) -> Self {
        SyntacticObject::Leaf(Arc::new(item))
    }

    /// Forms the unlabeled set `{a, b}`.
    pub fn set(a: SyntacticObject, b: SyntacticObject) -> Result<Self, SyntaxError> {
        Self::node(a, b, None)
    }

    /// Forms `{a, b}` with an optional label. A present label must be the
    /// category of one of the two children.
    pub fn node(
        a: SyntacticObject,
        b: SyntacticObject,
        label: Option<Category>,
    ) -> Result<Self, SyntaxError> {
        if a == b {
            return Err(SyntaxError::SelfMerge);
        }
        if let Some(l) = &label {
            let projects = [&a, &b].iter().any(|c| c.category() == Some(l));
            if !projects {
                return Err(SyntaxError::NotEndocentric { label: l.clone() });
            }
        }
        let children = if a <= b { [a, b] } else { [b, a] };
        Ok(SyntacticObject::Node(Arc::new(Node { children, label })))
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, SyntacticObject::Leaf(_))
    }

    pub fn as_leaf(&self) -> Option<&LexicalItem> {
        match self {
            SyntacticObject::Leaf(item) => Some(item),
            SyntacticObject::Node(_) => None,
        }
    }

    pub fn as_node(&self) -> Option<&Node> {
        match self {
            SyntacticObject::Leaf(_) => None,
            SyntacticObject::Node(n) => Some(n),
        }
    }

    /// The category this object projects: a leaf's own category, or a node's
    /// label when one has been assigned.
    pub fn category(&self) -> Option<&Category> {
        match self {
            SyntacticObject::Leaf(item) => Some(item.category()),
            SyntacticObject::Node(n) => n.label.as_ref(),
        }
    }

    /// Short bracketed rendering using leaf ids, e.g. `{{the dog} barked}`.
    pub fn bracketed(&self) -> String {
        match self {
            SyntacticObject::Leaf(item) => item.id().to_owned(),
            SyntacticObject::Node(n) => format!(
                "{{{} {}}}",
                n.children[0].bracketed(),
                n.children[1].bracketed()
            ),
        }
    }
}

impl fmt::Display for SyntacticObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.bracketed())
    }
}

impl Ord for SyntacticObject {
    fn cmp(&self, other: &Self) -> Ordering {
        use SyntacticObject::*;
        match (self, other) {
            (Leaf(a), Leaf(b)) => {
                if Arc::ptr_eq(a, b) {
                    Ordering::Equal
                } else {
                    a.as_ref().cmp(b.as_ref())
                }
            }
            (Leaf(_), Node(_)) => Ordering::Less,
            (Node(_), Leaf(_)) => Ordering::Greater,
            (Node(a), Node(b)) => {
                if Arc::ptr_eq(a, b) {
                    return Ordering::Equal;
                }
                a.label
                    .cmp(&b.label)
                    .then_with(|| a.children[0].cmp(&b.children[0]))
                    .then_with(|| a.children[1].cmp(&b.children[1]))
            }
        }
    }
}

impl PartialOrd for SyntacticObject {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for SyntacticObject {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for SyntacticObject {}

impl Hash for SyntacticObject {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match self {
            SyntacticObject::Leaf(item) => {
                0u8.hash(state);
                item.hash(state);
            }
            SyntacticObject::Node(n) => {
                1u8.hash(state);
                n.label.hash(state);
                n.children[0].hash(state);
                n.children[1].hash(state);
            }
        }
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn pair_is_unordered() {
        let ab = SyntacticObject::set(leaf("a", "N"), leaf("b", "V")).unwrap();
        let ba = SyntacticObject::set(leaf("b", "V"), leaf("a", "N")).unwrap();
        assert_eq!(ab, ba);
        let set: HashSet<_> = [ab, ba].into_iter().collect();
        assert_eq!(set.len(), 1);
    }

    #[test]
    fn self_pair_is_rejected() {
        let a = leaf("a", "N");
        assert_eq!(
            SyntacticObject::set(a.clone(), a),
            Err(SyntaxError::SelfMerge)
        );
    }

    #[test]
    fn same_content_different_id_are_distinct() {
        let a = leaf("the_1", "D");
        let b = leaf("the_2", "D");
        assert_ne!(a, b);
        assert!(SyntacticObject::set(a, b).is_ok());
    }

    #[test]
    fn label_must_project_from_a_child() {
        let err = SyntacticObject::node(leaf("a", "A"), leaf("n", "N"), Some("V".into()));
        assert!(matches!(err, Err(SyntaxError::NotEndocentric { .. })));
        assert!(SyntacticObject::node(leaf("a", "A"), leaf("n", "N"), Some("N".into())).is_ok());
    }

    #[test]
    fn label_participates_in_equality() {
        let bare = SyntacticObject::set(leaf("a", "A"), leaf("n", "N")).unwrap();
        let np = SyntacticObject::node(leaf("a", "A"), leaf("n", "N"), Some("N".into())).unwrap();
        assert_ne!(bare, np);
    }
}
