use serde::{Deserialize, Serialize};

use super::{Category, SyntacticObject, SyntaxError};

/// Head selection for sets the lexical-head rule cannot resolve.
///
/// `{leaf, phrase}` always projects the leaf. For `{leaf, leaf}` and
/// `{phrase, phrase}`, identical categories project that category; otherwise
/// the category ranked earlier in `precedence` wins, and a pair with an
/// unranked category cannot be labeled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelingRules {
    pub precedence: Vec<Category>,
}

impl Default for LabelingRules {
    fn default() -> Self {
        LabelingRules {
            precedence: ["N", "V", "A", "P"].into_iter().map(Category::from).collect(),
        }
    }
}

impl LabelingRules {
    pub fn new(precedence: impl IntoIterator<Item = Category>) -> Self {
        LabelingRules {
            precedence: precedence.into_iter().collect(),
        }
    }

    fn rank(&self, c: &Category) -> Option<usize> {
        self.precedence.iter().position(|p| p == c)
    }

    fn resolve(&self, a: &Category, b: &Category) -> Option<Category> {
        if a == b {
            return Some(a.clone());
        }
        match (self.rank(a), self.rank(b)) {
            (Some(ra), Some(rb)) => Some(if ra < rb { a.clone() } else { b.clone() }),
            _ => None,
        }
    }

    /// Category of `so` under these rules. Existing labels are ignored and
    /// recomputed.
    pub fn label(&self, so: &SyntacticObject) -> Result<Category, SyntaxError> {
        self.label_tree(so)
            .map(|t| t.category().cloned().expect("labeled tree has a category"))
    }

    /// Copy of `so` with every node labeled.
    pub fn label_tree(&self, so: &SyntacticObject) -> Result<SyntacticObject, SyntaxError> {
        let node = match so {
            SyntacticObject::Leaf(_) => return Ok(so.clone()),
            SyntacticObject::Node(n) => n,
        };
        let [a, b] = node.children();
        let (a, b) = (self.label_tree(a)?, self.label_tree(b)?);
        let (ca, cb) = (a.category().unwrap(), b.category().unwrap());
        let label = match (a.is_leaf(), b.is_leaf()) {
            (true, false) => Some(ca.clone()),
            (false, true) => Some(cb.clone()),
            _ => self.resolve(ca, cb),
        };
        let label = label.ok_or_else(|| SyntaxError::Unlabelable {
            left: format!("{}:{}", a.bracketed(), ca),
            right: format!("{}:{}", b.bracketed(), cb),
        })?;
        SyntacticObject::node(a, b, Some(label))
    }
}
