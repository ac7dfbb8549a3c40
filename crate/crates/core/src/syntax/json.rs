//! Canonical JSON form of trees.
//!
//! A leaf is `{"id","category","features","weight","embedding"}` and a node
//! is `{"label","children":[..]}` with the two children sorted by their own
//! serialized text, so equal sets serialize identically.

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use super::item::ItemRepr;
use super::{Category, LexicalItem, SyntacticObject, SyntaxError};

#[derive(Debug, Error)]
pub enum TreeJsonError {
    #[error("malformed tree JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("node must have exactly 2 children, found {0}")]
    Arity(usize),
    #[error(transparent)]
    Syntax(#[from] SyntaxError),
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TreeRepr {
    Node {
        label: Option<Category>,
        children: Vec<TreeRepr>,
    },
    Leaf(ItemRepr),
}

impl SyntacticObject {
    fn canonical_repr(&self) -> (TreeRepr, String) {
        let repr = match self {
            SyntacticObject::Leaf(item) => TreeRepr::Leaf(LexicalItem::clone(item).into()),
            SyntacticObject::Node(n) => {
                let mut kids: Vec<_> = n.children().iter().map(|c| c.canonical_repr()).collect();
                kids.sort_by(|a, b| a.1.cmp(&b.1));
                TreeRepr::Node {
                    label: n.label().cloned(),
                    children: kids.into_iter().map(|k| k.0).collect(),
                }
            }
        };
        let text = serde_json::to_string(&repr).expect("tree serialization is infallible");
        (repr, text)
    }

    /// Compact canonical JSON text.
    pub fn to_canonical_json(&self) -> String {
        self.canonical_repr().1
    }

    pub fn from_json(text: &str) -> Result<Self, TreeJsonError> {
        let repr: TreeRepr = serde_json::from_str(text)?;
        Self::from_repr(repr)
    }

    fn from_repr(repr: TreeRepr) -> Result<Self, TreeJsonError> {
        match repr {
            TreeRepr::Leaf(item) => Ok(SyntacticObject::leaf(
                LexicalItem::try_from(item).map_err(SyntaxError::from)?,
            )),
            TreeRepr::Node { label, children } => {
                let n = children.len();
                let [a, b]: [TreeRepr; 2] =
                    children.try_into().map_err(|_| TreeJsonError::Arity(n))?;
                Ok(SyntacticObject::node(
                    Self::from_repr(a)?,
                    Self::from_repr(b)?,
                    label,
                )?)
            }
        }
    }
}

impl Serialize for SyntacticObject {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.canonical_repr().0.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SyntacticObject {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = TreeRepr::deserialize(deserializer)?;
        SyntacticObject::from_repr(repr).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::LabelingRules;
    use super::*;

    #[test]
    fn swapped_children_serialize_identically() {
        let a = SyntacticObject::set(leaf("x", "N"), leaf("y", "V")).unwrap();
        let b = SyntacticObject::set(leaf("y", "V"), leaf("x", "N")).unwrap();
        assert_eq!(a.to_canonical_json(), b.to_canonical_json());
    }

    #[test]
    fn leaf_fields_are_present() {
        let v: serde_json::Value = serde_json::from_str(&leaf("x", "N").to_canonical_json()).unwrap();
        for key in ["id", "category", "features", "weight", "embedding"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }

    #[test]
    fn round_trip_labeled_tree() {
        let t = LabelingRules::new(["D", "N", "V"].map(Category::from))
            .label_tree(&the_dog_barked())
            .unwrap();
        let text = t.to_canonical_json();
        assert_eq!(SyntacticObject::from_json(&text).unwrap(), t);
        let via_serde: SyntacticObject = serde_json::from_str(&text).unwrap();
        assert_eq!(via_serde, t);
    }

    #[test]
    fn rejects_wrong_arity_and_bad_labels() {
        let l = leaf("x", "N").to_canonical_json();
        let one = format!(r#"{{"label":null,"children":[{l}]}}"#);
        assert!(matches!(SyntacticObject::from_json(&one), Err(TreeJsonError::Arity(1))));
        let m = leaf("y", "V").to_canonical_json();
        let bad = format!(r#"{{"label":"P","children":[{l},{m}]}}"#);
        assert!(SyntacticObject::from_json(&bad).is_err());
    }
}
