use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::Category;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Categorial,
    Selectional,
    #[default]
    Other,
}

/// An atomic feature such as `v*`, `T_past` or `d`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Feature {
    pub name: String,
    #[serde(default)]
    pub kind: FeatureKind,
}

impl Feature {
    pub fn new(name: impl Into<String>, kind: FeatureKind) -> Self {
        Feature {
            name: name.into(),
            kind,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LexicalError {
    #[error("lexical item id is empty")]
    EmptyId,
    #[error("item {0}: feature name is empty")]
    EmptyFeatureName(String),
    #[error("item {id}: expected exactly one categorial feature, found {found}")]
    CategorialCount { id: String, found: usize },
    #[error("item {id}: categorial feature {feature} disagrees with category {category}")]
    CategoryMismatch {
        id: String,
        feature: String,
        category: String,
    },
    #[error("item {id}: weight {weight} outside [0, 1]")]
    WeightOutOfRange { id: String, weight: f64 },
    #[error("item {0}: embedding has non-finite entries")]
    NonFiniteEmbedding(String),
}

/// A lexical item: one categorial feature plus any number of others, a
/// feature embedding and a semantic weight in `[0, 1]`.
///
/// Two items are the same token only when every field matches, so repeated
/// words are told apart by id.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "ItemRepr", into = "ItemRepr")]
pub struct LexicalItem {
    id: String,
    category: Category,
    features: BTreeSet<Feature>,
    embedding: Vec<f64>,
    weight: f64,
}

#[derive(Serialize, Deserialize)]
pub(super) struct ItemRepr {
    pub id: String,
    pub category: Category,
    #[serde(default)]
    pub features: Vec<Feature>,
    pub weight: f64,
    pub embedding: Vec<f64>,
}

impl TryFrom<ItemRepr> for LexicalItem {
    type Error = LexicalError;

    fn try_from(r: ItemRepr) -> Result<Self, Self::Error> {
        LexicalItem::new(r.id, r.category, r.features, r.embedding, r.weight)
    }
}

impl From<LexicalItem> for ItemRepr {
    fn from(item: LexicalItem) -> Self {
        ItemRepr {
            id: item.id,
            category: item.category,
            features: item.features.into_iter().collect(),
            weight: item.weight,
            embedding: item.embedding,
        }
    }
}

impl LexicalItem {
    /// Builds an item. When `features` carries no categorial feature one is
    /// added from `category`; when it carries one it must name `category`.
    pub fn new(
        id: impl Into<String>,
        category: impl Into<Category>,
        features: impl IntoIterator<Item = Feature>,
        embedding: Vec<f64>,
        weight: f64,
    ) -> Result<Self, LexicalError> {
        let id = id.into();
        let category = category.into();
        if id.is_empty() {
            return Err(LexicalError::EmptyId);
        }
        let mut features: BTreeSet<Feature> = features.into_iter().collect();
        if features.iter().any(|f| f.name.is_empty()) {
            return Err(LexicalError::EmptyFeatureName(id));
        }
        let categorial: Vec<&Feature> = features
            .iter()
            .filter(|f| f.kind == FeatureKind::Categorial)
            .collect();
        match categorial.as_slice() {
            [] => {
                features.insert(Feature::new(category.as_str(), FeatureKind::Categorial));
            }
            [f] if f.name == category.as_str() => {}
            [f] => {
                return Err(LexicalError::CategoryMismatch {
                    id,
                    feature: f.name.clone(),
                    category: category.to_string(),
                })
            }
            more => {
                return Err(LexicalError::CategorialCount {
                    id,
                    found: more.len(),
                })
            }
        }
        if !(0.0..=1.0).contains(&weight) {
            return Err(LexicalError::WeightOutOfRange { id, weight });
        }
        if embedding.iter().any(|v| !v.is_finite()) {
            return Err(LexicalError::NonFiniteEmbedding(id));
        }
        Ok(LexicalItem {
            id,
            category,
            features,
            embedding,
            weight,
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn category(&self) -> &Category {
        &self.category
    }

    pub fn features(&self) -> impl Iterator<Item = &Feature> {
        self.features.iter()
    }

    pub fn embedding(&self) -> &[f64] {
        &self.embedding
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Copy of this item under a new id, for repeated tokens of one word.
    pub fn with_id(&self, id: impl Into<String>) -> Result<Self, LexicalError> {
        let id = id.into();
        if id.is_empty() {
            return Err(LexicalError::EmptyId);
        }
        Ok(LexicalItem {
            id,
            ..self.clone()
        })
    }

    /// Copy of this item recategorized, swapping its categorial feature.
    pub fn with_category(&self, category: impl Into<Category>) -> Self {
        let category = category.into();
        let mut features: BTreeSet<Feature> = self
            .features
            .iter()
            .filter(|f| f.kind != FeatureKind::Categorial)
            .cloned()
            .collect();
        features.insert(Feature::new(category.as_str(), FeatureKind::Categorial));
        LexicalItem {
            category,
            features,
            ..self.clone()
        }
    }
}

impl Ord for LexicalItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.id
            .cmp(&other.id)
            .then_with(|| self.category.cmp(&other.category))
            .then_with(|| self.features.cmp(&other.features))
            .then_with(|| self.weight.total_cmp(&other.weight))
            .then_with(|| {
                let a = &self.embedding;
                let b = &other.embedding;
                a.iter()
                    .zip(b)
                    .map(|(x, y)| x.total_cmp(y))
                    .find(|o| o.is_ne())
                    .unwrap_or_else(|| a.len().cmp(&b.len()))
            })
    }
}

impl PartialOrd for LexicalItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl PartialEq for LexicalItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for LexicalItem {}

impl Hash for LexicalItem {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.id.hash(state);
        self.category.hash(state);
        self.features.hash(state);
        self.weight.to_bits().hash(state);
        for v in &self.embedding {
            v.to_bits().hash(state);
        }
    }
}
