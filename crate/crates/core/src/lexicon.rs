//! Lexical feature vectors: linear compression, recurrent reduction,
//! recursive composition of child embeddings, and weight normalization.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::syntax::{Category, Feature, LexicalError, LexicalItem};

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("projection must reduce dimension (m = {m}, n = {n})")]
    NotReducing { m: usize, n: usize },
    #[error("matrix has non-finite entries")]
    NonFinite,
    #[error("unknown lexical item {0}")]
    UnknownItem(String),
    #[error("duplicate lexical item {0}")]
    DuplicateId(String),
    #[error("all weights are zero")]
    DegenerateWeights,
    #[error(transparent)]
    Item(#[from] LexicalError),
    #[error("lexicon file: {0}")]
    Io(#[from] std::io::Error),
    #[error("lexicon file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Items keyed by id, all sharing one embedding dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Lexicon {
    dim: usize,
    items: BTreeMap<String, LexicalItem>,
}

#[derive(Serialize, Deserialize)]
struct EntryRepr {
    category: Category,
    #[serde(default)]
    features: Vec<Feature>,
    weight: f64,
    embedding: Vec<f64>,
}

impl Lexicon {
    pub fn new(dim: usize, items: impl IntoIterator<Item = LexicalItem>) -> Result<Self, LexiconError> {
        let mut map = BTreeMap::new();
        for item in items {
            if item.embedding().len() != dim {
                return Err(LexiconError::Dimension {
                    expected: dim,
                    got: item.embedding().len(),
                });
            }
            let id = item.id().to_owned();
            if map.insert(id.clone(), item).is_some() {
                return Err(LexiconError::DuplicateId(id));
            }
        }
        Ok(Lexicon { dim, items: map })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, id: &str) -> Option<&LexicalItem> {
        self.items.get(id)
    }

    pub fn lookup(&self, id: &str) -> Result<&LexicalItem, LexiconError> {
        self.get(id).ok_or_else(|| LexiconError::UnknownItem(id.to_owned()))
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &LexicalItem> {
        self.items.values()
    }

    /// Parses the file form: a JSON object mapping id to
    /// `{category, features, weight, embedding}`. The dimension is taken from
    /// the first entry.
    pub fn from_json(text: &str) -> Result<Self, LexiconError> {
        let raw: BTreeMap<String, EntryRepr> = serde_json::from_str(text)?;
        let dim = raw.values().next().map_or(0, |e| e.embedding.len());
        let items = raw
            .into_iter()
            .map(|(id, e)| LexicalItem::new(id, e.category, e.features, e.embedding, e.weight))
            .collect::<Result<Vec<_>, _>>()?;
        Lexicon::new(dim, items)
    }

    pub fn to_json(&self) -> String {
        let raw: BTreeMap<&str, EntryRepr> = self
            .items
            .iter()
            .map(|(id, item)| {
                let features = item.features().cloned().collect();
                let entry = EntryRepr {
                    category: item.category().clone(),
                    features,
                    weight: item.weight(),
                    embedding: item.embedding().to_vec(),
                };
                (id.as_str(), entry)
            })
            .collect();
        serde_json::to_string_pretty(&raw).expect("lexicon serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        Self::from_json(&fs::read_to_string(path)?)
    }

    /// Raw weights of `ids` rescaled to sum to one.
    pub fn normalize_weights<S: AsRef<str>>(&self, ids: &[S]) -> Result<Vec<f64>, LexiconError> {
        let raw = ids
            .iter()
            .map(|id| self.lookup(id.as_ref()).map(|i| i.weight()))
            .collect::<Result<Vec<_>, _>>()?;
        normalize(&raw)
    }
}

/// Proportional rescaling of nonnegative weights to unit sum.
pub fn normalize(weights: &[f64]) -> Result<Vec<f64>, LexiconError> {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(LexiconError::DegenerateWeights);
    }
    Ok(weights.iter().map(|w| w / total).collect())
}

/// Linear map `X ↦ WX` from `R^n` to `R^m` with `m < n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    w: DMatrix<f64>,
}

impl Projection {
    pub fn new(w: DMatrix<f64>) -> Result<Self, LexiconError> {
        if w.nrows() >= w.ncols() {
            return Err(LexiconError::NotReducing {
                m: w.nrows(),
                n: w.ncols(),
            });
        }
        if w.iter().any(|v| !v.is_finite()) {
            return Err(LexiconError::NonFinite);
        }
        Ok(Projection { w })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, LexiconError> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if let Some(r) = rows.iter().find(|r| r.len() != n) {
            return Err(LexiconError::Dimension {
                expected: n,
                got: r.len(),
            });
        }
        Self::new(DMatrix::from_fn(m, n, |i, j| rows[i][j]))
    }

    pub fn input_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn output_dim(&self) -> usize {
        self.w.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn compress(&self, x: &[f64]) -> Result<DVector<f64>, LexiconError> {
        check_len(self.input_dim(), x.len())?;
        Ok(&self.w * DVector::from_column_slice(x))
    }
}

fn check_len(expected: usize, got: usize) -> Result<(), LexiconError> {
    if expected == got {
        Ok(())
    } else {
        Err(LexiconError::Dimension { expected, got })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
    Logistic,
    Relu,
}

impl Activation {
    pub fn apply(self, v: f64) -> f64 {
        match self {
            Activation::Tanh => v.tanh(),
            Activation::Identity => v,
            Activation::Logistic => 1.0 / (1.0 + (-v).exp()),
            Activation::Relu => v.max(0.0),
        }
    }
}

/// `h_t = σ(W_r h_{t-1} + W_x X_t + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrentReducer {
    w_r: DMatrix<f64>,
    w_x: DMatrix<f64>,
    b: DVector<f64>,
    activation: Activation,
}

impl RecurrentReducer {
    pub fn new(
        w_r: DMatrix<f64>,
        w_x: DMatrix<f64>,
        b: DVector<f64>,
        activation: Activation,
    ) -> Result<Self, LexiconError> {
        let m = b.len();
        check_len(m, w_r.nrows())?;
        check_len(m, w_r.ncols())?;
        check_len(m, w_x.nrows())?;
        if w_r.iter().chain(w_x.iter()).chain(b.iter()).any(|v| !v.is_finite()) {
            return Err(LexiconError::NonFinite);
        }
        Ok(RecurrentReducer {
            w_r,
            w_x,
            b,
            activation,
        })
    }

    pub fn state_dim(&self) -> usize {
        self.b.len()
    }

    pub fn input_dim(&self) -> usize {
        self.w_x.ncols()
    }

    pub fn activation(&self) -> Activation {
        self.activation
    }

    fn squash(&self, v: DVector<f64>) -> DVector<f64> {
        v.map(|x| self.activation.apply(x))
    }

    /// One recurrence step.
    pub fn step(&self, h: &DVector<f64>, x: &[f64]) -> Result<DVector<f64>, LexiconError> {
        check_len(self.state_dim(), h.len())?;
        check_len(self.input_dim(), x.len())?;
        let pre = &self.w_r * h + &self.w_x * DVector::from_column_slice(x) + &self.b;
        Ok(self.squash(pre))
    }

    /// Folds the recurrence over `xs` from `h0`.
    pub fn reduce_sequence<X: AsRef<[f64]>>(
        &self,
        xs: &[X],
        h0: &DVector<f64>,
    ) -> Result<DVector<f64>, LexiconError> {
        check_len(self.state_dim(), h0.len())?;
        xs.iter().try_fold(h0.clone(), |h, x| self.step(&h, x.as_ref()))
    }

    /// Parent embedding `σ(W_r (h_left + h_right)/2 + b)`, symmetric in the
    /// children.
    pub fn compose(
        &self,
        left: &DVector<f64>,
        right: &DVector<f64>,
    ) -> Result<DVector<f64>, LexiconError> {
        check_len(self.state_dim(), left.len())?;
        check_len(self.state_dim(), right.len())?;
        let mean = (left + right) * 0.5;
        Ok(self.squash(&self.w_r * mean + &self.b))
    }
}
