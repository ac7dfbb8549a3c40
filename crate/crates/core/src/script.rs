//! Line-oriented derivation scripts.
//!
//! ```text
//! # comment
//! select <id> [as <alias>]
//! merge <ref> <ref>
//! ```
//!
//! A ref is a selected id (or its alias) or `@k`, the result of the k-th
//! merge counting from 0. Selections are placed in the workspace first and
//! merges are replayed after them in script order.

use thiserror::Error;

use crate::lexicon::Lexicon;
use crate::syntax::{
    Derivation, LabelingRules, LexicalError, LexicalItem, SyntacticObject, SyntaxError, Workspace,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScriptError {
    #[error("empty derivation")]
    Empty,
    #[error("script line {line}: expected `select <id> [as <alias>]` or `merge <ref> <ref>`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("script line {line}: unknown lexical item {id}")]
    UnknownItem { line: usize, id: String },
    #[error("script line {line}: {source}")]
    Item { line: usize, source: LexicalError },
    #[error("script line {line}: {source}")]
    Merge { line: usize, source: SyntaxError },
    #[error("script line {line}: {name} selected twice (use `as <alias>`)")]
    Duplicate { line: usize, name: String },
    #[error("script line {line}: unknown ref {name}")]
    UnknownRef { line: usize, name: String },
    #[error("script line {line}: @{index} refers to a merge not yet made")]
    FutureMerge { line: usize, index: usize },
    #[error("script line {line}: bad merge ref {name}")]
    BadRef { line: usize, name: String },
    #[error("derivation ends with {0} objects in the workspace, expected one tree")]
    NotATree(usize),
    #[error(transparent)]
    Label(SyntaxError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Op {
    Select { id: String, alias: Option<String> },
    Merge { left: String, right: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub number: usize,
    pub op: Op,
}

pub fn parse(text: &str) -> Result<Vec<Line>, ScriptError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let op = match words.as_slice() {
            ["select", id] => Op::Select {
                id: id.to_string(),
                alias: None,
            },
            ["select", id, "as", alias] => Op::Select {
                id: id.to_string(),
                alias: Some(alias.to_string()),
            },
            ["merge", l, r] => Op::Merge {
                left: l.to_string(),
                right: r.to_string(),
            },
            _ => {
                return Err(ScriptError::Syntax {
                    line: number,
                    text: line.to_string(),
                })
            }
        };
        out.push(Line { number, op });
    }
    Ok(out)
}

/// A replayed script.
#[derive(Debug, Clone)]
pub struct Derived {
    pub tree: SyntacticObject,
    /// Selected items in script order (aliases applied).
    pub items: Vec<LexicalItem>,
    pub derivation: Derivation,
    pub log: Vec<String>,
    pub lines: Vec<Line>,
}

/// Replays `script` against `lex`, labeling every merge as it happens.
/// The workspace must end with exactly one object.
pub fn derive(script: &str, lex: &Lexicon, rules: &LabelingRules) -> Result<Derived, ScriptError> {
    let lines = parse(script)?;
    if lines.is_empty() {
        return Err(ScriptError::Empty);
    }
    let mut items: Vec<LexicalItem> = Vec::new();
    let mut named: Vec<(String, SyntacticObject)> = Vec::new();
    let mut merged: Vec<SyntacticObject> = Vec::new();
    let mut log = Vec::new();
    for line in &lines {
        if let Op::Select { id, alias } = &line.op {
            let item = lex.get(id).ok_or_else(|| ScriptError::UnknownItem {
                line: line.number,
                id: id.clone(),
            })?;
            let item = match alias {
                Some(a) => item
                    .with_id(a.clone())
                    .map_err(|source| ScriptError::Item {
                        line: line.number,
                        source,
                    })?,
                None => item.clone(),
            };
            let name = item.id().to_string();
            if named.iter().any(|(n, _)| *n == name) {
                return Err(ScriptError::Duplicate {
                    line: line.number,
                    name,
                });
            }
            log.push(format!("select {name} : {}", item.category()));
            named.push((name, SyntacticObject::leaf(item.clone())));
            items.push(item);
        }
    }
    let initial = Workspace::new(named.iter().map(|(_, so)| so.clone()))
        .map_err(|source| ScriptError::Merge { line: 0, source })?;
    let mut derivation = Derivation::new(initial);
    let resolve = |r: &str,
                   line: usize,
                   merged: &[SyntacticObject]|
     -> Result<SyntacticObject, ScriptError> {
        if let Some(k) = r.strip_prefix('@') {
            let index: usize = k.parse().map_err(|_| ScriptError::BadRef {
                line,
                name: r.to_string(),
            })?;
            merged
                .get(index)
                .cloned()
                .ok_or(ScriptError::FutureMerge { line, index })
        } else {
            named
                .iter()
                .find(|(n, _)| n == r)
                .map(|(_, so)| so.clone())
                .ok_or_else(|| ScriptError::UnknownRef {
                    line,
                    name: r.to_string(),
                })
        }
    };
    for line in &lines {
        if let Op::Merge { left, right } = &line.op {
            let err = |source| ScriptError::Merge {
                line: line.number,
                source,
            };
            let p = resolve(left, line.number, &merged)?;
            let q = resolve(right, line.number, &merged)?;
            derivation.merge(&p, &q).map_err(err)?;
            let set = SyntacticObject::set(p, q).map_err(err)?;
            let label = rules.label(&set).map_err(err)?;
            log.push(format!(
                "merge @{} = {{{left}, {right}}} : {label}  workspace {}",
                merged.len(),
                derivation.current().len()
            ));
            merged.push(set);
        }
    }
    let ws = derivation.current();
    if ws.len() != 1 {
        return Err(ScriptError::NotATree(ws.len()));
    }
    let root = ws.iter().next().expect("one object").clone();
    let tree = rules.label_tree(&root).map_err(ScriptError::Label)?;
    Ok(Derived {
        tree,
        items,
        derivation,
        log,
        lines,
    })
}
