//! Seeded generators for lexical items, derivations and trees.

use rand::seq::IndexedRandom;
use rand::Rng;

use super::{Category, Derivation, LabelingRules, LexicalItem, SyntacticObject, Workspace};

/// `count` items with ids `w0..`, categories drawn from `categories`,
/// embeddings uniform on `[-1, 1]^dim` and weights uniform on `[0.05, 1]`.
pub fn random_items<R: Rng + ?Sized>(
    rng: &mut R,
    count: usize,
    categories: &[Category],
    dim: usize,
) -> Vec<LexicalItem> {
    (0..count)
        .map(|i| {
            let cat = categories.choose(rng).expect("categories non-empty").clone();
            let embedding = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let weight = rng.random_range(0.05..=1.0);
            LexicalItem::new(format!("w{i}"), cat, [], embedding, weight)
                .expect("generated item is valid")
        })
        .collect()
}

/// Starts from one leaf per item and applies up to `steps` merges of
/// uniformly chosen distinct pairs (fewer if the workspace collapses first).
pub fn random_derivation<R: Rng + ?Sized>(
    rng: &mut R,
    items: Vec<LexicalItem>,
    steps: usize,
) -> Derivation {
    let ws = Workspace::new(items.into_iter().map(SyntacticObject::leaf))
        .expect("items have distinct ids");
    let mut d = Derivation::new(ws);
    for _ in 0..steps {
        let objects: Vec<SyntacticObject> = d.current().iter().cloned().collect();
        if objects.len() < 2 {
            break;
        }
        let i = rng.random_range(0..objects.len());
        let mut j = rng.random_range(0..objects.len() - 1);
        if j >= i {
            j += 1;
        }
        d.merge(&objects[i], &objects[j]).expect("members merge");
    }
    d
}

/// A single tree over all `items`, built by random merges.
pub fn random_tree<R: Rng + ?Sized>(rng: &mut R, items: Vec<LexicalItem>) -> SyntacticObject {
    let n = items.len();
    let d = random_derivation(rng, items, n.saturating_sub(1));
    let root = d.current().iter().next().expect("one object remains").clone();
    root
}

/// A labeled random tree with depth at most `max_depth`, retrying until the
/// shape fits. Items must be labelable under `rules`.
pub fn random_labeled_tree<R: Rng + ?Sized>(
    rng: &mut R,
    items: &[LexicalItem],
    max_depth: usize,
    rules: &LabelingRules,
) -> Option<SyntacticObject> {
    let leaves_fit = items.len() <= 1usize.checked_shl(max_depth as u32).unwrap_or(usize::MAX);
    if items.is_empty() || !leaves_fit {
        return None;
    }
    loop {
        let tree = random_tree(rng, items.to_vec());
        if tree.depth() <= max_depth {
            return rules.label_tree(&tree).ok();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cats() -> Vec<Category> {
        ["N", "V", "A", "P"].map(Category::from).to_vec()
    }

    #[test]
    fn derivation_collapses_to_one_tree() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let items = random_items(&mut rng, 6, &cats(), 3);
        let d = random_derivation(&mut rng, items, 10);
        assert_eq!(d.steps.len(), 5);
        assert_eq!(d.current().len(), 1);
        assert!(d.check_markov());
    }

    #[test]
    fn labeled_tree_respects_depth_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let items = random_items(&mut rng, 7, &cats(), 2);
        let t = random_labeled_tree(&mut rng, &items, 3, &LabelingRules::default()).unwrap();
        assert!(t.depth() <= 3);
        assert_eq!(t.leaf_count(), 7);
        assert!(random_labeled_tree(&mut rng, &items, 2, &LabelingRules::default()).is_none());
    }
}
