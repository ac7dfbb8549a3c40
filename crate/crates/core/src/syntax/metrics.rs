use std::collections::HashMap;

use super::{LexicalItem, SyntacticObject, SyntaxError};

impl SyntacticObject {
    /// Leaf 0, node `1 + max(child depths)`.
    pub fn depth(&self) -> usize {
        match self {
            SyntacticObject::Leaf(_) => 0,
            SyntacticObject::Node(n) => {
                let [a, b] = n.children();
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Leaves plus internal nodes.
    pub fn node_count(&self) -> usize {
        match self {
            SyntacticObject::Leaf(_) => 1,
            SyntacticObject::Node(n) => {
                let [a, b] = n.children();
                1 + a.node_count() + b.node_count()
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            SyntacticObject::Leaf(_) => 1,
            SyntacticObject::Node(n) => {
                let [a, b] = n.children();
                a.leaf_count() + b.leaf_count()
            }
        }
    }

    /// Leaves in canonical (storage) order.
    pub fn leaves(&self) -> Vec<&LexicalItem> {
        let mut out = Vec::with_capacity(self.leaf_count());
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves<'a>(&'a self, out: &mut Vec<&'a LexicalItem>) {
        match self {
            SyntacticObject::Leaf(item) => out.push(item),
            SyntacticObject::Node(n) => {
                for c in n.children() {
                    c.collect_leaves(out);
                }
            }
        }
    }

    /// Children of a labeled node with the head first.
    ///
    /// The head is the child projecting the node's label; a lexical head
    /// wins over a phrasal one, and canonical order breaks remaining ties.
    pub fn head_first(&self) -> Result<Option<[&SyntacticObject; 2]>, SyntaxError> {
        let n = match self {
            SyntacticObject::Leaf(_) => return Ok(None),
            SyntacticObject::Node(n) => n,
        };
        let label = n.label().ok_or(SyntaxError::MissingLabel)?;
        let [a, b] = n.children();
        let projects = |c: &SyntacticObject| c.category() == Some(label);
        let order = match (projects(a), projects(b)) {
            (true, true) if b.is_leaf() && !a.is_leaf() => [b, a],
            (true, _) => [a, b],
            (false, true) => [b, a],
            (false, false) => {
                return Err(SyntaxError::NotEndocentric {
                    label: label.clone(),
                })
            }
        };
        Ok(Some(order))
    }

    /// Head-initial linear order of the leaves. Every node must be labeled.
    pub fn linearize(&self) -> Result<Vec<&LexicalItem>, SyntaxError> {
        let mut out = Vec::with_capacity(self.leaf_count());
        self.linearize_into(&mut out)?;
        Ok(out)
    }

    fn linearize_into<'a>(&'a self, out: &mut Vec<&'a LexicalItem>) -> Result<(), SyntaxError> {
        match self.head_first()? {
            None => out.push(self.as_leaf().unwrap()),
            Some([head, rest]) => {
                head.linearize_into(out)?;
                rest.linearize_into(out)?;
            }
        }
        Ok(())
    }

    /// For each position of `order`, how many nodes of the tree have their
    /// rightmost leaf there. The counts sum to [`node_count`](Self::node_count).
    ///
    /// `order` must list every leaf exactly once (matched by id) with every
    /// constituent contiguous.
    pub fn node_closures(&self, order: &[&LexicalItem]) -> Result<Vec<usize>, SyntaxError> {
        let mut position = HashMap::with_capacity(order.len());
        for (i, item) in order.iter().enumerate() {
            if position.insert(item.id(), i).is_some() {
                return Err(SyntaxError::OrderMismatch(format!(
                    "leaf {} appears twice",
                    item.id()
                )));
            }
        }
        if order.len() != self.leaf_count() {
            return Err(SyntaxError::OrderMismatch(format!(
                "order has {} leaves, tree has {}",
                order.len(),
                self.leaf_count()
            )));
        }
        let mut counts = vec![0; order.len()];
        self.close(&position, &mut counts)?;
        Ok(counts)
    }

    /// Returns (first, last) positions of the span and records closures.
    fn close(
        &self,
        position: &HashMap<&str, usize>,
        counts: &mut [usize],
    ) -> Result<(usize, usize), SyntaxError> {
        let span = match self {
            SyntacticObject::Leaf(item) => {
                let p = *position.get(item.id()).ok_or_else(|| {
                    SyntaxError::OrderMismatch(format!("leaf {} missing from order", item.id()))
                })?;
                (p, p)
            }
            SyntacticObject::Node(n) => {
                let [a, b] = n.children();
                let (a0, a1) = a.close(position, counts)?;
                let (b0, b1) = b.close(position, counts)?;
                let (lo, hi) = (a0.min(b0), a1.max(b1));
                // contiguous iff the two child spans abut
                if a1 + 1 != b0 && b1 + 1 != a0 {
                    return Err(SyntaxError::OrderMismatch(format!(
                        "constituent {} is discontinuous",
                        self.bracketed()
                    )));
                }
                (lo, hi)
            }
        };
        counts[span.1] += 1;
        Ok(span)
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::super::LabelingRules;
    use super::*;

    fn ids<'a>(items: &[&'a LexicalItem]) -> Vec<&'a str> {
        items.iter().map(|i| i.id()).collect()
    }

    #[test]
    fn depth_examples() {
        assert_eq!(leaf("a", "N").depth(), 0);
        assert_eq!(SyntacticObject::set(leaf("a", "N"), leaf("b", "V")).unwrap().depth(), 1);
        assert_eq!(the_dog_barked().depth(), 2);
        assert_eq!(the_dog_barked().node_count(), 5);
        assert_eq!(the_dog_barked().leaf_count(), 3);
    }

    #[test]
    fn closures_for_the_dog_barked() {
        let tree = the_dog_barked();
        let the = item("the", "D");
        let dog = item("dog", "N");
        let barked = item("barked", "V");
        let counts = tree.node_closures(&[&the, &dog, &barked]).unwrap();
        assert_eq!(counts, vec![1, 2, 2]);
        assert_eq!(counts.iter().sum::<usize>(), tree.node_count());
    }

    #[test]
    fn closures_of_a_leaf() {
        let a = item("a", "N");
        assert_eq!(SyntacticObject::leaf(a.clone()).node_closures(&[&a]).unwrap(), vec![1]);
    }

    #[test]
    fn closures_reject_non_linearizations() {
        let tree = the_dog_barked();
        let the = item("the", "D");
        let dog = item("dog", "N");
        let barked = item("barked", "V");
        // splits {the, dog}
        assert!(tree.node_closures(&[&the, &barked, &dog]).is_err());
        assert!(tree.node_closures(&[&the, &dog]).is_err());
        assert!(tree.node_closures(&[&the, &the, &dog]).is_err());
        // the mirrored order is a valid linearization of an unordered tree
        assert_eq!(tree.node_closures(&[&barked, &dog, &the]).unwrap(), vec![1, 1, 3]);
    }

    #[test]
    fn linearize_is_head_initial() {
        let rules = LabelingRules::default();
        let np = SyntacticObject::set(leaf("big", "A"), leaf("dog", "N")).unwrap();
        let vp = rules
            .label_tree(&SyntacticObject::set(np, leaf("saw", "V")).unwrap())
            .unwrap();
        assert_eq!(ids(&vp.linearize().unwrap()), ["saw", "dog", "big"]);
    }

    #[test]
    fn linearize_needs_labels() {
        assert_eq!(
            the_dog_barked().linearize().unwrap_err(),
            SyntaxError::MissingLabel
        );
        let x = item("x", "N");
        assert_eq!(SyntacticObject::leaf(x.clone()).linearize().unwrap(), vec![&x]);
    }
}
