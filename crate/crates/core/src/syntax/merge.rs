use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{SyntacticObject, SyntaxError};

/// The set of syntactic objects currently available to MERGE.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Workspace {
    objects: BTreeSet<SyntacticObject>,
}

impl Workspace {
    /// Builds a workspace, rejecting repeated objects.
    pub fn new(objects: impl IntoIterator<Item = SyntacticObject>) -> Result<Self, SyntaxError> {
        let mut set = BTreeSet::new();
        for so in objects {
            if set.contains(&so) {
                return Err(SyntaxError::DuplicateObject(so.bracketed()));
            }
            set.insert(so);
        }
        Ok(Workspace { objects: set })
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn contains(&self, so: &SyntacticObject) -> bool {
        self.objects.contains(so)
    }

    pub fn iter(&self) -> impl Iterator<Item = &SyntacticObject> {
        self.objects.iter()
    }

    /// Adds an object, failing if it is already present.
    pub fn insert(&mut self, so: SyntacticObject) -> Result<(), SyntaxError> {
        if self.objects.contains(&so) {
            return Err(SyntaxError::DuplicateObject(so.bracketed()));
        }
        self.objects.insert(so);
        Ok(())
    }

    /// External MERGE: `(ws \ {p, q}) ∪ {{p, q}}`.
    pub fn merge(&self, p: &SyntacticObject, q: &SyntacticObject) -> Result<Workspace, SyntaxError> {
        if p == q {
            return Err(SyntaxError::SelfMerge);
        }
        for so in [p, q] {
            if !self.contains(so) {
                return Err(SyntaxError::NotInWorkspace(so.bracketed()));
            }
        }
        let mut objects = self.objects.clone();
        objects.remove(p);
        objects.remove(q);
        let set = SyntacticObject::set(p.clone(), q.clone())?;
        if !objects.insert(set.clone()) {
            return Err(SyntaxError::DuplicateObject(set.bracketed()));
        }
        Ok(Workspace { objects })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivationStep {
    pub pair: (SyntacticObject, SyntacticObject),
    pub result: Workspace,
}

/// A recorded sequence of MERGE applications.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Derivation {
    pub initial: Workspace,
    pub steps: Vec<DerivationStep>,
}

impl Derivation {
    pub fn new(initial: Workspace) -> Self {
        Derivation {
            initial,
            steps: Vec::new(),
        }
    }

    pub fn current(&self) -> &Workspace {
        self.steps.last().map_or(&self.initial, |s| &s.result)
    }

    /// Merges `p` and `q` in the current workspace and records the step.
    pub fn merge(
        &mut self,
        p: &SyntacticObject,
        q: &SyntacticObject,
    ) -> Result<&Workspace, SyntaxError> {
        let result = self.current().merge(p, q)?;
        self.steps.push(DerivationStep {
            pair: (p.clone(), q.clone()),
            result,
        });
        Ok(self.current())
    }

    /// Workspace before step `i` (`i == steps.len()` gives the final one).
    fn state_before(&self, i: usize) -> &Workspace {
        if i == 0 {
            &self.initial
        } else {
            &self.steps[i - 1].result
        }
    }

    /// True when replaying the recorded selections from every intermediate
    /// workspace reproduces the recorded suffix exactly.
    pub fn check_markov(&self) -> bool {
        (0..self.steps.len()).all(|start| {
            let mut ws = self.state_before(start).clone();
            self.steps[start..].iter().all(|step| {
                match ws.merge(&step.pair.0, &step.pair.1) {
                    Ok(next) if next == step.result => {
                        ws = next;
                        true
                    }
                    _ => false,
                }
            })
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::leaf;
    use super::*;

    fn ws(items: &[SyntacticObject]) -> Workspace {
        Workspace::new(items.iter().cloned()).unwrap()
    }

    #[test]
    fn merge_two_leaves_leaves_only_the_set() {
        let (p, q) = (leaf("p", "N"), leaf("q", "V"));
        let out = ws(&[p.clone(), q.clone()]).merge(&p, &q).unwrap();
        let expected = ws(&[SyntacticObject::set(p, q).unwrap()]);
        assert_eq!(out, expected);
    }

    #[test]
    fn merge_is_commutative() {
        let (p, q, r) = (leaf("p", "N"), leaf("q", "V"), leaf("r", "A"));
        let w = ws(&[p.clone(), q.clone(), r.clone()]);
        assert_eq!(w.merge(&p, &q).unwrap(), w.merge(&q, &p).unwrap());
    }

    #[test]
    fn merge_three_keeps_the_residue() {
        let (p, q, r) = (leaf("p", "N"), leaf("q", "V"), leaf("r", "A"));
        let out = ws(&[p.clone(), q.clone(), r.clone()]).merge(&p, &q).unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.contains(&r));
        assert!(out.contains(&SyntacticObject::set(p, q).unwrap()));
    }

    #[test]
    fn merge_errors() {
        let (p, q, r) = (leaf("p", "N"), leaf("q", "V"), leaf("r", "A"));
        let w = ws(&[p.clone(), q.clone()]);
        assert_eq!(w.merge(&p, &p), Err(SyntaxError::SelfMerge));
        assert!(matches!(w.merge(&p, &r), Err(SyntaxError::NotInWorkspace(_))));
    }

    #[test]
    fn duplicate_objects_rejected() {
        let p = leaf("p", "N");
        assert!(Workspace::new([p.clone(), p]).is_err());
    }

    #[test]
    fn empty_derivation_is_markov() {
        let d = Derivation::new(ws(&[leaf("p", "N")]));
        assert!(d.check_markov());
    }

    #[test]
    fn tampered_derivation_fails_replay() {
        let (p, q, r) = (leaf("p", "N"), leaf("q", "V"), leaf("r", "A"));
        let mut d = Derivation::new(ws(&[p.clone(), q.clone(), r.clone()]));
        d.merge(&p, &q).unwrap();
        let pq = SyntacticObject::set(p.clone(), q.clone()).unwrap();
        d.merge(&pq, &r).unwrap();
        assert!(d.check_markov());

        let mut bad = d.clone();
        bad.steps[0].result = ws(&[p, q, r]);
        assert!(!bad.check_markov());
    }
}
