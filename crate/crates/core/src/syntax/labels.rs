//! Label sequences, label judgments and the label order.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;

use super::term::{Annot, Label, Node};

/// A sequence of distinct labels. Index 0 is the head, which stands for the
/// innermost enclosing generator.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LabelSeq(Vec<Label>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("label `{0}` occurs twice in the sequence")]
pub struct DuplicateLabel(pub String);

impl LabelSeq {
    pub fn empty() -> Self {
        LabelSeq(Vec::new())
    }

    /// Build from labels listed head first.
    pub fn new(labels: Vec<Label>) -> Result<Self, DuplicateLabel> {
        let mut seen = HashSet::new();
        for l in &labels {
            if !seen.insert(l.id()) {
                return Err(DuplicateLabel(l.name().to_owned()));
            }
        }
        Ok(LabelSeq(labels))
    }

    /// Free labels named in a comma separated list, head first.
    pub fn from_names(names: &str) -> Result<Self, DuplicateLabel> {
        Self::new(
            names
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .map(Label::free)
                .collect(),
        )
    }

    /// `a·θ`.
    pub fn cons(&self, a: Label) -> Self {
        let mut v = Vec::with_capacity(self.0.len() + 1);
        v.push(a);
        v.extend(self.0.iter().cloned());
        LabelSeq(v)
    }

    /// `self·other`. Labels of `other` already present in `self` are dropped.
    pub fn concat(&self, other: &LabelSeq) -> Self {
        let mut v = self.0.clone();
        for l in &other.0 {
            if !v.contains(l) {
                v.push(l.clone());
            }
        }
        LabelSeq(v)
    }

    pub fn labels(&self) -> &[Label] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: &Label) -> bool {
        self.0.contains(a)
    }

    pub fn index_of(&self, a: &Label) -> Option<usize> {
        self.0.iter().position(|l| l == a)
    }

    /// `a <θ b` iff `a` occurs later in the sequence than `b`.
    pub fn less(&self, a: &Label, b: &Label) -> bool {
        matches!((self.index_of(a), self.index_of(b)), (Some(i), Some(j)) if i > j)
    }
}

impl fmt::Display for LabelSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let names: Vec<&str> = self.0.iter().map(Label::name).collect();
        f.write_str(&names.join("·"))
    }
}

/// Whether `⊢θ M` is derivable: every choice label is bound by an enclosing
/// generator or listed in `θ`.
pub fn label_judgment<A: Annot>(theta: &LabelSeq, t: &Node<A>) -> bool {
    fn go<A: Annot>(t: &Node<A>, scope: &mut Vec<u64>) -> bool {
        match t {
            Node::Var(_) => true,
            Node::Abs(_, b) => go(b, scope),
            Node::Gen(a, b) => {
                scope.push(a.id());
                let r = go(b, scope);
                scope.pop();
                r
            }
            Node::App(f, x, _) => go(f, scope) && go(x, scope),
            Node::Choice(a, l, r) => scope.contains(&a.id()) && go(l, scope) && go(r, scope),
        }
    }
    let mut scope: Vec<u64> = theta.labels().iter().rev().map(Label::id).collect();
    go(t, &mut scope)
}

/// No generator rebinds a label inside its own scope.
pub fn is_well_labeled<A: Annot>(t: &Node<A>) -> bool {
    fn go<A: Annot>(t: &Node<A>, scope: &mut HashSet<u64>) -> bool {
        match t {
            Node::Var(_) => true,
            Node::Abs(_, b) => go(b, scope),
            Node::Gen(a, b) => {
                if !scope.insert(a.id()) {
                    return false;
                }
                let r = go(b, scope);
                scope.remove(&a.id());
                r
            }
            Node::App(f, x, _) | Node::Choice(_, f, x) => go(f, scope) && go(x, scope),
        }
    }
    go(t, &mut HashSet::new())
}

/// The order on labels induced by generator nesting: `a < b` iff `!b` occurs
/// in the scope of `!a`. Labels of an accompanying sequence sit below every
/// label bound in the term and are ordered among themselves by the sequence.
#[derive(Clone, Debug, Default)]
pub struct LabelOrder {
    parent: HashMap<u64, Option<u64>>,
    labels: HashMap<u64, Label>,
    theta: LabelSeq,
}

impl LabelOrder {
    pub fn of<A: Annot>(t: &Node<A>) -> Self {
        Self::with_theta(t, &LabelSeq::empty())
    }

    pub fn with_theta<A: Annot>(t: &Node<A>, theta: &LabelSeq) -> Self {
        let mut order = LabelOrder { theta: theta.clone(), ..Default::default() };
        let mut stack = Vec::new();
        order.collect(t, &mut stack);
        order
    }

    fn collect<A: Annot>(&mut self, t: &Node<A>, stack: &mut Vec<u64>) {
        match t {
            Node::Var(_) => {}
            Node::Abs(_, b) => self.collect(b, stack),
            Node::Gen(a, b) => {
                self.parent.insert(a.id(), stack.last().copied());
                self.labels.insert(a.id(), a.clone());
                stack.push(a.id());
                self.collect(b, stack);
                stack.pop();
            }
            Node::App(f, x, _) | Node::Choice(_, f, x) => {
                self.collect(f, stack);
                self.collect(x, stack);
            }
        }
    }

    fn bound(&self, a: &Label) -> bool {
        self.parent.contains_key(&a.id())
    }

    pub fn less(&self, a: &Label, b: &Label) -> bool {
        match (self.bound(a), self.bound(b)) {
            (true, true) => {
                let mut cur = self.parent[&b.id()];
                while let Some(p) = cur {
                    if p == a.id() {
                        return true;
                    }
                    cur = self.parent[&p];
                }
                false
            }
            (false, true) => self.theta.contains(a),
            (true, false) => false,
            (false, false) => self.theta.less(a, b),
        }
    }

    /// `Some(Equal)` for the same label, `None` for incomparable labels.
    pub fn compare(&self, a: &Label, b: &Label) -> Option<Ordering> {
        if a == b {
            Some(Ordering::Equal)
        } else if self.less(a, b) {
            Some(Ordering::Less)
        } else if self.less(b, a) {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// The innermost generator enclosing `!a`, if any.
    pub fn immediate_predecessor(&self, a: &Label) -> Option<Label> {
        self.parent
            .get(&a.id())
            .copied()
            .flatten()
            .map(|p| self.labels[&p].clone())
    }

    /// Labels bound in the term.
    pub fn bound_labels(&self) -> Vec<Label> {
        let mut v: Vec<Label> = self.labels.values().cloned().collect();
        v.sort();
        v
    }

    /// All pairs `(a, b)` with `a < b` among bound labels and sequence labels.
    pub fn pairs(&self) -> Vec<(Label, Label)> {
        let mut all = self.bound_labels();
        all.extend(self.theta.labels().iter().cloned());
        let mut out = Vec::new();
        for a in &all {
            for b in &all {
                if self.less(a, b) {
                    out.push((a.clone(), b.clone()));
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse, parse_open};

    fn gen_labels(t: &crate::syntax::term::Term) -> Vec<Label> {
        t.binders().1
    }

    #[test]
    fn nested_generators_are_ordered() {
        let t = parse(r"!a.!b.(x +[a] (y +[b] z))").unwrap();
        let ls = gen_labels(&t);
        let o = LabelOrder::of(&t);
        assert!(o.less(&ls[0], &ls[1]));
        assert!(!o.less(&ls[1], &ls[0]));
        assert_eq!(o.immediate_predecessor(&ls[1]), Some(ls[0].clone()));
        assert_eq!(o.pairs().len(), 1);
    }

    #[test]
    fn disjoint_scopes_are_incomparable() {
        let t = parse(r"(!a.x) ((!b.y) z)").unwrap();
        let ls = gen_labels(&t);
        let o = LabelOrder::of(&t);
        assert_eq!(o.compare(&ls[0], &ls[1]), None);
        assert!(LabelOrder::of(&parse("!a.x").unwrap()).pairs().is_empty());
    }

    #[test]
    fn sequence_labels_sit_below_bound_ones() {
        let t = parse_open(r"!b.((x +[a] y) +[b] z)").unwrap();
        let a = Label::free("a");
        let b = gen_labels(&t)[0].clone();
        let o = LabelOrder::with_theta(&t, &LabelSeq::new(vec![a.clone()]).unwrap());
        assert!(o.less(&a, &b));
        let theta = LabelSeq::from_names("b,a").unwrap();
        assert!(theta.less(&Label::free("a"), &Label::free("b")));
    }

    #[test]
    fn judgments() {
        let closed = parse(r"!a.(x +[a] y)").unwrap();
        let open = parse_open("x +[a] y").unwrap();
        assert!(label_judgment(&LabelSeq::empty(), &closed));
        assert!(!label_judgment(&LabelSeq::empty(), &open));
        assert!(label_judgment(&LabelSeq::from_names("a").unwrap(), &open));
    }

    #[test]
    fn sequences_reject_duplicates() {
        assert!(LabelSeq::from_names("a,b,a").is_err());
        let s = LabelSeq::from_names("a").unwrap().cons(Label::free("b"));
        assert_eq!(s.to_string(), "b·a");
    }

    #[test]
    fn rebinding_in_scope_is_not_well_labeled() {
        let a = Label::fresh("a");
        let x = crate::syntax::term::Term::var(crate::syntax::term::Var::free("x"));
        let t = crate::syntax::term::Term::gen(a.clone(), crate::syntax::term::Term::gen(a, x));
        assert!(!is_well_labeled(&t));
        assert!(is_well_labeled(&parse(r"!a.!a.x").unwrap()));
    }
}
