//! Alpha-equivalence and canonical keys.

use std::fmt::Write;

use super::term::{Annot, Node, Term};

fn lookup(stack: &[u64], id: u64) -> Option<usize> {
    stack.iter().rposition(|&b| b == id)
}

struct Pairing {
    lv: Vec<u64>,
    rv: Vec<u64>,
    ll: Vec<u64>,
    rl: Vec<u64>,
}

impl Pairing {
    fn vars(&self, l: u64, r: u64) -> bool {
        match (lookup(&self.lv, l), lookup(&self.rv, r)) {
            (None, None) => l == r,
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }

    fn labels(&self, l: u64, r: u64) -> bool {
        match (lookup(&self.ll, l), lookup(&self.rl, r)) {
            (None, None) => l == r,
            (Some(i), Some(j)) => i == j,
            _ => false,
        }
    }
}

/// Alpha-equivalence up to renaming of both kinds of binder, with a custom
/// comparison for application annotations.
pub fn alpha_eq_by<A: Annot, B: Annot>(
    s: &Node<A>,
    t: &Node<B>,
    annot: &impl Fn(&A, &B) -> bool,
) -> bool {
    let mut p = Pairing { lv: vec![], rv: vec![], ll: vec![], rl: vec![] };
    go(s, t, &mut p, annot)
}

fn go<A: Annot, B: Annot>(
    s: &Node<A>,
    t: &Node<B>,
    p: &mut Pairing,
    annot: &impl Fn(&A, &B) -> bool,
) -> bool {
    match (s, t) {
        (Node::Var(x), Node::Var(y)) => p.vars(x.id(), y.id()),
        (Node::Abs(x, b), Node::Abs(y, c)) => {
            p.lv.push(x.id());
            p.rv.push(y.id());
            let r = go(b, c, p, annot);
            p.lv.pop();
            p.rv.pop();
            r
        }
        (Node::Gen(a, b), Node::Gen(c, d)) => {
            p.ll.push(a.id());
            p.rl.push(c.id());
            let r = go(b, d, p, annot);
            p.ll.pop();
            p.rl.pop();
            r
        }
        (Node::App(f, x, m), Node::App(g, y, n)) => annot(m, n) && go(f, g, p, annot) && go(x, y, p, annot),
        (Node::Choice(a, l, r), Node::Choice(b, u, v)) => {
            p.labels(a.id(), b.id()) && go(l, u, p, annot) && go(r, v, p, annot)
        }
        _ => false,
    }
}

/// Alpha-equivalence of plain terms.
pub fn alpha_eq(s: &Term, t: &Term) -> bool {
    alpha_eq_by(s, t, &|_, _| true)
}

impl<A: Annot> Node<A> {
    /// Alpha-equivalence including annotations.
    pub fn alpha_eq(&self, other: &Node<A>) -> bool {
        alpha_eq_by(self, other, &|a, b| a == b)
    }

    /// Alpha-equivalence ignoring annotations.
    pub fn alpha_eq_erased<B: Annot>(&self, other: &Node<B>) -> bool {
        alpha_eq_by(self, other, &|_, _| true)
    }

    /// A string that is equal for two terms exactly when they are
    /// alpha-equivalent (annotations included). Bound names become de Bruijn
    /// indices; free names keep their identity.
    pub fn canonical_key(&self) -> String {
        let mut out = String::new();
        let mut vars = Vec::new();
        let mut labels = Vec::new();
        key(self, &mut vars, &mut labels, &mut out);
        out
    }
}

fn key<A: Annot>(t: &Node<A>, vars: &mut Vec<u64>, labels: &mut Vec<u64>, out: &mut String) {
    match t {
        Node::Var(x) => match lookup(vars, x.id()) {
            Some(i) => {
                let _ = write!(out, "#{}", vars.len() - i);
            }
            None => {
                let _ = write!(out, "{}@{}", x.name(), x.id());
            }
        },
        Node::Abs(x, b) => {
            out.push_str("(\\ ");
            vars.push(x.id());
            key(b, vars, labels, out);
            vars.pop();
            out.push(')');
        }
        Node::Gen(a, b) => {
            out.push_str("(! ");
            labels.push(a.id());
            key(b, vars, labels, out);
            labels.pop();
            out.push(')');
        }
        Node::App(f, x, m) => {
            out.push_str(if m.is_marked() { "(@* " } else { "(@ " });
            key(f, vars, labels, out);
            out.push(' ');
            key(x, vars, labels, out);
            out.push(')');
        }
        Node::Choice(a, l, r) => {
            match lookup(labels, a.id()) {
                Some(i) => {
                    let _ = write!(out, "(+#{} ", labels.len() - i);
                }
                None => {
                    let _ = write!(out, "(+{}@{} ", a.name(), a.id());
                }
            }
            key(l, vars, labels, out);
            out.push(' ');
            key(r, vars, labels, out);
            out.push(')');
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse;

    #[test]
    fn renamed_binders_are_equal() {
        let s = parse(r"!a.\x.(x +[a] y)").unwrap();
        let t = parse(r"!b.\z.(z +[b] y)").unwrap();
        assert!(alpha_eq(&s, &t));
        assert_eq!(s.canonical_key(), t.canonical_key());
    }

    #[test]
    fn free_names_matter() {
        let s = parse(r"\x.y").unwrap();
        let t = parse(r"\x.z").unwrap();
        assert!(!alpha_eq(&s, &t));
        assert_ne!(s.canonical_key(), t.canonical_key());
    }

    #[test]
    fn binding_structure_matters() {
        let s = parse(r"\x.\y.x").unwrap();
        let t = parse(r"\x.\y.y").unwrap();
        assert!(!alpha_eq(&s, &t));
        let s = parse(r"!a.!b.(x +[a] y)").unwrap();
        let t = parse(r"!a.!b.(x +[b] y)").unwrap();
        assert!(!alpha_eq(&s, &t));
        assert_ne!(s.canonical_key(), t.canonical_key());
    }
}
