//! Capture-avoiding substitution.

use std::collections::{BTreeSet, HashMap};

use super::term::{restore, Annot, Label, Node, Var};

/// `body[value/x]`. Each inserted copy of `value` gets fresh binders, and any
/// binder of `body` that would capture a free name of `value` is renamed.
pub fn substitute<A: Annot>(body: &Node<A>, x: &Var, value: &Node<A>) -> Node<A> {
    let ctx = Ctx {
        x: x.id(),
        value,
        fv: value.free_vars().iter().map(Var::id).collect(),
        fl: value.free_labels().iter().map(Label::id).collect(),
    };
    let mut vars = HashMap::new();
    let mut labels = HashMap::new();
    ctx.go(body, &mut vars, &mut labels)
}

struct Ctx<'a, A> {
    x: u64,
    value: &'a Node<A>,
    fv: BTreeSet<u64>,
    fl: BTreeSet<u64>,
}

impl<A: Annot> Ctx<'_, A> {
    fn go(
        &self,
        t: &Node<A>,
        vars: &mut HashMap<u64, Var>,
        labels: &mut HashMap<u64, Label>,
    ) -> Node<A> {
        match t {
            Node::Var(y) => match vars.get(&y.id()) {
                Some(renamed) => Node::Var(renamed.clone()),
                None if y.id() == self.x => self.value.refreshed(false),
                None => Node::Var(y.clone()),
            },
            Node::Abs(y, b) => {
                // Rebinding `x` shadows it and a binder for a free name of
                // `value` would capture; both get renamed.
                if y.id() == self.x || self.fv.contains(&y.id()) {
                    let ny = y.copy_fresh();
                    let prev = vars.insert(y.id(), ny.clone());
                    let body = self.go(b, vars, labels);
                    restore(vars, y.id(), prev);
                    Node::Abs(ny, Box::new(body))
                } else {
                    Node::Abs(y.clone(), Box::new(self.go(b, vars, labels)))
                }
            }
            Node::Gen(a, b) => {
                if self.fl.contains(&a.id()) {
                    let na = a.copy_fresh();
                    let prev = labels.insert(a.id(), na.clone());
                    let body = self.go(b, vars, labels);
                    restore(labels, a.id(), prev);
                    Node::Gen(na, Box::new(body))
                } else {
                    Node::Gen(a.clone(), Box::new(self.go(b, vars, labels)))
                }
            }
            Node::App(f, y, m) => Node::App(
                Box::new(self.go(f, vars, labels)),
                Box::new(self.go(y, vars, labels)),
                m.clone(),
            ),
            Node::Choice(a, l, r) => Node::Choice(
                labels.get(&a.id()).cloned().unwrap_or_else(|| a.clone()),
                Box::new(self.go(l, vars, labels)),
                Box::new(self.go(r, vars, labels)),
            ),
        }
    }
}

/// `t` with free occurrences of label `a` replaced by `b`.
pub fn rename_label<A: Annot>(t: &Node<A>, a: &Label, b: &Label) -> Node<A> {
    match t {
        Node::Var(_) => t.clone(),
        Node::Abs(x, body) => Node::Abs(x.clone(), Box::new(rename_label(body, a, b))),
        Node::Gen(c, _) if c == a => t.clone(),
        Node::Gen(c, body) => Node::Gen(c.clone(), Box::new(rename_label(body, a, b))),
        Node::App(f, x, m) => Node::App(Box::new(rename_label(f, a, b)), Box::new(rename_label(x, a, b)), m.clone()),
        Node::Choice(c, l, r) => Node::Choice(
            if c == a { b.clone() } else { c.clone() },
            Box::new(rename_label(l, a, b)),
            Box::new(rename_label(r, a, b)),
        ),
    }
}

/// `t` with free occurrences of variable `x` replaced by `y`.
pub fn rename_var<A: Annot>(t: &Node<A>, x: &Var, y: &Var) -> Node<A> {
    substitute(t, x, &Node::Var(y.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::parse;
    use crate::syntax::term::Term;

    fn abs_parts(t: &Term) -> (Var, Term) {
        match t {
            Node::Abs(v, b) => (v.clone(), (**b).clone()),
            _ => panic!("not an abstraction"),
        }
    }

    #[test]
    fn substitutes_free_occurrences() {
        let (x, body) = abs_parts(&parse(r"\x.x (\y.x y)").unwrap());
        let r = substitute(&body, &x, &parse("z").unwrap());
        assert!(r.alpha_eq(&parse(r"z (\y.z y)").unwrap()));
    }

    #[test]
    fn avoids_variable_capture() {
        // (\y.x)[y/x] must not become \y.y
        let (x, body) = abs_parts(&parse(r"\x.\y.x").unwrap());
        let r = substitute(&body, &x, &parse("y").unwrap());
        assert!(r.alpha_eq(&parse(r"\w.y").unwrap()));
        assert!(!r.alpha_eq(&parse(r"\w.w").unwrap()));
    }

    #[test]
    fn avoids_label_capture() {
        // value has a free label a; the generator !a in body must not bind it
        let (x, body) = abs_parts(&crate::syntax::parse::parse_open(r"\x.!a.(x +[a] u)").unwrap());
        let value = crate::syntax::parse::parse_open(r"(p +[a] q)").unwrap();
        let r = substitute(&body, &x, &value);
        assert!(r.free_labels().contains(&Label::free("a")));
        let Node::Gen(b, _) = &r else { panic!() };
        assert_ne!(b, &Label::free("a"));
    }

    #[test]
    fn copies_get_fresh_binders() {
        let (x, body) = abs_parts(&parse(r"\x.x x").unwrap());
        let r = substitute(&body, &x, &parse(r"\z.z").unwrap());
        assert!(r.has_distinct_binders());
        assert!(r.alpha_eq(&parse(r"(\z.z) (\z.z)").unwrap()));
    }
}
