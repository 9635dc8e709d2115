//! Pretty printing in the surface syntax.
//!
//! Bound names are printed as their display names unless that would collide
//! with an enclosing binder of the same sort or with a free name, in which
//! case a numeric suffix is appended. Output always parses back to an
//! alpha-equivalent term.

use std::collections::{HashMap, HashSet};
use std::fmt;

use super::term::{Annot, Node};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Ctx {
    Top,
    BinderBody,
    ChoiceOperand,
    AppFun,
    AppArg,
}

#[derive(Default)]
struct Names {
    by_id: HashMap<u64, String>,
    taken: HashSet<String>,
}

impl Names {
    fn pick(&mut self, base: &str) -> String {
        if !self.taken.contains(base) {
            return base.to_owned();
        }
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit());
        let stem = if stem.is_empty() { base } else { stem };
        (1..)
            .map(|k| format!("{stem}{k}"))
            .find(|n| !self.taken.contains(n))
            .expect("unbounded search")
    }
}

struct Printer {
    out: String,
    vars: Names,
    labels: Names,
}

impl Printer {
    fn new<A: Annot>(t: &Node<A>) -> Self {
        let mut p = Printer { out: String::new(), vars: Names::default(), labels: Names::default() };
        for v in t.free_vars() {
            let n = p.vars.pick(v.name());
            p.vars.taken.insert(n.clone());
            p.vars.by_id.insert(v.id(), n);
        }
        for l in t.free_labels() {
            let n = p.labels.pick(l.name());
            p.labels.taken.insert(n.clone());
            p.labels.by_id.insert(l.id(), n);
        }
        p
    }

    fn go<A: Annot>(&mut self, t: &Node<A>, ctx: Ctx) {
        let parens = match t {
            Node::Var(_) => false,
            Node::App(..) => ctx == Ctx::AppArg,
            Node::Abs(..) | Node::Gen(..) => matches!(ctx, Ctx::ChoiceOperand | Ctx::AppFun | Ctx::AppArg),
            Node::Choice(..) => ctx != Ctx::Top,
        };
        if parens {
            self.out.push('(');
        }
        match t {
            Node::Var(v) => {
                let n = self.vars.by_id.get(&v.id()).cloned().unwrap_or_else(|| v.name().to_owned());
                self.out.push_str(&n);
            }
            Node::Abs(v, b) => {
                let n = self.vars.pick(v.name());
                self.out.push('\\');
                self.out.push_str(&n);
                self.out.push('.');
                self.vars.taken.insert(n.clone());
                let prev = self.vars.by_id.insert(v.id(), n.clone());
                self.go(b, Ctx::BinderBody);
                self.vars.taken.remove(&n);
                super::term::restore(&mut self.vars.by_id, v.id(), prev);
            }
            Node::Gen(a, b) => {
                let n = self.labels.pick(a.name());
                self.out.push('!');
                self.out.push_str(&n);
                self.out.push('.');
                self.labels.taken.insert(n.clone());
                let prev = self.labels.by_id.insert(a.id(), n.clone());
                self.go(b, Ctx::BinderBody);
                self.labels.taken.remove(&n);
                super::term::restore(&mut self.labels.by_id, a.id(), prev);
            }
            Node::App(f, x, m) => {
                self.go(f, Ctx::AppFun);
                if m.is_marked() {
                    self.out.push('*');
                }
                self.out.push(' ');
                self.go(x, Ctx::AppArg);
            }
            Node::Choice(a, l, r) => {
                self.go(l, Ctx::ChoiceOperand);
                let n = self.labels.by_id.get(&a.id()).cloned().unwrap_or_else(|| a.name().to_owned());
                self.out.push_str(" +[");
                self.out.push_str(&n);
                self.out.push_str("] ");
                self.go(r, Ctx::ChoiceOperand);
            }
        }
        if parens {
            self.out.push(')');
        }
    }
}

/// Render a term (plain or labeled) in the surface syntax.
pub fn print<A: Annot>(t: &Node<A>) -> String {
    let mut p = Printer::new(t);
    p.go(t, Ctx::Top);
    p.out
}

impl<A: Annot> fmt::Display for Node<A> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&print(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse::{parse, parse_labeled, parse_open};
    use crate::syntax::term::{Label, Term, Var};

    fn round(s: &str) -> String {
        print(&parse_open(s).unwrap())
    }

    #[test]
    fn generator_example() {
        let a = Label::fresh("a");
        let t = Term::gen(a.clone(), Term::choice(a, Term::var(Var::free("x")), Term::var(Var::free("y"))));
        assert_eq!(print(&t), "!a.(x +[a] y)");
    }

    #[test]
    fn parenthesization() {
        assert_eq!(round(r"\x.x x"), r"\x.x x");
        assert_eq!(round(r"(\x.x) (\y.y)"), r"(\x.x) (\y.y)");
        assert_eq!(round(r"f (g x) y"), r"f (g x) y");
        assert_eq!(round(r"(x +[a] y) +[b] z"), r"(x +[a] y) +[b] z");
        assert_eq!(round(r"x +[b] (y +[a] z)"), r"x +[b] (y +[a] z)");
        assert_eq!(round(r"(x +[a] y) z"), r"(x +[a] y) z");
        assert_eq!(round(r"!a.!b.((x +[a] y) +[b] z)"), r"!a.!b.((x +[a] y) +[b] z)");
        assert_eq!(round(r"(\x.x) +[a] (!b.y)"), r"(\x.x) +[a] (!b.y)");
    }

    #[test]
    fn colliding_binders_are_renamed() {
        // body refers to the free x, so the binder cannot also print as x
        let x = Var::fresh("x");
        let t = Term::abs(x.clone(), Term::app(Term::var(x), Term::var(Var::free("x"))));
        assert_eq!(print(&t), r"\x1.x1 x");
        assert!(parse(&print(&t)).unwrap().alpha_eq(&t));
        // nested binders sharing a display name
        let (x1, x2) = (Var::fresh("x"), Var::fresh("x"));
        let t = Term::abs(x1.clone(), Term::abs(x2.clone(), Term::app(Term::var(x1), Term::var(x2))));
        assert_eq!(print(&t), r"\x.\x1.x x1");
    }

    #[test]
    fn marks_render_as_star() {
        let t = parse_labeled(r"(\x.x)* ((\y.y)* z)").unwrap();
        assert_eq!(print(&t), r"(\x.x)* ((\y.y)* z)");
    }
}
