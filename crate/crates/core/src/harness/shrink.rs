//! Greedy counterexample minimization.

use crate::syntax::{Node, Term, Var};

/// Smaller label-closed variants of `t`: each subterm replaced by one of its
/// children or by a free variable.
pub fn candidates(t: &Term) -> Vec<Term> {
    let mut out = Vec::new();
    let x = Term::var(Var::free("x"));
    for p in t.positions() {
        let Some(s) = t.subterm(&p) else { continue };
        let mut repl: Vec<Term> = s.children().into_iter().map(|(_, c)| c.clone()).collect();
        if !matches!(s, Node::Var(_)) {
            repl.push(x.clone());
        }
        for r in repl {
            if let Some(c) = t.replace_at(&p, r) {
                if c.size() < t.size() && c.is_label_closed() {
                    out.push(c);
                }
            }
        }
    }
    out
}

/// Repeatedly take the first smaller candidate that still fails.
pub fn shrink(t: &Term, mut fails: impl FnMut(&Term) -> bool) -> Term {
    let mut cur = t.clone();
    for _ in 0..200 {
        match candidates(&cur).into_iter().find(|c| fails(c)) {
            Some(c) => cur = c,
            None => break,
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse;

    #[test]
    fn shrinks_to_a_minimal_witness() {
        // "contains an application of x to something"
        let t = parse(r"!a.((\p.p) (x y) +[a] z)").unwrap();
        let has_app = |t: &Term| {
            let mut found = false;
            t.walk(&mut |n| {
                if let Node::App(f, _, _) = n {
                    if matches!(**f, Node::Var(ref v) if v.name() == "x") {
                        found = true;
                    }
                }
            });
            found
        };
        let s = shrink(&t, has_app);
        assert_eq!(s.size(), 3, "{s}");
    }
}
