//! Recursive path ordering over the first-order reading of terms, used to
//! certify that each permutative step decreases.
//!
//! Terms are read as first-order trees over the symbols `+a` (binary), `!a`
//! (unary), `λx` (unary) and `@` (binary), with variable occurrences as
//! first-order variables. Rewrites that duplicate a subterm give the copy
//! fresh binders; symbols and variables are therefore identified by origin,
//! so that a copy is the same symbol as the binder it was copied from.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use crate::perm::{PermRule, PermStep};
use crate::syntax::{Label, LabelSeq, Node, Position, Term, Var};

/// A function symbol of the first-order signature.
#[derive(Clone, Debug)]
pub enum SigSymbol {
    Choice(Label),
    Gen(Label),
    Lam(Var),
    App,
}

impl SigSymbol {
    fn key(&self) -> (u8, u64) {
        match self {
            SigSymbol::Choice(a) => (0, a.origin()),
            SigSymbol::Gen(a) => (1, a.origin()),
            SigSymbol::Lam(x) => (2, x.origin()),
            SigSymbol::App => (3, 0),
        }
    }

    pub fn of(t: &Term) -> Option<SigSymbol> {
        match t {
            Node::Var(_) => None,
            Node::Abs(x, _) => Some(SigSymbol::Lam(x.clone())),
            Node::App(..) => Some(SigSymbol::App),
            Node::Choice(a, _, _) => Some(SigSymbol::Choice(a.clone())),
            Node::Gen(a, _) => Some(SigSymbol::Gen(a.clone())),
        }
    }
}

impl PartialEq for SigSymbol {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl Eq for SigSymbol {}

impl std::hash::Hash for SigSymbol {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

impl PartialOrd for SigSymbol {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SigSymbol {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.key().cmp(&other.key())
    }
}

impl fmt::Display for SigSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SigSymbol::Choice(a) => write!(f, "+{a}"),
            SigSymbol::Gen(a) => write!(f, "!{a}"),
            SigSymbol::Lam(x) => write!(f, "λ{x}"),
            SigSymbol::App => f.write_str("@"),
        }
    }
}

/// The symbols occurring in a term.
pub fn signature(t: &Term) -> BTreeSet<SigSymbol> {
    let mut out = BTreeSet::new();
    t.walk(&mut |n| {
        if let Some(s) = SigSymbol::of(n) {
            out.insert(s);
        }
    });
    out
}

/// The precedence on the symbols of one term: `+a ≺ +b` when `a < b`,
/// `+a ≺ !b` for all labels, and `!b ≺ @, λx`. Closed under transitivity,
/// which also gives `+a ≺ @, λx`.
#[derive(Clone, Debug)]
pub struct Precedence {
    symbols: BTreeSet<SigSymbol>,
    label_less: HashSet<(u64, u64)>,
}

impl Precedence {
    pub fn less(&self, f: &SigSymbol, g: &SigSymbol) -> bool {
        match (f, g) {
            (SigSymbol::Choice(a), SigSymbol::Choice(b)) => self.label_less.contains(&(a.origin(), b.origin())),
            (SigSymbol::Choice(_), _) => true,
            (SigSymbol::Gen(_), SigSymbol::App | SigSymbol::Lam(_)) => true,
            _ => false,
        }
    }

    pub fn symbols(&self) -> &BTreeSet<SigSymbol> {
        &self.symbols
    }

    /// Every related pair among the term's symbols, as `(smaller, larger)`.
    pub fn pairs(&self) -> Vec<(SigSymbol, SigSymbol)> {
        let mut out = Vec::new();
        for f in &self.symbols {
            for g in &self.symbols {
                if self.less(f, g) {
                    out.push((f.clone(), g.clone()));
                }
            }
        }
        out
    }
}

impl fmt::Display for Precedence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.pairs().iter().map(|(a, b)| format!("{a} ≺ {b}")).collect();
        f.write_str(&parts.join(", "))
    }
}

pub fn precedence_of(t: &Term) -> Precedence {
    precedence_with_theta(t, &LabelSeq::empty())
}

/// Precedence of a possibly label-open term whose free labels are ordered by
/// `theta` (they sit below every label bound in the term).
pub fn precedence_with_theta(t: &Term, theta: &LabelSeq) -> Precedence {
    fn go(t: &Term, stack: &mut Vec<u64>, out: &mut HashSet<(u64, u64)>, bound: &mut Vec<u64>) {
        match t {
            Node::Var(_) => {}
            Node::Gen(a, b) => {
                for &p in stack.iter() {
                    out.insert((p, a.origin()));
                }
                bound.push(a.origin());
                stack.push(a.origin());
                go(b, stack, out, bound);
                stack.pop();
            }
            Node::Abs(_, b) => go(b, stack, out, bound),
            Node::App(x, y, _) | Node::Choice(_, x, y) => {
                go(x, stack, out, bound);
                go(y, stack, out, bound);
            }
        }
    }
    let mut label_less = HashSet::new();
    let mut bound = Vec::new();
    go(t, &mut Vec::new(), &mut label_less, &mut bound);
    let th = theta.labels();
    for (i, a) in th.iter().enumerate() {
        for b in &th[..i] {
            label_less.insert((a.origin(), b.origin()));
        }
        for &b in &bound {
            label_less.insert((a.origin(), b));
        }
    }
    Precedence { symbols: signature(t), label_less }
}

/// Structural equality of first-order readings.
pub fn origin_eq(s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Node::Var(x), Node::Var(y)) => x.origin() == y.origin(),
        (Node::Abs(x, b), Node::Abs(y, c)) => x.origin() == y.origin() && origin_eq(b, c),
        (Node::Gen(a, b), Node::Gen(c, d)) => a.origin() == c.origin() && origin_eq(b, d),
        (Node::App(f, x, _), Node::App(g, y, _)) => origin_eq(f, g) && origin_eq(x, y),
        (Node::Choice(a, l, r), Node::Choice(b, u, v)) => a.origin() == b.origin() && origin_eq(l, u) && origin_eq(r, v),
        _ => false,
    }
}

fn occurs(x: &Var, t: &Term) -> bool {
    match t {
        Node::Var(y) => x.origin() == y.origin(),
        Node::Abs(_, b) | Node::Gen(_, b) => occurs(x, b),
        Node::App(f, a, _) | Node::Choice(_, f, a) => occurs(x, f) || occurs(x, a),
    }
}

fn args(t: &Term) -> Vec<&Term> {
    t.children().into_iter().map(|(_, c)| c).collect()
}

struct Rpo<'p> {
    prec: &'p Precedence,
    memo: HashMap<(usize, usize), bool>,
}

impl Rpo<'_> {
    fn less(&mut self, n: &Term, m: &Term) -> bool {
        let key = (n as *const Term as usize, m as *const Term as usize);
        if let Some(&r) = self.memo.get(&key) {
            return r;
        }
        let r = self.compute(n, m);
        self.memo.insert(key, r);
        r
    }

    fn compute(&mut self, n: &Term, m: &Term) -> bool {
        let (Some(f), Some(g)) = (SigSymbol::of(n), SigSymbol::of(m)) else {
            // A variable is below exactly the terms that properly contain it.
            return match (n, m) {
                (Node::Var(x), _) if !matches!(m, Node::Var(_)) => occurs(x, m),
                _ => false,
            };
        };
        if f == g {
            self.multiset_less(args(n), args(m))
        } else if self.prec.less(&f, &g) {
            args(n).into_iter().all(|ni| self.less(ni, m))
        } else {
            args(m).into_iter().any(|mi| origin_eq(n, mi) || self.less(n, mi))
        }
    }

    /// Dershowitz-Manna multiset extension.
    fn multiset_less(&mut self, mut xs: Vec<&Term>, mut ys: Vec<&Term>) -> bool {
        let mut i = 0;
        while i < xs.len() {
            if let Some(j) = ys.iter().position(|y| origin_eq(xs[i], y)) {
                xs.swap_remove(i);
                ys.swap_remove(j);
            } else {
                i += 1;
            }
        }
        if ys.is_empty() {
            return false;
        }
        xs.into_iter().all(|x| ys.iter().any(|y| self.less(x, y)))
    }
}

/// `n < m` in the recursive path ordering induced by `prec`.
pub fn rpo_less(n: &Term, m: &Term, prec: &Precedence) -> bool {
    Rpo { prec, memo: HashMap::new() }.less(n, m)
}

/// Evidence that one permutative step decreases.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub rule: PermRule,
    pub position: Position,
    pub precedence: Precedence,
}

/// A step that failed to certify.
#[derive(Clone, Debug)]
pub struct Failure {
    pub rule: PermRule,
    pub position: Position,
    pub before: Term,
    pub after: Term,
    pub reason: String,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {}: {} (before: {}, after: {})", self.rule, self.position, self.reason, self.before, self.after)
    }
}

pub fn certify_perm_step(step: &PermStep) -> Result<Certificate, Box<Failure>> {
    certify_with_theta(step, &LabelSeq::empty())
}

pub fn certify_with_theta(step: &PermStep, theta: &LabelSeq) -> Result<Certificate, Box<Failure>> {
    certify_pair(step.rule, &step.position, &step.before, &step.after, theta)
}

pub(crate) fn certify_pair(
    rule: PermRule,
    position: &Position,
    before: &Term,
    after: &Term,
    theta: &LabelSeq,
) -> Result<Certificate, Box<Failure>> {
    let fail = |reason: String| Box::new(Failure {
        rule,
        position: position.clone(),
        before: before.clone(),
        after: after.clone(),
        reason,
    });
    let prec = precedence_with_theta(before, theta);
    let after_sig = signature(after);
    if let Some(extra) = after_sig.iter().find(|s| !prec.symbols.contains(*s)) {
        return Err(fail(format!("symbol {extra} is not in the signature of the redex term")));
    }
    if !rpo_less(after, before, &prec) {
        return Err(fail("result is not smaller in the path ordering".into()));
    }
    Ok(Certificate { rule, position: position.clone(), precedence: prec })
}
