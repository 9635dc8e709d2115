//! Projections, head contexts, projective steps and exact output
//! distributions.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::beta::{self, BetaError, Reduction, StepKind, Strategy, TraceStep};
use crate::dyadic::Dyadic;
use crate::perm::{classify_normal_form, NormalFormClass, PermError};
use crate::syntax::{Dir, Label, Node, Position, Term, Var};

/// `⌊t⌋a_i`: every `a`-choice replaced by its `i`-th branch, stopping at a
/// generator that rebinds `a`.
pub fn project(t: &Term, a: &Label, i: u8) -> Term {
    match t {
        Node::Var(_) => t.clone(),
        Node::Abs(x, b) => Term::abs(x.clone(), project(b, a, i)),
        Node::App(f, x, _) => Term::app(project(f, a, i), project(x, a, i)),
        Node::Choice(b, l, r) if b == a => project(if i == 0 { l } else { r }, a, i),
        Node::Choice(b, l, r) => Term::choice(b.clone(), project(l, a, i), project(r, a, i)),
        Node::Gen(b, _) if b == a => t.clone(),
        Node::Gen(b, body) => Term::gen(b.clone(), project(body, a, i)),
    }
}

/// One frame of a head context.
#[derive(Clone, Debug)]
pub enum Frame {
    Lambda(Var),
    Applied(Term),
}

/// `H ::= [] | λx.H | H N`, frames listed from the root down to the hole.
#[derive(Clone, Debug, Default)]
pub struct HeadContext {
    pub frames: Vec<Frame>,
}

impl HeadContext {
    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Fill the hole.
    pub fn plug(&self, t: Term) -> Term {
        self.frames.iter().rev().fold(t, |acc, f| match f {
            Frame::Lambda(x) => Term::abs(x.clone(), acc),
            Frame::Applied(n) => Term::app(acc, n.clone()),
        })
    }

    /// Position of the hole.
    pub fn hole(&self) -> Position {
        self.frames
            .iter()
            .map(|f| match f {
                Frame::Lambda(_) => Dir::Body,
                Frame::Applied(_) => Dir::Fun,
            })
            .collect()
    }
}

impl fmt::Display for HeadContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let hole = Var::free("[]");
        write!(f, "{}", self.plug(Term::var(hole)))
    }
}

/// Decompose `t` as `H[!a.N]`, descending the head spine (abstraction
/// bodies and application functions) to the first generator.
pub fn split_head(t: &Term) -> Option<(HeadContext, Label, Term)> {
    let mut frames = Vec::new();
    let mut cur = t;
    loop {
        match cur {
            Node::Abs(x, b) => {
                frames.push(Frame::Lambda(x.clone()));
                cur = b;
            }
            Node::App(f, n, _) => {
                frames.push(Frame::Applied((**n).clone()));
                cur = f;
            }
            Node::Gen(a, body) => return Some((HeadContext { frames }, a.clone(), (**body).clone())),
            Node::Var(_) | Node::Choice(..) => return None,
        }
    }
}

/// `H[!a.N] →π H[⌊N⌋a0] + H[⌊N⌋a1]`; both outcomes equal `H[N]` when `a`
/// does not occur in `N`.
pub fn pi_step(t: &Term) -> Option<(Term, Term)> {
    let (h, a, n) = split_head(t)?;
    if n.has_free_label(&a) {
        Some((h.plug(project(&n, &a, 0)), h.plug(project(&n, &a, 1))))
    } else {
        let r = h.plug(n);
        Some((r.clone(), r))
    }
}

/// Contract the β-redex at the bottom of the head spine, if any.
pub fn head_beta(t: &Term) -> Option<(Position, Term)> {
    let mut pos = Position::root();
    let mut cur = t;
    loop {
        match cur {
            Node::Abs(_, b) => {
                pos.push(Dir::Body);
                cur = b;
            }
            Node::App(f, _, _) if matches!(**f, Node::Abs(..)) => {
                let r = beta::contract_beta(cur).expect("redex");
                return Some((pos.clone(), t.replace_at(&pos, r).expect("valid position")));
            }
            Node::App(f, _, _) => {
                pos.push(Dir::Fun);
                cur = f;
            }
            _ => return None,
        }
    }
}

/// A finite map from normal forms (up to α) to exact probabilities.
#[derive(Clone, Debug, Default)]
pub struct Distribution {
    entries: Vec<(Term, Dyadic)>,
    index: HashMap<String, usize>,
}

impl Distribution {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn point(t: Term) -> Self {
        let mut d = Self::new();
        d.add(t, Dyadic::one());
        d
    }

    /// Add `p` to the weight of `t`, merging α-equal terms.
    pub fn add(&mut self, t: Term, p: Dyadic) {
        let key = t.canonical_key();
        match self.index.get(&key) {
            Some(&i) => self.entries[i].1 = &self.entries[i].1 + &p,
            None => {
                self.index.insert(key, self.entries.len());
                self.entries.push((t, p));
            }
        }
    }

    pub fn get(&self, t: &Term) -> Option<&Dyadic> {
        self.index.get(&t.canonical_key()).map(|&i| &self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total(&self) -> Dyadic {
        self.entries.iter().fold(Dyadic::zero(), |acc, (_, p)| &acc + p)
    }

    /// Entries by descending probability, then by printed term.
    pub fn sorted(&self) -> Vec<(String, Term, Dyadic)> {
        let mut v: Vec<(String, Term, Dyadic)> =
            self.entries.iter().map(|(t, p)| (t.to_string(), t.clone(), p.clone())).collect();
        v.sort_by(|a, b| b.2.cmp(&a.2).then_with(|| a.0.cmp(&b.0)));
        v
    }

    /// Same support and weights, up to α.
    pub fn same_as(&self, other: &Distribution) -> bool {
        self.len() == other.len() && self.entries.iter().all(|(t, p)| other.get(t) == Some(p))
    }
}

impl fmt::Display for Distribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, _, p) in self.sorted() {
            writeln!(f, "{p}\t{s}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Error)]
pub enum ProjError {
    #[error("step budget of {budget} exhausted with probability mass {residual} unresolved")]
    StepBudgetExceeded { budget: usize, residual: Dyadic, partial: Distribution },
    #[error("not a normal form: {0}")]
    NotNormalForm(String),
    #[error("choice on `{0}` reached the head without its generator; the term is not label-closed")]
    NotLabelClosed(String),
    #[error(transparent)]
    Perm(#[from] PermError),
}

/// `t` as a decision tree: outer sums split at weight 1/2, other terms are
/// leaves of weight 1.
pub fn dist_of_normal_form(t: &Term) -> Result<Distribution, ProjError> {
    if classify_normal_form(t) != NormalFormClass::FullNormal {
        return Err(ProjError::NotNormalForm(t.to_string()));
    }
    fn go(t: &Term, w: Dyadic, out: &mut Distribution) {
        if let Node::Gen(a, body) = t {
            if let Node::Choice(b, l, r) = &**body {
                if a == b && !l.has_free_label(a) && !r.has_free_label(a) {
                    go(l, w.half(), out);
                    go(r, w.half(), out);
                    return;
                }
            }
        }
        out.add(t.clone(), w);
    }
    let mut out = Distribution::new();
    go(t, Dyadic::one(), &mut out);
    Ok(out)
}

/// Evaluation state shared by [`evaluate_dist`] and the projective strategy.
struct Evaluator {
    budget: usize,
    steps: usize,
    trace: Option<Vec<TraceStep>>,
}

enum Head {
    Split(Term, Term),
    Leaf(Term),
}

impl Evaluator {
    fn record(&mut self, kind: StepKind, position: Position, term: &Term) {
        if let Some(tr) = &mut self.trace {
            tr.push(TraceStep { kind, position, term: term.clone() });
        }
    }

    fn tick(&mut self, n: usize) -> bool {
        if self.steps + n > self.budget {
            return false;
        }
        self.steps += n;
        true
    }

    /// Run head steps until a split or a head normal form with normalized
    /// arguments. `None` when the budget runs out.
    fn head(&mut self, mut t: Term) -> Result<Option<Head>, ProjError> {
        loop {
            if let Some((h, a, n)) = split_head(&t) {
                if !self.tick(1) {
                    return Ok(None);
                }
                if n.has_free_label(&a) {
                    let l = h.plug(project(&n, &a, 0));
                    let r = h.plug(project(&n, &a, 1)).refreshed(true);
                    return Ok(Some(Head::Split(l, r)));
                }
                t = h.plug(n);
                self.record(StepKind::Perm(crate::perm::PermRule::BoxVoid), h.hole(), &t);
                continue;
            }
            if let Some((pos, next)) = head_beta(&t) {
                if !self.tick(1) {
                    return Ok(None);
                }
                self.record(StepKind::Beta, pos, &next);
                t = next;
                continue;
            }
            return self.normalize_arguments(t).map(|o| o.map(Head::Leaf));
        }
    }

    fn normalize_arguments(&mut self, t: Term) -> Result<Option<Term>, ProjError> {
        let mut frames = Vec::new();
        let mut cur = t;
        // Peel abstractions, then collect the spine.
        let head = loop {
            match cur {
                Node::Abs(x, b) => {
                    frames.push(Frame::Lambda(x));
                    cur = *b;
                }
                other => break other,
            }
        };
        let (h, args) = head.spine();
        if let Node::Choice(a, _, _) = h {
            return Err(ProjError::NotLabelClosed(a.name().to_owned()));
        }
        let mut out = h.clone();
        for arg in args {
            let r = match beta::reduce(arg, Strategy::FullLeftmost, self.budget - self.steps) {
                Ok(r) => r,
                Err(BetaError::StepBudgetExceeded { .. }) => return Ok(None),
                Err(BetaError::Perm(e)) => return Err(e.into()),
                Err(e) => return Err(ProjError::NotNormalForm(e.to_string())),
            };
            self.steps += r.steps;
            out = Term::app(out, r.term);
        }
        Ok(Some(HeadContext { frames }.plug(out)))
    }
}

/// Exact output distribution: head β-steps and projective splits, with
/// arguments of head normal forms normalized by leftmost reduction.
pub fn evaluate_dist(t: &Term, budget: usize) -> Result<Distribution, ProjError> {
    let mut ev = Evaluator { budget, steps: 0, trace: None };
    let mut out = Distribution::new();
    let mut stack = vec![(t.clone(), Dyadic::one())];
    while let Some((cur, w)) = stack.pop() {
        match ev.head(cur)? {
            Some(Head::Leaf(leaf)) => out.add(leaf, w),
            Some(Head::Split(l, r)) => {
                stack.push((r, w.half()));
                stack.push((l, w.half()));
            }
            None => {
                let residual = stack.iter().fold(w, |acc, (_, p)| &acc + p);
                return Err(ProjError::StepBudgetExceeded { budget, residual, partial: out });
            }
        }
    }
    Ok(out)
}

/// The projective strategy as a reduction: both outcomes of every split are
/// evaluated and recombined as `!f.(L +f R)`; equal outcomes collapse.
pub(crate) fn reduce_projective(t: &Term, budget: usize) -> Result<Reduction, BetaError> {
    fn go(ev: &mut Evaluator, t: Term) -> Result<Option<Term>, ProjError> {
        Ok(match ev.head(t)? {
            None => None,
            Some(Head::Leaf(leaf)) => Some(leaf),
            Some(Head::Split(l, r)) => {
                ev.record(StepKind::Pi(0), Position::root(), &l);
                let Some(l) = go(ev, l)? else { return Ok(None) };
                ev.record(StepKind::Pi(1), Position::root(), &r);
                let Some(r) = go(ev, r)? else { return Ok(None) };
                if l.alpha_eq(&r) {
                    Some(l)
                } else {
                    let f = Label::fresh("f");
                    Some(Term::gen(f.clone(), Term::choice(f, l, r)))
                }
            }
        })
    }
    let mut ev = Evaluator { budget, steps: 0, trace: Some(Vec::new()) };
    let r = go(&mut ev, t.clone());
    let trace = ev.trace.take().unwrap_or_default();
    match r {
        Ok(Some(term)) => Ok(Reduction { term, trace, steps: ev.steps }),
        Ok(None) => Err(BetaError::StepBudgetExceeded {
            budget,
            steps: ev.steps,
            partial: Box::new(t.clone()),
            trace,
        }),
        Err(ProjError::Perm(e)) => Err(BetaError::Perm(e)),
        Err(e) => Err(BetaError::InvalidMarking(e.to_string())),
    }
}

/// Every assignment of the term's generators to outcomes, by brute force:
/// each generator on any path is resolved by projection. Independent of the
/// evaluator; used as a test oracle for label-only terms.
#[cfg(test)]
fn enumerate_outcomes(t: &Term) -> Distribution {
    fn go(t: &Term, w: Dyadic, out: &mut Distribution) {
        let mut found = None;
        t.walk(&mut |n| {
            if found.is_none() {
                if let Node::Gen(a, b) = n {
                    found = Some((a.clone(), (**b).clone()));
                }
            }
        });
        match found {
            None => out.add(t.clone(), w),
            Some((a, body)) => {
                let pos = t
                    .positions()
                    .into_iter()
                    .find(|p| matches!(t.subterm(p), Some(Node::Gen(b, _)) if *b == a))
                    .expect("generator position");
                for i in 0..2 {
                    let r = t.replace_at(&pos, project(&body, &a, i)).expect("valid");
                    go(&r, w.half(), out);
                }
            }
        }
    }
    let mut out = Distribution::new();
    go(t, Dyadic::one(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_open};

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    fn dist(entries: &[(&str, Dyadic)]) -> Distribution {
        let mut d = Distribution::new();
        for (s, w) in entries {
            d.add(p(s), w.clone());
        }
        d
    }

    #[test]
    fn projections() {
        let t = parse_open("x +[a] y").unwrap();
        let a = Label::free("a");
        assert!(project(&t, &a, 0).alpha_eq(&p("x")));
        assert!(project(&t, &a, 1).alpha_eq(&p("y")));
        assert!(project(&p("x"), &a, 0).alpha_eq(&p("x")));
        let t = p(r"!a.(x +[a] y)");
        let (_, ls) = t.binders();
        assert!(project(&t, &ls[0], 1).alpha_eq(&t));
    }

    #[test]
    fn head_splitting() {
        let (h, _, n) = split_head(&p(r"!a.(x +[a] y)")).unwrap();
        assert!(h.is_empty());
        assert!(n.free_labels().len() == 1);
        let (h, _, n) = split_head(&p(r"(!a.x) y z")).unwrap();
        assert_eq!(h.to_string(), "[] y z");
        assert!(n.alpha_eq(&p("x")));
        // the grammar allows λ-frames below applications
        let (h, _, n) = split_head(&p(r"(\x.!a.(x +[a] y)) z")).unwrap();
        assert_eq!(h.to_string(), r"(\x.[]) z");
        assert!(matches!(n, Node::Choice(..)));
        assert!(split_head(&p("x y")).is_none());
        assert!(split_head(&p(r"x (!a.y)")).is_none());
    }

    #[test]
    fn pi_steps() {
        let (l, r) = pi_step(&p(r"!a.(x +[a] y)")).unwrap();
        assert!(l.alpha_eq(&p("x")) && r.alpha_eq(&p("y")));
        let (l, r) = pi_step(&p(r"!a.x")).unwrap();
        assert!(l.alpha_eq(&p("x")) && r.alpha_eq(&p("x")));
        assert!(pi_step(&p("x y")).is_none());
    }

    #[test]
    fn distributions() {
        let h = Dyadic::one().half();
        let q = h.half();
        let d = evaluate_dist(&p("x (+) y"), 100).unwrap();
        assert!(d.same_as(&dist(&[("x", h.clone()), ("y", h.clone())])));
        let t = p(r"!a.!b.((x +[a] y) +[b] z)");
        let d = evaluate_dist(&t, 100).unwrap();
        let expected = dist(&[("x", q.clone()), ("y", q.clone()), ("z", h.clone())]);
        assert!(d.same_as(&expected), "{d}");
        assert!(enumerate_outcomes(&t).same_as(&expected));
        assert!(evaluate_dist(&p("x"), 10).unwrap().same_as(&dist(&[("x", Dyadic::one())])));
        assert!(d.total().is_one());
    }

    #[test]
    fn normal_form_distributions() {
        let h = Dyadic::one().half();
        let q = h.half();
        let t = p(r"(x (+) z) (+) (y (+) z)");
        let d = dist_of_normal_form(&t).unwrap();
        assert!(d.same_as(&dist(&[("x", q.clone()), ("y", q), ("z", h)])), "{d}");
        let t = p(r"f (y (+) z) (y (+) z)");
        let d = dist_of_normal_form(&t).unwrap();
        assert_eq!(d.len(), 1);
        assert!(d.get(&t).unwrap().is_one());
        assert!(dist_of_normal_form(&p(r"(\x.x) y")).is_err());
    }

    #[test]
    fn budget_reports_residual_mass() {
        let omega = r"(\x.x x) (\x.x x)";
        let t = p(&format!("x (+) ({omega})"));
        match evaluate_dist(&t, 100) {
            Err(ProjError::StepBudgetExceeded { residual, partial, .. }) => {
                assert_eq!(residual, Dyadic::one().half());
                assert_eq!(partial.len(), 1);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn projective_reduction_builds_a_tree() {
        let t = p(r"!a.!b.((x +[a] y) +[b] z)");
        let r = beta::reduce(&t, Strategy::Projective, 100).unwrap();
        let d = dist_of_normal_form(&r.term).unwrap();
        assert!(d.same_as(&evaluate_dist(&t, 100).unwrap()));
        let r = beta::reduce(&p(r"!a.(x +[a] x)"), Strategy::Projective, 100).unwrap();
        assert!(r.term.alpha_eq(&p("x")));
    }
}
