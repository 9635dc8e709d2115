//! β-reduction, marked terms, parallel β-steps, complete steps and the
//! reduction strategies.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::perm::{self, contract, MarkedRule, PermError, PermRule};
use crate::syntax::{substitute, Annot, LabelOrder, LabelSeq, Node, Position, Term};

/// A term whose application nodes carry a redex mark.
pub type LabeledTerm = Node<bool>;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    /// Permutative steps only.
    PermOnly,
    /// Leftmost-outermost β-steps only.
    LeftmostBeta,
    /// Leftmost-outermost over both kinds, permutative first at a node.
    FullLeftmost,
    /// Repeated complete steps with the full marking.
    Complete,
    /// Head evaluation splitting generators into both outcomes.
    Projective,
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "perm" => Ok(Strategy::PermOnly),
            "beta" => Ok(Strategy::LeftmostBeta),
            "full" => Ok(Strategy::FullLeftmost),
            "complete" => Ok(Strategy::Complete),
            "projective" => Ok(Strategy::Projective),
            _ => Err(format!("unknown strategy `{s}` (expected perm, beta, full, complete or projective)")),
        }
    }
}

/// What a trace step did.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepKind {
    Perm(PermRule),
    Beta,
    /// A parallel step contracting this many marked redexes.
    ParBeta(usize),
    /// A projective split, continuing with outcome 0 or 1.
    Pi(u8),
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepKind::Perm(r) => write!(f, "{r}"),
            StepKind::Beta => f.write_str("beta"),
            StepKind::ParBeta(_) => f.write_str("parBeta"),
            StepKind::Pi(i) => write!(f, "pi{i}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub kind: StepKind,
    pub position: Position,
    /// The whole term after the step.
    pub term: Term,
}

impl fmt::Display for TraceStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} @ {} : {}", self.kind, self.position, self.term)
    }
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub term: Term,
    pub trace: Vec<TraceStep>,
    /// Elementary steps spent.
    pub steps: usize,
}

#[derive(Debug, Clone, Error)]
pub enum BetaError {
    #[error("no β-redex at {0}")]
    NotARedex(Position),
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error(transparent)]
    Perm(PermError),
    #[error("step budget of {budget} exhausted after {steps} steps")]
    StepBudgetExceeded { budget: usize, steps: usize, partial: Box<Term>, trace: Vec<TraceStep> },
}

impl From<PermError> for BetaError {
    fn from(e: PermError) -> Self {
        match e {
            PermError::StepBudgetExceeded { budget, steps, partial, .. } => {
                BetaError::StepBudgetExceeded { budget, steps, partial, trace: Vec::new() }
            }
            other => BetaError::Perm(other),
        }
    }
}

/// Contract the β-redex at the root.
pub(crate) fn contract_beta<A: Annot>(t: &Node<A>) -> Option<Node<A>> {
    match t {
        Node::App(f, m, _) => match &**f {
            Node::Abs(x, n) => Some(substitute(n, x, m)),
            _ => None,
        },
        _ => None,
    }
}

/// Contract the β-redex at `pos`.
pub fn step_beta(term: &Term, pos: &Position) -> Result<Term, BetaError> {
    let sub = term.subterm(pos).ok_or_else(|| BetaError::NotARedex(pos.clone()))?;
    let r = contract_beta(sub).ok_or_else(|| BetaError::NotARedex(pos.clone()))?;
    Ok(term.replace_at(pos, r).expect("valid position"))
}

/// Positions of all β-redexes, in pre-order.
pub fn beta_redexes<A: Annot>(t: &Node<A>) -> Vec<Position> {
    t.positions()
        .into_iter()
        .filter(|p| t.subterm(p).is_some_and(Node::is_beta_redex))
        .collect()
}

/// Simultaneously contract every marked redex.
pub fn labeled_reduct(lt: &LabeledTerm) -> Term {
    match lt {
        Node::Var(x) => Node::Var(x.clone()),
        Node::Abs(x, b) => Term::abs(x.clone(), labeled_reduct(b)),
        Node::Gen(a, b) => Term::gen(a.clone(), labeled_reduct(b)),
        Node::Choice(a, l, r) => Term::choice(a.clone(), labeled_reduct(l), labeled_reduct(r)),
        Node::App(f, m, true) if matches!(**f, Node::Abs(..)) => {
            let Node::Abs(x, n) = &**f else { unreachable!() };
            substitute(&labeled_reduct(n), x, &labeled_reduct(m))
        }
        Node::App(f, m, _) => Term::app(labeled_reduct(f), labeled_reduct(m)),
    }
}

/// Mark every β-redex.
pub fn full_labeling(t: &Term) -> LabeledTerm {
    match t {
        Node::Var(x) => Node::Var(x.clone()),
        Node::Abs(x, b) => Node::abs(x.clone(), full_labeling(b)),
        Node::Gen(a, b) => Node::gen(a.clone(), full_labeling(b)),
        Node::Choice(a, l, r) => Node::choice(a.clone(), full_labeling(l), full_labeling(r)),
        Node::App(f, m, _) => Node::app_with(full_labeling(f), full_labeling(m), matches!(**f, Node::Abs(..))),
    }
}

/// Mark exactly the redexes at the given positions.
pub fn marking_at(t: &Term, marked: &[Position]) -> Result<LabeledTerm, BetaError> {
    let mut lt: LabeledTerm = t.map_annot(&mut |_| false);
    for p in marked {
        match lt.subterm(p) {
            Some(Node::App(f, m, _)) if matches!(**f, Node::Abs(..)) => {
                let node = Node::App(f.clone(), m.clone(), true);
                lt = lt.replace_at(p, node).expect("valid position");
            }
            _ => return Err(BetaError::NotARedex(p.clone())),
        }
    }
    Ok(lt)
}

/// Number of marked nodes.
pub fn mark_count(lt: &LabeledTerm) -> usize {
    let mut n = 0;
    lt.walk(&mut |t| {
        if matches!(t, Node::App(_, _, true)) {
            n += 1
        }
    });
    n
}

/// Marks only on β-redexes.
pub fn is_valid_marking(lt: &LabeledTerm) -> bool {
    let mut ok = true;
    lt.walk(&mut |t| {
        if let Node::App(f, _, true) = t {
            ok &= matches!(**f, Node::Abs(..));
        }
    });
    ok
}

/// One leftmost-outermost step of marked permutative reduction.
pub fn labeled_p_step(lt: &LabeledTerm) -> Result<Option<LabeledTerm>, PermError> {
    labeled_p_step_theta(lt, &LabelSeq::empty())
}

pub fn labeled_p_step_theta(lt: &LabeledTerm, theta: &LabelSeq) -> Result<Option<LabeledTerm>, PermError> {
    Ok(perm::step_generic(lt, theta)?.map(|(_, _, t)| t))
}

/// Like [`labeled_p_step`], also reporting the rule and position.
pub fn labeled_p_step_traced(
    lt: &LabeledTerm,
    theta: &LabelSeq,
) -> Result<Option<(MarkedRule, Position, LabeledTerm)>, PermError> {
    perm::step_generic(lt, theta)
}

/// Normal form of marked permutative reduction and the elementary steps
/// spent (each macro step counts as two).
pub fn labeled_p_normalize(lt: &LabeledTerm, theta: &LabelSeq, max_steps: usize) -> Result<(LabeledTerm, usize), PermError> {
    perm::normalize_generic(lt, theta, max_steps, |_, _, _, _| {}).map_err(|(e, _, _)| e)
}

/// Parallel β-step along `marking` followed by permutative normalization.
pub fn complete_step(term: &Term, marking: &LabeledTerm, max_steps: usize) -> Result<Term, BetaError> {
    complete_step_theta(term, marking, &LabelSeq::empty(), max_steps)
}

pub fn complete_step_theta(term: &Term, marking: &LabeledTerm, theta: &LabelSeq, max_steps: usize) -> Result<Term, BetaError> {
    if !marking.alpha_eq_erased(term) {
        return Err(BetaError::InvalidMarking("marking does not label the given term".into()));
    }
    if !is_valid_marking(marking) {
        return Err(BetaError::InvalidMarking("a mark sits on a node that is not a β-redex".into()));
    }
    Ok(perm::p_normal_form_theta(&labeled_reduct(marking), theta, max_steps)?)
}

/// Leftmost-outermost redex of either kind; permutative rules (by priority)
/// come before β at the same node.
pub fn step_full(t: &Term, theta: &LabelSeq) -> Result<Option<(StepKind, Position, Term)>, PermError> {
    fn go(
        t: &Term,
        order: &LabelOrder,
        path: &mut Position,
    ) -> Result<Option<(StepKind, Position, Term)>, PermError> {
        for rule in PermRule::ALL {
            let r = contract(t, MarkedRule::Perm(rule), order, false).map_err(|e| match e {
                PermError::IncomparableLabels { a, b, .. } => PermError::IncomparableLabels { a, b, position: path.clone() },
                other => other,
            })?;
            if let Some(r) = r {
                return Ok(Some((StepKind::Perm(rule), path.clone(), r)));
            }
        }
        if let Some(r) = contract_beta(t) {
            return Ok(Some((StepKind::Beta, path.clone(), r)));
        }
        for (d, c) in t.children() {
            path.push(d);
            let found = go(c, order, path)?;
            path.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    let order = LabelOrder::with_theta(t, theta);
    Ok(go(t, &order, &mut Position::root())?.map(|(k, p, sub)| {
        let whole = t.replace_at(&p, sub).expect("position found by search");
        (k, p, whole)
    }))
}

/// First β-redex in pre-order.
pub fn step_leftmost_beta(t: &Term) -> Option<(Position, Term)> {
    fn go(t: &Term, path: &mut Position) -> Option<(Position, Term)> {
        if let Some(r) = contract_beta(t) {
            return Some((path.clone(), r));
        }
        for (d, c) in t.children() {
            path.push(d);
            let found = go(c, path);
            path.pop();
            if found.is_some() {
                return found;
            }
        }
        None
    }
    go(t, &mut Position::root()).map(|(p, sub)| {
        let whole = t.replace_at(&p, sub).expect("position found by search");
        (p, whole)
    })
}

/// Normal for both β and permutative reduction.
pub fn is_normal(t: &Term, theta: &LabelSeq) -> Result<bool, PermError> {
    Ok(beta_redexes(t).is_empty() && perm::step_perm_theta(t, theta)?.is_none())
}

/// Every single step available from `t`, of either kind.
pub fn all_steps(t: &Term, theta: &LabelSeq) -> Result<Vec<(StepKind, Position, Term)>, PermError> {
    let mut out: Vec<(StepKind, Position, Term)> = perm::all_perm_steps(t, theta)?
        .into_iter()
        .map(|(r, p, t)| (StepKind::Perm(r), p, t))
        .collect();
    for p in beta_redexes(t) {
        let r = step_beta(t, &p).expect("redex position");
        out.push((StepKind::Beta, p, r));
    }
    Ok(out)
}

fn budget_error(budget: usize, steps: usize, partial: Term, trace: Vec<TraceStep>) -> BetaError {
    BetaError::StepBudgetExceeded { budget, steps, partial: Box::new(partial), trace }
}

/// Drive `strategy` to a normal form or until the budget runs out.
pub fn reduce(term: &Term, strategy: Strategy, budget: usize) -> Result<Reduction, BetaError> {
    reduce_theta(term, strategy, &LabelSeq::empty(), budget)
}

pub fn reduce_theta(term: &Term, strategy: Strategy, theta: &LabelSeq, budget: usize) -> Result<Reduction, BetaError> {
    match strategy {
        Strategy::PermOnly => match perm::p_normalize_theta(term, theta, budget) {
            Ok((t, steps)) => Ok(Reduction {
                term: t,
                steps: steps.len(),
                trace: steps
                    .into_iter()
                    .map(|s| TraceStep { kind: StepKind::Perm(s.rule), position: s.position, term: s.after })
                    .collect(),
            }),
            Err(PermError::StepBudgetExceeded { budget, steps, partial, trace }) => Err(budget_error(
                budget,
                steps,
                *partial,
                trace
                    .into_iter()
                    .map(|s| TraceStep { kind: StepKind::Perm(s.rule), position: s.position, term: s.after })
                    .collect(),
            )),
            Err(e) => Err(e.into()),
        },
        Strategy::LeftmostBeta => {
            let mut cur = term.clone();
            let mut trace = Vec::new();
            while let Some((p, next)) = step_leftmost_beta(&cur) {
                if trace.len() >= budget {
                    return Err(budget_error(budget, trace.len(), cur, trace));
                }
                trace.push(TraceStep { kind: StepKind::Beta, position: p, term: next.clone() });
                cur = next;
            }
            Ok(Reduction { term: cur, steps: trace.len(), trace })
        }
        Strategy::FullLeftmost => {
            let mut cur = term.clone();
            let mut trace = Vec::new();
            while let Some((k, p, next)) = step_full(&cur, theta)? {
                if trace.len() >= budget {
                    return Err(budget_error(budget, trace.len(), cur, trace));
                }
                trace.push(TraceStep { kind: k, position: p, term: next.clone() });
                cur = next;
            }
            Ok(Reduction { term: cur, steps: trace.len(), trace })
        }
        Strategy::Complete => {
            let mut trace = Vec::new();
            let mut steps = 0;
            // Start from the permutative normal form, then develop.
            let (mut cur, psteps) = perm::p_normalize_theta(term, theta, budget)?;
            steps += psteps.len();
            for s in psteps {
                trace.push(TraceStep { kind: StepKind::Perm(s.rule), position: s.position, term: s.after });
            }
            loop {
                let marks = full_labeling(&cur);
                let n = mark_count(&marks);
                if n == 0 {
                    return Ok(Reduction { term: cur, trace, steps });
                }
                if steps + n > budget {
                    return Err(budget_error(budget, steps, cur, trace));
                }
                steps += n;
                let reduct = labeled_reduct(&marks);
                trace.push(TraceStep { kind: StepKind::ParBeta(n), position: Position::root(), term: reduct.clone() });
                match perm::p_normalize_theta(&reduct, theta, budget - steps) {
                    Ok((t, psteps)) => {
                        steps += psteps.len();
                        for s in psteps {
                            trace.push(TraceStep { kind: StepKind::Perm(s.rule), position: s.position, term: s.after });
                        }
                        cur = t;
                    }
                    Err(PermError::StepBudgetExceeded { partial, steps: done, .. }) => {
                        return Err(budget_error(budget, steps + done, *partial, trace))
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Strategy::Projective => crate::projective::reduce_projective(term, budget),
    }
}

/// Reduce choosing uniformly among all available steps.
pub fn reduce_random<R: Rng>(term: &Term, theta: &LabelSeq, rng: &mut R, budget: usize) -> Result<(Term, usize), BetaError> {
    let mut cur = term.clone();
    let mut steps = 0;
    loop {
        let mut all = all_steps(&cur, theta)?;
        if all.is_empty() {
            return Ok((cur, steps));
        }
        if steps >= budget {
            return Err(budget_error(budget, steps, cur, Vec::new()));
        }
        let i = rng.gen_range(0..all.len());
        cur = all.swap_remove(i).2;
        steps += 1;
    }
}

/// Reduce by flipping a coin for the kind of step (β or permutative) and
/// taking the last redex of that kind, falling back to a uniform choice when
/// no redex of that kind exists.
pub fn reduce_random_biased<R: Rng>(term: &Term, theta: &LabelSeq, rng: &mut R, budget: usize) -> Result<(Term, usize), BetaError> {
    let mut cur = term.clone();
    let mut steps = 0;
    loop {
        let mut all = all_steps(&cur, theta)?;
        if all.is_empty() {
            return Ok((cur, steps));
        }
        if steps >= budget {
            return Err(budget_error(budget, steps, cur, Vec::new()));
        }
        let want_beta = rng.gen_bool(0.5);
        let pick = all
            .iter()
            .rposition(|(k, _, _)| matches!(k, StepKind::Beta) == want_beta)
            .unwrap_or_else(|| rng.gen_range(0..all.len()));
        cur = all.swap_remove(pick).2;
        steps += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_labeled};

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn beta_basics() {
        assert!(step_beta(&p(r"(\x.x) y"), &Position::root()).unwrap().alpha_eq(&p("y")));
        assert!(step_beta(&p(r"(\x.y) (\z.z z)"), &Position::root()).unwrap().alpha_eq(&p("y")));
        assert!(matches!(step_beta(&p("x y"), &Position::root()), Err(BetaError::NotARedex(_))));
    }

    #[test]
    fn duplicated_generators_get_distinct_labels() {
        let t = p(r"(\x.x x) (!a.(u +[a] v))");
        let r = step_beta(&t, &Position::root()).unwrap();
        let (_, labels) = r.binders();
        assert_eq!(labels.len(), 2);
        assert_ne!(labels[0], labels[1]);
        assert!(r.alpha_eq(&p(r"(!a.(u +[a] v)) (!b.(u +[b] v))")));
    }

    #[test]
    fn labeled_reduct_examples() {
        let lt = parse_labeled(r"(\x.x x)* ((\y.y)* z)").unwrap();
        assert!(labeled_reduct(&lt).alpha_eq(&p("z z")));
        let lt = parse_labeled(r"(\x.x) y").unwrap();
        assert!(labeled_reduct(&lt).alpha_eq(&p(r"(\x.x) y")));
        let lt = parse_labeled(r"(\x.y)* z").unwrap();
        assert!(labeled_reduct(&lt).alpha_eq(&p("y")));
    }

    #[test]
    fn full_labeling_marks_every_redex() {
        let lt = full_labeling(&p(r"(\x.x) ((\y.y) z)"));
        assert_eq!(mark_count(&lt), 2);
        assert_eq!(mark_count(&full_labeling(&p("x y"))), 0);
    }

    #[test]
    fn labeled_p_steps_keep_marks() {
        let theta = LabelSeq::from_names("a").unwrap();
        let lt = parse_labeled(r"(\x.(u +[a] v))* w").unwrap();
        let r = labeled_p_step_theta(&lt, &theta).unwrap().unwrap();
        assert!(r.alpha_eq(&parse_labeled(r"((\x.u)* w) +[a] ((\x.v)* w)").unwrap()));
        let lt = parse_labeled(r"(\x.!a.u)* w").unwrap();
        let r = labeled_p_step(&lt).unwrap().unwrap();
        assert!(r.alpha_eq(&parse_labeled(r"!a.((\x.u)* w)").unwrap()));
        // without marks it is the plain step
        let t = p(r"!a.(\x.(u +[a] v)) w");
        let lt = t.map_annot(&mut |_| false);
        let r = labeled_p_step(&lt).unwrap().unwrap();
        let s = perm::step_perm(&t).unwrap().unwrap();
        assert!(r.alpha_eq_erased(&s.after));
    }

    #[test]
    fn complete_step_needs_a_labeling_of_the_term() {
        let t = p(r"(\x.x) y");
        assert!(complete_step(&t, &full_labeling(&p("z")), 100).is_err());
        assert!(complete_step(&t, &full_labeling(&t), 100).unwrap().alpha_eq(&p("y")));
        let nf = p(r"\x.x");
        assert!(complete_step(&nf, &full_labeling(&nf), 100).unwrap().alpha_eq(&nf));
    }

    #[test]
    fn omega_exhausts_the_budget() {
        let omega = p(r"(\x.x x) (\x.x x)");
        for s in [Strategy::LeftmostBeta, Strategy::FullLeftmost, Strategy::Complete] {
            assert!(matches!(reduce(&omega, s, 50), Err(BetaError::StepBudgetExceeded { .. })), "{s:?}");
        }
    }

    #[test]
    fn strategies_agree_on_a_small_term() {
        let t = p(r"(\f.f (f y)) (\z.z (+) w)");
        let full = reduce(&t, Strategy::FullLeftmost, 10_000).unwrap().term;
        let complete = reduce(&t, Strategy::Complete, 10_000).unwrap().term;
        assert!(full.alpha_eq(&complete), "{full} vs {complete}");
        assert_eq!(perm::classify_normal_form(&full), perm::NormalFormClass::FullNormal);
    }

    #[test]
    fn parallel_step_is_a_beta_sequence() {
        let t = p(r"(\x.x ((\y.y) x)) ((\z.z) w)");
        let lt = full_labeling(&t);
        let target = labeled_reduct(&lt);
        let r = reduce(&t, Strategy::LeftmostBeta, 100).unwrap().term;
        assert!(r.alpha_eq(&target));
    }
}
