//! Permutative reduction: the twelve rewrite rules that distribute
//! abstraction, application and generators over choices and eliminate
//! generators.
//!
//! The engine is generic over application annotations. On marked terms, a
//! marked redex `(\x.M)* N` shields its abstraction from `plusAbs`/`boxAbs`;
//! two redex-level macro steps take their place.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

use crate::syntax::{rename_label, rename_var, Annot, Dir, LabelOrder, LabelSeq, Node, Position, Term};

pub const DEFAULT_MAX_STEPS: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PermRule {
    Idem,
    CancelL,
    CancelR,
    PlusAbs,
    PlusFun,
    PlusArg,
    PlusL,
    PlusR,
    PlusBox,
    BoxVoid,
    BoxAbs,
    BoxFun,
}

impl PermRule {
    /// All rules in priority order.
    pub const ALL: [PermRule; 12] = [
        PermRule::Idem,
        PermRule::CancelL,
        PermRule::CancelR,
        PermRule::PlusAbs,
        PermRule::PlusFun,
        PermRule::PlusArg,
        PermRule::PlusL,
        PermRule::PlusR,
        PermRule::PlusBox,
        PermRule::BoxVoid,
        PermRule::BoxAbs,
        PermRule::BoxFun,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PermRule::Idem => "idem",
            PermRule::CancelL => "cancelL",
            PermRule::CancelR => "cancelR",
            PermRule::PlusAbs => "plusAbs",
            PermRule::PlusFun => "plusFun",
            PermRule::PlusArg => "plusArg",
            PermRule::PlusL => "plusL",
            PermRule::PlusR => "plusR",
            PermRule::PlusBox => "plusBox",
            PermRule::BoxVoid => "boxVoid",
            PermRule::BoxAbs => "boxAbs",
            PermRule::BoxFun => "boxFun",
        }
    }
}

impl fmt::Display for PermRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PermRule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PermRule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| format!("unknown rule `{s}`"))
    }
}

/// A rule of the marked system: a plain permutative rule, or one of the two
/// macro steps at a marked redex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MarkedRule {
    Perm(PermRule),
    /// `(\x.N +a M)* P  ->  (\x.N)* P +a (\x.M)* P`
    RedexPlus,
    /// `(\x.!a.N)* M  ->  !a.(\x.N)* M`
    RedexBox,
}

impl MarkedRule {
    /// Priority order; each macro sits next to the plain rule it replaces.
    pub const ALL: [MarkedRule; 14] = [
        MarkedRule::Perm(PermRule::Idem),
        MarkedRule::Perm(PermRule::CancelL),
        MarkedRule::Perm(PermRule::CancelR),
        MarkedRule::Perm(PermRule::PlusAbs),
        MarkedRule::Perm(PermRule::PlusFun),
        MarkedRule::RedexPlus,
        MarkedRule::Perm(PermRule::PlusArg),
        MarkedRule::Perm(PermRule::PlusL),
        MarkedRule::Perm(PermRule::PlusR),
        MarkedRule::Perm(PermRule::PlusBox),
        MarkedRule::Perm(PermRule::BoxVoid),
        MarkedRule::Perm(PermRule::BoxAbs),
        MarkedRule::Perm(PermRule::BoxFun),
        MarkedRule::RedexBox,
    ];

    /// Elementary steps this rule stands for.
    pub fn cost(self) -> usize {
        match self {
            MarkedRule::Perm(_) => 1,
            MarkedRule::RedexPlus | MarkedRule::RedexBox => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MarkedRule::Perm(r) => r.name(),
            MarkedRule::RedexPlus => "plusRedex",
            MarkedRule::RedexBox => "boxRedex",
        }
    }
}

impl fmt::Display for MarkedRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One recorded rewrite.
#[derive(Clone, Debug)]
pub struct PermStep {
    pub rule: PermRule,
    pub position: Position,
    pub before: Term,
    pub after: Term,
}

#[derive(Debug, Clone, Error)]
pub enum PermError {
    #[error("labels `{a}` and `{b}` are incomparable at {position}")]
    IncomparableLabels { a: String, b: String, position: Position },
    #[error("step budget of {budget} exhausted after {steps} steps")]
    StepBudgetExceeded { budget: usize, steps: usize, partial: Box<Term>, trace: Vec<PermStep> },
    #[error("no subterm at {0}")]
    InvalidPosition(Position),
}

fn compare_for(
    order: &LabelOrder,
    a: &crate::syntax::Label,
    b: &crate::syntax::Label,
) -> Result<bool, PermError> {
    // Whether `a < b`; callers have already excluded `a == b`.
    if order.less(a, b) {
        Ok(true)
    } else if order.less(b, a) {
        Ok(false)
    } else {
        Err(PermError::IncomparableLabels {
            a: a.name().to_owned(),
            b: b.name().to_owned(),
            position: Position::root(),
        })
    }
}

fn bx<A>(t: Node<A>) -> Box<Node<A>> {
    Box::new(t)
}

/// Contract `rule` at the root of `t`. `shielded` is set when `t` is the
/// abstraction of a marked redex.
pub(crate) fn contract<A: Annot>(
    t: &Node<A>,
    rule: MarkedRule,
    order: &LabelOrder,
    shielded: bool,
) -> Result<Option<Node<A>>, PermError> {
    use MarkedRule::{Perm, RedexBox, RedexPlus};
    use PermRule::*;
    Ok(match (rule, t) {
        (Perm(Idem), Node::Choice(_, l, r)) if l.alpha_eq_erased(r) => Some((**l).clone()),
        (Perm(CancelL), Node::Choice(a, l, p)) => match &**l {
            Node::Choice(b, n, _) if a == b => Some(Node::Choice(a.clone(), n.clone(), p.clone())),
            _ => None,
        },
        (Perm(CancelR), Node::Choice(a, n, r)) => match &**r {
            Node::Choice(b, _, p) if a == b => Some(Node::Choice(a.clone(), n.clone(), p.clone())),
            _ => None,
        },
        (Perm(PlusAbs), Node::Abs(x, body)) if !shielded => match &**body {
            Node::Choice(a, n, m) => {
                let x2 = x.copy_fresh();
                Some(Node::Choice(
                    a.clone(),
                    bx(Node::Abs(x.clone(), n.clone())),
                    bx(Node::Abs(x2.clone(), bx(rename_var(m, x, &x2)))),
                ))
            }
            _ => None,
        },
        (Perm(PlusFun), Node::App(f, p, ann)) => match &**f {
            Node::Choice(a, n, m) => Some(Node::Choice(
                a.clone(),
                bx(Node::App(n.clone(), p.clone(), ann.clone())),
                bx(Node::App(m.clone(), bx(p.refreshed(true)), ann.clone())),
            )),
            _ => None,
        },
        (Perm(PlusArg), Node::App(n, x, ann)) => match &**x {
            Node::Choice(a, m, p) => Some(Node::Choice(
                a.clone(),
                bx(Node::App(n.clone(), m.clone(), ann.clone())),
                bx(Node::App(bx(n.refreshed(true)), p.clone(), ann.clone())),
            )),
            _ => None,
        },
        (Perm(PlusL), Node::Choice(b, l, p)) => match &**l {
            Node::Choice(a, n, m) if a != b && compare_for(order, a, b)? => Some(Node::Choice(
                a.clone(),
                bx(Node::Choice(b.clone(), n.clone(), p.clone())),
                bx(Node::Choice(b.clone(), m.clone(), bx(p.refreshed(true)))),
            )),
            _ => None,
        },
        (Perm(PlusR), Node::Choice(b, n, r)) => match &**r {
            Node::Choice(a, m, p) if a != b && compare_for(order, a, b)? => Some(Node::Choice(
                a.clone(),
                bx(Node::Choice(b.clone(), n.clone(), m.clone())),
                bx(Node::Choice(b.clone(), bx(n.refreshed(true)), p.clone())),
            )),
            _ => None,
        },
        (Perm(PlusBox), Node::Gen(b, body)) => match &**body {
            Node::Choice(a, n, m) if a != b => {
                let b2 = b.copy_fresh();
                Some(Node::Choice(
                    a.clone(),
                    bx(Node::Gen(b.clone(), n.clone())),
                    bx(Node::Gen(b2.clone(), bx(rename_label(m, b, &b2)))),
                ))
            }
            _ => None,
        },
        (Perm(BoxVoid), Node::Gen(a, n)) if !n.has_free_label(a) => Some((**n).clone()),
        (Perm(BoxAbs), Node::Abs(x, body)) if !shielded => match &**body {
            Node::Gen(a, n) => Some(Node::Gen(a.clone(), bx(Node::Abs(x.clone(), n.clone())))),
            _ => None,
        },
        (Perm(BoxFun), Node::App(f, m, ann)) => match &**f {
            Node::Gen(a, n) => Some(Node::Gen(a.clone(), bx(Node::App(n.clone(), m.clone(), ann.clone())))),
            _ => None,
        },
        (RedexPlus, Node::App(f, p, ann)) if ann.is_marked() => match &**f {
            Node::Abs(x, body) => match &**body {
                Node::Choice(a, n, m) => {
                    let x2 = x.copy_fresh();
                    Some(Node::Choice(
                        a.clone(),
                        bx(Node::App(bx(Node::Abs(x.clone(), n.clone())), p.clone(), ann.clone())),
                        bx(Node::App(
                            bx(Node::Abs(x2.clone(), bx(rename_var(m, x, &x2)))),
                            bx(p.refreshed(true)),
                            ann.clone(),
                        )),
                    ))
                }
                _ => None,
            },
            _ => None,
        },
        (RedexBox, Node::App(f, m, ann)) if ann.is_marked() => match &**f {
            Node::Abs(x, body) => match &**body {
                Node::Gen(a, n) => Some(Node::Gen(
                    a.clone(),
                    bx(Node::App(bx(Node::Abs(x.clone(), n.clone())), m.clone(), ann.clone())),
                )),
                _ => None,
            },
            _ => None,
        },
        _ => None,
    })
}

fn with_position<T>(r: Result<T, PermError>, pos: &Position) -> Result<T, PermError> {
    r.map_err(|e| match e {
        PermError::IncomparableLabels { a, b, .. } => PermError::IncomparableLabels { a, b, position: pos.clone() },
        other => other,
    })
}

/// First redex in pre-order, rules tried by priority at each node.
fn find_first<A: Annot>(
    t: &Node<A>,
    order: &LabelOrder,
    shielded: bool,
    path: &mut Position,
) -> Result<Option<(MarkedRule, Position, Node<A>)>, PermError> {
    for rule in MarkedRule::ALL {
        if let Some(r) = with_position(contract(t, rule, order, shielded), path)? {
            return Ok(Some((rule, path.clone(), r)));
        }
    }
    let marked_app = matches!(t, Node::App(_, _, m) if m.is_marked());
    for (d, c) in t.children() {
        path.push(d);
        let found = find_first(c, order, marked_app && d == Dir::Fun, path)?;
        path.pop();
        if found.is_some() {
            return Ok(found);
        }
    }
    Ok(None)
}

fn collect_all<A: Annot>(
    t: &Node<A>,
    order: &LabelOrder,
    shielded: bool,
    path: &mut Position,
    out: &mut Vec<(MarkedRule, Position, Node<A>)>,
) -> Result<(), PermError> {
    for rule in MarkedRule::ALL {
        if let Some(r) = with_position(contract(t, rule, order, shielded), path)? {
            out.push((rule, path.clone(), r));
        }
    }
    let marked_app = matches!(t, Node::App(_, _, m) if m.is_marked());
    for (d, c) in t.children() {
        path.push(d);
        collect_all(c, order, marked_app && d == Dir::Fun, path, out)?;
        path.pop();
    }
    Ok(())
}

fn is_shielded<A: Annot>(t: &Node<A>, pos: &Position) -> bool {
    let s = pos.as_slice();
    match s.split_last() {
        Some((Dir::Fun, parent)) => {
            let parent: Position = parent.to_vec().into();
            matches!(t.subterm(&parent), Some(Node::App(_, _, m)) if m.is_marked())
        }
        _ => false,
    }
}

/// One leftmost-outermost step of the (marked) system, returning the rule,
/// its position and the whole rewritten term.
pub(crate) fn step_generic<A: Annot>(
    t: &Node<A>,
    theta: &LabelSeq,
) -> Result<Option<(MarkedRule, Position, Node<A>)>, PermError> {
    let order = LabelOrder::with_theta(t, theta);
    let mut path = Position::root();
    Ok(find_first(t, &order, false, &mut path)?.map(|(rule, pos, sub)| {
        let whole = t.replace_at(&pos, sub).expect("position found by search");
        (rule, pos, whole)
    }))
}

/// Every redex of the (marked) system, with the whole rewritten term.
pub(crate) fn all_steps_generic<A: Annot>(
    t: &Node<A>,
    theta: &LabelSeq,
) -> Result<Vec<(MarkedRule, Position, Node<A>)>, PermError> {
    let order = LabelOrder::with_theta(t, theta);
    let mut out = Vec::new();
    collect_all(t, &order, false, &mut Position::root(), &mut out)?;
    Ok(out
        .into_iter()
        .map(|(rule, pos, sub)| {
            let whole = t.replace_at(&pos, sub).expect("position found by search");
            (rule, pos, whole)
        })
        .collect())
}

/// Normalize with the deterministic strategy, reporting each step as
/// `(rule, position, before, after)`. Returns the normal form and the number
/// of elementary steps taken.
#[allow(clippy::type_complexity, clippy::result_large_err)]
pub(crate) fn normalize_generic<A: Annot>(
    t: &Node<A>,
    theta: &LabelSeq,
    max_steps: usize,
    mut on_step: impl FnMut(MarkedRule, &Position, &Node<A>, &Node<A>),
) -> Result<(Node<A>, usize), (PermError, Node<A>, usize)> {
    let mut cur = t.clone();
    let mut steps = 0;
    loop {
        match step_generic(&cur, theta) {
            Err(e) => return Err((e, cur, steps)),
            Ok(None) => return Ok((cur, steps)),
            Ok(Some((rule, pos, next))) => {
                if steps + rule.cost() > max_steps {
                    let e = PermError::StepBudgetExceeded {
                        budget: max_steps,
                        steps,
                        partial: Box::new(cur.erase()),
                        trace: Vec::new(),
                    };
                    return Err((e, cur, steps));
                }
                steps += rule.cost();
                on_step(rule, &pos, &cur, &next);
                cur = next;
            }
        }
    }
}

fn plain(rule: MarkedRule) -> PermRule {
    match rule {
        MarkedRule::Perm(r) => r,
        _ => unreachable!("macro steps need a marked redex"),
    }
}

/// Apply `rule` at `pos`, with label comparisons under `theta`.
pub fn try_rule_theta(term: &Term, rule: PermRule, pos: &Position, theta: &LabelSeq) -> Result<Option<Term>, PermError> {
    let sub = term.subterm(pos).ok_or_else(|| PermError::InvalidPosition(pos.clone()))?;
    let order = LabelOrder::with_theta(term, theta);
    let r = with_position(contract(sub, MarkedRule::Perm(rule), &order, is_shielded(term, pos)), pos)?;
    Ok(r.map(|s| term.replace_at(pos, s).expect("valid position")))
}

/// Apply `rule` at `pos` in a label-closed term.
pub fn try_rule(term: &Term, rule: PermRule, pos: &Position) -> Result<Option<Term>, PermError> {
    try_rule_theta(term, rule, pos, &LabelSeq::empty())
}

/// The leftmost-outermost step, rules tried in priority order.
pub fn step_perm(term: &Term) -> Result<Option<PermStep>, PermError> {
    step_perm_theta(term, &LabelSeq::empty())
}

pub fn step_perm_theta(term: &Term, theta: &LabelSeq) -> Result<Option<PermStep>, PermError> {
    Ok(step_generic(term, theta)?.map(|(rule, position, after)| PermStep {
        rule: plain(rule),
        position,
        before: term.clone(),
        after,
    }))
}

/// Every applicable `(rule, position, result)`.
pub fn all_perm_steps(term: &Term, theta: &LabelSeq) -> Result<Vec<(PermRule, Position, Term)>, PermError> {
    Ok(all_steps_generic(term, theta)?
        .into_iter()
        .map(|(r, p, t)| (plain(r), p, t))
        .collect())
}

/// Normalize, recording every step.
pub fn p_normalize(term: &Term, max_steps: usize) -> Result<(Term, Vec<PermStep>), PermError> {
    p_normalize_theta(term, &LabelSeq::empty(), max_steps)
}

pub fn p_normalize_theta(term: &Term, theta: &LabelSeq, max_steps: usize) -> Result<(Term, Vec<PermStep>), PermError> {
    let mut trace = Vec::new();
    let r = normalize_generic(term, theta, max_steps, |rule, pos, before, after| {
        trace.push(PermStep { rule: plain(rule), position: pos.clone(), before: before.clone(), after: after.clone() })
    });
    match r {
        Ok((t, _)) => Ok((t, trace)),
        Err((PermError::StepBudgetExceeded { budget, steps, partial, .. }, _, _)) => {
            Err(PermError::StepBudgetExceeded { budget, steps, partial, trace })
        }
        Err((e, _, _)) => Err(e),
    }
}

/// Normal form only, without keeping a trace.
pub fn p_normal_form(term: &Term, max_steps: usize) -> Result<Term, PermError> {
    p_normal_form_theta(term, &LabelSeq::empty(), max_steps)
}

pub fn p_normal_form_theta(term: &Term, theta: &LabelSeq, max_steps: usize) -> Result<Term, PermError> {
    normalize_generic(term, theta, max_steps, |_, _, _, _| {})
        .map(|(t, _)| t)
        .map_err(|(e, _, _)| e)
}

/// Normalize choosing uniformly among all redexes at every step.
pub fn p_normalize_random<R: Rng>(term: &Term, theta: &LabelSeq, rng: &mut R, max_steps: usize) -> Result<Term, PermError> {
    let mut cur = term.clone();
    for steps in 0.. {
        let mut all = all_perm_steps(&cur, theta)?;
        if all.is_empty() {
            return Ok(cur);
        }
        if steps >= max_steps {
            return Err(PermError::StepBudgetExceeded {
                budget: max_steps,
                steps,
                partial: Box::new(cur),
                trace: Vec::new(),
            });
        }
        let i = rng.gen_range(0..all.len());
        cur = all.swap_remove(i).2;
    }
    unreachable!()
}

/// Where a term sits with respect to the two normal-form grammars.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormalFormClass {
    /// Permutative redexes remain.
    Neither,
    /// Normal for permutative reduction, but β-redexes remain.
    PNormal,
    /// Normal for full reduction.
    FullNormal,
}

impl NormalFormClass {
    pub fn is_p_normal(self) -> bool {
        self != NormalFormClass::Neither
    }
}

/// `!a.(L +a R)` with `a` used by neither branch and distinct branches.
fn as_sum(t: &Term) -> Option<(&Term, &Term)> {
    let Node::Gen(a, body) = t else { return None };
    let Node::Choice(b, l, r) = &**body else { return None };
    (a == b && !l.has_free_label(a) && !r.has_free_label(a) && !l.alpha_eq(r)).then_some((&**l, &**r))
}

fn is_p0(t: &Term) -> bool {
    match as_sum(t) {
        Some((l, r)) => is_p0(l) && is_p0(r),
        None => is_p1(t),
    }
}

fn is_p1(t: &Term) -> bool {
    match t {
        Node::Var(_) => true,
        Node::Abs(_, b) => is_p1(b),
        Node::App(f, x, _) => is_p1(f) && is_p0(x),
        _ => false,
    }
}

fn is_n0(t: &Term) -> bool {
    match as_sum(t) {
        Some((l, r)) => is_n0(l) && is_n0(r),
        None => is_n1(t),
    }
}

fn is_n1(t: &Term) -> bool {
    match t {
        Node::Abs(_, b) => is_n1(b),
        _ => is_n2(t),
    }
}

fn is_n2(t: &Term) -> bool {
    match t {
        Node::Var(_) => true,
        Node::App(f, x, _) => is_n2(f) && is_n0(x),
        _ => false,
    }
}

/// Grammar membership for the normal forms of permutative and of full
/// reduction on label-closed terms.
pub fn classify_normal_form(term: &Term) -> NormalFormClass {
    if is_n0(term) {
        NormalFormClass::FullNormal
    } else if is_p0(term) {
        NormalFormClass::PNormal
    } else {
        NormalFormClass::Neither
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use super::*;
    use crate::syntax::{parse, parse_open};

    fn p(s: &str) -> Term {
        parse(s).unwrap()
    }

    #[test]
    fn idem_under_generator() {
        let t = p(r"!a.(x +[a] x)");
        let pos: Position = "root.body".parse().unwrap();
        let r = try_rule(&t, PermRule::Idem, &pos).unwrap().unwrap();
        assert!(r.alpha_eq(&p("!a.x")));
        let s = step_perm(&t).unwrap().unwrap();
        assert_eq!(s.rule, PermRule::Idem);
        let (nf, trace) = p_normalize(&t, 100).unwrap();
        assert!(nf.alpha_eq(&p("x")));
        let rules: Vec<_> = trace.iter().map(|s| s.rule).collect();
        assert_eq!(rules, vec![PermRule::Idem, PermRule::BoxVoid]);
    }

    #[test]
    fn cancel_left() {
        let t = parse_open(r"(x +[a] y) +[a] z").unwrap();
        let theta = LabelSeq::from_names("a").unwrap();
        let r = try_rule_theta(&t, PermRule::CancelL, &Position::root(), &theta).unwrap().unwrap();
        assert!(r.alpha_eq(&parse_open("x +[a] z").unwrap()));
    }

    #[test]
    fn plus_left_needs_order() {
        let t = parse_open(r"(x +[a] y) +[b] z").unwrap();
        // head is innermost: b inside a, so a < b
        let theta = LabelSeq::from_names("b,a").unwrap();
        let r = try_rule_theta(&t, PermRule::PlusL, &Position::root(), &theta).unwrap().unwrap();
        assert!(r.alpha_eq(&parse_open(r"(x +[b] z) +[a] (y +[b] z)").unwrap()));
        let flipped = LabelSeq::from_names("a,b").unwrap();
        assert!(try_rule_theta(&t, PermRule::PlusL, &Position::root(), &flipped).unwrap().is_none());
        let e = try_rule(&t, PermRule::PlusL, &Position::root()).unwrap_err();
        assert!(matches!(e, PermError::IncomparableLabels { .. }));
    }

    #[test]
    fn box_abs_under_application() {
        let t = p(r"(\x.!a.x) y");
        let s = step_perm(&t).unwrap().unwrap();
        assert_eq!(s.rule, PermRule::BoxAbs);
        assert_eq!(s.position.to_string(), "root.fun");
        assert!(s.after.alpha_eq(&p(r"(!a.\x.x) y")));
        assert!(step_perm(&p("x")).unwrap().is_none());
    }

    #[test]
    fn nested_generators_normal_form() {
        let t = p(r"!a.!b.((x +[a] y) +[b] z)");
        let (nf, trace) = p_normalize(&t, 100).unwrap();
        assert!(nf.alpha_eq(&p(r"!a.((!b.(x +[b] z)) +[a] (!b.(y +[b] z)))")), "{nf}");
        assert!(nf.has_distinct_binders());
        assert_eq!(trace[0].rule, PermRule::PlusL);
        assert_eq!(classify_normal_form(&nf), NormalFormClass::FullNormal);
    }

    /// Every reachable term, exploring all rules at all positions.
    fn reachable_normal_forms(t: &Term) -> Vec<Term> {
        let mut seen: HashMap<String, Term> = HashMap::new();
        let mut todo = vec![t.clone()];
        let mut nfs: HashMap<String, Term> = HashMap::new();
        while let Some(cur) = todo.pop() {
            let key = cur.canonical_key();
            if seen.contains_key(&key) {
                continue;
            }
            seen.insert(key.clone(), cur.clone());
            let next = all_perm_steps(&cur, &LabelSeq::empty()).unwrap();
            if next.is_empty() {
                nfs.insert(key, cur);
            }
            todo.extend(next.into_iter().map(|(_, _, t)| t));
            assert!(seen.len() < 20_000);
        }
        nfs.into_values().collect()
    }

    #[test]
    fn exhaustive_exploration_has_unique_normal_form() {
        for s in [
            r"!a.!b.((x +[a] y) +[b] z)",
            r"!a.(x +[a] y) +[a] (x +[a] y)",
            r"!a.!b.(\x.(x +[a] y)) +[b] (w +[a] z)",
            r"(\x.!a.x +[a] !b.(y +[b] x)) (u (+) v)",
        ] {
            let t = p(s);
            let nfs = reachable_normal_forms(&t);
            assert_eq!(nfs.len(), 1, "{s}");
            let nf = p_normal_form(&t, 1000).unwrap();
            assert!(nfs[0].alpha_eq(&nf), "{s}: {} vs {nf}", nfs[0]);
        }
    }

    #[test]
    fn duplicated_copies_get_fresh_binders() {
        let t = p(r"!a.(x +[a] y) (\z.!b.(z +[b] z))");
        let nf = p_normal_form(&t, 1000).unwrap();
        assert!(nf.has_distinct_binders(), "{nf}");
        let t = p(r"!a.\x.(x +[a] y)");
        let (nf, _) = p_normalize(&t, 100).unwrap();
        assert!(nf.alpha_eq(&p(r"!a.((\x.x) +[a] (\x.y))")));
        assert!(nf.has_distinct_binders());
    }

    #[test]
    fn plus_box_renames_the_copy() {
        let t = p(r"!a.!b.((x +[b] y) +[a] z)");
        let pos: Position = "root.body".parse().unwrap();
        let r = try_rule(&t, PermRule::PlusBox, &pos).unwrap().unwrap();
        assert!(r.has_distinct_binders());
        assert!(r.alpha_eq(&p(r"!a.(!b.(x +[b] y)) +[a] (!b.z)")));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_normal_form(&p("x (y (+) z)")), NormalFormClass::FullNormal);
        assert_eq!(classify_normal_form(&p(r"(\x.x) y")), NormalFormClass::PNormal);
        assert_eq!(classify_normal_form(&p(r"!a.(x +[a] y) z")), NormalFormClass::Neither);
        assert_eq!(classify_normal_form(&p(r"!a.(x +[a] x)")), NormalFormClass::Neither);
        assert_eq!(classify_normal_form(&p(r"\x.x (+) y")), NormalFormClass::Neither);
    }

    #[test]
    fn budget_is_reported_with_partial_trace() {
        let t = p(r"!a.!b.!c.(((x +[a] y) +[b] z) +[c] w)");
        let e = p_normalize(&t, 2).unwrap_err();
        match e {
            PermError::StepBudgetExceeded { budget, trace, .. } => {
                assert_eq!(budget, 2);
                assert_eq!(trace.len(), 2);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn marked_macros() {
        use crate::syntax::parse_labeled;
        let theta = LabelSeq::from_names("a").unwrap();
        let t = parse_labeled(r"(\x.(u +[a] v))* w").unwrap();
        let (rule, _, r) = step_generic(&t, &theta).unwrap().unwrap();
        assert_eq!(rule, MarkedRule::RedexPlus);
        assert!(r.alpha_eq(&parse_labeled(r"((\x.u)* w) +[a] ((\x.v)* w)").unwrap()), "{r}");
        let t = parse_labeled(r"(\x.!a.u)* w").unwrap();
        let (rule, _, r) = step_generic(&t, &LabelSeq::empty()).unwrap().unwrap();
        assert_eq!(rule, MarkedRule::RedexBox);
        let (nf, steps) = normalize_generic(&t, &LabelSeq::empty(), 100, |_, _, _, _| {}).unwrap();
        assert!(r.alpha_eq(&parse_labeled(r"!a.((\x.u)* w)").unwrap()));
        assert!(nf.alpha_eq(&parse_labeled(r"(\x.u)* w").unwrap()));
        assert_eq!(steps, 3);
    }
}
