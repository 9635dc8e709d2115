//! Call-by-name and call-by-value interpretations of a source probabilistic
//! λ-calculus with a single, unlabelled sum.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::syntax::parse::{parse_surface, Surface};
use crate::syntax::{label_judgment, Dir, Label, LabelSeq, ParseError, Position, Term, Var};

/// Source terms: `x | λx.N | M N | M ⊕ N`.
#[derive(Clone, Debug)]
pub enum SourceTerm {
    Var(Var),
    Abs(Var, Box<SourceTerm>),
    App(Box<SourceTerm>, Box<SourceTerm>),
    Sum(Box<SourceTerm>, Box<SourceTerm>),
}

impl SourceTerm {
    pub fn var(x: Var) -> Self {
        SourceTerm::Var(x)
    }

    pub fn abs(x: Var, body: SourceTerm) -> Self {
        SourceTerm::Abs(x, Box::new(body))
    }

    pub fn app(f: SourceTerm, a: SourceTerm) -> Self {
        SourceTerm::App(Box::new(f), Box::new(a))
    }

    pub fn sum(l: SourceTerm, r: SourceTerm) -> Self {
        SourceTerm::Sum(Box::new(l), Box::new(r))
    }

    /// Deterministic terms `V ::= x | λx.V | V W`.
    pub fn is_value(&self) -> bool {
        match self {
            SourceTerm::Var(_) => true,
            SourceTerm::Abs(_, b) => b.is_value(),
            SourceTerm::App(f, a) => f.is_value() && a.is_value(),
            SourceTerm::Sum(..) => false,
        }
    }

    pub fn sum_count(&self) -> usize {
        match self {
            SourceTerm::Var(_) => 0,
            SourceTerm::Abs(_, b) => b.sum_count(),
            SourceTerm::App(l, r) => l.sum_count() + r.sum_count(),
            SourceTerm::Sum(l, r) => 1 + l.sum_count() + r.sum_count(),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            SourceTerm::Var(_) => 1,
            SourceTerm::Abs(_, b) => 1 + b.size(),
            SourceTerm::App(l, r) | SourceTerm::Sum(l, r) => 1 + l.size() + r.size(),
        }
    }

    fn has_free(&self, x: &Var) -> bool {
        match self {
            SourceTerm::Var(y) => y == x,
            SourceTerm::Abs(y, b) => y != x && b.has_free(x),
            SourceTerm::App(l, r) | SourceTerm::Sum(l, r) => l.has_free(x) || r.has_free(x),
        }
    }

    /// Copy with fresh binder ids.
    fn refreshed(&self) -> SourceTerm {
        fn go(t: &SourceTerm, map: &mut HashMap<Var, Var>) -> SourceTerm {
            match t {
                SourceTerm::Var(x) => SourceTerm::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
                SourceTerm::Abs(x, b) => {
                    let y = x.reborn();
                    let prev = map.insert(x.clone(), y.clone());
                    let body = go(b, map);
                    crate::syntax::term::restore(map, x.clone(), prev);
                    SourceTerm::abs(y, body)
                }
                SourceTerm::App(l, r) => SourceTerm::app(go(l, map), go(r, map)),
                SourceTerm::Sum(l, r) => SourceTerm::sum(go(l, map), go(r, map)),
            }
        }
        go(self, &mut HashMap::new())
    }

    /// Capture-avoiding `self[v/x]`.
    pub fn substitute(&self, x: &Var, v: &SourceTerm) -> SourceTerm {
        match self {
            SourceTerm::Var(y) if y == x => v.refreshed(),
            SourceTerm::Var(_) => self.clone(),
            SourceTerm::Abs(y, _) if y == x => self.clone(),
            SourceTerm::Abs(y, b) => {
                if v.has_free(y) {
                    let z = y.reborn();
                    let b = b.substitute(y, &SourceTerm::Var(z.clone()));
                    SourceTerm::abs(z, b.substitute(x, v))
                } else {
                    SourceTerm::abs(y.clone(), b.substitute(x, v))
                }
            }
            SourceTerm::App(l, r) => SourceTerm::app(l.substitute(x, v), r.substitute(x, v)),
            SourceTerm::Sum(l, r) => SourceTerm::sum(l.substitute(x, v), r.substitute(x, v)),
        }
    }

    pub fn subterm(&self, pos: &Position) -> Option<&SourceTerm> {
        let mut cur = self;
        for d in pos.iter() {
            cur = match (cur, d) {
                (SourceTerm::Abs(_, b), Dir::Body) => b,
                (SourceTerm::App(f, _), Dir::Fun) => f,
                (SourceTerm::App(_, a), Dir::Arg) => a,
                (SourceTerm::Sum(l, _), Dir::Left) => l,
                (SourceTerm::Sum(_, r), Dir::Right) => r,
                _ => return None,
            };
        }
        Some(cur)
    }

    pub fn replace_at(&self, pos: &Position, new: SourceTerm) -> Option<SourceTerm> {
        fn go(t: &SourceTerm, path: &[Dir], new: SourceTerm) -> Option<SourceTerm> {
            let Some((d, rest)) = path.split_first() else { return Some(new) };
            Some(match (t, d) {
                (SourceTerm::Abs(x, b), Dir::Body) => SourceTerm::abs(x.clone(), go(b, rest, new)?),
                (SourceTerm::App(f, a), Dir::Fun) => SourceTerm::app(go(f, rest, new)?, (**a).clone()),
                (SourceTerm::App(f, a), Dir::Arg) => SourceTerm::app((**f).clone(), go(a, rest, new)?),
                (SourceTerm::Sum(l, r), Dir::Left) => SourceTerm::sum(go(l, rest, new)?, (**r).clone()),
                (SourceTerm::Sum(l, r), Dir::Right) => SourceTerm::sum((**l).clone(), go(r, rest, new)?),
                _ => return None,
            })
        }
        go(self, pos.as_slice(), new)
    }

    /// Same shape with sums drawn as choices on a reserved free label; used
    /// for printing and α-comparison.
    fn shadow(&self) -> Term {
        match self {
            SourceTerm::Var(x) => Term::var(x.clone()),
            SourceTerm::Abs(x, b) => Term::abs(x.clone(), b.shadow()),
            SourceTerm::App(l, r) => Term::app(l.shadow(), r.shadow()),
            SourceTerm::Sum(l, r) => Term::choice(Label::free(SUM_LABEL), l.shadow(), r.shadow()),
        }
    }

    pub fn alpha_eq(&self, other: &SourceTerm) -> bool {
        self.shadow().alpha_eq(&other.shadow())
    }
}

const SUM_LABEL: &str = "⊕";

impl fmt::Display for SourceTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = self.shadow().to_string();
        f.write_str(&s.replace(&format!(" +[{SUM_LABEL}] "), " (+) "))
    }
}

/// Parse a source term. `(+)` is the source sum; labelled choices and
/// generators are rejected.
pub fn parse_source(text: &str) -> Result<SourceTerm, ParseError> {
    fn go(s: &Surface, scope: &mut HashMap<String, Vec<Var>>) -> Result<SourceTerm, ParseError> {
        Ok(match s {
            Surface::Var(n) => {
                SourceTerm::Var(scope.get(n).and_then(|v| v.last().cloned()).unwrap_or_else(|| Var::free(n)))
            }
            Surface::Abs(n, b) => {
                let x = Var::fresh(n);
                scope.entry(n.clone()).or_default().push(x.clone());
                let body = go(b, scope);
                scope.get_mut(n).map(Vec::pop);
                SourceTerm::abs(x, body?)
            }
            Surface::App(f, a, _) => SourceTerm::app(go(f, scope)?, go(a, scope)?),
            Surface::Sum(l, r) => SourceTerm::sum(go(l, scope)?, go(r, scope)?),
            Surface::Choice(n, _, _, loc) => {
                return Err(loc.forbidden(format!("labelled choice `+[{n}]` is not allowed in source terms; use `(+)`")))
            }
            Surface::Gen(n, _, loc) => {
                return Err(loc.forbidden(format!("generator `!{n}` is not allowed in source terms")))
            }
        })
    }
    go(&parse_surface(text, false)?, &mut HashMap::new())
}

/// Label names `a`, `b`, ... handed out in allocation order.
struct LabelSupply(usize);

impl LabelSupply {
    fn next(&mut self) -> Label {
        let i = self.0;
        self.0 += 1;
        let letter = (b'a' + (i % 26) as u8) as char;
        if i < 26 {
            Label::fresh(&letter.to_string())
        } else {
            Label::fresh(&format!("{letter}{}", i / 26))
        }
    }
}

/// Call-by-name: each sum becomes `!a.(L +[a] R)` in place. Labels are
/// allocated left to right, children first.
pub fn translate_cbn(src: &SourceTerm) -> Term {
    fn go(t: &SourceTerm, s: &mut LabelSupply) -> Term {
        match t {
            SourceTerm::Var(x) => Term::var(x.clone()),
            SourceTerm::Abs(x, b) => Term::abs(x.clone(), go(b, s)),
            SourceTerm::App(l, r) => {
                let l = go(l, s);
                Term::app(l, go(r, s))
            }
            SourceTerm::Sum(l, r) => {
                let l = go(l, s);
                let r = go(r, s);
                let a = s.next();
                Term::gen(a.clone(), Term::choice(a, l, r))
            }
        }
    }
    go(src, &mut LabelSupply(0))
}

/// A label-open term together with the sequence that labels it.
#[derive(Clone, Debug)]
pub struct OpenInterp {
    pub theta: LabelSeq,
    pub body: Term,
}

impl fmt::Display for OpenInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⊢{} {}", self.theta, self.body)
    }
}

/// Open call-by-value interpretation, also reporting which label was given
/// to the sum at each source position.
pub fn translate_cbv_open_labeled(src: &SourceTerm) -> (OpenInterp, Vec<(Position, Label)>) {
    fn go(t: &SourceTerm, s: &mut LabelSupply, pos: &mut Position, out: &mut Vec<(Position, Label)>) -> (Vec<Label>, Term) {
        let mut sub = |d: Dir, t: &SourceTerm, s: &mut LabelSupply, out: &mut Vec<(Position, Label)>| {
            pos.push(d);
            let r = go(t, s, pos, out);
            pos.pop();
            r
        };
        match t {
            SourceTerm::Var(x) => (Vec::new(), Term::var(x.clone())),
            SourceTerm::Abs(x, b) => {
                let (th, p) = sub(Dir::Body, b, s, out);
                (th, Term::abs(x.clone(), p))
            }
            SourceTerm::App(l, r) => {
                let (th1, p1) = sub(Dir::Fun, l, s, out);
                let (mut th2, p2) = sub(Dir::Arg, r, s, out);
                th2.extend(th1);
                (th2, Term::app(p1, p2))
            }
            SourceTerm::Sum(l, r) => {
                let (th1, p1) = sub(Dir::Left, l, s, out);
                let (mut th2, p2) = sub(Dir::Right, r, s, out);
                let a = s.next();
                out.push((pos.clone(), a.clone()));
                th2.extend(th1);
                th2.push(a.clone());
                (th2, Term::choice(a, p1, p2))
            }
        }
    }
    let mut out = Vec::new();
    let (theta, body) = go(src, &mut LabelSupply(0), &mut Position::root(), &mut out);
    let theta = LabelSeq::new(theta).expect("labels are fresh");
    (OpenInterp { theta, body }, out)
}

/// `x ↦ ⊢ x`, `λx.N ↦ ⊢θ λx.P`, `N₁N₂ ↦ ⊢θ₂·θ₁ P₁P₂`,
/// `N₁ ⊕ N₂ ↦ ⊢θ₂·θ₁·a P₁ +a P₂`.
pub fn translate_cbv_open(src: &SourceTerm) -> OpenInterp {
    translate_cbv_open_labeled(src).0
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TranslateError {
    #[error("the label sequence {theta} does not label {term}")]
    LabelJudgmentViolation { theta: String, term: String },
}

/// Prefix a generator for each label of `theta`, the head innermost.
pub fn label_closure(theta: &LabelSeq, body: &Term) -> Result<Term, TranslateError> {
    if !label_judgment(theta, body) {
        return Err(TranslateError::LabelJudgmentViolation { theta: theta.to_string(), term: body.to_string() });
    }
    Ok(theta.labels().iter().fold(body.clone(), |p, a| Term::gen(a.clone(), p)))
}

/// Call-by-value interpretation: the label closure of the open one.
pub fn translate_cbv(src: &SourceTerm) -> Term {
    let OpenInterp { theta, body } = translate_cbv_open(src);
    label_closure(&theta, &body).expect("open interpretations are labelled by their sequence")
}

/// Outcome of one source step.
#[derive(Clone, Debug)]
pub enum SourceStep {
    /// `(λx.N) V → N[V/x]`.
    Beta { position: Position, result: SourceTerm },
    /// `C[M ⊕ N] → C[M] + C[N]`.
    Sum { position: Position, left: SourceTerm, right: SourceTerm },
}

/// The leftmost-outermost call-by-value step, if any.
pub fn source_step_v(src: &SourceTerm) -> Option<SourceStep> {
    fn find(t: &SourceTerm, pos: &mut Position) -> Option<(Position, bool)> {
        match t {
            SourceTerm::Sum(..) => return Some((pos.clone(), false)),
            SourceTerm::App(f, a) if matches!(**f, SourceTerm::Abs(..)) && a.is_value() => {
                return Some((pos.clone(), true))
            }
            _ => {}
        }
        let children: Vec<(Dir, &SourceTerm)> = match t {
            SourceTerm::Var(_) => vec![],
            SourceTerm::Abs(_, b) => vec![(Dir::Body, b)],
            SourceTerm::App(f, a) => vec![(Dir::Fun, f), (Dir::Arg, a)],
            SourceTerm::Sum(l, r) => vec![(Dir::Left, l), (Dir::Right, r)],
        };
        for (d, c) in children {
            pos.push(d);
            let r = find(c, pos);
            pos.pop();
            if r.is_some() {
                return r;
            }
        }
        None
    }
    let (position, is_beta) = find(src, &mut Position::root())?;
    let here = src.subterm(&position)?;
    match here {
        SourceTerm::App(f, v) if is_beta => {
            let SourceTerm::Abs(x, body) = &**f else { unreachable!("checked by find") };
            let result = src.replace_at(&position, body.substitute(x, v))?;
            Some(SourceStep::Beta { position, result })
        }
        SourceTerm::Sum(l, r) => Some(SourceStep::Sum {
            left: src.replace_at(&position, (**l).clone())?,
            right: src.replace_at(&position, (**r).clone())?,
            position,
        }),
        _ => None,
    }
}

/// Every sum-splitting step `C[Q ⊕ R] → C[Q] + C[R]`, one per sum.
pub fn sum_steps(src: &SourceTerm) -> Vec<(Position, SourceTerm, SourceTerm)> {
    fn positions(t: &SourceTerm, pos: &mut Position, out: &mut Vec<Position>) {
        if matches!(t, SourceTerm::Sum(..)) {
            out.push(pos.clone());
        }
        let children: Vec<(Dir, &SourceTerm)> = match t {
            SourceTerm::Var(_) => vec![],
            SourceTerm::Abs(_, b) => vec![(Dir::Body, b)],
            SourceTerm::App(f, a) => vec![(Dir::Fun, f), (Dir::Arg, a)],
            SourceTerm::Sum(l, r) => vec![(Dir::Left, l), (Dir::Right, r)],
        };
        for (d, c) in children {
            pos.push(d);
            positions(c, pos, out);
            pos.pop();
        }
    }
    let mut ps = Vec::new();
    positions(src, &mut Position::root(), &mut ps);
    ps.into_iter()
        .filter_map(|p| match src.subterm(&p)? {
            SourceTerm::Sum(l, r) => {
                Some((p.clone(), src.replace_at(&p, (**l).clone())?, src.replace_at(&p, (**r).clone())?))
            }
            _ => None,
        })
        .collect()
}

/// The permutation of `theta` that moves `a` to the end (outermost).
pub fn with_label_outermost(theta: &LabelSeq, a: &Label) -> LabelSeq {
    let mut v: Vec<Label> = theta.labels().iter().filter(|l| *l != a).cloned().collect();
    v.push(a.clone());
    LabelSeq::new(v).expect("permutation of a duplicate-free sequence")
}

/// The two sides of the simulation statement for the sum at `position`:
/// the closure of the open interpretation under the permuted sequence, and
/// `!a.(⟦M⟧ +a ⟦P⟧)` for the two outcomes `M`, `P` of the step.
pub fn cbv_simulation_pair(src: &SourceTerm, position: &Position) -> Option<(Term, Term)> {
    let (interp, sums) = translate_cbv_open_labeled(src);
    let a = sums.iter().find(|(p, _)| p == position).map(|(_, a)| a.clone())?;
    let theta = with_label_outermost(&interp.theta, &a);
    let lhs = label_closure(&theta, &interp.body).ok()?;
    let SourceTerm::Sum(l, r) = src.subterm(position)? else { return None };
    let m = src.replace_at(position, (**l).clone())?;
    let p = src.replace_at(position, (**r).clone())?;
    let b = Label::fresh(a.name());
    let rhs = Term::gen(b.clone(), Term::choice(b, translate_cbv(&m), translate_cbv(&p)));
    Some((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse, parse_open};

    fn src(s: &str) -> SourceTerm {
        parse_source(s).unwrap()
    }

    #[test]
    fn source_parsing() {
        assert_eq!(src(r"\x.x (+) y").to_string(), r"\x.(x (+) y)");
        assert_eq!(src("(x (+) y) z").to_string(), "(x (+) y) z");
        assert!(matches!(parse_source("x +[a] y"), Err(ParseError::Forbidden { col: 3, .. })));
        assert!(matches!(parse_source("!a.x"), Err(ParseError::Forbidden { col: 1, .. })));
        assert_eq!(src(r"(\x.x x) (y (+) z)").sum_count(), 1);
    }

    #[test]
    fn call_by_name() {
        assert!(translate_cbn(&src("x (+) y")).alpha_eq(&parse(r"!a.(x +[a] y)").unwrap()));
        let t = translate_cbn(&src(r"(\x.eq x x) (tt (+) ff)"));
        assert!(t.alpha_eq(&parse(r"(\x.eq x x) (!a.(tt +[a] ff))").unwrap()));
        assert!(translate_cbn(&src("x")).alpha_eq(&parse("x").unwrap()));
    }

    #[test]
    fn open_call_by_value() {
        let o = translate_cbv_open(&src("x (+) y"));
        assert_eq!(o.theta.len(), 1);
        assert_eq!(o.body, Term::choice(o.theta.labels()[0].clone(), parse("x").unwrap(), parse("y").unwrap()));

        let o = translate_cbv_open(&src(r"(\x.f x x) (y (+) z)"));
        assert_eq!(o.theta.len(), 1);
        assert!(label_judgment(&o.theta, &o.body));
        let a = o.theta.labels()[0].clone();
        let expected = Term::app(
            parse(r"\x.f x x").unwrap(),
            Term::choice(a, parse("y").unwrap(), parse("z").unwrap()),
        );
        assert!(o.body.alpha_eq(&expected));

        let o = translate_cbv_open(&src("x"));
        assert!(o.theta.is_empty());

        // θ₂·θ₁·a ordering
        let o = translate_cbv_open(&src("(p (+) q) (+) (r (+) s)"));
        let names: Vec<&str> = o.theta.labels().iter().map(Label::name).collect();
        assert_eq!(names, ["b", "a", "c"]);
        let o = translate_cbv_open(&src("(p (+) q) (r (+) s)"));
        let names: Vec<&str> = o.theta.labels().iter().map(Label::name).collect();
        assert_eq!(names, ["b", "a"]);
    }

    #[test]
    fn closure() {
        let a = Label::free("a");
        let b = Label::free("b");
        let body = parse_open("x +[a] y").unwrap();
        let t = label_closure(&LabelSeq::new(vec![a.clone()]).unwrap(), &body).unwrap();
        assert!(t.alpha_eq(&parse(r"!a.(x +[a] y)").unwrap()));
        let x = parse("x").unwrap();
        assert!(label_closure(&LabelSeq::empty(), &x).unwrap().alpha_eq(&x));
        let t = label_closure(&LabelSeq::new(vec![b.clone(), a.clone()]).unwrap(), &x).unwrap();
        assert!(t.alpha_eq(&parse(r"!a.!b.x").unwrap()));
        assert!(matches!(
            label_closure(&LabelSeq::empty(), &body),
            Err(TranslateError::LabelJudgmentViolation { .. })
        ));
    }

    #[test]
    fn call_by_value() {
        let t = translate_cbv(&src(r"(\x.eq x x) (tt (+) ff)"));
        assert!(t.alpha_eq(&parse(r"!a.(\x.eq x x) (tt +[a] ff)").unwrap()));
        assert!(translate_cbv(&src("x")).alpha_eq(&parse("x").unwrap()));
        let t = translate_cbv(&src(r"(\x.f x x) (y (+) z)"));
        assert!(t.alpha_eq(&parse(r"!a.((\x.f x x) (y +[a] z))").unwrap()));
        assert!(t.is_label_closed());
    }

    #[test]
    fn source_steps() {
        match source_step_v(&src(r"(\x.x) (\y.y)")) {
            Some(SourceStep::Beta { result, .. }) => assert!(result.alpha_eq(&src(r"\y.y"))),
            other => panic!("{other:?}"),
        }
        match source_step_v(&src(r"(\x.x) (y (+) z)")) {
            Some(SourceStep::Sum { position, left, right }) => {
                assert_eq!(position.to_string(), "root.arg");
                assert!(left.alpha_eq(&src(r"(\x.x) y")));
                assert!(right.alpha_eq(&src(r"(\x.x) z")));
            }
            other => panic!("{other:?}"),
        }
        assert!(source_step_v(&src("x")).is_none());
        match source_step_v(&src(r"(\x.\y.x) y")) {
            Some(SourceStep::Beta { result, .. }) => {
                assert!(result.alpha_eq(&src(r"\z.y")));
                assert_eq!(result.to_string(), r"\y1.y");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sum_free_sources_agree() {
        for s in [r"\x.x", r"(\x.x x) (\y.y) z", "f x"] {
            let t = src(s);
            assert!(translate_cbn(&t).alpha_eq(&translate_cbv(&t)));
        }
    }

    #[test]
    fn simulation_pair_shape() {
        let t = src(r"(\x.f x x) ((y (+) z) (+) w)");
        let steps = sum_steps(&t);
        assert_eq!(steps.len(), 2);
        let (lhs, rhs) = cbv_simulation_pair(&t, &steps[0].0).unwrap();
        assert!(lhs.is_label_closed() && rhs.is_label_closed());
        let lp = crate::perm::p_normal_form(&lhs, 10_000).unwrap();
        let rp = crate::perm::p_normal_form(&rhs, 10_000).unwrap();
        assert!(lp.alpha_eq(&rp), "{lp}\n{rp}");
    }
}
