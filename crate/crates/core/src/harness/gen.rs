//! Random and exhaustive term generation.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::projective::{Frame, HeadContext};
use crate::syntax::{Label, Term, Var};
use crate::translate::SourceTerm;
use crate::typing::{SimpleType, TypeEnv};

use super::{GenConfig, GenError};

const FREE_VARS: [&str; 6] = ["x", "y", "z", "u", "v", "w"];
const LABEL_NAMES: [&str; 6] = ["a", "b", "c", "d", "e", "g"];

/// Free variables available to typed terms: `x y z : o`, `f : o -> o`,
/// `g : o -> o -> o`.
pub fn base_env() -> TypeEnv {
    let o = SimpleType::atom("o");
    let oo = SimpleType::arrow(o.clone(), o.clone());
    TypeEnv::new()
        .bind("x", o.clone())
        .bind("y", o.clone())
        .bind("z", o.clone())
        .bind("f", oo.clone())
        .bind("g", SimpleType::arrow(o, oo))
}

struct Untyped<'a> {
    rng: &'a mut ChaCha8Rng,
    cfg: &'a GenConfig,
    gens: usize,
}

impl Untyped<'_> {
    fn var(&mut self, vars: &[Var]) -> Term {
        if !vars.is_empty() && self.rng.gen_bool(0.7) {
            Term::var(vars.choose(self.rng).expect("non-empty").clone())
        } else {
            let pool = self.cfg.var_pool.clamp(1, FREE_VARS.len());
            Term::var(Var::free(FREE_VARS[self.rng.gen_range(0..pool)]))
        }
    }

    fn term(&mut self, size: usize, vars: &mut Vec<Var>, labels: &mut Vec<Label>) -> Term {
        if size <= 1 {
            return self.var(vars);
        }
        let can_gen = self.gens < self.cfg.max_labels;
        let can_choose = !labels.is_empty() && size >= 3;
        let mut options: Vec<(u8, u32)> = vec![(0, 2)];
        if size >= 3 {
            options.push((1, 4));
        }
        if can_choose {
            options.push((2, 4));
        }
        if can_gen {
            options.push((3, 2));
        }
        let pick = options.choose_weighted(self.rng, |o| o.1).expect("non-empty").0;
        match pick {
            0 => {
                let x = Var::fresh(["p", "q", "r", "s"][self.rng.gen_range(0..4)]);
                vars.push(x.clone());
                let body = self.term(size - 1, vars, labels);
                vars.pop();
                Term::abs(x, body)
            }
            1 => {
                let left = self.rng.gen_range(1..size - 1);
                let f = self.term(left, vars, labels);
                let a = self.term(size - 1 - left, vars, labels);
                Term::app(f, a)
            }
            2 => {
                let a = labels.choose(self.rng).expect("non-empty").clone();
                let left = self.rng.gen_range(1..size - 1);
                let l = self.term(left, vars, labels);
                let r = if 2 * left < size && self.rng.gen_bool(0.15) {
                    l.refreshed(true)
                } else {
                    self.term(size - 1 - left, vars, labels)
                };
                Term::choice(a, l, r)
            }
            _ => {
                self.gens += 1;
                let a = Label::fresh(LABEL_NAMES[self.rng.gen_range(0..LABEL_NAMES.len())]);
                labels.push(a.clone());
                let body = self.term(size - 1, vars, labels);
                labels.pop();
                Term::gen(a, body)
            }
        }
    }
}

/// A random label-closed term with at most `cfg.max_size` nodes.
pub fn gen_untyped(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Term {
    let size = rng.gen_range(1..=cfg.max_size.max(1));
    gen_untyped_sized(rng, cfg, size, &mut Vec::new())
}

/// A random term of roughly `size` nodes; `labels` are in scope (and may
/// occur free).
pub fn gen_untyped_sized(rng: &mut ChaCha8Rng, cfg: &GenConfig, size: usize, labels: &mut Vec<Label>) -> Term {
    Untyped { rng, cfg, gens: 0 }.term(size, &mut Vec::new(), labels)
}

struct Typed<'a> {
    rng: &'a mut ChaCha8Rng,
    cfg: &'a GenConfig,
    env: Vec<(Var, SimpleType)>,
    gens: usize,
}

fn o() -> SimpleType {
    SimpleType::atom("o")
}

fn small_type(rng: &mut ChaCha8Rng) -> SimpleType {
    match rng.gen_range(0..6) {
        0..=3 => o(),
        4 => SimpleType::arrow(o(), o()),
        _ => SimpleType::arrow(SimpleType::arrow(o(), o()), o()),
    }
}

impl Typed<'_> {
    fn var_of(&mut self, ty: &SimpleType, ctx: &[(Var, SimpleType)]) -> Option<Term> {
        let found: Vec<&Var> = ctx
            .iter()
            .chain(self.env.iter())
            .filter(|(_, t)| t == ty)
            .map(|(v, _)| v)
            .collect();
        found.choose(self.rng).map(|v| Term::var((*v).clone()))
    }

    fn term(&mut self, ty: &SimpleType, size: usize, ctx: &mut Vec<(Var, SimpleType)>, labels: &mut Vec<Label>) -> Term {
        if size <= 1 {
            if let Some(v) = self.var_of(ty, ctx) {
                return v;
            }
        }
        let mut options: Vec<(u8, u32)> = Vec::new();
        if ctx.iter().chain(self.env.iter()).any(|(_, t)| t == ty) {
            options.push((0, if size <= 2 { 6 } else { 0 }));
        }
        if matches!(ty, SimpleType::Arrow(..)) {
            options.push((1, 4));
        }
        if size >= 3 {
            options.push((2, 5));
        }
        if !labels.is_empty() && size >= 3 {
            options.push((3, 3));
        }
        if self.gens < self.cfg.max_labels && size >= 2 {
            options.push((4, 2));
        }
        if size >= 4 {
            options.push((5, 4));
        }
        if options.iter().all(|o| o.1 == 0) {
            options.push((2, 1));
        }
        let pick = options.choose_weighted(self.rng, |o| o.1).expect("non-empty").0;
        match pick {
            0 => self.var_of(ty, ctx).expect("checked above"),
            1 => {
                let SimpleType::Arrow(dom, cod) = ty else { unreachable!("arrow checked") };
                let x = Var::fresh(["p", "q", "r", "s"][self.rng.gen_range(0..4)]);
                ctx.push((x.clone(), (**dom).clone()));
                let body = self.term(cod, size.saturating_sub(1), ctx, labels);
                ctx.pop();
                Term::abs(x, body)
            }
            2 => {
                let arg_ty = small_type(self.rng);
                let budget = size.saturating_sub(1).max(2);
                let left = self.rng.gen_range(1..budget);
                let f = self.term(&SimpleType::arrow(arg_ty.clone(), ty.clone()), left, ctx, labels);
                let a = self.term(&arg_ty, budget - left, ctx, labels);
                Term::app(f, a)
            }
            3 => {
                let a = labels.choose(self.rng).expect("non-empty").clone();
                let left = self.rng.gen_range(1..size - 1);
                let l = self.term(ty, left, ctx, labels);
                let r = self.term(ty, size - 1 - left, ctx, labels);
                Term::choice(a, l, r)
            }
            4 => {
                self.gens += 1;
                let a = Label::fresh(LABEL_NAMES[self.rng.gen_range(0..LABEL_NAMES.len())]);
                labels.push(a.clone());
                let body = self.term(ty, size - 1, ctx, labels);
                labels.pop();
                Term::gen(a, body)
            }
            _ => {
                // A β-redex `(λx.M) N`.
                let arg_ty = small_type(self.rng);
                let x = Var::fresh(["p", "q", "r", "s"][self.rng.gen_range(0..4)]);
                let left = self.rng.gen_range(2..size - 1);
                ctx.push((x.clone(), arg_ty.clone()));
                let body = self.term(ty, left - 1, ctx, labels);
                ctx.pop();
                let a = self.term(&arg_ty, size - 1 - left, ctx, labels);
                Term::app(Term::abs(x, body), a)
            }
        }
    }
}

/// A random label-closed term typable under [`base_env`], built by sampling
/// a typing derivation top-down.
pub fn gen_typed(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Term, GenError> {
    let env: Vec<(Var, SimpleType)> =
        base_env().iter().map(|(n, t)| (Var::free(n), t.clone())).collect();
    let max = cfg.max_size.max(1);
    for _ in 0..100 {
        let size = rng.gen_range(max.div_ceil(2)..=max);
        let ty = small_type(rng);
        let t = Typed { rng, cfg, env: env.clone(), gens: 0 }.term(&ty, size, &mut Vec::new(), &mut Vec::new());
        if t.size() <= max {
            return Ok(t);
        }
    }
    Err(GenError::GenerationExhausted { attempts: 100 })
}

/// Honour `cfg.typed_only`.
pub fn gen_term(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Term, GenError> {
    if cfg.typed_only {
        gen_typed(rng, cfg)
    } else {
        Ok(gen_untyped(rng, cfg))
    }
}

/// A random source term with at least one sum.
pub fn gen_source(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> SourceTerm {
    fn go(rng: &mut ChaCha8Rng, cfg: &GenConfig, size: usize, vars: &mut Vec<Var>) -> SourceTerm {
        if size <= 1 {
            if !vars.is_empty() && rng.gen_bool(0.7) {
                return SourceTerm::Var(vars.choose(rng).expect("non-empty").clone());
            }
            let pool = cfg.var_pool.clamp(1, FREE_VARS.len());
            return SourceTerm::Var(Var::free(FREE_VARS[rng.gen_range(0..pool)]));
        }
        match rng.gen_range(0..if size >= 3 { 3 } else { 1 }) {
            0 => {
                let x = Var::fresh(["p", "q", "r"][rng.gen_range(0..3)]);
                vars.push(x.clone());
                let b = go(rng, cfg, size - 1, vars);
                vars.pop();
                SourceTerm::abs(x, b)
            }
            1 => {
                let left = rng.gen_range(1..size - 1);
                let l = go(rng, cfg, left, vars);
                SourceTerm::app(l, go(rng, cfg, size - 1 - left, vars))
            }
            _ => {
                let left = rng.gen_range(1..size - 1);
                let l = go(rng, cfg, left, vars);
                SourceTerm::sum(l, go(rng, cfg, size - 1 - left, vars))
            }
        }
    }
    loop {
        let size = rng.gen_range(3..=cfg.max_size.max(3));
        let t = go(rng, cfg, size, &mut Vec::new());
        if t.sum_count() >= 1 && t.sum_count() <= cfg.max_labels.max(1) {
            return t;
        }
    }
}

/// A random instance `(H, a, N)` of a head context, a label and a term in
/// which `a` may occur free.
pub fn gen_head_instance(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> (HeadContext, Label, Term) {
    let mut frames = Vec::new();
    for _ in 0..rng.gen_range(0..=3) {
        if rng.gen_bool(0.5) {
            frames.push(Frame::Lambda(Var::fresh(["p", "q"][rng.gen_range(0..2)])));
        } else {
            let size = rng.gen_range(1..=5);
            frames.push(Frame::Applied(gen_untyped_sized(rng, cfg, size, &mut Vec::new())));
        }
    }
    let a = Label::fresh("a");
    let size = rng.gen_range(1..=cfg.max_size.clamp(1, 12));
    let mut sub = cfg.clone();
    sub.max_labels = cfg.max_labels.saturating_sub(1);
    let n = gen_untyped_sized(rng, &sub, size, &mut vec![a.clone()]);
    (HeadContext { frames }, a, n)
}

/// Every label-closed term of exactly `size` nodes over the free variable
/// `x`, up to α, with at most `max_gens` generators.
pub fn enumerate_terms(size: usize, max_gens: usize) -> Vec<Term> {
    fn go(size: usize, vars: &mut Vec<Var>, labels: &mut Vec<Label>, gens: usize) -> Vec<Term> {
        let mut out = Vec::new();
        if size == 0 {
            return out;
        }
        if size == 1 {
            out.push(Term::var(Var::free("x")));
            out.extend(vars.iter().map(|v| Term::var(v.clone())));
            return out;
        }
        let x = Var::fresh(&format!("v{}", vars.len()));
        vars.push(x.clone());
        for b in go(size - 1, vars, labels, gens) {
            out.push(Term::abs(x.clone(), b));
        }
        vars.pop();
        if gens > 0 {
            let a = Label::fresh(LABEL_NAMES[labels.len() % LABEL_NAMES.len()]);
            labels.push(a.clone());
            for b in go(size - 1, vars, labels, gens - 1) {
                out.push(Term::gen(a.clone(), b));
            }
            labels.pop();
        }
        for left in 1..size - 1 {
            let right = size - 1 - left;
            let ls = go(left, vars, labels, gens);
            let rs = go(right, vars, labels, gens);
            for l in &ls {
                for r in &rs {
                    out.push(Term::app(l.clone(), r.clone()));
                    for a in labels.iter() {
                        out.push(Term::choice(a.clone(), l.clone(), r.clone()));
                    }
                }
            }
        }
        out
    }
    go(size, &mut Vec::new(), &mut Vec::new(), max_gens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::typing::infer;
    use rand::SeedableRng;

    #[test]
    fn untyped_terms_are_label_closed_and_bounded() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..300 {
            let t = gen_untyped(&mut rng, &cfg);
            assert!(t.is_label_closed());
            assert!(t.has_distinct_binders());
            assert!(t.size() <= cfg.max_size);
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let cfg = GenConfig::default();
        let a = gen_untyped(&mut ChaCha8Rng::seed_from_u64(3), &cfg);
        let b = gen_untyped(&mut ChaCha8Rng::seed_from_u64(3), &cfg);
        assert!(a.alpha_eq(&b));
    }

    #[test]
    fn typed_terms_infer() {
        let cfg = GenConfig { typed_only: true, max_size: 15, ..GenConfig::default() };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let t = gen_typed(&mut rng, &cfg).unwrap();
            assert!(t.is_label_closed());
            infer(&base_env(), &t).unwrap_or_else(|e| panic!("{t}: {e}"));
        }
    }

    #[test]
    fn enumeration_counts() {
        // x, \v.x, \v.v
        assert_eq!(enumerate_terms(1, 1).len(), 1);
        assert_eq!(enumerate_terms(2, 0).len(), 2);
        assert_eq!(enumerate_terms(2, 1).len(), 3);
        let all = enumerate_terms(4, 1);
        for (i, s) in all.iter().enumerate() {
            assert!(s.is_label_closed());
            for t in &all[..i] {
                assert!(!s.alpha_eq(t), "{s} listed twice");
            }
        }
    }

    #[test]
    fn sources_have_sums() {
        let cfg = GenConfig::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..50 {
            assert!(gen_source(&mut rng, &cfg).sum_count() >= 1);
        }
    }
}
