//! The property suite.

use std::collections::{HashSet, VecDeque};

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::beta::{
    self, all_steps, beta_redexes, complete_step, full_labeling, labeled_p_normalize, labeled_p_step,
    labeled_reduct, marking_at, BetaError, LabeledTerm, Strategy,
};
use crate::perm::{
    all_perm_steps, classify_normal_form, p_normal_form, p_normal_form_theta, p_normalize, p_normalize_random,
    step_perm, PermError, DEFAULT_MAX_STEPS,
};
use crate::projective::{dist_of_normal_form, evaluate_dist, project};
use crate::rpo::{certify_perm_step, precedence_of, rpo_less};
use crate::syntax::{is_well_labeled, label_judgment, parse, LabelSeq, Label, Node, Position, Term};
use crate::translate::{cbv_simulation_pair, source_step_v, sum_steps, SourceStep};
use crate::typing::{check, check_bounded, infer, types_up_to};

use super::gen::{base_env, enumerate_terms, gen_head_instance, gen_source, gen_term, gen_typed, gen_untyped};
use super::{Case, GenConfig, GenError, Outcome, Property, PropertyReport};

/// Markings of a term with more β-redexes than this are not searched
/// exhaustively.
pub const MAX_SEARCH_REDEXES: usize = 12;

fn fail(msg: impl Into<String>) -> Outcome {
    Outcome::Fail(msg.into())
}

fn term_of(case: &Case) -> &Term {
    match case {
        Case::Term(t) => t,
        _ => panic!("property expects a term case"),
    }
}

fn untyped_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Case, GenError> {
    Ok(Case::Term(gen_untyped(rng, cfg)))
}

fn typed_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Case, GenError> {
    gen_typed(rng, cfg).map(Case::Term)
}

fn any_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Case, GenError> {
    gen_term(rng, cfg).map(Case::Term)
}

fn untyped(max_size: usize, max_labels: usize) -> GenConfig {
    GenConfig { max_size, max_labels, ..GenConfig::default() }
}

fn typed(max_size: usize, max_labels: usize) -> GenConfig {
    GenConfig { max_size, max_labels, typed_only: true, ..GenConfig::default() }
}

/// `p_normal_form`, with budget exhaustion reported as a failure message.
fn pnf(t: &Term) -> Result<Term, String> {
    p_normal_form(t, DEFAULT_MAX_STEPS).map_err(|e| format!("p-normalizing {t}: {e}"))
}

fn random_marking(t: &Term, rng: &mut ChaCha8Rng) -> LabeledTerm {
    let chosen: Vec<Position> = beta_redexes(t).into_iter().filter(|_| rng.gen_bool(0.5)).collect();
    marking_at(t, &chosen).expect("redex positions")
}

/// Every marking of `t`, the full one first. `None` when there are too many.
fn all_markings(t: &Term) -> Option<Vec<LabeledTerm>> {
    let redexes = beta_redexes(t);
    if redexes.len() > MAX_SEARCH_REDEXES {
        return None;
    }
    let n = redexes.len();
    let mut out = Vec::with_capacity(1 << n);
    for mask in (0..1usize << n).rev() {
        let chosen: Vec<Position> =
            redexes.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, p)| p.clone()).collect();
        out.push(marking_at(t, &chosen).expect("redex positions"));
    }
    Some(out)
}

/// Whether some complete step leads from `from` to `target` (up to α).
/// `None` when the search space is too large to enumerate.
pub fn complete_step_reaches(from: &Term, target: &Term) -> Result<Option<bool>, String> {
    let Some(markings) = all_markings(from) else { return Ok(None) };
    for m in markings {
        let r = complete_step(from, &m, DEFAULT_MAX_STEPS).map_err(|e| e.to_string())?;
        if r.alpha_eq(target) {
            return Ok(Some(true));
        }
    }
    Ok(Some(false))
}

/// Breadth-first search for `target` among the permutative reducts of
/// `from`, visiting at most `cap` distinct terms.
pub fn p_reaches(from: &Term, target: &Term, cap: usize) -> Result<Option<bool>, PermError> {
    let goal = target.canonical_key();
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    seen.insert(from.canonical_key());
    queue.push_back(from.clone());
    while let Some(t) = queue.pop_front() {
        if t.canonical_key() == goal {
            return Ok(Some(true));
        }
        for (_, _, next) in all_perm_steps(&t, &LabelSeq::empty())? {
            if seen.insert(next.canonical_key()) {
                if seen.len() > cap {
                    return Ok(None);
                }
                queue.push_back(next);
            }
        }
    }
    Ok(Some(false))
}

fn perm_sn(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let (nf, steps) = match p_normalize(t, DEFAULT_MAX_STEPS) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    for s in &steps {
        if let Err(f) = certify_perm_step(s) {
            return fail(f.to_string());
        }
    }
    if !classify_normal_form(&nf).is_p_normal() {
        return fail(format!("endpoint {nf} is not in the p-normal grammar"));
    }
    Outcome::Pass(if steps.is_empty() { Some("already p-normal") } else { None })
}

fn perm_unique(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let nf = match pnf(t) {
        Ok(n) => n,
        Err(e) => return fail(e),
    };
    for _ in 0..5 {
        match p_normalize_random(t, &LabelSeq::empty(), rng, DEFAULT_MAX_STEPS) {
            Ok(r) if r.alpha_eq(&nf) => {}
            Ok(r) => return fail(format!("random strategy reached {r}, leftmost reached {nf}")),
            Err(e) => return fail(e.to_string()),
        }
    }
    Outcome::pass()
}

fn perm_normal_forms(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let (_, steps) = match p_normalize(t, DEFAULT_MAX_STEPS) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    let terms = std::iter::once(t.clone()).chain(steps.into_iter().map(|s| s.after));
    for u in terms {
        let stuck = match step_perm(&u) {
            Ok(s) => s.is_none(),
            Err(e) => return fail(e.to_string()),
        };
        if stuck != classify_normal_form(&u).is_p_normal() {
            return fail(format!("step_perm and the normal-form grammar disagree on {u}"));
        }
    }
    Outcome::pass()
}

fn label_preservation(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let (_, steps) = match p_normalize(t, DEFAULT_MAX_STEPS) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    for s in steps {
        let u = &s.after;
        if !label_judgment(&LabelSeq::empty(), u) || !is_well_labeled(u) {
            return fail(format!("{} at {} produced {u}, which is not well labelled", s.rule, s.position));
        }
    }
    Outcome::pass()
}

fn local_confluence(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let reducts = match all_perm_steps(t, &LabelSeq::empty()) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    if reducts.len() < 2 {
        return Outcome::Pass(Some("no peak"));
    }
    let mut first: Option<(String, Term)> = None;
    for (rule, pos, r) in reducts {
        let nf = match pnf(&r) {
            Ok(n) => n,
            Err(e) => return fail(e),
        };
        match &first {
            None => first = Some((format!("{rule} at {pos}"), nf)),
            Some((which, other)) if !other.alpha_eq(&nf) => {
                return fail(format!("{which} joins at {other}; {rule} at {pos} joins at {nf}"))
            }
            _ => {}
        }
    }
    Outcome::pass()
}

/// Both complete steps from `n` (by markings `s1`, `s2`) close at the
/// development of the full labeling.
fn diamond_for(n: &Term, markings: &[LabeledTerm]) -> Outcome {
    let target = match complete_step(n, &full_labeling(n), DEFAULT_MAX_STEPS) {
        Ok(t) => t,
        Err(e) => return fail(e.to_string()),
    };
    for m in markings {
        let p = match complete_step(n, m, DEFAULT_MAX_STEPS) {
            Ok(t) => t,
            Err(e) => return fail(e.to_string()),
        };
        match complete_step_reaches(&p, &target) {
            Ok(Some(true)) => {}
            Ok(Some(false)) => return fail(format!("{p} (from marking {m}) does not reach {target} in one complete step")),
            Ok(None) => return Outcome::Skip(format!("more than {MAX_SEARCH_REDEXES} redexes to search")),
            Err(e) => return fail(e),
        }
    }
    Outcome::pass()
}

fn diamond(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let n = term_of(case);
    let s1 = random_marking(n, rng);
    let s2 = random_marking(n, rng);
    diamond_for(n, &[s1, s2])
}

/// The diamond check on every marking pair of every label-closed term with
/// at most `max_size` nodes (free variable `x`, at most two generators).
pub fn check_diamond_exhaustive(max_size: usize) -> PropertyReport {
    let start = std::time::Instant::now();
    let mut report = PropertyReport {
        property: "diamond-exhaustive".into(),
        trials: 0,
        passed: 0,
        skipped: 0,
        failures: Vec::new(),
        notes: Default::default(),
        elapsed: Default::default(),
    };
    let mut pairs = 0usize;
    for size in 1..=max_size {
        for n in enumerate_terms(size, 2) {
            report.trials += 1;
            let Some(markings) = all_markings(&n) else {
                report.skipped += 1;
                continue;
            };
            pairs += markings.len() * markings.len();
            // Every pair closes once every single marking reaches the shared
            // target in one complete step.
            match diamond_for(&n, &markings) {
                Outcome::Fail(message) => report.failures.push(super::Counterexample {
                    seed: 0,
                    case: n.to_string(),
                    shrunk: None,
                    message,
                }),
                Outcome::Skip(_) => report.skipped += 1,
                Outcome::Pass(_) => report.passed += 1,
            }
        }
    }
    report.notes.insert("marking pairs".into(), pairs);
    report.elapsed = start.elapsed();
    report
}

fn parallel_beta(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let marking = random_marking(t, rng);
    let expected = labeled_reduct(&marking);
    // Contract marked redexes one at a time in random order.
    let mut cur = marking.clone();
    for _ in 0..10_000 {
        let marked: Vec<Position> = cur
            .positions()
            .into_iter()
            .filter(|p| matches!(cur.subterm(p), Some(Node::App(f, _, true)) if matches!(**f, Node::Abs(..))))
            .collect();
        let Some(p) = marked.choose(rng) else {
            return if cur.erase().alpha_eq(&expected) {
                Outcome::pass()
            } else {
                fail(format!("sequential contraction gave {}, parallel step gave {expected}", cur.erase()))
            };
        };
        let redex = cur.subterm(p).expect("position listed");
        let r = beta::contract_beta(redex).expect("marked redex");
        cur = cur.replace_at(p, r).expect("position listed");
    }
    fail("sequential contraction did not terminate")
}

fn labeled_perm(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let marking = random_marking(t, rng);
    let plain = match pnf(t) {
        Ok(n) => n,
        Err(e) => return fail(e),
    };
    let (lnf, _) = match labeled_p_normalize(&marking, &LabelSeq::empty(), DEFAULT_MAX_STEPS) {
        Ok(r) => r,
        Err(e) => return fail(e.to_string()),
    };
    if !lnf.erase().alpha_eq(&plain) {
        return fail(format!("labelled normal form {} differs from {plain}", lnf.erase()));
    }
    // Each labelled step preserves the p-normal form of the labelled reduct.
    let reference = match pnf(&labeled_reduct(&marking)) {
        Ok(n) => n,
        Err(e) => return fail(e),
    };
    let mut cur = marking;
    for _ in 0..200 {
        if !beta::is_valid_marking(&cur) {
            return fail(format!("marks left redex positions in {cur}"));
        }
        match labeled_p_step(&cur) {
            Ok(Some(next)) => {
                match pnf(&labeled_reduct(&next)) {
                    Ok(n) if n.alpha_eq(&reference) => {}
                    Ok(n) => return fail(format!("step {cur} => {next} changed the reduct's p-normal form to {n}")),
                    Err(e) => return fail(e),
                }
                cur = next;
            }
            Ok(None) => break,
            Err(e) => return fail(e.to_string()),
        }
    }
    Outcome::pass()
}

fn p_normal_mapping(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let n = term_of(case);
    let steps = match all_steps(n, &LabelSeq::empty()) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    let Some((kind, pos, m)) = steps.choose(rng) else { return Outcome::Pass(Some("normal")) };
    let (np, mp) = match (pnf(n), pnf(m)) {
        (Ok(a), Ok(b)) => (a, b),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    };
    match complete_step_reaches(&np, &mp) {
        Ok(Some(true)) => Outcome::pass(),
        Ok(Some(false)) => fail(format!("after {kind} at {pos}: {np} does not reach {mp} in one complete step")),
        Ok(None) => Outcome::Skip(format!("more than {MAX_SEARCH_REDEXES} redexes to search")),
        Err(e) => fail(e),
    }
}

fn church_rosser(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let empty = LabelSeq::empty();
    let budget = 200_000;
    let a = beta::reduce_random(t, &empty, rng, budget);
    let b = beta::reduce_random_biased(t, &empty, rng, budget);
    let c = beta::reduce(t, Strategy::FullLeftmost, budget).map(|r| (r.term, r.steps));
    match (a, b, c) {
        (Ok((a, _)), Ok((b, _)), Ok((c, _))) => {
            if a.alpha_eq(&b) && a.alpha_eq(&c) {
                Outcome::pass()
            } else {
                fail(format!("normal forms differ: {a} / {b} / {c}"))
            }
        }
        (Err(BetaError::StepBudgetExceeded { .. }), _, _)
        | (_, Err(BetaError::StepBudgetExceeded { .. }), _)
        | (_, _, Err(BetaError::StepBudgetExceeded { .. })) => Outcome::Skip("budget".into()),
        (Err(e), _, _) | (_, Err(e), _) | (_, _, Err(e)) => fail(e.to_string()),
    }
}

fn typed_sn(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    match beta::reduce_random(t, &LabelSeq::empty(), rng, 1_000_000) {
        Ok(_) => Outcome::pass(),
        Err(e) => fail(e.to_string()),
    }
}

fn head_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Case, GenError> {
    let (h, a, n) = gen_head_instance(rng, cfg);
    Ok(Case::Head(h, a, n))
}

fn projective_simulation(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let Case::Head(h, a, n) = case else { panic!("property expects a head instance") };
    let lhs = h.plug(Term::gen(a.clone(), n.clone()));
    let used = n.has_free_label(a);
    let rhs = if used {
        let l = h.plug(project(n, a, 0));
        let r = h.plug(project(n, a, 1)).refreshed(true);
        let f = Label::fresh("f");
        Term::gen(f.clone(), Term::choice(f, l, r))
    } else {
        h.plug(n.clone())
    };
    match (pnf(&lhs), pnf(&rhs)) {
        (Ok(x), Ok(y)) if x.alpha_eq(&y) => {}
        (Ok(x), Ok(y)) => return fail(format!("{lhs} normalizes to {x}, the split to {y}")),
        (Err(e), _) | (_, Err(e)) => return fail(e),
    }
    // With `a` outermost, N reduces to the choice between its projections.
    if used {
        let theta = LabelSeq::new(vec![a.clone()]).expect("single label");
        let split = Term::choice(a.clone(), project(n, a, 0), project(n, a, 1).refreshed(true));
        let x = p_normal_form_theta(n, &theta, DEFAULT_MAX_STEPS);
        let y = p_normal_form_theta(&split, &theta, DEFAULT_MAX_STEPS);
        match (x, y) {
            (Ok(x), Ok(y)) if x.alpha_eq(&y) => {}
            (Ok(x), Ok(y)) => return fail(format!("inner split: {n} normalizes to {x}, its projections to {y}")),
            (Err(e), _) | (_, Err(e)) => return fail(e.to_string()),
        }
        Outcome::pass()
    } else {
        Outcome::Pass(Some("label not free in body"))
    }
}

/// A source term whose leftmost call-by-value step splits a sum.
fn source_case(rng: &mut ChaCha8Rng, cfg: &GenConfig) -> Result<Case, GenError> {
    for _ in 0..100 {
        let src = gen_source(rng, cfg);
        if matches!(source_step_v(&src), Some(SourceStep::Sum { .. })) {
            return Ok(Case::Source(src));
        }
    }
    Err(GenError::GenerationExhausted { attempts: 100 })
}

fn cbv_simulation(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let Case::Source(src) = case else { panic!("property expects a source term") };
    let mut exact = true;
    for (pos, _, _) in sum_steps(src) {
        let Some((lhs, rhs)) = cbv_simulation_pair(src, &pos) else {
            return fail(format!("no translation label for the sum at {pos}"));
        };
        match (pnf(&lhs), pnf(&rhs)) {
            (Ok(x), Ok(y)) if x.alpha_eq(&y) => {}
            (Ok(x), Ok(y)) => {
                return fail(format!("sum at {pos}: {lhs} normalizes to {x}, the target {rhs} to {y}"))
            }
            (Err(e), _) | (_, Err(e)) => return fail(e),
        }
        match p_reaches(&lhs, &rhs, 2_000) {
            Ok(Some(true)) => {}
            Ok(Some(false)) => return fail(format!("sum at {pos}: {rhs} is not a permutative reduct of {lhs}")),
            Ok(None) => exact = false,
            Err(e) => return fail(e.to_string()),
        }
    }
    Outcome::Pass(Some(if exact { "target reached exactly" } else { "normal forms agree; reachability search capped" }))
}

fn dist_coherence(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let d1 = match evaluate_dist(t, DEFAULT_MAX_STEPS) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    if !d1.total().is_one() {
        return fail(format!("mass {} instead of 1", d1.total()));
    }
    let nf = match beta::reduce(t, Strategy::FullLeftmost, DEFAULT_MAX_STEPS) {
        Ok(r) => r.term,
        Err(e) => return fail(e.to_string()),
    };
    let d2 = match dist_of_normal_form(&nf) {
        Ok(d) => d,
        Err(e) => return fail(e.to_string()),
    };
    if !d2.total().is_one() {
        return fail(format!("mass {} instead of 1", d2.total()));
    }
    if d1.same_as(&d2) {
        Outcome::pass()
    } else {
        fail(format!("evaluation gives\n{d1}normal form {nf} gives\n{d2}"))
    }
}

fn subject_reduction(case: &Case, rng: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let env = base_env();
    let ty = match infer(&env, t) {
        Ok(ty) => ty,
        Err(e) => return fail(format!("generated term does not type: {e}")),
    };
    let mut steps = match all_steps(t, &LabelSeq::empty()) {
        Ok(s) => s,
        Err(e) => return fail(e.to_string()),
    };
    steps.shuffle(rng);
    let mut generalized = false;
    for (kind, pos, u) in steps.into_iter().take(5) {
        if !check(&env, &u, &ty) {
            return fail(format!("{kind} at {pos} gives {u}, which does not have type {ty}"));
        }
        match infer(&env, &u) {
            Ok(ty2) if ty2.alpha_eq(&ty) => {}
            Ok(_) => generalized = true,
            Err(e) => return fail(format!("{kind} at {pos} gives {u}: {e}")),
        }
    }
    Outcome::Pass(generalized.then_some("principal type became more general"))
}

fn infer_check(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let env = base_env();
    let candidates = types_up_to(&["o", "a"], 5);
    match infer(&env, t) {
        Ok(ty) => {
            if !check(&env, t, &ty) {
                return fail(format!("inferred {ty} does not check"));
            }
            for c in &candidates {
                if check_bounded(&env, t, c, &candidates) && !check(&env, t, c) {
                    return fail(format!("derivation search finds {c} but check rejects it"));
                }
            }
            Outcome::Pass(Some("typable"))
        }
        Err(e) => {
            if t.size() <= 7 {
                if let Some(c) = candidates.iter().find(|c| check_bounded(&env, t, c, &candidates)) {
                    return fail(format!("inference failed ({e}) but {c} has a derivation"));
                }
            }
            Outcome::Pass(Some("untypable"))
        }
    }
}

fn rpo_order(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let prec = precedence_of(t);
    // Terms along the permutative reduction graph and their subterms.
    let mut pool: Vec<Term> = Vec::new();
    let mut keys = HashSet::new();
    let mut queue = VecDeque::from([t.clone()]);
    while let Some(u) = queue.pop_front() {
        if pool.len() >= 30 {
            break;
        }
        for p in u.positions() {
            let s = u.subterm(&p).expect("listed").clone();
            if s.size() <= 6 && keys.insert(s.canonical_key()) && pool.len() < 30 {
                pool.push(s);
            }
        }
        if let Ok(next) = all_perm_steps(&u, &LabelSeq::empty()) {
            queue.extend(next.into_iter().map(|(_, _, r)| r).take(4));
        }
    }
    let n = pool.len();
    let less: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|j| rpo_less(&pool[i], &pool[j], &prec)).collect()).collect();
    for i in 0..n {
        if less[i][i] {
            return fail(format!("{} < itself", pool[i]));
        }
        for j in 0..n {
            if less[i][j] && less[j][i] {
                return fail(format!("{} and {} are mutually smaller", pool[i], pool[j]));
            }
            if !less[i][j] {
                continue;
            }
            for k in 0..n {
                if less[j][k] && !less[i][k] {
                    return fail(format!("{} < {} < {} but not transitively", pool[i], pool[j], pool[k]));
                }
            }
        }
    }
    Outcome::pass()
}

fn roundtrip(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    let s = t.to_string();
    match parse(&s) {
        Ok(u) if u.alpha_eq(t) => Outcome::pass(),
        Ok(u) => fail(format!("{s} parses back as {u}")),
        Err(e) => fail(format!("{s} does not parse: {e}")),
    }
}

fn typed_generation(case: &Case, _: &mut ChaCha8Rng) -> Outcome {
    let t = term_of(case);
    if !t.is_label_closed() {
        return fail("not label-closed");
    }
    match infer(&base_env(), t) {
        Ok(_) => Outcome::pass(),
        Err(e) => fail(e.to_string()),
    }
}

/// Every property, by name.
pub static PROPERTIES: &[Property] = &[
    Property {
        name: "perm-sn",
        summary: "permutative normalization terminates and every step decreases in the path ordering",
        default_trials: 10_000,
        config: || untyped(25, 4),
        generate: untyped_case,
        check: perm_sn,
    },
    Property {
        name: "perm-unique",
        summary: "random permutative strategies reach the same normal form",
        default_trials: 500,
        config: || untyped(20, 4),
        generate: untyped_case,
        check: perm_unique,
    },
    Property {
        name: "perm-normal-forms",
        summary: "a term has no permutative step exactly when it is in the normal-form grammar",
        default_trials: 500,
        config: || untyped(20, 4),
        generate: untyped_case,
        check: perm_normal_forms,
    },
    Property {
        name: "label-preservation",
        summary: "permutative steps keep terms label-closed and well labelled",
        default_trials: 500,
        config: || untyped(20, 4),
        generate: untyped_case,
        check: label_preservation,
    },
    Property {
        name: "local-confluence",
        summary: "every one-step permutative peak joins at a common normal form",
        default_trials: 1_000,
        config: || untyped(20, 4),
        generate: untyped_case,
        check: local_confluence,
    },
    Property {
        name: "diamond",
        summary: "two complete steps close in one complete step each",
        default_trials: 500,
        config: || typed(12, 3),
        generate: typed_case,
        check: diamond,
    },
    Property {
        name: "parallel-beta",
        summary: "a parallel step equals contracting its marked redexes one by one",
        default_trials: 500,
        config: || untyped(15, 3),
        generate: untyped_case,
        check: parallel_beta,
    },
    Property {
        name: "labeled-perm",
        summary: "labelled permutative reduction has the same normal forms as plain permutative reduction",
        default_trials: 300,
        config: || typed(12, 3),
        generate: typed_case,
        check: labeled_perm,
    },
    Property {
        name: "p-normal-mapping",
        summary: "a single step maps onto a complete step between permutative normal forms",
        default_trials: 300,
        config: || typed(12, 3),
        generate: typed_case,
        check: p_normal_mapping,
    },
    Property {
        name: "church-rosser",
        summary: "independent random strategies reach the same normal form",
        default_trials: 300,
        config: || typed(15, 3),
        generate: typed_case,
        check: church_rosser,
    },
    Property {
        name: "projective-simulation",
        summary: "a head generator normalizes like the sum of its two projections",
        default_trials: 500,
        config: || untyped(12, 3),
        generate: head_case,
        check: projective_simulation,
    },
    Property {
        name: "cbv-simulation",
        summary: "a call-by-value sum step is simulated by permutative reduction",
        default_trials: 300,
        config: || untyped(12, 3),
        generate: source_case,
        check: cbv_simulation,
    },
    Property {
        name: "typed-sn",
        summary: "typed terms normalize under random full reduction",
        default_trials: 300,
        config: || typed(15, 3),
        generate: typed_case,
        check: typed_sn,
    },
    Property {
        name: "dist-coherence",
        summary: "exact evaluation agrees with the distribution read off the normal form",
        default_trials: 300,
        config: || typed(15, 3),
        generate: typed_case,
        check: dist_coherence,
    },
    Property {
        name: "subject-reduction",
        summary: "single steps preserve the inferred type",
        default_trials: 300,
        config: || typed(15, 3),
        generate: typed_case,
        check: subject_reduction,
    },
    Property {
        name: "infer-check",
        summary: "inference agrees with checking and with bounded derivation search",
        default_trials: 300,
        config: || GenConfig { max_size: 7, max_labels: 1, ..GenConfig::default() },
        generate: any_case,
        check: infer_check,
    },
    Property {
        name: "rpo-order",
        summary: "the path ordering is irreflexive, asymmetric and transitive on sampled terms",
        default_trials: 200,
        config: || untyped(8, 2),
        generate: untyped_case,
        check: rpo_order,
    },
    Property {
        name: "roundtrip",
        summary: "printing then parsing gives an alpha-equivalent term",
        default_trials: 1_000,
        config: || untyped(25, 4),
        generate: untyped_case,
        check: roundtrip,
    },
    Property {
        name: "typed-generation",
        summary: "typed sampling yields label-closed terms that infer",
        default_trials: 100,
        config: || typed(15, 3),
        generate: typed_case,
        check: typed_generation,
    },
];

/// Terms whose peaks exercise the overlapping rule pairs (choice under
/// application on both sides, duplicated branches, a generator over an
/// unused choice).
pub fn targeted_peaks() -> Vec<Term> {
    [
        r"!a.((x +[a] y) (z +[a] w))",
        r"!a.((x +[a] y) +[a] (x +[a] y))",
        r"!a.!b.(x +[a] y)",
        r"!a.!b.((x +[b] y) +[a] z)",
        r"!b.!a.((x +[a] y) +[b] (z +[a] w))",
        r"!a.\p.(p +[a] (p +[a] x))",
        r"\p.!a.((x +[a] y) p)",
        r"(!a.(x +[a] y)) ((!b.(u +[b] v)) w)",
        r"!a.!b.((x +[a] y) +[b] (x +[a] y))",
    ]
    .iter()
    .map(|s| parse(s).expect("well-formed peak term"))
    .collect()
}

/// Check the targeted peaks with [`local_confluence`].
pub fn check_targeted_peaks() -> Vec<(Term, Outcome)> {
    let mut rng = <ChaCha8Rng as rand::SeedableRng>::seed_from_u64(0);
    targeted_peaks()
        .into_iter()
        .map(|t| {
            let o = local_confluence(&Case::Term(t.clone()), &mut rng);
            (t, o)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{find_property, run_property};

    fn quick(name: &str, trials: usize) {
        let p = find_property(name).unwrap();
        let report = run_property(p, &(p.config)(), trials);
        assert!(report.ok(), "{report}");
    }

    #[test]
    fn every_property_passes_a_short_run() {
        for p in PROPERTIES {
            quick(p.name, 20);
        }
    }

    #[test]
    fn targeted_peaks_join() {
        for (t, o) in check_targeted_peaks() {
            assert!(!o.is_fail(), "{t}: {o:?}");
        }
    }

    #[test]
    fn duplicated_choice_peak_joins() {
        // idem against cancelL on (N +a M) +a (N +a M)
        let t = parse(r"!a.((x +[a] y) +[a] (x +[a] y))").unwrap();
        let steps = all_perm_steps(&t, &LabelSeq::empty()).unwrap();
        assert!(steps.len() >= 2);
        let nf = pnf(&t).unwrap();
        assert!(nf.alpha_eq(&parse(r"!a.(x +[a] y)").unwrap()), "{nf}");
    }

    #[test]
    fn small_exhaustive_diamond() {
        let r = check_diamond_exhaustive(5);
        assert!(r.ok(), "{r}");
        assert!(r.trials > 10);
    }

    #[test]
    fn reachability_search() {
        let t = parse(r"!a.((x +[a] y) z)").unwrap();
        let target = parse(r"!a.(x z +[a] y z)").unwrap();
        assert_eq!(p_reaches(&t, &target, 100).unwrap(), Some(true));
        assert_eq!(p_reaches(&target, &t, 100).unwrap(), Some(false));
    }
}
