use pel::beta::{beta_redexes, labeled_reduct, marking_at, reduce, step_beta, Strategy};
use pel::harness::{
    enumerate_terms, find_property, gen_source, gen_typed, gen_untyped, replay, run_property, GenConfig, Outcome,
};
use pel::perm::{p_normal_form, p_normalize, p_normalize_random, DEFAULT_MAX_STEPS};
use pel::rpo::{precedence_of, rpo_less, signature};
use pel::syntax::{is_well_labeled, label_judgment, substitute, LabelOrder};
use pel::translate::{translate_cbn, translate_cbv, translate_cbv_open};
use pel::{LabelSeq, Node, Term, Var};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn untyped(seed: u64, max_size: usize) -> Term {
    let cfg = GenConfig { max_size, ..GenConfig::default() };
    gen_untyped(&mut ChaCha8Rng::seed_from_u64(seed), &cfg)
}

fn typed(seed: u64) -> Term {
    let cfg = GenConfig { max_size: 12, max_labels: 3, typed_only: true, ..GenConfig::default() };
    gen_typed(&mut ChaCha8Rng::seed_from_u64(seed), &cfg).unwrap()
}

/// Some free variable of `t`, if any.
fn some_free_var(t: &Term) -> Option<Var> {
    t.free_vars().into_iter().next()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn substitution_keeps_free_labels_and_well_labelling(s1: u64, s2: u64) {
        let m = untyped(s1, 15);
        let n = untyped(s2, 8);
        // Open the body so substitution has something to hit.
        let Node::Abs(x, body) = Term::abs(Var::free("x"), m.clone()) else { unreachable!() };
        let r = substitute(&body, &x, &n);
        let mut allowed = m.free_labels();
        allowed.extend(n.free_labels());
        prop_assert!(r.free_labels().is_subset(&allowed));
        prop_assert!(is_well_labeled(&r));
    }

    #[test]
    fn alpha_equivalence_is_an_equivalence(seed: u64) {
        let t = untyped(seed, 20);
        let u = t.refreshed(false);
        let v = u.refreshed(false);
        prop_assert!(t.alpha_eq(&t));
        prop_assert!(t.alpha_eq(&u) && u.alpha_eq(&t));
        prop_assert!(u.alpha_eq(&v) && t.alpha_eq(&v));
    }

    #[test]
    fn substitution_respects_alpha(s1: u64, s2: u64) {
        let m = untyped(s1, 15);
        let n = untyped(s2, 8);
        if let Some(x) = some_free_var(&m) {
            let a = substitute(&m, &x, &n);
            let b = substitute(&m.refreshed(false), &x, &n.refreshed(false));
            prop_assert!(a.alpha_eq(&b), "{} vs {}", a, b);
        }
    }

    #[test]
    fn label_order_is_a_forest(seed: u64) {
        let t = untyped(seed, 25);
        let order = LabelOrder::of(&t);
        let labels = order.bound_labels();
        for a in &labels {
            prop_assert!(!order.less(a, a));
            for b in &labels {
                for c in &labels {
                    if order.less(a, b) && order.less(b, c) {
                        prop_assert!(order.less(a, c));
                    }
                }
                // Two labels below a common one are comparable in a forest.
                for c in &labels {
                    if order.less(a, c) && order.less(b, c) && a != b {
                        prop_assert!(order.less(a, b) || order.less(b, a));
                    }
                }
            }
        }
    }

    #[test]
    fn permutative_steps_shrink_the_signature(seed: u64) {
        let t = untyped(seed, 25);
        let (_, steps) = p_normalize(&t, DEFAULT_MAX_STEPS).unwrap();
        for s in steps {
            prop_assert!(signature(&s.after).is_subset(&signature(&s.before)), "{} at {}", s.rule, s.position);
            prop_assert!(label_judgment(&LabelSeq::empty(), &s.after));
        }
    }

    #[test]
    fn p_normal_form_is_idempotent(seed: u64) {
        let t = untyped(seed, 25);
        let n = p_normal_form(&t, DEFAULT_MAX_STEPS).unwrap();
        prop_assert!(p_normal_form(&n, DEFAULT_MAX_STEPS).unwrap().alpha_eq(&n));
    }

    #[test]
    fn parallel_step_is_a_beta_reduction(seed: u64, mask: u32) {
        let t = typed(seed);
        let redexes = beta_redexes(&t);
        let chosen: Vec<_> =
            redexes.iter().enumerate().filter(|(i, _)| mask >> (i % 32) & 1 == 1).map(|(_, p)| p.clone()).collect();
        let target = labeled_reduct(&marking_at(&t, &chosen).unwrap());
        // Contracting the chosen redexes innermost first reaches the reduct.
        let mut cur = t.clone();
        let mut order = chosen.clone();
        order.sort_by_key(|p| std::cmp::Reverse(p.len()));
        for p in order {
            cur = step_beta(&cur, &p).unwrap();
        }
        prop_assert!(cur.alpha_eq(&target), "{} vs {}", cur, target);
    }

    #[test]
    fn translations_agree_without_sums(seed: u64) {
        let cfg = GenConfig { max_size: 12, ..GenConfig::default() };
        let src = gen_source(&mut ChaCha8Rng::seed_from_u64(seed), &cfg);
        let interp = translate_cbv_open(&src);
        prop_assert_eq!(interp.theta.len(), src.sum_count());
        prop_assert!(label_judgment(&interp.theta, &interp.body));
        prop_assert!(translate_cbv(&src).is_label_closed());
        prop_assert!(translate_cbn(&src).is_label_closed());
    }
}

#[test]
fn translations_coincide_on_sum_free_sources() {
    let src = pel::translate::parse_source(r"(\x.x x) (\y.z y)").unwrap();
    assert!(translate_cbn(&src).alpha_eq(&translate_cbv(&src)));
}

#[test]
fn p_normal_forms_are_unique_across_many_strategies() {
    for seed in 0..20 {
        let t = untyped(seed, 25);
        let nf = p_normal_form(&t, DEFAULT_MAX_STEPS).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..100 {
            let r = p_normalize_random(&t, &LabelSeq::empty(), &mut rng, DEFAULT_MAX_STEPS).unwrap();
            assert!(r.alpha_eq(&nf), "{t}: {r} vs {nf}");
        }
    }
}

#[test]
fn path_ordering_is_transitive_on_small_terms() {
    // Brute force over an even sample of the terms up to size 6 with one
    // generator, against one shared precedence.
    let all: Vec<Term> = (1..=6).flat_map(|n| enumerate_terms(n, 1)).collect();
    let stride = all.len().div_ceil(80);
    let pool: Vec<Term> = all.into_iter().step_by(stride).collect();
    let joined = pool.iter().fold(Term::var(Var::free("x")), |acc, t| Term::app(acc, t.clone()));
    let prec = precedence_of(&joined);
    let n = pool.len();
    let less: Vec<Vec<bool>> = (0..n).map(|i| (0..n).map(|j| rpo_less(&pool[i], &pool[j], &prec)).collect()).collect();
    for i in 0..n {
        assert!(!less[i][i]);
        for j in 0..n {
            assert!(!(less[i][j] && less[j][i]));
            for k in 0..n {
                if less[i][j] && less[j][k] {
                    assert!(less[i][k], "{} < {} < {}", pool[i], pool[j], pool[k]);
                }
            }
        }
    }
}

#[test]
fn trials_replay_from_their_seed() {
    let p = find_property("church-rosser").unwrap();
    let cfg = (p.config)();
    let report = run_property(p, &cfg, 5);
    assert!(report.ok());
    for i in 0..5 {
        let seed = pel::harness::trial_seed(cfg.seed, i);
        let (a, oa) = replay(p, &cfg, seed);
        let (b, ob) = replay(p, &cfg, seed);
        assert_eq!(a.unwrap().to_string(), b.unwrap().to_string());
        assert_eq!(oa, ob);
        assert!(!matches!(oa, Outcome::Fail(_)));
    }
}

#[test]
fn typed_terms_reach_full_normal_form() {
    for seed in 0..50 {
        let t = typed(seed);
        let r = reduce(&t, Strategy::FullLeftmost, 1_000_000).unwrap();
        assert!(pel::beta::is_normal(&r.term, &LabelSeq::empty()).unwrap());
    }
}
