use inclusion_logic::approx::build_approx;
use inclusion_logic::gen;
use inclusion_logic::normal_form::{normal_form, render};
use inclusion_logic::proof::mutate::mutants;
use inclusion_logic::proof::{check_script, corpus, derived_raa_weakneg, parse_script, ProofScript, Sequent};
use inclusion_logic::semantics::eval_fast;
use inclusion_logic::syntax::{parse_formula_inferred, Formula, Signature, Var};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn script(name: &str) -> ProofScript {
    let entry = corpus().iter().find(|e| e.name == name).unwrap_or_else(|| panic!("no corpus entry {}", name));
    parse_script(entry.text).unwrap()
}

fn f(s: &str) -> Formula {
    parse_formula_inferred(s).unwrap().0
}

fn claim(name: &str) -> Sequent {
    let report = check_script(&script(name));
    assert!(report.accepted(), "{}: {:?}", name, report.first_failure);
    report.claim.unwrap()
}

#[test]
fn every_corpus_script_is_accepted() {
    assert!(corpus().len() >= 15);
    for entry in corpus() {
        let s = parse_script(entry.text).unwrap_or_else(|e| panic!("{}: {}", entry.name, e));
        let report = check_script(&s);
        assert!(report.accepted(), "{}: {:?}", entry.name, report.first_failure);
    }
}

#[test]
fn canonical_printing_round_trips() {
    for entry in corpus() {
        let s = parse_script(entry.text).unwrap();
        let again = parse_script(&s.to_string()).unwrap();
        assert_eq!(s, again, "{}", entry.name);
    }
}

#[test]
fn corpus_claims() {
    let cases = [
        ("refl", vec![], "x <= x"),
        ("diagonal", vec!["x, y <= z, z"], "x = y"),
        ("repeat", vec!["x, y <= u, v"], "x, y, y <= u, v, v"),
        ("trans", vec!["x <= y", "y <= z"], "x <= z"),
        ("chain3", vec!["E x. E y. (y <= x & y < x)"], "E x1. E x2. E x3. (x1 < x2 & x2 < x3)"),
        ("anon_empty", vec!["a ups"], "bot"),
        ("anon_mono", vec!["a, b ups c"], "a ups c, d"),
        ("anon_weak", vec!["a, b ups c, b"], "a, b ups c"),
        ("anon_perm", vec!["a, b ups c, d"], "(b, a ups c, d) & (a, b ups d, c)"),
        ("classical_raa", vec!["~~P(x)"], "P(x)"),
        ("weak_neg_raa", vec!["P(x)"], "P(x)"),
    ];
    for (name, ctx, concl) in cases {
        let want = Sequent::new(ctx.into_iter().map(f), f(concl));
        assert_eq!(claim(name), want, "{}", name);
    }
}

#[test]
fn normal_form_instance_matches_transformation() {
    let phi = f("x <= y");
    assert_eq!(claim("nf_inclusion"), Sequent::new([phi.clone()], render(&normal_form(&phi))));
}

#[test]
fn approximation_instance_matches_construction() {
    let phi = f("E x. E y. (y <= x & y < x)");
    let strong = build_approx(&normal_form(&phi), 0, true).unwrap().formula;
    assert_eq!(claim("approx_zero"), Sequent::new([phi], strong));
}

#[test]
fn weak_negation_script_is_transformer_output() {
    let input = script("weak_neg_input");
    let alpha = f("P(x)");
    let out = derived_raa_weakneg(&[alpha.clone()].into(), &alpha, &input).unwrap();
    assert_eq!(out, script("weak_neg_raa"));
}

#[test]
fn single_point_mutants_are_rejected() {
    let mut total = 0;
    for entry in corpus() {
        let s = parse_script(entry.text).unwrap();
        for m in mutants(&s) {
            let report = check_script(&m.script);
            assert!(!report.accepted(), "{}: mutant accepted: {}", entry.name, m.description);
            assert!(report.first_failure.is_some());
            total += 1;
        }
    }
    assert!(total >= 100, "only {} mutants", total);
    println!("{} mutants rejected", total);
}

#[test]
fn checking_is_deterministic() {
    for entry in corpus() {
        let s = parse_script(entry.text).unwrap();
        assert_eq!(check_script(&s), check_script(&s), "{}", entry.name);
        for m in mutants(&s).into_iter().take(5) {
            assert_eq!(check_script(&m.script), check_script(&m.script));
        }
    }
}

fn signature_of(seq: &Sequent) -> Signature {
    let mut sig = Signature::new();
    for phi in seq.context.iter().chain([&seq.conclusion]) {
        phi.collect_symbols(&mut sig).unwrap();
    }
    sig
}

fn free_of(seq: &Sequent) -> Vec<Var> {
    let mut vs: BTreeSet<Var> = seq.conclusion.free_vars();
    for phi in &seq.context {
        vs.extend(phi.free_vars());
    }
    vs.into_iter().collect()
}

#[test]
fn corpus_conclusions_have_no_small_countermodels() {
    for entry in corpus() {
        let seq = claim(entry.name);
        let dom = free_of(&seq);
        for m in gen::all_models(&signature_of(&seq), 2) {
            for team in gen::all_teams(&m, &dom, 4) {
                let premises = seq.context.iter().all(|g| eval_fast(&m, &team, g).unwrap());
                if premises {
                    assert!(eval_fast(&m, &team, &seq.conclusion).unwrap(), "{}: countermodel {:?}", entry.name, team);
                }
            }
        }
    }
}

#[test]
fn corpus_conclusions_survive_random_three_element_models() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for entry in corpus() {
        let seq = claim(entry.name);
        let dom = free_of(&seq);
        let sig = signature_of(&seq);
        for _ in 0..200 {
            let m = gen::model(&mut rng, &sig, 3);
            let team = gen::team(&mut rng, &m, &dom, 4);
            if seq.context.iter().all(|g| eval_fast(&m, &team, g).unwrap()) {
                assert!(eval_fast(&m, &team, &seq.conclusion).unwrap(), "{}", entry.name);
            }
        }
    }
}
