use inclusion_logic::gen::{self, FormulaShape};
use inclusion_logic::semantics::{
    eval_fast, eval_fo, eval_naive, eval_naive_with, max_subteam, EvalError, Guards, Model, Team,
};
use inclusion_logic::syntax::{sugar, vars, Formula, Var};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

fn quick() -> Guards {
    Guards { max_steps: 100_000, ..Guards::default() }
}

fn instance(seed: u64, max_size: usize, max_rows: usize) -> (Model, Team, Formula) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = FormulaShape::new(&["x", "y", "z"], max_size);
    let n = 2 + (seed % 2) as usize;
    let m = gen::model(&mut rng, &gen::signature(&shape), n);
    let phi = gen::formula(&mut rng, &shape);
    let mut dom: BTreeSet<Var> = phi.free_vars();
    for v in &shape.vars {
        if rand::Rng::gen_bool(&mut rng, 0.3) {
            dom.insert(v.clone());
        }
    }
    let dom: Vec<Var> = dom.into_iter().collect();
    let team = gen::team(&mut rng, &m, &dom, max_rows);
    (m, team, phi)
}

#[test]
fn fast_agrees_with_naive_on_seeded_sample() {
    let mut checked = 0;
    for seed in 0..1500 {
        let (m, team, phi) = instance(seed, 10, 5);
        match eval_naive_with(&m, &team, &phi, &quick()) {
            Ok(slow) => {
                assert_eq!(slow, eval_fast(&m, &team, &phi).unwrap(), "seed {} formula {}", seed, phi);
                checked += 1;
            }
            Err(EvalError::Guard(_)) => {}
            Err(e) => panic!("seed {}: {}", seed, e),
        }
    }
    assert!(checked > 1000, "only {} instances within guards", checked);
}

/// Direct reading of the anonymity atom: each row has a team-mate that agrees on `xs` and differs on `ys`.
fn anonymity_direct(team: &Team, xs: &[Var], ys: &[Var]) -> bool {
    let pos = |v: &Var| team.position(v).unwrap();
    team.rows().iter().all(|s| {
        team.rows()
            .iter()
            .any(|t| xs.iter().all(|v| s[pos(v)] == t[pos(v)]) && ys.iter().any(|v| s[pos(v)] != t[pos(v)]))
    })
}

#[test]
fn anonymity_matches_direct_reading() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let m = Model::with_size(3).unwrap();
    let dom = vars(&["x", "y", "z"]);
    let cases: Vec<(Vec<Var>, Vec<Var>)> = vec![
        (vars(&["x"]), vars(&["y"])),
        (vec![], vars(&["y"])),
        (vars(&["x", "y"]), vars(&["z"])),
        (vars(&["x"]), vars(&["y", "z"])),
    ];
    for (xs, ys) in cases {
        let phi = sugar::desugar(&sugar::SugarForm::Anonymity(xs.clone(), ys.clone())).unwrap();
        for _ in 0..60 {
            let team = gen::team(&mut rng, &m, &dom, 5);
            assert_eq!(eval_fast(&m, &team, &phi).unwrap(), anonymity_direct(&team, &xs, &ys));
        }
    }
}

#[test]
fn max_subteam_is_largest_by_brute_force() {
    for seed in 0..300 {
        let (m, team, phi) = instance(seed + 10_000, 8, 4);
        let best = max_subteam(&m, &team, &phi).unwrap();
        assert!(eval_fast(&m, &best, &phi).unwrap());
        let rows: Vec<_> = team.rows().iter().cloned().collect();
        for mask in 0u32..(1 << rows.len()) {
            let sub = team.with_rows((0..rows.len()).filter(|i| mask >> i & 1 == 1).map(|i| rows[i].clone()));
            if sub.len() > best.len() && matches!(eval_naive_with(&m, &sub, &phi, &quick()), Ok(true)) {
                panic!("seed {}: larger satisfying subteam for {}", seed, phi);
            }
        }
    }
}

#[test]
fn well_foundedness_on_two_element_graphs() {
    let phi = inclusion_logic::syntax::parse_formula_inferred("E x. E y. (y <= x & y < x)").unwrap().0;
    for bits in 0u32..16 {
        let edges: Vec<Vec<u32>> = (0..4).filter(|i| bits >> i & 1 == 1).map(|i| vec![i / 2, i % 2]).collect();
        let cyclic = edges.iter().any(|e| e[0] == e[1])
            || edges.len() >= 2 && edges.contains(&vec![0, 1]) && edges.contains(&vec![1, 0]);
        let mut m = Model::with_size(2).unwrap();
        m.add_relation("<", 2, edges).unwrap();
        assert_eq!(eval_naive(&m, &Team::unit(), &phi).unwrap(), cyclic, "graph {:04b}", bits);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn empty_team_satisfies_everything(seed in any::<u64>()) {
        let (m, team, phi) = instance(seed, 12, 0);
        prop_assert!(team.is_empty());
        prop_assert!(eval_fast(&m, &team, &phi).unwrap());
    }

    #[test]
    fn first_order_formulas_are_flat(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = FormulaShape::new(&["x", "y"], 8).first_order().with_terms();
        let m = gen::model(&mut rng, &gen::signature(&shape), 3);
        let phi = gen::formula(&mut rng, &shape);
        let team = gen::team(&mut rng, &m, &vars(&["x", "y"]), 6);
        let rowwise = team.assignments().all(|s| eval_fo(&m, &s, &phi).unwrap());
        prop_assert_eq!(eval_fast(&m, &team, &phi).unwrap(), rowwise);
        if team.len() <= 6 {
            if let Ok(v) = eval_naive_with(&m, &team, &phi, &quick()) {
                prop_assert_eq!(v, rowwise);
            }
        }
    }

    #[test]
    fn union_closure(seed in any::<u64>()) {
        let (m, a, phi) = instance(seed, 10, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5555);
        let b = gen::team(&mut rng, &m, a.domain(), 4);
        if eval_fast(&m, &a, &phi).unwrap() && eval_fast(&m, &b, &phi).unwrap() {
            prop_assert!(eval_fast(&m, &a.union(&b).unwrap(), &phi).unwrap());
        }
    }

    #[test]
    fn locality(seed in any::<u64>()) {
        let (m, team, phi) = instance(seed, 10, 4);
        let free = phi.free_vars();
        let restricted = team.restrict(&free);
        prop_assert_eq!(eval_fast(&m, &team, &phi).unwrap(), eval_fast(&m, &restricted, &phi).unwrap());
    }
}

#[test]
fn unbound_and_malformed_inputs() {
    let m = Model::with_size(2).unwrap();
    let bad = Formula::Inc(vars(&["x"]), vars(&["x", "x"]));
    let team = Team::new(vars(&["x"]), vec![vec![0]]).unwrap();
    assert!(matches!(eval_fast(&m, &team, &bad), Err(EvalError::Malformed(_))));
    let phi = Formula::var_eq(&Var::new("x"), &Var::new("y"));
    assert_eq!(eval_fast(&m, &team, &phi), Err(EvalError::Unbound(Var::new("y"))));
}
