use inclusion_logic::gen::all_teams;
use inclusion_logic::ind::{
    counterexample_model, find_counterexample, ind_implies, IndAtom, IndProblem, IndVerdict, SearchBounds,
};
use inclusion_logic::semantics::{eval_fast, eval_naive};
use inclusion_logic::syntax::Var;
use proptest::prelude::*;

const NAMES: [&str; 4] = ["a", "b", "c", "d"];

fn atom(max_width: usize) -> impl Strategy<Value = IndAtom> {
    (1..=max_width).prop_flat_map(|w| {
        (prop::collection::vec(0..NAMES.len(), w), prop::collection::vec(0..NAMES.len(), w)).prop_map(|(l, r)| {
            let v = |i: usize| Var::new(NAMES[i]);
            IndAtom::new(l.into_iter().map(v).collect(), r.into_iter().map(v).collect()).unwrap()
        })
    })
}

fn problem() -> impl Strategy<Value = IndProblem> {
    (prop::collection::vec(atom(2), 0..4), atom(2)).prop_map(|(g, goal)| IndProblem::new(g, goal))
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn derivable_goals_hold_in_all_small_teams(p in problem()) {
        if let IndVerdict::Derivable(d) = ind_implies(&p, SearchBounds::default()) {
            prop_assert!(d.replay(&p).is_ok());
            let m = counterexample_model(3);
            let dom: Vec<Var> = p.vars().into_iter().collect();
            let gamma: Vec<_> = p.gamma.iter().map(IndAtom::to_formula).collect();
            let goal = p.goal.to_formula();
            for team in all_teams(&m, &dom, 3) {
                if gamma.iter().all(|g| eval_fast(&m, &team, g).unwrap()) {
                    prop_assert!(eval_fast(&m, &team, &goal).unwrap(), "{:?} fails on {:?}", p, team);
                }
            }
        }
    }

    #[test]
    fn verdicts_never_conflict_and_certificates_replay(p in problem(), rows in 1usize..4, elems in 2usize..4) {
        let bounds = SearchBounds { depth: 16, max_rows: rows, max_elems: elems };
        match ind_implies(&p, bounds) {
            IndVerdict::Derivable(d) => {
                prop_assert!(d.replay(&p).is_ok());
                prop_assert!(find_counterexample(&p, 3, 3).is_none());
            }
            IndVerdict::Refuted { model, team } => {
                prop_assert!(team.len() <= rows);
                prop_assert!(!eval_naive(&model, &team, &p.goal.to_formula()).unwrap());
                for g in &p.gamma {
                    prop_assert!(eval_naive(&model, &team, &g.to_formula()).unwrap());
                }
            }
            IndVerdict::Unknown { .. } => {
                prop_assert!(find_counterexample(&p, rows, elems).is_none());
            }
        }
    }
}
