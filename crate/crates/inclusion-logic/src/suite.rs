//! Seeded property suites over the whole library.
//!
//! Each suite returns a [`SuiteReport`] counting checked instances and listing
//! violations; the acceptance test runs them at full size, the CLI at any size.

use crate::approx::{check_approx, ApproxError};
use crate::gen::{self, FormulaShape};
use crate::ind::{find_counterexample, ind_implies, parse_atom, parse_atoms, IndProblem, IndVerdict, SearchBounds};
use crate::normal_form::{normal_form, render};
use crate::proof::mutate::mutants;
use crate::proof::{check_script, corpus, parse_script, Sequent};
use crate::semantics::{eval_fast, eval_fo, eval_naive, eval_naive_with, EvalError, Guards, Model, Team};
use crate::syntax::sugar::{desugar, SugarForm};
use crate::syntax::{parse_formula_inferred, vars, Formula, Signature, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::collections::BTreeSet;
use std::time::{Duration, Instant};

/// Violations kept per report.
const KEEP: usize = 5;

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub name: String,
    pub checked: usize,
    /// Instances drawn but not compared (guard or budget exceeded).
    pub skipped: usize,
    pub violations: usize,
    pub examples: Vec<String>,
    #[serde(serialize_with = "as_secs")]
    pub elapsed: Duration,
}

fn as_secs<S: serde::Serializer>(d: &Duration, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_f64(d.as_secs_f64())
}

impl SuiteReport {
    fn new(name: &str) -> SuiteReport {
        SuiteReport {
            name: name.to_string(),
            checked: 0,
            skipped: 0,
            violations: 0,
            examples: Vec::new(),
            elapsed: Duration::ZERO,
        }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checked += 1;
        if !ok {
            self.violations += 1;
            if self.examples.len() < KEEP {
                self.examples.push(what());
            }
        }
    }

    fn fail(&mut self, what: String) {
        self.check(false, || what);
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

fn timed(name: &str, body: impl FnOnce(&mut SuiteReport)) -> SuiteReport {
    let start = Instant::now();
    let mut r = SuiteReport::new(name);
    body(&mut r);
    r.elapsed = start.elapsed();
    r
}

fn rng_for(seed: u64, i: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(i as u64))
}

/// Random model of 2 or 3 elements, formula and team over a subset of `x, y, z`.
fn instance(rng: &mut ChaCha8Rng, max_size: usize, max_rows: usize, terms: bool) -> (Model, Team, Formula) {
    let mut shape = FormulaShape::new(&["x", "y", "z"], max_size);
    if terms {
        shape = shape.with_terms();
    }
    let n = rng.gen_range(2..=3);
    let m = gen::model(rng, &gen::signature(&shape), n);
    let phi = gen::formula(rng, &shape);
    let mut dom: BTreeSet<Var> = phi.free_vars();
    for v in &shape.vars {
        if rng.gen_bool(0.3) {
            dom.insert(v.clone());
        }
    }
    let dom: Vec<Var> = dom.into_iter().collect();
    let team = gen::team(rng, &m, &dom, max_rows);
    (m, team, phi)
}

/// Both evaluators on random instances.
pub fn oracle_equivalence(seed: u64, count: usize) -> SuiteReport {
    timed("oracle equivalence", |r| {
        let guards = Guards { max_steps: 50_000, ..Guards::default() };
        let mut i = 0;
        while r.checked < count && i < count * 4 {
            let mut rng = rng_for(seed, i);
            i += 1;
            let (m, team, phi) = instance(&mut rng, 12, 6, i % 3 == 0);
            match eval_naive_with(&m, &team, &phi, &guards) {
                Ok(slow) => {
                    let fast = eval_fast(&m, &team, &phi);
                    r.check(fast == Ok(slow), || {
                        format!("{} on {} rows: naive {} fast {:?}", phi, team.len(), slow, fast)
                    });
                }
                Err(EvalError::Guard(_)) => r.skipped += 1,
                Err(e) => r.fail(format!("{}: {}", phi, e)),
            }
        }
    })
}

/// Locality, union closure, flatness and downward closure of first-order
/// formulas, and the empty-team property; `count` instances of each.
pub fn team_properties(seed: u64, count: usize) -> SuiteReport {
    timed("team properties", |r| {
        for i in 0..count {
            let mut rng = rng_for(seed, i);
            let (m, a, phi) = instance(&mut rng, 10, 5, false);
            let holds = |t: &Team, f: &Formula| eval_fast(&m, t, f).unwrap_or_else(|e| panic!("{}: {}", f, e));
            let va = holds(&a, &phi);

            r.check(va == holds(&a.restrict(&phi.free_vars()), &phi), || format!("locality: {}", phi));

            let b = gen::team(&mut rng, &m, a.domain(), 5);
            let union = a.union(&b).expect("same domain");
            r.check(!(va && holds(&b, &phi)) || holds(&union, &phi), || format!("union closure: {}", phi));

            r.check(holds(&Team::empty(a.domain().to_vec()), &phi), || format!("empty team: {}", phi));

            let shape = FormulaShape::new(&["x", "y"], 8).first_order().with_terms();
            let size = rng.gen_range(2..=3);
            let fm = gen::model(&mut rng, &gen::signature(&shape), size);
            let alpha = gen::formula(&mut rng, &shape);
            let t = gen::team(&mut rng, &fm, &vars(&["x", "y"]), 6);
            let rowwise = t.assignments().all(|s| eval_fo(&fm, &s, &alpha).expect("first-order"));
            let whole = eval_fast(&fm, &t, &alpha).expect("evaluable");
            r.check(whole == rowwise, || format!("flatness: {}", alpha));
            let good = t.with_rows(
                t.rows()
                    .iter()
                    .zip(t.assignments())
                    .filter(|(_, s)| eval_fo(&fm, s, &alpha) == Ok(true))
                    .map(|(row, _)| row.clone()),
            );
            let sub = good.with_rows(good.rows().iter().filter(|_| rng.gen_bool(0.5)).cloned());
            r.check(eval_fast(&fm, &good, &alpha) == Ok(true) && eval_fast(&fm, &sub, &alpha) == Ok(true), || {
                format!("downward closure: {}", alpha)
            });
        }
    })
}

/// Largest team the normal-form check may build: the quantifier prefix of a
/// normal form multiplies the team by the universe size per variable.
const NF_MAX_ROWS: usize = 50_000;

/// `φ` and its rendered normal form agree on sampled models and teams.
/// Formulas whose normal form is too wide for any sampled universe count as skipped.
pub fn normal_form_preservation(seed: u64, count: usize, per_formula: usize) -> SuiteReport {
    timed("normal form preservation", |r| {
        let mut formulas = 0;
        let mut i = 0;
        while formulas < count && i < count * 20 {
            let mut rng = rng_for(seed, i);
            i += 1;
            let shape = FormulaShape::new(&["x", "y", "z"], 10);
            let phi = gen::formula(&mut rng, &shape);
            let form = normal_form(&phi);
            let width = (form.w.len() + form.x.len() + 1) as u32;
            let sizes: Vec<usize> =
                (2usize..=3).filter(|&n| 4usize.saturating_mul(n.saturating_pow(width)) <= NF_MAX_ROWS).collect();
            if sizes.is_empty() {
                r.skipped += 1;
                continue;
            }
            formulas += 1;
            let nf = render(&form);
            let dom: Vec<Var> = phi.free_vars().into_iter().collect();
            for _ in 0..per_formula {
                let size = sizes[rng.gen_range(0..sizes.len())];
                let m = gen::model(&mut rng, &gen::signature(&shape), size);
                let team = gen::team(&mut rng, &m, &dom, 4);
                let (a, b) = (eval_fast(&m, &team, &phi), eval_fast(&m, &team, &nf));
                r.check(a.is_ok() && a == b, || format!("{} vs {}: {:?} {:?}", phi, nf, a, b));
            }
        }
    })
}

/// The sentence saying that `<` is not well-founded.
pub fn well_foundedness_sentence() -> Formula {
    parse_formula_inferred("E x. E y. (y <= x & y < x)").expect("fixed sentence").0
}

fn has_cycle(n: usize, edges: &[(usize, usize)]) -> bool {
    // Repeatedly drop vertices without outgoing edges; a cycle survives.
    let mut alive = vec![true; n];
    loop {
        let sink = (0..n).find(|&v| alive[v] && !edges.iter().any(|&(a, b)| a == v && alive[b]));
        match sink {
            Some(v) => alive[v] = false,
            None => return alive.iter().any(|&a| a),
        }
    }
}

/// Every interpretation of `<` on two and on three elements.
pub fn well_foundedness(max_elems: usize) -> SuiteReport {
    timed("well-foundedness", |r| {
        let phi = well_foundedness_sentence();
        for n in 2..=max_elems {
            let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |b| (a, b))).collect();
            for mask in 0u64..1 << pairs.len() {
                let edges: Vec<(usize, usize)> =
                    pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
                let mut m = Model::with_size(n).expect("small universe");
                m.add_relation("<", 2, edges.iter().map(|&(a, b)| vec![a as u32, b as u32])).expect("fresh relation");
                let got = eval_fast(&m, &Team::unit(), &phi);
                r.check(got == Ok(has_cycle(n, &edges)), || format!("{} elements, edges {:?}: {:?}", n, edges, got));
            }
        }
    })
}

/// `count` true sentences satisfy their approximations up to `max_level`; on
/// every sentence drawn, each level implies the one below.
pub fn approximation_direction(seed: u64, count: usize, max_level: usize) -> SuiteReport {
    timed("approximation direction", |r| {
        let mut i = 0;
        let mut sampled = 0;
        while sampled < count && i < count * 20 {
            let mut rng = rng_for(seed, i);
            i += 1;
            let shape = FormulaShape::new(&["x", "y"], 8);
            let phi = gen::formula_over(&mut rng, &shape, &BTreeSet::new());
            let size = rng.gen_range(2..=3);
            let m = gen::model(&mut rng, &gen::signature(&shape), size);
            let truth = eval_fast(&m, &Team::unit(), &phi).expect("sentence");
            let nf = normal_form(&phi);
            let mut levels = Vec::new();
            for n in 0..=max_level {
                match check_approx(&m, &nf, n) {
                    Ok(v) => levels.push(v),
                    Err(ApproxError::TooLarge { .. }) | Err(ApproxError::Eval(EvalError::Guard(_))) => break,
                    Err(e) => {
                        r.fail(format!("{}: {}", phi, e));
                        break;
                    }
                }
            }
            if levels.len() <= max_level {
                r.skipped += 1;
                continue;
            }
            if truth {
                sampled += 1;
                r.check(levels.iter().all(|&v| v), || format!("{} true but levels {:?}", phi, levels));
            }
            r.check(levels.windows(2).all(|w| w[0] || !w[1]), || format!("{} not monotone: {:?}", phi, levels));
        }
    })
}

/// Every bundled script checks and every single-point mutant is rejected.
pub fn corpus_and_mutants() -> SuiteReport {
    timed("proof corpus", |r| {
        for entry in corpus() {
            match parse_script(entry.text) {
                Ok(s) => {
                    let report = check_script(&s);
                    r.check(report.accepted(), || format!("{} rejected: {:?}", entry.name, report.first_failure));
                    for m in mutants(&s) {
                        r.check(!check_script(&m.script).accepted(), || {
                            format!("{}: mutant accepted ({})", entry.name, m.description)
                        });
                    }
                }
                Err(e) => r.fail(format!("{}: {}", entry.name, e)),
            }
        }
    })
}

pub fn corpus_len() -> usize {
    corpus().len()
}

fn symbols(seq: &Sequent) -> Signature {
    let mut sig = Signature::new();
    for phi in seq.context.iter().chain([&seq.conclusion]) {
        phi.collect_symbols(&mut sig).expect("checked formulas");
    }
    sig
}

/// No corpus conclusion has a countermodel of `elems` elements with at most `rows` rows.
pub fn corpus_soundness(elems: usize, rows: usize) -> SuiteReport {
    timed("corpus soundness", |r| {
        for entry in corpus() {
            let Some(seq) = parse_script(entry.text).ok().and_then(|s| check_script(&s).claim) else {
                r.fail(format!("{} does not check", entry.name));
                continue;
            };
            let mut dom: BTreeSet<Var> = seq.conclusion.free_vars();
            for g in &seq.context {
                dom.extend(g.free_vars());
            }
            let dom: Vec<Var> = dom.into_iter().collect();
            for m in gen::all_models(&symbols(&seq), elems) {
                for team in gen::all_teams(&m, &dom, rows) {
                    if seq.context.iter().all(|g| eval_fast(&m, &team, g) == Ok(true)) {
                        r.check(eval_fast(&m, &team, &seq.conclusion) == Ok(true), || {
                            format!("{}: countermodel with {} rows", entry.name, team.len())
                        });
                    }
                }
            }
        }
    })
}

/// The three axioms on their textbook instances, and the converse of an atom.
pub fn ind_examples() -> SuiteReport {
    timed("inclusion implication", |r| {
        let derivable = [("x <= y; y <= z", "x <= z"), ("", "x <= x"), ("x1, x2 <= y1, y2", "x2, x1 <= y2, y1")];
        for (gamma, goal) in derivable {
            let p = IndProblem::new(parse_atoms(gamma).expect("fixed"), parse_atom(goal).expect("fixed"));
            match ind_implies(&p, SearchBounds::default()) {
                IndVerdict::Derivable(d) => {
                    r.check(d.replay(&p).is_ok(), || format!("{} |- {}: certificate does not replay", gamma, goal));
                    r.check(find_counterexample(&p, 3, 3).is_none(), || {
                        format!("{} |- {} has a counterexample", gamma, goal)
                    });
                }
                v => r.fail(format!("{} |- {}: {}", gamma, goal, v.label())),
            }
        }
        let p = IndProblem::new(parse_atoms("x <= y").expect("fixed"), parse_atom("y <= x").expect("fixed"));
        match ind_implies(&p, SearchBounds { max_rows: 2, max_elems: 2, ..SearchBounds::default() }) {
            IndVerdict::Refuted { model, team } => {
                let verified = team.len() <= 2
                    && eval_naive(&model, &team, &p.gamma[0].to_formula()) == Ok(true)
                    && eval_naive(&model, &team, &p.goal.to_formula()) == Ok(false);
                r.check(verified, || format!("counterexample {:?} does not verify", team));
            }
            v => r.fail(format!("x <= y |- y <= x: {}", v.label())),
        }
    })
}

/// Each row has a team-mate agreeing on `xs` and differing somewhere on `ys`.
fn anonymity_direct(team: &Team, xs: &[Var], ys: &[Var]) -> bool {
    let pos = |v: &Var| team.position(v).expect("in domain");
    team.rows().iter().all(|s| {
        team.rows()
            .iter()
            .any(|t| xs.iter().all(|v| s[pos(v)] == t[pos(v)]) && ys.iter().any(|v| s[pos(v)] != t[pos(v)]))
    })
}

/// The desugared anonymity atom against its direct reading.
pub fn anonymity(seed: u64, count: usize) -> SuiteReport {
    timed("anonymity", |r| {
        let names = ["x", "y", "z", "u"];
        for i in 0..count {
            let mut rng = rng_for(seed, i);
            let mut pick = |lo: usize| {
                let k = rng.gen_range(lo..=2);
                let mut vs: Vec<Var> = Vec::new();
                for _ in 0..k {
                    vs.push(Var::new(names[rng.gen_range(0..names.len())]));
                }
                vs
            };
            let (xs, ys) = (pick(0), pick(0));
            let m = Model::with_size(rng.gen_range(2..=3)).expect("small universe");
            let team = gen::team(&mut rng, &m, &vars(&names), 6);
            let phi = desugar(&SugarForm::Anonymity(xs.clone(), ys.clone())).expect("plain variables");
            let got = eval_fast(&m, &team, &phi);
            r.check(got == Ok(anonymity_direct(&team, &xs, &ys)), || {
                format!("{:?} ups {:?} on {} rows: {:?}", xs, ys, team.len(), got)
            });
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cycle_detection() {
        assert!(has_cycle(2, &[(0, 0)]));
        assert!(has_cycle(3, &[(0, 1), (1, 2), (2, 0)]));
        assert!(!has_cycle(3, &[(0, 1), (1, 2), (0, 2)]));
        assert!(!has_cycle(2, &[]));
    }

    #[test]
    fn small_runs_pass() {
        for r in [
            oracle_equivalence(1, 50),
            team_properties(1, 50),
            normal_form_preservation(1, 20, 2),
            well_foundedness(2),
            approximation_direction(1, 5, 1),
            ind_examples(),
            anonymity(1, 50),
        ] {
            assert!(r.passed(), "{}: {:?}", r.name, r.examples);
            assert!(r.checked > 0, "{}", r.name);
        }
    }

    #[test]
    fn violations_are_counted_and_sampled() {
        let mut r = SuiteReport::new("t");
        for i in 0..10 {
            r.check(i % 2 == 0, || i.to_string());
        }
        assert_eq!((r.checked, r.violations, r.examples.len()), (10, 5, KEEP));
        assert!(!r.passed());
    }
}
