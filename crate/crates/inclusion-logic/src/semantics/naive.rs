//! Direct evaluation of the satisfaction clauses: disjunction tries every
//! cover of the team, the existential tries every supplement function.

use super::fo::{holds, Env};
use super::model::{Elem, Model};
use super::team::{Row, Team};
use super::{check_input, EvalError};
use crate::syntax::{Formula, Var};
use std::collections::{BTreeSet, HashMap, HashSet};

/// Size limits for the brute-force evaluator. Exceeding one is an error.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Guards {
    /// Largest team on which a disjunction or existential search is run.
    pub max_rows: usize,
    pub max_universe: usize,
    pub max_depth: usize,
    /// Total number of clause evaluations and search iterations.
    pub max_steps: u64,
}

impl Default for Guards {
    fn default() -> Guards {
        Guards { max_rows: 8, max_universe: 4, max_depth: 4, max_steps: 1_000_000 }
    }
}

pub fn eval_naive(m: &Model, team: &Team, phi: &Formula) -> Result<bool, EvalError> {
    eval_naive_with(m, team, phi, &Guards::default())
}

pub fn eval_naive_with(m: &Model, team: &Team, phi: &Formula, guards: &Guards) -> Result<bool, EvalError> {
    check_input(m, team, phi)?;
    if team.len() > guards.max_rows {
        return Err(EvalError::Guard(format!("team has {} rows, limit {}", team.len(), guards.max_rows)));
    }
    if m.size() > guards.max_universe {
        return Err(EvalError::Guard(format!("universe has {} elements, limit {}", m.size(), guards.max_universe)));
    }
    if phi.quantifier_depth() > guards.max_depth {
        return Err(EvalError::Guard(format!(
            "quantifier depth {} exceeds limit {}",
            phi.quantifier_depth(),
            guards.max_depth
        )));
    }
    let mut search = Search { m, guards, steps: 0 };
    let rows: Vec<Row> = team.rows().iter().cloned().collect();
    search.sat(phi, team.domain(), &rows)
}

struct Search<'a> {
    m: &'a Model,
    guards: &'a Guards,
    steps: u64,
}

impl Search<'_> {
    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.guards.max_steps {
            return Err(EvalError::Guard(format!("more than {} evaluation steps", self.guards.max_steps)));
        }
        Ok(())
    }

    fn row_guard(&self, n: usize) -> Result<(), EvalError> {
        if n > self.guards.max_rows {
            return Err(EvalError::Guard(format!("search over {} rows, limit {}", n, self.guards.max_rows)));
        }
        Ok(())
    }

    fn sat(&mut self, phi: &Formula, dom: &[Var], rows: &[Row]) -> Result<bool, EvalError> {
        self.tick()?;
        match phi {
            Formula::Bot => Ok(rows.is_empty()),
            Formula::Eq(..) | Formula::Rel(..) => Ok(rows.iter().all(|r| holds(self.m, &mut Env::new(dom, r), phi))),
            Formula::Not(a) => Ok(rows.iter().all(|r| !holds(self.m, &mut Env::new(dom, r), a))),
            Formula::Inc(xs, ys) => {
                let px: Vec<usize> = xs.iter().map(|v| dom.binary_search(v).unwrap()).collect();
                let py: Vec<usize> = ys.iter().map(|v| dom.binary_search(v).unwrap()).collect();
                Ok(rows.iter().all(|s| rows.iter().any(|t| px.iter().zip(&py).all(|(&i, &j)| s[i] == t[j]))))
            }
            Formula::And(a, b) => Ok(self.sat(a, dom, rows)? && self.sat(b, dom, rows)?),
            Formula::Or(a, b) => self.cover(a, b, dom, rows),
            Formula::Exists(x, body) => self.exists(x, body, dom, rows),
            Formula::Forall(x, body) => {
                let (dom2, slot) = extend(dom, x);
                let mut out: Vec<Row> =
                    rows.iter().flat_map(|r| self.m.elements().map(move |a| Team::extend_row(r, slot, a))).collect();
                out.sort();
                out.dedup();
                self.sat(body, &dom2, &out)
            }
        }
    }

    /// Some `Y ∪ Z = X` with `Y ⊨ a` and `Z ⊨ b`.
    fn cover(&mut self, a: &Formula, b: &Formula, dom: &[Var], rows: &[Row]) -> Result<bool, EvalError> {
        self.row_guard(rows.len())?;
        let n = rows.len();
        let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
        let pick = |mask: u32| -> Vec<Row> { (0..n).filter(|i| mask >> i & 1 == 1).map(|i| rows[i].clone()).collect() };
        let mut right: HashMap<u32, bool> = HashMap::new();
        for ymask in 0..=full {
            if !self.sat(a, dom, &pick(ymask))? {
                continue;
            }
            let rest = full & !ymask;
            let mut sub = ymask;
            loop {
                self.tick()?;
                let z = rest | sub;
                let ok = match right.get(&z) {
                    Some(&v) => v,
                    None => {
                        let v = self.sat(b, dom, &pick(z))?;
                        right.insert(z, v);
                        v
                    }
                };
                if ok {
                    return Ok(true);
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & ymask;
            }
        }
        Ok(false)
    }

    /// Some supplement function `F` with `X(F/x) ⊨ body`.
    fn exists(&mut self, x: &Var, body: &Formula, dom: &[Var], rows: &[Row]) -> Result<bool, EvalError> {
        self.row_guard(rows.len())?;
        let (dom2, slot) = extend(dom, x);
        let elems: Vec<Elem> = self.m.elements().collect();
        let choices: Vec<Vec<Elem>> = (1u32..(1 << elems.len()))
            .map(|mask| elems.iter().copied().filter(|&e| mask >> e & 1 == 1).collect())
            .collect();
        let mut digits = vec![0usize; rows.len()];
        let mut seen: HashSet<Vec<Row>> = HashSet::new();
        loop {
            self.tick()?;
            let mut team: BTreeSet<Row> = BTreeSet::new();
            for (r, &d) in rows.iter().zip(&digits) {
                for &a in &choices[d] {
                    team.insert(Team::extend_row(r, slot, a));
                }
            }
            let team: Vec<Row> = team.into_iter().collect();
            if seen.insert(team.clone()) && self.sat(body, &dom2, &team)? {
                return Ok(true);
            }
            if !advance(&mut digits, choices.len()) {
                return Ok(false);
            }
        }
    }
}

fn extend(dom: &[Var], x: &Var) -> (Vec<Var>, (usize, bool)) {
    match dom.binary_search(x) {
        Ok(i) => (dom.to_vec(), (i, true)),
        Err(i) => {
            let mut d = dom.to_vec();
            d.insert(i, x.clone());
            (d, (i, false))
        }
    }
}

fn advance(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        if *d + 1 < base {
            *d += 1;
            return true;
        }
        *d = 0;
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula_inferred, vars};

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    fn xy_team(rows: &[(Elem, Elem)]) -> Team {
        Team::new(vars(&["x", "y"]), rows.iter().map(|&(a, b)| vec![a, b])).unwrap()
    }

    #[test]
    fn inclusion_examples() {
        let m = Model::with_size(3).unwrap();
        assert!(eval_naive(&m, &xy_team(&[(1, 2), (2, 1)]), &p("x <= y")).unwrap());
        assert!(!eval_naive(&m, &xy_team(&[(1, 2)]), &p("x <= y")).unwrap());
        assert!(eval_naive(&m, &Team::empty(vec![]), &Formula::Bot).unwrap());
    }

    fn order(n: usize, edges: &[(Elem, Elem)]) -> Model {
        let mut m = Model::with_size(n).unwrap();
        m.add_relation("<", 2, edges.iter().map(|&(a, b)| vec![a, b])).unwrap();
        m
    }

    #[test]
    fn well_foundedness_examples() {
        let phi = p("E x. E y. (y <= x & y < x)");
        let cycle = order(3, &[(0, 1), (1, 2), (2, 0)]);
        assert!(eval_naive(&cycle, &Team::unit(), &phi).unwrap());
        let linear = order(3, &[(0, 1), (1, 2), (0, 2)]);
        assert!(!eval_naive(&linear, &Team::unit(), &phi).unwrap());
    }

    #[test]
    fn lax_disjunction_allows_overlap() {
        let m = Model::with_size(2).unwrap();
        let team = xy_team(&[(0, 0), (0, 1), (1, 1)]);
        assert!(eval_naive(&m, &team, &p("x = y | ~x = y")).unwrap());
        assert!(!eval_naive(&m, &team, &p("x = y | x = x & bot")).unwrap());
    }

    #[test]
    fn guards_are_reported() {
        let m = Model::with_size(2).unwrap();
        let rows: Vec<Row> = (0..9).map(|i| vec![i % 2, i / 2 % 2, i / 4 % 2, i / 8]).collect();
        let big = Team::new(vars(&["a", "b", "c", "d"]), rows).unwrap();
        assert!(matches!(eval_naive(&m, &big, &p("a = a")), Err(EvalError::Guard(_))));
        let deep = p("E a. E b. E c. E d. E e. a = e");
        assert!(matches!(eval_naive(&m, &Team::unit(), &deep), Err(EvalError::Guard(_))));
    }

    #[test]
    fn unbound_variable_is_an_error() {
        let m = Model::with_size(2).unwrap();
        assert_eq!(eval_naive(&m, &Team::unit(), &p("x = x")), Err(EvalError::Unbound(Var::new("x"))));
    }
}
