//! Maximal-subteam evaluation. Satisfying subteams are closed under unions,
//! so each team has a largest satisfying subteam; it is computed clause by
//! clause, with greatest-fixpoint iteration for inclusion atoms, conjunction
//! and the universal quantifier.

use super::fo::{holds, Env};
use super::model::{Elem, Model};
use super::team::{Row, Team};
use super::{check_input, EvalError};
use crate::syntax::{Formula, Var};
use std::collections::{BTreeSet, HashSet};

/// The largest `Y ⊆ X` with `M ⊨_Y φ`.
pub fn max_subteam(m: &Model, team: &Team, phi: &Formula) -> Result<Team, EvalError> {
    check_input(m, team, phi)?;
    let rows: Vec<Row> = team.rows().iter().cloned().collect();
    let out = mst(m, phi, team.domain(), rows);
    Ok(team.with_rows(out))
}

pub fn eval_fast(m: &Model, team: &Team, phi: &Formula) -> Result<bool, EvalError> {
    Ok(max_subteam(m, team, phi)?.len() == team.len())
}

/// `rows` is sorted and duplicate-free; so is the result, which is a subset of it.
fn mst(m: &Model, phi: &Formula, dom: &[Var], rows: Vec<Row>) -> Vec<Row> {
    if rows.is_empty() {
        return rows;
    }
    if phi.is_fo() {
        return rows.into_iter().filter(|r| holds(m, &mut Env::new(dom, r), phi)).collect();
    }
    let free = phi.free_vars();
    if free.len() < dom.len() {
        return via_projection(m, phi, dom, rows, &free);
    }
    match phi {
        Formula::Inc(xs, ys) => inclusion(dom, xs, ys, rows),
        Formula::Or(a, b) => {
            let left = mst(m, a, dom, rows.clone());
            let right = mst(m, b, dom, rows);
            merge(left, right)
        }
        Formula::And(a, b) => {
            let mut current = rows;
            loop {
                let before = current.len();
                current = mst(m, b, dom, mst(m, a, dom, current));
                if current.len() == before || current.is_empty() {
                    return current;
                }
            }
        }
        Formula::Exists(x, body) => {
            let (dom2, slot) = extend(dom, x);
            let witnesses = mst(m, body, &dom2, duplicate_rows(m, &rows, slot));
            let keys: HashSet<Row> = witnesses.into_iter().map(|t| drop_slot(&t, slot.0)).collect();
            rows.into_iter().filter(|s| keys.contains(&key_of(s, slot))).collect()
        }
        Formula::Forall(x, body) => {
            let (dom2, slot) = extend(dom, x);
            let mut current = rows;
            loop {
                let good: HashSet<Row> = mst(m, body, &dom2, duplicate_rows(m, &current, slot)).into_iter().collect();
                let before = current.len();
                current.retain(|s| m.elements().all(|a| good.contains(&Team::extend_row(s, slot, a))));
                if current.len() == before || current.is_empty() {
                    return current;
                }
            }
        }
        Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Not(_) => {
            unreachable!("first-order formulas are filtered above")
        }
    }
}

/// By locality the answer is the preimage of the answer on the projection to the free variables.
fn via_projection(m: &Model, phi: &Formula, dom: &[Var], rows: Vec<Row>, free: &BTreeSet<Var>) -> Vec<Row> {
    let keep: Vec<usize> = (0..dom.len()).filter(|&i| free.contains(&dom[i])).collect();
    let small_dom: Vec<Var> = keep.iter().map(|&i| dom[i].clone()).collect();
    let project = |r: &Row| -> Row { keep.iter().map(|&i| r[i]).collect() };
    let mut small: Vec<Row> = rows.iter().map(project).collect();
    small.sort_unstable();
    small.dedup();
    let good: HashSet<Row> = mst(m, phi, &small_dom, small).into_iter().collect();
    rows.into_iter().filter(|r| good.contains(&project(r))).collect()
}

/// Drop rows whose `xs`-value is not among the current `ys`-values, until stable.
fn inclusion(dom: &[Var], xs: &[Var], ys: &[Var], mut rows: Vec<Row>) -> Vec<Row> {
    let px: Vec<usize> = xs.iter().map(|v| dom.binary_search(v).unwrap()).collect();
    let py: Vec<usize> = ys.iter().map(|v| dom.binary_search(v).unwrap()).collect();
    loop {
        let values: HashSet<Vec<Elem>> = rows.iter().map(|r| py.iter().map(|&j| r[j]).collect()).collect();
        let before = rows.len();
        rows.retain(|r| values.contains(&px.iter().map(|&i| r[i]).collect::<Vec<_>>()));
        if rows.len() == before {
            return rows;
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

fn duplicate_rows(m: &Model, rows: &[Row], slot: (usize, bool)) -> Vec<Row> {
    let mut out: Vec<Row> = rows.iter().flat_map(|r| m.elements().map(move |a| Team::extend_row(r, slot, a))).collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn drop_slot(row: &[Elem], i: usize) -> Row {
    let mut r = row.to_vec();
    r.remove(i);
    r
}

/// The part of an original row that its extensions remember.
fn key_of(row: &[Elem], slot: (usize, bool)) -> Row {
    if slot.1 {
        drop_slot(row, slot.0)
    } else {
        row.to_vec()
    }
}

fn merge(a: Vec<Row>, b: Vec<Row>) -> Vec<Row> {
    let set: BTreeSet<Row> = a.into_iter().chain(b).collect();
    set.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::semantics::naive::eval_naive;
    use crate::syntax::{parse_formula_inferred, vars};

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    fn xy_team(rows: &[(Elem, Elem)]) -> Team {
        Team::new(vars(&["x", "y"]), rows.iter().map(|&(a, b)| vec![a, b])).unwrap()
    }

    #[test]
    fn inclusion_removal_iteration() {
        let m = Model::with_size(4).unwrap();
        let team = xy_team(&[(1, 2), (2, 1), (3, 1)]);
        let out = max_subteam(&m, &team, &p("x <= y")).unwrap();
        assert_eq!(out, xy_team(&[(1, 2), (2, 1)]));
    }

    #[test]
    fn cascading_removal() {
        let m = Model::with_size(4).unwrap();
        let team = xy_team(&[(0, 1), (1, 2), (2, 3)]);
        assert!(max_subteam(&m, &team, &p("x <= y")).unwrap().is_empty());
    }

    #[test]
    fn first_order_is_a_row_filter() {
        let m = Model::with_size(3).unwrap();
        let team = xy_team(&[(0, 0), (0, 1), (2, 2)]);
        assert_eq!(max_subteam(&m, &team, &p("x = y")).unwrap(), xy_team(&[(0, 0), (2, 2)]));
        assert!(max_subteam(&m, &Team::empty(vars(&["x", "y"])), &p("x <= y")).unwrap().is_empty());
    }

    #[test]
    fn agrees_with_naive_on_examples() {
        let mut cycle = Model::with_size(3).unwrap();
        cycle.add_relation("<", 2, vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        let mut linear = Model::with_size(3).unwrap();
        linear.add_relation("<", 2, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        let phi = p("E x. E y. (y <= x & y < x)");
        for m in [&cycle, &linear] {
            assert_eq!(eval_fast(m, &Team::unit(), &phi).unwrap(), eval_naive(m, &Team::unit(), &phi).unwrap());
        }
        assert!(eval_fast(&cycle, &Team::unit(), &phi).unwrap());
        assert!(!eval_fast(&linear, &Team::unit(), &phi).unwrap());
    }

    #[test]
    fn large_team_without_guard() {
        let m = Model::with_size(4).unwrap();
        let rows: Vec<(Elem, Elem)> = (0..12).map(|i| (i % 4, (i / 4) % 4)).collect();
        let team = xy_team(&rows);
        assert!(eval_fast(&m, &team, &p("E z. (x <= z & z = x | y <= x)")).is_ok());
    }

    #[test]
    fn universal_fixpoint() {
        let m = Model::with_size(2).unwrap();
        let team = Team::new(vars(&["x"]), vec![vec![0], vec![1]]).unwrap();
        assert!(eval_fast(&m, &team, &p("A y. y <= x")).unwrap());
        assert!(!eval_fast(&m, &team, &p("A y. x = y")).unwrap());
    }
}
