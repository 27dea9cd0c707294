use super::names::{base_name, NameSupply};
use super::{Formula, Term, Var};
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SubstError {
    #[error("substituting for `{var}` would be captured by the binder on `{binder}`")]
    Capture { var: Var, binder: Var },
    #[error("inclusion atoms take variables only; `{var}` cannot be replaced by `{term}` (use term inclusion)")]
    NonVariableInInclusion { var: Var, term: Term },
}

/// `φ(t/x)`: replaces the free occurrences of `x`, refusing capture.
pub fn substitute(phi: &Formula, x: &Var, t: &Term) -> Result<Formula, SubstError> {
    substitute_many(phi, &[(x.clone(), t.clone())])
}

/// Simultaneous substitution. Later pairs for an already mapped variable are ignored.
pub fn substitute_many(phi: &Formula, pairs: &[(Var, Term)]) -> Result<Formula, SubstError> {
    let mut map: BTreeMap<Var, Term> = BTreeMap::new();
    for (v, t) in pairs {
        map.entry(v.clone()).or_insert_with(|| t.clone());
    }
    map.retain(|v, t| !matches!(t, Term::Var(w) if w == v));
    if map.is_empty() {
        return Ok(phi.clone());
    }
    subst(phi, &map)
}

fn subst_term(t: &Term, map: &BTreeMap<Var, Term>) -> Term {
    match t {
        Term::Var(v) => map.get(v).cloned().unwrap_or_else(|| t.clone()),
        Term::Const(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| subst_term(a, map)).collect()),
    }
}

fn subst_seq(xs: &[Var], map: &BTreeMap<Var, Term>) -> Result<Vec<Var>, SubstError> {
    xs.iter()
        .map(|v| match map.get(v) {
            None => Ok(v.clone()),
            Some(Term::Var(w)) => Ok(w.clone()),
            Some(t) => Err(SubstError::NonVariableInInclusion { var: v.clone(), term: t.clone() }),
        })
        .collect()
}

fn subst(phi: &Formula, map: &BTreeMap<Var, Term>) -> Result<Formula, SubstError> {
    Ok(match phi {
        Formula::Bot => Formula::Bot,
        Formula::Eq(a, b) => Formula::Eq(subst_term(a, map), subst_term(b, map)),
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| subst_term(a, map)).collect()),
        Formula::Inc(xs, ys) => Formula::Inc(subst_seq(xs, map)?, subst_seq(ys, map)?),
        Formula::Not(b) => Formula::not(subst(b, map)?),
        Formula::And(a, b) => Formula::and(subst(a, map)?, subst(b, map)?),
        Formula::Or(a, b) => Formula::or(subst(a, map)?, subst(b, map)?),
        Formula::Exists(y, b) | Formula::Forall(y, b) => {
            let mut inner = map.clone();
            inner.remove(y);
            if !inner.is_empty() {
                let free = b.free_vars();
                inner.retain(|v, _| free.contains(v));
                for (v, t) in &inner {
                    if t.vars().contains(y) {
                        return Err(SubstError::Capture { var: v.clone(), binder: y.clone() });
                    }
                }
            }
            let body = if inner.is_empty() { (**b).clone() } else { subst(b, &inner)? };
            match phi {
                Formula::Exists(..) => Formula::exists(y.clone(), body),
                _ => Formula::forall(y.clone(), body),
            }
        }
    })
}

/// Alpha-equivalent formula whose binders are pairwise distinct and avoid
/// `reserved` and the free variables. A binder keeps its name when possible.
pub fn rename_bound(phi: &Formula, reserved: &BTreeSet<Var>) -> Formula {
    let mut taken: BTreeSet<Var> = reserved.clone();
    taken.extend(phi.free_vars());
    let mut supply = NameSupply::new(phi.all_vars().into_iter().chain(reserved.iter().cloned()));
    let mut env: Vec<(Var, Var)> = Vec::new();
    rename(phi, &mut taken, &mut supply, &mut env)
}

fn lookup(env: &[(Var, Var)], v: &Var) -> Var {
    env.iter().rev().find(|(old, _)| old == v).map(|(_, new)| new.clone()).unwrap_or_else(|| v.clone())
}

fn rename_term(t: &Term, env: &[(Var, Var)]) -> Term {
    match t {
        Term::Var(v) => Term::Var(lookup(env, v)),
        Term::Const(_) => t.clone(),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, env)).collect()),
    }
}

fn rename(phi: &Formula, taken: &mut BTreeSet<Var>, supply: &mut NameSupply, env: &mut Vec<(Var, Var)>) -> Formula {
    match phi {
        Formula::Bot => Formula::Bot,
        Formula::Eq(a, b) => Formula::Eq(rename_term(a, env), rename_term(b, env)),
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| rename_term(a, env)).collect()),
        Formula::Inc(xs, ys) => {
            Formula::Inc(xs.iter().map(|v| lookup(env, v)).collect(), ys.iter().map(|v| lookup(env, v)).collect())
        }
        Formula::Not(b) => Formula::not(rename(b, taken, supply, env)),
        Formula::And(a, b) => {
            let a = rename(a, taken, supply, env);
            Formula::and(a, rename(b, taken, supply, env))
        }
        Formula::Or(a, b) => {
            let a = rename(a, taken, supply, env);
            Formula::or(a, rename(b, taken, supply, env))
        }
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let new = if taken.contains(x) {
                let mut candidate = supply.fresh_indexed(base_name(x.as_str()));
                while taken.contains(&candidate) {
                    candidate = supply.fresh_indexed(base_name(x.as_str()));
                }
                candidate
            } else {
                x.clone()
            };
            taken.insert(new.clone());
            supply.reserve(&new);
            env.push((x.clone(), new.clone()));
            let body = rename(b, taken, supply, env);
            env.pop();
            match phi {
                Formula::Exists(..) => Formula::exists(new, body),
                _ => Formula::forall(new, body),
            }
        }
    }
}

/// Equality up to consistent renaming of bound variables.
pub fn alpha_eq(a: &Formula, b: &Formula) -> bool {
    alpha(a, b, &mut Vec::new(), &mut Vec::new())
}

fn resolve(env: &[Var], v: &Var) -> Result<usize, Var> {
    env.iter().rposition(|w| w == v).ok_or_else(|| v.clone())
}

fn alpha_var(x: &Var, y: &Var, ea: &[Var], eb: &[Var]) -> bool {
    resolve(ea, x) == resolve(eb, y)
}

fn alpha_term(s: &Term, t: &Term, ea: &[Var], eb: &[Var]) -> bool {
    match (s, t) {
        (Term::Var(x), Term::Var(y)) => alpha_var(x, y, ea, eb),
        (Term::Const(c), Term::Const(d)) => c == d,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, q)| alpha_term(p, q, ea, eb))
        }
        _ => false,
    }
}

fn alpha(a: &Formula, b: &Formula, ea: &mut Vec<Var>, eb: &mut Vec<Var>) -> bool {
    match (a, b) {
        (Formula::Bot, Formula::Bot) => true,
        (Formula::Eq(s1, t1), Formula::Eq(s2, t2)) => alpha_term(s1, s2, ea, eb) && alpha_term(t1, t2, ea, eb),
        (Formula::Rel(r, xs), Formula::Rel(q, ys)) => {
            r == q && xs.len() == ys.len() && xs.iter().zip(ys).all(|(p, t)| alpha_term(p, t, ea, eb))
        }
        (Formula::Inc(x1, y1), Formula::Inc(x2, y2)) => {
            x1.len() == x2.len()
                && y1.len() == y2.len()
                && x1.iter().zip(x2).chain(y1.iter().zip(y2)).all(|(p, q)| alpha_var(p, q, ea, eb))
        }
        (Formula::Not(p), Formula::Not(q)) => alpha(p, q, ea, eb),
        (Formula::And(p1, q1), Formula::And(p2, q2)) | (Formula::Or(p1, q1), Formula::Or(p2, q2)) => {
            alpha(p1, p2, ea, eb) && alpha(q1, q2, ea, eb)
        }
        (Formula::Exists(x, p), Formula::Exists(y, q)) | (Formula::Forall(x, p), Formula::Forall(y, q)) => {
            ea.push(x.clone());
            eb.push(y.clone());
            let r = alpha(p, q, ea, eb);
            ea.pop();
            eb.pop();
            r
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula_inferred, vars};

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    #[test]
    fn substitute_constant() {
        let phi = Formula::var_eq(&Var::new("x"), &Var::new("y"));
        let out = substitute(&phi, &Var::new("x"), &Term::Const("c".into())).unwrap();
        assert_eq!(out, Formula::Eq(Term::Const("c".into()), Term::var("y")));
    }

    #[test]
    fn substitute_detects_capture() {
        let phi = p("E y. x = y");
        let err = substitute(&phi, &Var::new("x"), &Term::var("y")).unwrap_err();
        assert_eq!(err, SubstError::Capture { var: Var::new("x"), binder: Var::new("y") });
    }

    #[test]
    fn substitute_into_inclusion_needs_variable() {
        let phi = Formula::inc(vars(&["x"]), vars(&["y"])).unwrap();
        let t = Term::App("f".into(), vec![Term::var("z")]);
        assert!(matches!(substitute(&phi, &Var::new("x"), &t), Err(SubstError::NonVariableInInclusion { .. })));
        let ok = substitute(&phi, &Var::new("x"), &Term::var("z")).unwrap();
        assert_eq!(ok, Formula::inc(vars(&["z"]), vars(&["y"])).unwrap());
    }

    #[test]
    fn substitution_stops_at_rebinding() {
        let phi = p("E x. x = y");
        assert_eq!(substitute(&phi, &Var::new("x"), &Term::var("y")).unwrap(), phi);
    }

    #[test]
    fn simultaneous_swap() {
        let phi = p("x <= y");
        let out = substitute_many(&phi, &[(Var::new("x"), Term::var("y")), (Var::new("y"), Term::var("x"))]).unwrap();
        assert_eq!(out, p("y <= x"));
    }

    #[test]
    fn rename_bound_examples() {
        let out = rename_bound(&p("(E x. x = x) & E x. x = x"), &BTreeSet::new());
        assert_eq!(out, p("(E x. x = x) & E x1. x1 = x1"));
        let out = rename_bound(&p("A x. E x. x = x"), &BTreeSet::new());
        assert_eq!(out, p("A x. E x1. x1 = x1"));
        let phi = p("E x. x = y");
        let reserved: BTreeSet<Var> = [Var::new("y")].into_iter().collect();
        assert_eq!(rename_bound(&phi, &reserved), phi);
    }

    #[test]
    fn rename_bound_avoids_inner_names() {
        let reserved: BTreeSet<Var> = [Var::new("x")].into_iter().collect();
        let out = rename_bound(&p("E x. E x1. x = x1"), &reserved);
        assert!(alpha_eq(&out, &p("E a. E b. a = b")));
        assert!(!out.all_vars().contains(&Var::new("x")));
    }

    #[test]
    fn alpha_equivalence() {
        assert!(alpha_eq(&p("E x. x <= y"), &p("E z. z <= y")));
        assert!(!alpha_eq(&p("E x. x <= y"), &p("E y. y <= y")));
        assert!(!alpha_eq(&p("E x. x = y"), &p("E z. x = y")));
    }
}
