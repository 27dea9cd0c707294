//! Derived constructs and their expansion into kernel formulas.

use super::{substitute_many, Formula, NameSupply, Term, Var};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum SugarForm {
    /// `[t1,...,tn] <= [t1',...,tn']`
    TermInclusion(Vec<Term>, Vec<Term>),
    /// `xs ups ys`: every row has a team-mate agreeing on `xs` and differing on `ys`.
    Anonymity(Vec<Var>, Vec<Var>),
    /// `snot α`: holds iff the team is empty or does not satisfy `α`.
    WeakNeg(Formula),
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SugarError {
    #[error("weak negation needs a first-order body")]
    NonFoWeakNeg,
    #[error("term inclusion sides have lengths {0} and {1}")]
    LengthMismatch(usize, usize),
    #[error("term inclusion with empty sides")]
    Empty,
}

pub fn desugar(s: &SugarForm) -> Result<Formula, SugarError> {
    match s {
        SugarForm::TermInclusion(ls, rs) => term_inclusion(ls, rs),
        SugarForm::Anonymity(xs, ys) => Ok(anonymity(xs, ys)),
        SugarForm::WeakNeg(alpha) => weak_neg(alpha),
    }
}

fn term_inclusion(ls: &[Term], rs: &[Term]) -> Result<Formula, SugarError> {
    if ls.len() != rs.len() {
        return Err(SugarError::LengthMismatch(ls.len(), rs.len()));
    }
    if ls.is_empty() {
        return Err(SugarError::Empty);
    }
    let mut used = BTreeSet::new();
    for t in ls.iter().chain(rs) {
        t.collect_vars(&mut used);
    }
    let mut supply = NameSupply::new(used);
    let us = supply.fresh_seq("u", ls.len());
    let ws = supply.fresh_seq("w", rs.len());
    let as_terms = |vs: &[Var]| vs.iter().cloned().map(Term::Var).collect::<Vec<_>>();
    let body = Formula::conj([
        Formula::seq_eq(&as_terms(&us), ls),
        Formula::seq_eq(&as_terms(&ws), rs),
        Formula::Inc(us.clone(), ws.clone()),
    ]);
    let bound: Vec<Var> = us.into_iter().chain(ws).collect();
    Ok(Formula::exists_seq(&bound, body))
}

fn anonymity(xs: &[Var], ys: &[Var]) -> Formula {
    if ys.is_empty() {
        return Formula::Bot;
    }
    let mut supply = NameSupply::new(xs.iter().chain(ys).cloned());
    let vs = supply.fresh_seq("v", ys.len());
    let left: Vec<Var> = xs.iter().chain(&vs).cloned().collect();
    let right: Vec<Var> = xs.iter().chain(ys).cloned().collect();
    let differ = Formula::disj(vs.iter().zip(ys).map(|(v, y)| Formula::var_neq(v, y)));
    Formula::exists_seq(&vs, Formula::and(Formula::Inc(left, right), differ))
}

fn weak_neg(alpha: &Formula) -> Result<Formula, SugarError> {
    if !alpha.is_fo() {
        return Err(SugarError::NonFoWeakNeg);
    }
    let xs: Vec<Var> = alpha.free_vars().into_iter().collect();
    if xs.is_empty() {
        return Ok(Formula::not(alpha.clone()));
    }
    let mut supply = NameSupply::new(alpha.all_vars());
    let ys = supply.fresh_seq("y", xs.len());
    let pairs: Vec<(Var, Term)> = xs.iter().cloned().zip(ys.iter().cloned().map(Term::Var)).collect();
    let renamed = substitute_many(alpha, &pairs).expect("fresh variables cannot be captured");
    Ok(Formula::exists_seq(&ys, Formula::and(Formula::Inc(ys.clone(), xs), Formula::not(renamed))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula_inferred, vars};

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    #[test]
    fn term_inclusion_shape() {
        let f = Term::App("f".into(), vec![Term::var("x")]);
        let out = desugar(&SugarForm::TermInclusion(vec![f], vec![Term::Const("c".into())])).unwrap();
        let expected = crate::syntax::parse_formula(
            "E u. E w. (u = f(x) & w = c & u <= w)",
            &crate::syntax::Signature::new().with_function("f", 1).with_constant("c"),
        )
        .unwrap();
        assert_eq!(out, expected);
    }

    #[test]
    fn anonymity_cases() {
        let out = desugar(&SugarForm::Anonymity(vec![], vars(&["y"]))).unwrap();
        assert_eq!(out, p("E v. (v <= y & ~v = y)"));
        assert_eq!(desugar(&SugarForm::Anonymity(vars(&["x"]), vec![])).unwrap(), Formula::Bot);
        let out = desugar(&SugarForm::Anonymity(vars(&["x", "y"]), vars(&["z"]))).unwrap();
        assert_eq!(out, p("E v. (x,y,v <= x,y,z & ~v = z)"));
    }

    #[test]
    fn anonymity_sequence_disjunction() {
        let out = desugar(&SugarForm::Anonymity(vars(&["x"]), vars(&["v", "w"]))).unwrap();
        assert_eq!(out, p("E v1. E v2. (x,v1,v2 <= x,v,w & (~v1 = v | ~v2 = w))"));
    }

    #[test]
    fn weak_negation() {
        let out = desugar(&SugarForm::WeakNeg(p("x = x"))).unwrap();
        assert_eq!(out, p("E y. (y <= x & ~y = y)"));
        let closed = desugar(&SugarForm::WeakNeg(p("bot"))).unwrap();
        assert_eq!(closed, p("~bot"));
        assert_eq!(desugar(&SugarForm::WeakNeg(p("x <= y"))), Err(SugarError::NonFoWeakNeg));
    }

    #[test]
    fn outputs_have_balanced_inclusions() {
        let out = desugar(&SugarForm::Anonymity(vars(&["a", "b"]), vars(&["c", "d", "e"]))).unwrap();
        assert!(out.validate().is_ok());
    }
}
