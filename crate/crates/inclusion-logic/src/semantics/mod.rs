//! Finite models, teams and the satisfaction relation.

mod fast;
pub mod files;
mod fo;
mod model;
mod naive;
mod search;
mod team;

pub use fast::{eval_fast, max_subteam};
pub use fo::eval_fo;
pub(crate) use model::next_tuple;
pub use model::{Elem, Model, ModelError};
pub use naive::{eval_naive, eval_naive_with, Guards};
pub use search::eval_fo_search;
pub use team::{duplicate, supplement, Assignment, Row, SupplementFunction, Team, TeamError};

use crate::syntax::{Formula, FormulaError, Var};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum EvalError {
    #[error("free variable `{0}` is not in the team domain")]
    Unbound(Var),
    #[error("formula is not first-order")]
    NotFirstOrder,
    #[error("{0}")]
    Symbol(String),
    #[error("malformed formula: {0}")]
    Malformed(#[from] FormulaError),
    #[error("size guard exceeded: {0}")]
    Guard(String),
    #[error("evaluators disagree")]
    Disagreement,
}

pub(crate) fn check_input(m: &Model, team: &Team, phi: &Formula) -> Result<(), EvalError> {
    phi.validate()?;
    m.check_symbols(phi).map_err(EvalError::Symbol)?;
    match phi.free_vars().into_iter().find(|v| team.position(v).is_none()) {
        Some(v) => Err(EvalError::Unbound(v)),
        None => Ok(()),
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum Engine {
    Naive,
    #[default]
    Fast,
    /// Runs both and fails with [`EvalError::Disagreement`] if they differ.
    Both,
}

impl std::str::FromStr for Engine {
    type Err = String;

    fn from_str(s: &str) -> Result<Engine, String> {
        match s {
            "naive" => Ok(Engine::Naive),
            "fast" => Ok(Engine::Fast),
            "both" => Ok(Engine::Both),
            _ => Err(format!("unknown engine `{}` (expected naive, fast or both)", s)),
        }
    }
}

pub fn eval(engine: Engine, guards: &Guards, m: &Model, team: &Team, phi: &Formula) -> Result<bool, EvalError> {
    match engine {
        Engine::Naive => eval_naive_with(m, team, phi, guards),
        Engine::Fast => eval_fast(m, team, phi),
        Engine::Both => {
            let slow = eval_naive_with(m, team, phi, guards)?;
            if slow == eval_fast(m, team, phi)? {
                Ok(slow)
            } else {
                Err(EvalError::Disagreement)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula_inferred;

    #[test]
    fn both_engines_agree_on_cycle() {
        let mut m = Model::with_size(3).unwrap();
        m.add_relation("<", 2, vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        let phi = parse_formula_inferred("E x. E y. (y <= x & y < x)").unwrap().0;
        assert_eq!(eval(Engine::Both, &Guards::default(), &m, &Team::unit(), &phi), Ok(true));
    }

    #[test]
    fn unknown_symbols_rejected() {
        let m = Model::with_size(2).unwrap();
        let phi = parse_formula_inferred("R(x)").unwrap().0;
        let team = Team::new(crate::syntax::vars(&["x"]), vec![vec![0]]).unwrap();
        assert!(matches!(eval_fast(&m, &team, &phi), Err(EvalError::Symbol(_))));
    }

    #[test]
    fn engine_names() {
        assert_eq!("both".parse::<Engine>(), Ok(Engine::Both));
        assert!("lazy".parse::<Engine>().is_err());
    }
}
