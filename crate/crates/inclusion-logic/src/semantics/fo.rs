use super::model::{Elem, Model};
use super::team::Assignment;
use super::EvalError;
use crate::syntax::{Formula, Term, Var};

/// Variable lookup: a sorted base assignment plus a stack of quantifier bindings.
pub(crate) struct Env<'a> {
    base_vars: &'a [Var],
    base_vals: &'a [Elem],
    stack: Vec<(Var, Elem)>,
}

impl<'a> Env<'a> {
    pub(crate) fn new(base_vars: &'a [Var], base_vals: &'a [Elem]) -> Env<'a> {
        Env { base_vars, base_vals, stack: Vec::new() }
    }

    fn get(&self, v: &Var) -> Elem {
        if let Some((_, e)) = self.stack.iter().rev().find(|(w, _)| w == v) {
            return *e;
        }
        let i = self.base_vars.binary_search(v).expect("free variables are checked before evaluation");
        self.base_vals[i]
    }
}

fn term(m: &Model, env: &Env, t: &Term) -> Elem {
    match t {
        Term::Var(v) => env.get(v),
        Term::Const(c) => m.constant(c).expect("symbols are checked before evaluation"),
        Term::App(f, args) => {
            let vals: Vec<Elem> = args.iter().map(|a| term(m, env, a)).collect();
            m.apply(f, &vals).expect("function tables are total")
        }
    }
}

/// Tarski truth of a first-order formula. Callers have checked symbols and free variables.
pub(crate) fn holds(m: &Model, env: &mut Env, phi: &Formula) -> bool {
    match phi {
        Formula::Bot => false,
        Formula::Eq(a, b) => term(m, env, a) == term(m, env, b),
        Formula::Rel(r, args) => {
            let vals: Vec<Elem> = args.iter().map(|a| term(m, env, a)).collect();
            m.holds(r, &vals).expect("symbols are checked before evaluation")
        }
        Formula::Not(b) => !holds(m, env, b),
        Formula::And(a, b) => holds(m, env, a) && holds(m, env, b),
        Formula::Or(a, b) => holds(m, env, a) || holds(m, env, b),
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let want = matches!(phi, Formula::Exists(..));
            let mut result = !want;
            for a in m.elements() {
                env.stack.push((x.clone(), a));
                let r = holds(m, env, b);
                env.stack.pop();
                if r == want {
                    result = want;
                    break;
                }
            }
            result
        }
        Formula::Inc(..) => unreachable!("first-order evaluation of an inclusion atom"),
    }
}

/// Truth of a first-order formula under a single assignment.
pub fn eval_fo(m: &Model, s: &Assignment, alpha: &Formula) -> Result<bool, EvalError> {
    if !alpha.is_fo() {
        return Err(EvalError::NotFirstOrder);
    }
    m.check_symbols(alpha).map_err(EvalError::Symbol)?;
    if let Some(v) = alpha.free_vars().into_iter().find(|v| !s.contains_key(v)) {
        return Err(EvalError::Unbound(v));
    }
    let vars: Vec<Var> = s.keys().cloned().collect();
    let vals: Vec<Elem> = s.values().copied().collect();
    let mut env = Env::new(&vars, &vals);
    Ok(holds(m, &mut env, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula_inferred;

    fn order_model() -> Model {
        let mut m = Model::with_size(2).unwrap();
        m.add_relation("<", 2, vec![vec![0, 1]]).unwrap();
        m
    }

    fn assign(pairs: &[(&str, Elem)]) -> Assignment {
        pairs.iter().map(|(v, e)| (Var::new(v), *e)).collect()
    }

    #[test]
    fn order_examples() {
        let m = order_model();
        let f = parse_formula_inferred("x < y").unwrap().0;
        assert!(eval_fo(&m, &assign(&[("x", 0), ("y", 1)]), &f).unwrap());
        assert!(!eval_fo(&m, &assign(&[("x", 1), ("y", 0)]), &f).unwrap());
        assert!(!eval_fo(&m, &assign(&[]), &Formula::Bot).unwrap());
    }

    #[test]
    fn quantifiers_and_errors() {
        let m = order_model();
        let f = parse_formula_inferred("E y. x < y").unwrap().0;
        assert!(eval_fo(&m, &assign(&[("x", 0)]), &f).unwrap());
        assert!(!eval_fo(&m, &assign(&[("x", 1)]), &f).unwrap());
        assert_eq!(eval_fo(&m, &assign(&[]), &f), Err(EvalError::Unbound(Var::new("x"))));
        let inc = parse_formula_inferred("x <= y").unwrap().0;
        assert_eq!(eval_fo(&m, &assign(&[("x", 0), ("y", 0)]), &inc), Err(EvalError::NotFirstOrder));
    }

    #[test]
    fn shadowing_uses_innermost_binding() {
        let m = order_model();
        let f = parse_formula_inferred("A x. E x. x = x").unwrap().0;
        assert!(eval_fo(&m, &assign(&[("x", 1)]), &f).unwrap());
        let g = parse_formula_inferred("E x. x < y").unwrap().0;
        assert!(eval_fo(&m, &assign(&[("x", 1), ("y", 1)]), &g).unwrap());
    }
}
