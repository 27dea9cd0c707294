use super::{check_script, Param, ProofScript, Rule, RuleApp, RuleError, Sequent};
use crate::syntax::sugar::{desugar, SugarForm};
use crate::syntax::{Formula, NameSupply, Term, Var};
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum DerivedError {
    #[error("formula {0} is not first-order")]
    NotFirstOrder(Formula),
    #[error("input script rejected: {0}")]
    InputRejected(String),
    #[error("input script proves `{0}`, expected a context with the weak negation and conclusion bot")]
    WrongClaim(Sequent),
    #[error(transparent)]
    Rule(#[from] RuleError),
}

/// From a checked proof of `Γ, ∼α ⊢ ⊥` builds a proof of `Γ ⊢ α`.
///
/// The input lines are kept under the prefix `in.`; the new lines introduce
/// `∼α` from its two conjuncts, cut it against the input, and close with `incExp`.
pub fn derived_raa_weakneg(
    gamma: &BTreeSet<Formula>,
    alpha: &Formula,
    input: &ProofScript,
) -> Result<ProofScript, DerivedError> {
    if !alpha.is_fo() {
        return Err(DerivedError::NotFirstOrder(alpha.clone()));
    }
    let report = check_script(input);
    if let Some(f) = report.first_failure {
        return Err(DerivedError::InputRejected(format!("line {}: {}", f.line, f.message)));
    }
    let claim = input.claim().expect("accepted scripts have a claim").clone();
    let weak = desugar(&SugarForm::WeakNeg(alpha.clone())).map_err(|_| DerivedError::NotFirstOrder(alpha.clone()))?;
    let rest: BTreeSet<Formula> = claim.context.iter().filter(|f| **f != weak).cloned().collect();
    if claim.conclusion != Formula::Bot || !rest.is_subset(gamma) {
        return Err(DerivedError::WrongClaim(claim));
    }

    let mut out = ProofScript::new();
    for line in &input.lines {
        let mut line = line.clone();
        line.id = format!("in.{}", line.id);
        if let super::Justification::Rule(app) = &mut line.justification {
            for p in &mut app.premises {
                *p = format!("in.{}", p);
            }
        }
        out.lines.push(line);
    }
    let input_qed = format!("in.{}", input.qed);

    let seq = |vs: &[Var]| Param::Vars(vs.to_vec());
    let xs: Vec<Var> = alpha.free_vars().into_iter().collect();
    if xs.is_empty() {
        let mut supply = NameSupply::new(claim.all_vars().into_iter().chain(gamma.iter().flat_map(|f| f.all_vars())));
        let x = supply.fresh("v");
        let y = supply.fresh("v");
        let z = supply.fresh("v");
        let atom = Formula::Inc(vec![y.clone()], vec![x.clone()]);
        if claim.context.contains(&weak) {
            out.derive("w", RuleApp::new(Rule::Weaken).from([&input_qed]).with("add", Param::Formula(atom)))?;
        } else {
            out.derive(
                "w",
                RuleApp::new(Rule::Weaken)
                    .from([&input_qed])
                    .with("add", Param::Formula(atom))
                    .with("add", Param::Formula(weak.clone())),
            )?;
        }
        out.derive(
            "exp",
            RuleApp::new(Rule::IncExp)
                .from(["w"])
                .with("y", seq(&[y]))
                .with("x", seq(&[x]))
                .with("z", seq(&[z]))
                .with("alpha", Param::Formula(alpha.clone())),
        )?;
    } else {
        let (ys, body) = match peel_exists(&weak, xs.len()) {
            Some(p) => p,
            None => unreachable!("weak negation of an open formula is existential"),
        };
        let (atom, neg) = match &body {
            Formula::And(a, b) => ((**a).clone(), (**b).clone()),
            _ => unreachable!("weak negation body is a conjunction"),
        };
        out.assume("atom", atom);
        out.assume("neg", neg);
        out.derive("pair", RuleApp::new(Rule::AndI).from(["atom", "neg"]))?;
        let mut last = "pair".to_string();
        for k in (0..ys.len()).rev() {
            let id = format!("ex{}", k + 1);
            let phi = Formula::exists_seq(&ys[k + 1..], body.clone());
            out.derive(
                &id,
                RuleApp::new(Rule::ExistsI)
                    .from([&last])
                    .with("x", Param::Var(ys[k].clone()))
                    .with("t", Param::Term(Term::Var(ys[k].clone())))
                    .with("phi", Param::Formula(phi)),
            )?;
            last = id;
        }
        let lemma = if claim.context.contains(&weak) {
            input_qed
        } else {
            out.derive("w", RuleApp::new(Rule::Weaken).from([&input_qed]).with("add", Param::Formula(weak.clone())))?;
            "w".to_string()
        };
        out.derive("cut", RuleApp::new(Rule::Cut).from([&last, &lemma]))?;
        out.derive(
            "exp",
            RuleApp::new(Rule::IncExp)
                .from(["cut"])
                .with("y", seq(&ys))
                .with("x", seq(&xs))
                .with("z", seq(&xs))
                .with("alpha", Param::Formula(alpha.clone())),
        )?;
    }
    let have = out.claim().expect("just derived").context.clone();
    let missing: Vec<Formula> = gamma.difference(&have).cloned().collect();
    if !missing.is_empty() {
        let mut app = RuleApp::new(Rule::Weaken).from(["exp"]);
        for f in missing {
            app = app.with("add", Param::Formula(f));
        }
        out.derive("done", app)?;
    }
    Ok(out)
}

fn peel_exists(phi: &Formula, n: usize) -> Option<(Vec<Var>, Formula)> {
    let mut vs = Vec::new();
    let mut cur = phi;
    for _ in 0..n {
        match cur {
            Formula::Exists(x, b) => {
                vs.push(x.clone());
                cur = b;
            }
            _ => return None,
        }
    }
    Some((vs, cur.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::proof::parse_script;
    use crate::syntax::parse_formula_inferred;

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    #[test]
    fn trivial_reflexivity_instance() {
        let alpha = p("x = x");
        let weak = desugar(&SugarForm::WeakNeg(alpha.clone())).unwrap();
        assert_eq!(weak.to_string(), "E y. y <= x & ~(y = y)");
        let input = parse_script(
            "1: E y. (y <= x & ~y = y) assume\n\
             2: y <= x & ~y = y assume\n\
             3: y <= x & ~y = y |- ~y = y by andE_r from 2\n\
             4: |- y = y by eqI(t=y)\n\
             5: y <= x & ~y = y |- bot by negE(phi=bot) from 4, 3\n\
             6: E y. (y <= x & ~y = y) |- bot by existsE from 1, 5\n\
             qed 6\n",
        )
        .unwrap();
        let out = derived_raa_weakneg(&BTreeSet::new(), &alpha, &input).unwrap();
        let report = check_script(&out);
        assert!(report.accepted(), "{:?}\n{}", report.first_failure, out);
        assert_eq!(report.claim.unwrap(), Sequent::new([], alpha));
    }

    #[test]
    fn closed_formula_uses_plain_negation() {
        let alpha = p("E x. P(x)");
        let input = parse_script(
            "1: ~E x. P(x) assume\n2: E x. P(x) assume\n\
             3: E x. P(x); ~E x. P(x) |- bot by negE(phi=bot) from 2, 1\nqed 3\n",
        )
        .unwrap();
        let gamma: BTreeSet<Formula> = [alpha.clone()].into();
        let out = derived_raa_weakneg(&gamma, &alpha, &input).unwrap();
        let report = check_script(&out);
        assert!(report.accepted(), "{:?}\n{}", report.first_failure, out);
        assert_eq!(report.claim.unwrap(), Sequent::new([alpha.clone()], alpha));
    }

    #[test]
    fn rejects_bad_inputs() {
        let input = parse_script("1: bot assume\nqed 1\n").unwrap();
        assert!(matches!(
            derived_raa_weakneg(&BTreeSet::new(), &p("x <= y"), &input),
            Err(DerivedError::NotFirstOrder(_))
        ));
        let broken = parse_script("1: |- x = y by eqI(t=x)\nqed 1\n").unwrap();
        assert!(matches!(
            derived_raa_weakneg(&BTreeSet::new(), &p("x = x"), &broken),
            Err(DerivedError::InputRejected(_))
        ));
        assert!(matches!(derived_raa_weakneg(&BTreeSet::new(), &p("x = x"), &input), Err(DerivedError::WrongClaim(_))));
    }
}
