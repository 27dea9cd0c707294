//! Single-point mutations of proof scripts, for testing that the checker rejects them.

use super::{Justification, Param, ProofScript, Rule, Sequent};
use crate::syntax::{rename_bound, substitute, Formula, NameSupply, Term, Var};
use std::collections::BTreeSet;

#[derive(Clone, Debug)]
pub struct Mutant {
    pub description: String,
    pub script: ProofScript,
}

/// The rule a rule id is most easily confused with, for id swaps.
fn sibling(rule: Rule) -> Rule {
    use Rule::*;
    match rule {
        AndEL => AndER,
        AndER => AndEL,
        OrIL => OrIR,
        OrIR => OrIL,
        NegI => Raa,
        Raa => NegI,
        ForallE => ForallE0,
        ForallE0 => ForallE,
        ForallOrExtFwd => ForallOrExtBwd,
        ForallOrExtBwd => ForallOrExtFwd,
        IncSimFwd => IncSimBwd,
        IncSimBwd => IncSimFwd,
        IncWex => IncWall,
        IncWall => IncWex,
        IncExc => IncCtr,
        IncCtr => IncExc,
        IncTrs => IncCmp,
        IncCmp => IncTrs,
        ExistsE => ForallSub,
        ForallSub => ExistsE,
        AndI => ForallAndExt,
        ForallAndExt => AndI,
        ExistsI => ForallI,
        ForallI => ExistsI,
        EqI => EqSub,
        EqSub => EqI,
        NegE => Cut,
        Cut => NegE,
        OrE => AndI,
        ForallExc => ForallE0,
        IncExp => NegI,
        IncExt => IncSimFwd,
        Weaken => ForallE0,
    }
}

/// Renames one free variable of `phi` to `to`, if there is one.
fn perturb(phi: &Formula, to: &Var) -> Option<Formula> {
    let x = phi.free_vars().into_iter().next()?;
    let safe = rename_bound(phi, &[to.clone()].into());
    substitute(&safe, &x, &Term::Var(to.clone())).ok()
}

/// `relevant` are the variables free in the rule's formula parameters; a
/// sequence is perturbed at one of those positions when it has one.
fn perturb_param(p: &Param, to: &Var, relevant: &BTreeSet<Var>) -> Option<Param> {
    Some(match p {
        Param::Var(v) => Param::Var(if v == to { Var::new("x") } else { to.clone() }),
        Param::Vars(vs) if vs.is_empty() => Param::Vars(vec![to.clone()]),
        Param::Vars(vs) => {
            let mut vs = vs.clone();
            let at = vs.iter().position(|v| relevant.contains(v)).unwrap_or(0);
            vs[at] = to.clone();
            Param::Vars(vs)
        }
        Param::Nat(n) => Param::Nat(n + 1),
        Param::Term(_) => Param::Term(Term::Var(to.clone())),
        Param::Formula(phi) => Param::Formula(perturb(phi, to).unwrap_or_else(|| match phi {
            Formula::Bot => Formula::top(),
            _ => Formula::Bot,
        })),
    })
}

fn param_vars(app: &super::RuleApp) -> BTreeSet<Var> {
    let mut out = BTreeSet::new();
    for p in app.params.values().flatten() {
        match p {
            Param::Var(v) => {
                out.insert(v.clone());
            }
            Param::Vars(vs) => out.extend(vs.iter().cloned()),
            Param::Term(t) => out.extend(t.vars()),
            Param::Formula(phi) => out.extend(phi.all_vars()),
            Param::Nat(_) => {}
        }
    }
    out
}

/// All single-point mutants of `script`.
pub fn mutants(script: &ProofScript) -> Vec<Mutant> {
    let mut used = BTreeSet::new();
    for l in &script.lines {
        used.extend(l.sequent.all_vars());
        if let Justification::Rule(app) = &l.justification {
            used.extend(param_vars(app));
        }
    }
    let fresh = NameSupply::new(used).fresh("m");
    let mut out = Vec::new();
    let mut push = |description: String, script: ProofScript| out.push(Mutant { description, script });

    for (i, line) in script.lines.iter().enumerate() {
        let at = |f: &dyn Fn(&mut super::Line)| {
            let mut s = script.clone();
            f(&mut s.lines[i]);
            s
        };
        if let Some(phi) = perturb(&line.sequent.conclusion, &fresh) {
            let assume = line.justification == Justification::Assume;
            push(
                format!("line {}: variable in conclusion", line.id),
                at(&|l| {
                    l.sequent.conclusion = phi.clone();
                    if assume {
                        l.sequent = Sequent::assumption(phi.clone());
                    }
                }),
            );
        }
        let Justification::Rule(app) = &line.justification else {
            continue;
        };
        if let Some(first) = line.sequent.context.iter().next() {
            push(
                format!("line {}: drop assumption", line.id),
                at(&|l| {
                    l.sequent.context.remove(first);
                }),
            );
        }
        push(
            format!("line {}: add assumption", line.id),
            at(&|l| {
                l.sequent.context.insert(Formula::Bot);
            }),
        );
        push(
            format!("line {}: rule {} -> {}", line.id, app.rule, sibling(app.rule)),
            at(&|l| {
                if let Justification::Rule(a) = &mut l.justification {
                    a.rule = sibling(a.rule);
                }
            }),
        );
        let relevant: BTreeSet<Var> = app
            .params
            .values()
            .flatten()
            .filter_map(|p| match p {
                Param::Formula(phi) => Some(phi.free_vars()),
                _ => None,
            })
            .flatten()
            .collect();
        for (key, list) in &app.params {
            for (j, p) in list.iter().enumerate() {
                if let Some(q) = perturb_param(p, &fresh, &relevant) {
                    push(
                        format!("line {}: parameter {}", line.id, key),
                        at(&|l| {
                            if let Justification::Rule(a) = &mut l.justification {
                                a.params.get_mut(key).unwrap()[j] = q.clone();
                            }
                        }),
                    );
                }
                if let Param::Nat(n) = p {
                    if *n > 0 {
                        push(
                            format!("line {}: parameter {} decremented", line.id, key),
                            at(&|l| {
                                if let Justification::Rule(a) = &mut l.justification {
                                    a.params.get_mut(key).unwrap()[j] = Param::Nat(n - 1);
                                }
                            }),
                        );
                    }
                }
            }
        }
        for (j, p) in app.premises.iter().enumerate() {
            let premise = script.line(p).map(|l| &l.sequent);
            let other = script.lines[..i].iter().find(|l| Some(&l.sequent) != premise);
            if let Some(other) = other {
                push(
                    format!("line {}: premise {} -> {}", line.id, p, other.id),
                    at(&|l| {
                        if let Justification::Rule(a) = &mut l.justification {
                            a.premises[j] = other.id.clone();
                        }
                    }),
                );
            }
        }
    }
    if script.lines.len() > 1 {
        let mut s = script.clone();
        s.qed = s.lines[0].id.clone();
        push("qed names an earlier line".to_string(), s);
    }
    out
}
