//! Compilation into the one-universal normal form
//!
//! ```text
//! ∃w ∃x ∀y ( ⋀ u_i ⊆ v_i  ∧  ⋀_{j∈J} z x₁…x_{j−1} y ⊆ z x₁…x_{j−1} x_j  ∧  α )
//! ```
//!
//! in three stages: prenex form, a quantifier-free normal form for the
//! matrix, and simulation of every universal quantifier by an inclusion atom
//! under a single `∀y`.

use crate::syntax::{rename_bound, Formula, NameSupply, Term, Var};
use serde::Serialize;
use std::collections::BTreeSet;
use thiserror::Error;

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct PrenexForm {
    pub prefix: Vec<(Quantifier, Var)>,
    pub matrix: Formula,
}

impl PrenexForm {
    pub fn to_formula(&self) -> Formula {
        quantify(&self.prefix, self.matrix.clone())
    }
}

/// `∃w (⋀ atoms ∧ alpha)` with every atom variable drawn from `w`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct QfNormal {
    pub w: Vec<Var>,
    pub atoms: Vec<(Vec<Var>, Vec<Var>)>,
    pub alpha: Formula,
}

impl QfNormal {
    pub fn to_formula(&self) -> Formula {
        Formula::exists_seq(&self.w, Formula::conj(inc_atoms(&self.atoms).chain([self.alpha.clone()])))
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct NormalForm {
    /// Free variables, sorted.
    pub z: Vec<Var>,
    pub w: Vec<Var>,
    pub x: Vec<Var>,
    pub y: Var,
    pub i_atoms: Vec<(Vec<Var>, Vec<Var>)>,
    /// 1-based positions in `x` that simulate a universal quantifier.
    pub j_indices: Vec<usize>,
    pub alpha: Formula,
}

impl NormalForm {
    /// `z x₁…x_{j−1} y ⊆ z x₁…x_{j−1} x_j`.
    pub fn j_atom(&self, j: usize) -> (Vec<Var>, Vec<Var>) {
        let mut lhs: Vec<Var> = self.z.iter().chain(&self.x[..j - 1]).cloned().collect();
        let mut rhs = lhs.clone();
        lhs.push(self.y.clone());
        rhs.push(self.x[j - 1].clone());
        (lhs, rhs)
    }

    pub fn j_atoms(&self) -> Vec<(Vec<Var>, Vec<Var>)> {
        self.j_indices.iter().map(|&j| self.j_atom(j)).collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum NormalFormError {
    #[error("quantifier inside a formula expected to be quantifier-free")]
    Quantifier,
}

fn quantify(prefix: &[(Quantifier, Var)], body: Formula) -> Formula {
    prefix.iter().rev().fold(body, |acc, (q, v)| match q {
        Quantifier::Exists => Formula::exists(v.clone(), acc),
        Quantifier::Forall => Formula::forall(v.clone(), acc),
    })
}

fn inc_atoms(atoms: &[(Vec<Var>, Vec<Var>)]) -> impl Iterator<Item = Formula> + '_ {
    atoms.iter().map(|(u, v)| Formula::Inc(u.clone(), v.clone()))
}

fn var_terms(xs: &[Var]) -> Vec<Term> {
    xs.iter().cloned().map(Term::Var).collect()
}

pub fn prenex(phi: &Formula) -> PrenexForm {
    let renamed = rename_bound(phi, &BTreeSet::new());
    let mut supply = NameSupply::new(renamed.all_vars());
    prenex_with(&renamed, &mut supply)
}

/// Expects bound variables that are distinct and disjoint from the free ones.
fn prenex_with(phi: &Formula, supply: &mut NameSupply) -> PrenexForm {
    if phi.is_quantifier_free() {
        return PrenexForm { prefix: Vec::new(), matrix: phi.clone() };
    }
    match phi {
        Formula::Not(body) => prenex_with(&negation_normal(body, true), supply),
        Formula::And(a, b) => {
            let pa = prenex_with(a, supply);
            let pb = prenex_with(b, supply);
            PrenexForm {
                prefix: pa.prefix.into_iter().chain(pb.prefix).collect(),
                matrix: Formula::and(pa.matrix, pb.matrix),
            }
        }
        Formula::Or(a, b) => {
            let pa = prenex_with(a, supply);
            let pb = prenex_with(b, supply);
            let mut prefix = Vec::new();
            let matrix = pull_disjunction(&pa.prefix, pa.matrix, &pb.prefix, pb.matrix, &mut prefix, supply);
            PrenexForm { prefix, matrix }
        }
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let q = if matches!(phi, Formula::Exists(..)) { Quantifier::Exists } else { Quantifier::Forall };
            let inner = prenex_with(b, supply);
            PrenexForm { prefix: std::iter::once((q, x.clone())).chain(inner.prefix).collect(), matrix: inner.matrix }
        }
        Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => unreachable!(),
    }
}

/// Moves the quantifiers of `Qa ma ∨ Qb mb` outward, left disjunct first.
/// A universal is traded for `∃y∃z∀x` with `y = z` marking its side.
fn pull_disjunction(
    pa: &[(Quantifier, Var)],
    ma: Formula,
    pb: &[(Quantifier, Var)],
    mb: Formula,
    prefix: &mut Vec<(Quantifier, Var)>,
    supply: &mut NameSupply,
) -> Formula {
    let (left_side, (q, x)) = match (pa.split_first(), pb.split_first()) {
        (None, None) => return Formula::or(ma, mb),
        (Some((head, _)), _) => (true, head.clone()),
        (None, Some((head, _))) => (false, head.clone()),
    };
    let (pa, pb) = if left_side { (&pa[1..], pb) } else { (pa, &pb[1..]) };
    match q {
        Quantifier::Exists => {
            prefix.push((Quantifier::Exists, x));
            pull_disjunction(pa, ma, pb, mb, prefix, supply)
        }
        Quantifier::Forall => {
            let y = supply.fresh("y");
            let z = supply.fresh("z");
            let same = Formula::var_eq(&y, &z);
            let differ = Formula::var_neq(&y, &z);
            let (ta, tb) = if left_side { (same, differ) } else { (differ, same) };
            prefix.push((Quantifier::Exists, y));
            prefix.push((Quantifier::Exists, z));
            prefix.push((Quantifier::Forall, x));
            pull_disjunction(pa, Formula::and(ma, ta), pb, Formula::and(mb, tb), prefix, supply)
        }
    }
}

/// Classical negation normal form of a first-order formula, negated when `negate`.
fn negation_normal(phi: &Formula, negate: bool) -> Formula {
    match phi {
        Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => {
            if negate {
                Formula::not(phi.clone())
            } else {
                phi.clone()
            }
        }
        Formula::Not(b) => negation_normal(b, !negate),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let a = negation_normal(a, negate);
            let b = negation_normal(b, negate);
            if matches!(phi, Formula::And(..)) != negate {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let body = negation_normal(b, negate);
            if matches!(phi, Formula::Exists(..)) != negate {
                Formula::exists(x.clone(), body)
            } else {
                Formula::forall(x.clone(), body)
            }
        }
    }
}

pub fn qf_normal(theta: &Formula) -> Result<QfNormal, NormalFormError> {
    let mut supply = NameSupply::new(theta.all_vars());
    qf_normal_with(theta, &mut supply)
}

fn qf_normal_with(theta: &Formula, supply: &mut NameSupply) -> Result<QfNormal, NormalFormError> {
    if !theta.is_quantifier_free() {
        return Err(NormalFormError::Quantifier);
    }
    if theta.is_fo() {
        return Ok(QfNormal { w: Vec::new(), atoms: Vec::new(), alpha: theta.clone() });
    }
    match theta {
        Formula::Inc(xs, ys) => {
            let ws: Vec<Var> = xs.iter().map(|_| supply.fresh_indexed("w")).collect();
            let us: Vec<Var> = ys.iter().map(|_| supply.fresh_indexed("u")).collect();
            let alpha = Formula::and(
                Formula::seq_eq(&var_terms(&ws), &var_terms(xs)),
                Formula::seq_eq(&var_terms(&us), &var_terms(ys)),
            );
            Ok(QfNormal { w: ws.iter().chain(&us).cloned().collect(), atoms: vec![(ws, us)], alpha })
        }
        Formula::And(a, b) => {
            let qa = qf_normal_with(a, supply)?;
            let qb = qf_normal_with(b, supply)?;
            Ok(QfNormal {
                w: qa.w.into_iter().chain(qb.w).collect(),
                atoms: qa.atoms.into_iter().chain(qb.atoms).collect(),
                alpha: Formula::and(qa.alpha, qb.alpha),
            })
        }
        Formula::Or(a, b) => {
            let qa = qf_normal_with(a, supply)?;
            let qb = qf_normal_with(b, supply)?;
            let p = supply.fresh_indexed("p");
            let q = supply.fresh_indexed("q");
            let p2 = supply.fresh_indexed("p");
            let q2 = supply.fresh_indexed("q");
            let pad = |atoms: Vec<(Vec<Var>, Vec<Var>)>, p: &Var, q: &Var| -> Vec<(Vec<Var>, Vec<Var>)> {
                atoms
                    .into_iter()
                    .map(|(mut u, mut v)| {
                        u.extend([p.clone(), q.clone()]);
                        v.extend([p.clone(), q.clone()]);
                        (u, v)
                    })
                    .collect()
            };
            let alpha = Formula::conj([
                Formula::or(qa.alpha.clone(), qb.alpha.clone()),
                Formula::iff(qa.alpha, Formula::var_eq(&p, &q)),
                Formula::iff(qb.alpha, Formula::var_eq(&p2, &q2)),
            ]);
            let mut atoms = pad(qa.atoms, &p, &q);
            atoms.extend(pad(qb.atoms, &p2, &q2));
            Ok(QfNormal { w: qa.w.into_iter().chain(qb.w).chain([p, q, p2, q2]).collect(), atoms, alpha })
        }
        _ => unreachable!("first-order and quantified cases are handled above"),
    }
}

/// Replaces each universal of `prefix` by an existential guarded by a
/// `j`-atom and appends one fresh `∀y`. `qf` is the matrix of `prefix`.
pub fn universalize(prefix: &PrenexForm, qf: &QfNormal, z: &[Var]) -> NormalForm {
    let mut supply = NameSupply::new(prefix.to_formula().all_vars());
    supply.reserve_all(&qf.w);
    supply.reserve_all(z);
    for (u, v) in &qf.atoms {
        supply.reserve_all(u.iter().chain(v));
    }
    supply.reserve_all(&qf.alpha.all_vars());
    universalize_with(&prefix.prefix, qf.clone(), z.to_vec(), &mut supply)
}

fn universalize_with(prefix: &[(Quantifier, Var)], qf: QfNormal, z: Vec<Var>, supply: &mut NameSupply) -> NormalForm {
    let y = supply.fresh("y");
    NormalForm {
        z,
        w: qf.w,
        x: prefix.iter().map(|(_, v)| v.clone()).collect(),
        y,
        i_atoms: qf.atoms,
        j_indices: prefix
            .iter()
            .enumerate()
            .filter(|(_, (q, _))| *q == Quantifier::Forall)
            .map(|(i, _)| i + 1)
            .collect(),
        alpha: qf.alpha,
    }
}

pub fn normal_form(phi: &Formula) -> NormalForm {
    let renamed = rename_bound(phi, &BTreeSet::new());
    let mut supply = NameSupply::new(renamed.all_vars());
    let p = prenex_with(&renamed, &mut supply);
    let qf = qf_normal_with(&p.matrix, &mut supply).expect("prenex matrix is quantifier-free");
    let z: Vec<Var> = phi.free_vars().into_iter().collect();
    universalize_with(&p.prefix, qf, z, &mut supply)
}

pub fn render(nf: &NormalForm) -> Formula {
    let body = Formula::conj(inc_atoms(&nf.i_atoms).chain(inc_atoms(&nf.j_atoms())).chain([nf.alpha.clone()]));
    Formula::exists_seq(&nf.w, Formula::exists_seq(&nf.x, Formula::forall(nf.y.clone(), body)))
}
