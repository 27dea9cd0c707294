//! Signatures, terms and formulas of inclusion logic.
//!
//! The kernel [`Formula`] type has no sugar: anonymity atoms, weak negation and
//! term inclusion are expanded by [`sugar::desugar`] (and eagerly by the parser).

mod names;
pub(crate) mod parse;
mod pretty;
mod subst;
pub mod sugar;

pub use names::NameSupply;
pub use parse::{parse_formula, parse_formula_inferred, parse_term, ParseError};
pub use pretty::pretty;
pub use subst::{alpha_eq, rename_bound, substitute, substitute_many, SubstError};

use serde::{Serialize, Serializer};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;
use thiserror::Error;

/// A variable name. Cheap to clone.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(Arc<str>);

impl Var {
    pub fn new(name: &str) -> Var {
        Var(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Var {
    fn from(s: &str) -> Var {
        Var::new(s)
    }
}

impl From<String> for Var {
    fn from(s: String) -> Var {
        Var(Arc::from(s))
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Var {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl Serialize for Var {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.0)
    }
}

/// Convenience: build a variable sequence from names.
pub fn vars(names: &[&str]) -> Vec<Var> {
    names.iter().map(|n| Var::new(n)).collect()
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum Term {
    Var(Var),
    Const(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Var::new(name))
    }

    pub fn as_var(&self) -> Option<&Var> {
        match self {
            Term::Var(v) => Some(v),
            _ => None,
        }
    }

    pub fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Term::Var(v) => {
                out.insert(v.clone());
            }
            Term::Const(_) => {}
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    pub fn vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize)]
pub enum Formula {
    Bot,
    Eq(Term, Term),
    Rel(String, Vec<Term>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Exists(Var, Box<Formula>),
    Forall(Var, Box<Formula>),
    Inc(Vec<Var>, Vec<Var>),
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum FormulaError {
    #[error("negation applied to a formula that is not first-order")]
    NonFoNegation,
    #[error("inclusion atom sides have lengths {0} and {1}")]
    IncLength(usize, usize),
    #[error("inclusion atom with empty sides")]
    EmptyInclusion,
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn var_eq(a: &Var, b: &Var) -> Formula {
        Formula::Eq(Term::Var(a.clone()), Term::Var(b.clone()))
    }

    pub fn var_neq(a: &Var, b: &Var) -> Formula {
        Formula::not(Formula::var_eq(a, b))
    }

    /// Unchecked negation; callers guarantee a first-order body.
    pub fn not(body: Formula) -> Formula {
        Formula::Not(Box::new(body))
    }

    pub fn try_not(body: Formula) -> Result<Formula, FormulaError> {
        if body.is_fo() {
            Ok(Formula::not(body))
        } else {
            Err(FormulaError::NonFoNegation)
        }
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn exists(x: Var, body: Formula) -> Formula {
        Formula::Exists(x, Box::new(body))
    }

    pub fn forall(x: Var, body: Formula) -> Formula {
        Formula::Forall(x, Box::new(body))
    }

    pub fn inc(xs: Vec<Var>, ys: Vec<Var>) -> Result<Formula, FormulaError> {
        if xs.len() != ys.len() {
            return Err(FormulaError::IncLength(xs.len(), ys.len()));
        }
        if xs.is_empty() {
            return Err(FormulaError::EmptyInclusion);
        }
        Ok(Formula::Inc(xs, ys))
    }

    /// `~bot`, used as the unit of conjunction.
    pub fn top() -> Formula {
        Formula::not(Formula::Bot)
    }

    /// Left-nested conjunction; `~bot` when empty.
    pub fn conj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        parts.into_iter().reduce(Formula::and).unwrap_or_else(Formula::top)
    }

    /// Left-nested disjunction; `bot` when empty.
    pub fn disj<I: IntoIterator<Item = Formula>>(parts: I) -> Formula {
        parts.into_iter().reduce(Formula::or).unwrap_or(Formula::Bot)
    }

    /// Componentwise equality of two term lists, as a conjunction.
    pub fn seq_eq(a: &[Term], b: &[Term]) -> Formula {
        Formula::conj(a.iter().zip(b).map(|(s, t)| Formula::Eq(s.clone(), t.clone())))
    }

    /// `∃x₁…∃xₙ body`, outermost first.
    pub fn exists_seq(xs: &[Var], body: Formula) -> Formula {
        xs.iter().rev().fold(body, |acc, x| Formula::exists(x.clone(), acc))
    }

    pub fn forall_seq(xs: &[Var], body: Formula) -> Formula {
        xs.iter().rev().fold(body, |acc, x| Formula::forall(x.clone(), acc))
    }

    /// `(¬a ∨ b) ∧ (¬b ∨ a)` for first-order `a`, `b`.
    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::or(Formula::not(a.clone()), b.clone()), Formula::or(Formula::not(b), a))
    }

    /// No inclusion atom anywhere.
    pub fn is_fo(&self) -> bool {
        match self {
            Formula::Bot | Formula::Eq(..) | Formula::Rel(..) => true,
            Formula::Not(b) => b.is_fo(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_fo() && b.is_fo(),
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.is_fo(),
            Formula::Inc(..) => false,
        }
    }

    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => true,
            Formula::Not(b) => b.is_quantifier_free(),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Formula::Exists(..) | Formula::Forall(..) => false,
        }
    }

    /// Checks the structural invariants: FO negation bodies and well-formed inclusion atoms.
    pub fn validate(&self) -> Result<(), FormulaError> {
        match self {
            Formula::Bot | Formula::Eq(..) | Formula::Rel(..) => Ok(()),
            Formula::Not(b) if !b.is_fo() => Err(FormulaError::NonFoNegation),
            Formula::Not(b) => b.validate(),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.validate()?;
                b.validate()
            }
            Formula::Exists(_, b) | Formula::Forall(_, b) => b.validate(),
            Formula::Inc(xs, ys) => {
                if xs.len() != ys.len() {
                    Err(FormulaError::IncLength(xs.len(), ys.len()))
                } else if xs.is_empty() {
                    Err(FormulaError::EmptyInclusion)
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Var>, out: &mut BTreeSet<Var>) {
        let mut add = |v: &Var, bound: &Vec<Var>| {
            if !bound.contains(v) {
                out.insert(v.clone());
            }
        };
        match self {
            Formula::Bot => {}
            Formula::Eq(a, b) => {
                for v in a.vars().iter().chain(b.vars().iter()) {
                    add(v, bound);
                }
            }
            Formula::Rel(_, args) => {
                for t in args {
                    for v in t.vars() {
                        add(&v, bound);
                    }
                }
            }
            Formula::Inc(xs, ys) => {
                for v in xs.iter().chain(ys) {
                    add(v, bound);
                }
            }
            Formula::Not(b) => b.collect_free(bound, out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_free(bound, out);
                b.collect_free(bound, out);
            }
            Formula::Exists(x, b) | Formula::Forall(x, b) => {
                bound.push(x.clone());
                b.collect_free(bound, out);
                bound.pop();
            }
        }
    }

    pub fn is_free(&self, x: &Var) -> bool {
        self.free_vars().contains(x)
    }

    /// Every variable name occurring anywhere, free or bound.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_all(&mut out);
        out
    }

    fn collect_all(&self, out: &mut BTreeSet<Var>) {
        match self {
            Formula::Bot => {}
            Formula::Eq(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Formula::Rel(_, args) => args.iter().for_each(|t| t.collect_vars(out)),
            Formula::Inc(xs, ys) => out.extend(xs.iter().chain(ys).cloned()),
            Formula::Not(b) => b.collect_all(out),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_all(out);
                b.collect_all(out);
            }
            Formula::Exists(x, b) | Formula::Forall(x, b) => {
                out.insert(x.clone());
                b.collect_all(out);
            }
        }
    }

    /// Number of AST nodes (terms count as part of their atom).
    pub fn size(&self) -> usize {
        match self {
            Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => 1,
            Formula::Not(b) | Formula::Exists(_, b) | Formula::Forall(_, b) => 1 + b.size(),
            Formula::And(a, b) | Formula::Or(a, b) => 1 + a.size() + b.size(),
        }
    }

    pub fn quantifier_depth(&self) -> usize {
        match self {
            Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => 0,
            Formula::Not(b) => b.quantifier_depth(),
            Formula::And(a, b) | Formula::Or(a, b) => a.quantifier_depth().max(b.quantifier_depth()),
            Formula::Exists(_, b) | Formula::Forall(_, b) => 1 + b.quantifier_depth(),
        }
    }

    /// Relation, function and constant symbols used, as an inferred signature.
    pub fn collect_symbols(&self, sig: &mut Signature) -> Result<(), SignatureError> {
        fn term(t: &Term, sig: &mut Signature) -> Result<(), SignatureError> {
            match t {
                Term::Var(_) => Ok(()),
                Term::Const(c) => sig.add_constant(c),
                Term::App(f, args) => {
                    sig.add_function(f, args.len())?;
                    args.iter().try_for_each(|a| term(a, sig))
                }
            }
        }
        match self {
            Formula::Bot | Formula::Inc(..) => Ok(()),
            Formula::Eq(a, b) => {
                term(a, sig)?;
                term(b, sig)
            }
            Formula::Rel(r, args) => {
                sig.add_relation(r, args.len())?;
                args.iter().try_for_each(|a| term(a, sig))
            }
            Formula::Not(b) | Formula::Exists(_, b) | Formula::Forall(_, b) => b.collect_symbols(sig),
            Formula::And(a, b) | Formula::Or(a, b) => {
                a.collect_symbols(sig)?;
                b.collect_symbols(sig)
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(&pretty(self))
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{}", v),
            Term::Const(c) => f.write_str(c),
            Term::App(name, args) => {
                write!(f, "{}(", name)?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{}", a)?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SignatureError {
    #[error("symbol `{0}` used with two different kinds")]
    KindClash(String),
    #[error("symbol `{name}` used with arity {found}, declared {declared}")]
    Arity { name: String, declared: usize, found: usize },
    #[error("function `{0}` must have arity at least 1")]
    NullaryFunction(String),
}

/// Relation and function arities plus constant names. Equality is built in.
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Signature {
    pub relations: BTreeMap<String, usize>,
    pub functions: BTreeMap<String, usize>,
    pub constants: BTreeSet<String>,
}

impl Signature {
    pub fn new() -> Signature {
        Signature::default()
    }

    fn kind_clash(&self, name: &str, kind: u8) -> bool {
        (kind != 0 && self.relations.contains_key(name))
            || (kind != 1 && self.functions.contains_key(name))
            || (kind != 2 && self.constants.contains(name))
    }

    pub fn add_relation(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if self.kind_clash(name, 0) {
            return Err(SignatureError::KindClash(name.to_string()));
        }
        match self.relations.get(name) {
            Some(&a) if a != arity => Err(SignatureError::Arity { name: name.to_string(), declared: a, found: arity }),
            _ => {
                self.relations.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn add_function(&mut self, name: &str, arity: usize) -> Result<(), SignatureError> {
        if arity == 0 {
            return Err(SignatureError::NullaryFunction(name.to_string()));
        }
        if self.kind_clash(name, 1) {
            return Err(SignatureError::KindClash(name.to_string()));
        }
        match self.functions.get(name) {
            Some(&a) if a != arity => Err(SignatureError::Arity { name: name.to_string(), declared: a, found: arity }),
            _ => {
                self.functions.insert(name.to_string(), arity);
                Ok(())
            }
        }
    }

    pub fn add_constant(&mut self, name: &str) -> Result<(), SignatureError> {
        if self.kind_clash(name, 2) {
            return Err(SignatureError::KindClash(name.to_string()));
        }
        self.constants.insert(name.to_string());
        Ok(())
    }

    pub fn with_relation(mut self, name: &str, arity: usize) -> Signature {
        self.add_relation(name, arity).expect("valid relation");
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Signature {
        self.add_function(name, arity).expect("valid function");
        self
    }

    pub fn with_constant(mut self, name: &str) -> Signature {
        self.add_constant(name).expect("valid constant");
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_vars_of_inclusion_and_binders() {
        let inc = Formula::inc(vars(&["x"]), vars(&["y"])).unwrap();
        assert_eq!(inc.free_vars(), vars(&["x", "y"]).into_iter().collect());
        let all = Formula::forall(Var::new("x"), inc);
        assert_eq!(all.free_vars(), vars(&["y"]).into_iter().collect());
        assert!(Formula::Bot.free_vars().is_empty());
    }

    #[test]
    fn inclusion_constructor_checks_lengths() {
        assert_eq!(Formula::inc(vars(&["x"]), vars(&["y", "z"])), Err(FormulaError::IncLength(1, 2)));
        assert_eq!(Formula::inc(vec![], vec![]), Err(FormulaError::EmptyInclusion));
    }

    #[test]
    fn negation_of_non_fo_is_rejected() {
        let inc = Formula::inc(vars(&["x"]), vars(&["y"])).unwrap();
        assert_eq!(Formula::try_not(inc), Err(FormulaError::NonFoNegation));
    }

    #[test]
    fn signature_kinds_are_disjoint() {
        let mut s = Signature::new().with_relation("R", 2);
        assert!(s.add_function("R", 1).is_err());
        assert!(s.add_relation("R", 3).is_err());
        assert!(s.add_function("f", 0).is_err());
    }
}
