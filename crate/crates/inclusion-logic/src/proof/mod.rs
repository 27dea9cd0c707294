//! Natural deduction for inclusion logic, in sequent form.
//!
//! Every line of a proof carries its full sequent `Γ ⊢ φ`; rules compute the
//! conclusion from the premises and explicit parameters, so checking never
//! searches. Assumptions are discharged by removing them from a premise context.

mod corpus;
mod derived;
pub mod mutate;
mod rules;
mod script;

pub use corpus::{corpus, CorpusEntry};
pub use derived::{derived_raa_weakneg, DerivedError};
pub use rules::apply_rule;
pub use script::{
    check_script, check_text, parse_script, CheckReport, Failure, Justification, Line, LineStatus, ProofScript,
    ScriptError, Verdict,
};

use crate::syntax::{Formula, Term, Var};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub struct Sequent {
    pub context: BTreeSet<Formula>,
    pub conclusion: Formula,
}

impl Sequent {
    pub fn new<I: IntoIterator<Item = Formula>>(context: I, conclusion: Formula) -> Sequent {
        Sequent { context: context.into_iter().collect(), conclusion }
    }

    pub fn assumption(phi: Formula) -> Sequent {
        Sequent::new([phi.clone()], phi)
    }

    /// Variables occurring free or bound anywhere in the sequent.
    pub fn all_vars(&self) -> BTreeSet<Var> {
        let mut out = self.conclusion.all_vars();
        for f in &self.context {
            out.extend(f.all_vars());
        }
        out
    }
}

impl fmt::Display for Sequent {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        let ctx: Vec<String> = self.context.iter().map(|g| g.to_string()).collect();
        if ctx.is_empty() {
            write!(f, "|- {}", self.conclusion)
        } else {
            write!(f, "{} |- {}", ctx.join("; "), self.conclusion)
        }
    }
}

macro_rules! rules {
    ($($variant:ident => $name:literal),* $(,)?) => {
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize)]
        pub enum Rule {
            $($variant),*
        }

        impl Rule {
            pub const ALL: &'static [Rule] = &[$(Rule::$variant),*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Rule::$variant => $name),*
                }
            }
        }
    };
}

rules! {
    EqI => "eqI",
    EqSub => "eqSub",
    NegI => "negI",
    NegE => "negE",
    Raa => "RAA",
    AndI => "andI",
    AndEL => "andE_l",
    AndER => "andE_r",
    OrIL => "orI_l",
    OrIR => "orI_r",
    OrE => "orE",
    ExistsI => "existsI",
    ExistsE => "existsE",
    ForallI => "forallI",
    ForallE => "forallE",
    ForallE0 => "forallE0",
    ForallSub => "forallSub",
    ForallExc => "forallExc",
    ForallAndExt => "forallAndExt",
    ForallOrExtFwd => "forallOrExt_fwd",
    ForallOrExtBwd => "forallOrExt_bwd",
    IncExc => "incExc",
    IncCtr => "incCtr",
    IncTrs => "incTrs",
    IncCmp => "incCmp",
    IncExp => "incExp",
    IncWex => "incWex",
    IncWall => "incWall",
    IncSimFwd => "incSim_fwd",
    IncSimBwd => "incSim_bwd",
    IncExt => "incExt",
    Weaken => "weaken",
    Cut => "cut",
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Rule {
    type Err = String;

    fn from_str(s: &str) -> Result<Rule, String> {
        Rule::ALL.iter().copied().find(|r| r.name() == s).ok_or_else(|| format!("unknown rule `{}`", s))
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Kind {
    Var,
    Vars,
    Nat,
    Term,
    Formula,
    /// A formula parameter that may be given several times.
    Formulas,
}

impl Rule {
    pub fn premise_count(self) -> usize {
        use Rule::*;
        match self {
            EqI => 0,
            NegI | Raa | AndEL | AndER | OrIL | OrIR | ExistsI | ForallI | ForallE | ForallE0 | ForallExc
            | ForallOrExtFwd | ForallOrExtBwd | IncExc | IncCtr | IncExp | IncWex | IncWall | IncSimFwd | IncSimBwd
            | IncExt | Weaken => 1,
            EqSub | NegE | AndI | ExistsE | ForallSub | ForallAndExt | IncTrs | IncCmp | Cut => 2,
            OrE => 3,
        }
    }

    pub fn parameters(self) -> &'static [(&'static str, Kind)] {
        use Rule::*;
        match self {
            EqI => &[("t", Kind::Term)],
            EqSub => &[("x", Kind::Var), ("phi", Kind::Formula)],
            NegI | Raa => &[("alpha", Kind::Formula)],
            NegE => &[("phi", Kind::Formula)],
            OrIL | OrIR => &[("psi", Kind::Formula)],
            ExistsI => &[("x", Kind::Var), ("t", Kind::Term), ("phi", Kind::Formula)],
            ForallI => &[("x", Kind::Var)],
            ForallE => &[("t", Kind::Term)],
            ForallSub => &[("y", Kind::Var)],
            ForallOrExtFwd => &[("y", Kind::Var), ("z", Kind::Var)],
            IncExc => &[("k", Kind::Nat), ("l", Kind::Nat)],
            IncCtr => &[("k", Kind::Nat)],
            IncCmp => &[("z", Kind::Vars), ("alpha", Kind::Formula)],
            IncExp => &[("y", Kind::Vars), ("x", Kind::Vars), ("z", Kind::Vars), ("alpha", Kind::Formula)],
            IncWex | IncWall => &[("w", Kind::Vars), ("z", Kind::Vars)],
            IncSimFwd | IncSimBwd => &[("x", Kind::Vars), ("y", Kind::Vars), ("z", Kind::Vars)],
            IncExt => &[("x", Kind::Vars), ("atoms", Kind::Nat), ("u", Kind::Var), ("v", Kind::Var)],
            Weaken => &[("add", Kind::Formulas)],
            AndI | AndEL | AndER | OrE | ExistsE | ForallE0 | ForallExc | ForallAndExt | ForallOrExtBwd | IncTrs
            | Cut => &[],
        }
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug, Serialize)]
pub enum Param {
    Var(Var),
    Vars(Vec<Var>),
    Nat(usize),
    Term(Term),
    Formula(Formula),
}

impl fmt::Display for Param {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            Param::Var(v) => write!(f, "{}", v),
            Param::Vars(vs) => {
                let names: Vec<&str> = vs.iter().map(Var::as_str).collect();
                f.write_str(&names.join(","))
            }
            Param::Nat(n) => write!(f, "{}", n),
            Param::Term(t) => write!(f, "{}", t),
            Param::Formula(phi) => write!(f, "{}", phi),
        }
    }
}

/// A rule instance: the rule, its premises (by line id) and its parameters.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct RuleApp {
    pub rule: Rule,
    pub premises: Vec<String>,
    pub params: BTreeMap<String, Vec<Param>>,
}

impl RuleApp {
    pub fn new(rule: Rule) -> RuleApp {
        RuleApp { rule, premises: Vec::new(), params: BTreeMap::new() }
    }

    pub fn from<I: IntoIterator<Item = S>, S: Into<String>>(mut self, ids: I) -> RuleApp {
        self.premises = ids.into_iter().map(Into::into).collect();
        self
    }

    pub fn with(mut self, key: &str, value: Param) -> RuleApp {
        self.params.entry(key.to_string()).or_default().push(value);
        self
    }

    fn one(&self, key: &str) -> Result<&Param, RuleError> {
        match self.params.get(key).map(Vec::as_slice) {
            Some([p]) => Ok(p),
            Some(_) => Err(RuleError::Malformed(format!("parameter `{}` given more than once", key))),
            None => Err(RuleError::Malformed(format!("missing parameter `{}`", key))),
        }
    }

    pub(crate) fn var(&self, key: &str) -> Result<Var, RuleError> {
        match self.one(key)? {
            Param::Var(v) => Ok(v.clone()),
            Param::Vars(vs) if vs.len() == 1 => Ok(vs[0].clone()),
            Param::Term(Term::Var(v)) => Ok(v.clone()),
            _ => Err(RuleError::Malformed(format!("parameter `{}` must be a variable", key))),
        }
    }

    pub(crate) fn vars(&self, key: &str) -> Result<Vec<Var>, RuleError> {
        match self.one(key)? {
            Param::Vars(vs) => Ok(vs.clone()),
            Param::Var(v) | Param::Term(Term::Var(v)) => Ok(vec![v.clone()]),
            _ => Err(RuleError::Malformed(format!("parameter `{}` must be a variable list", key))),
        }
    }

    pub(crate) fn nat(&self, key: &str) -> Result<usize, RuleError> {
        match self.one(key)? {
            Param::Nat(n) => Ok(*n),
            _ => Err(RuleError::Malformed(format!("parameter `{}` must be a number", key))),
        }
    }

    pub(crate) fn term(&self, key: &str) -> Result<Term, RuleError> {
        match self.one(key)? {
            Param::Term(t) => Ok(t.clone()),
            Param::Var(v) => Ok(Term::Var(v.clone())),
            _ => Err(RuleError::Malformed(format!("parameter `{}` must be a term", key))),
        }
    }

    pub(crate) fn formula(&self, key: &str) -> Result<Formula, RuleError> {
        match self.one(key)? {
            Param::Formula(phi) => Ok(phi.clone()),
            _ => Err(RuleError::Malformed(format!("parameter `{}` must be a formula", key))),
        }
    }

    pub(crate) fn formulas(&self, key: &str) -> Result<Vec<Formula>, RuleError> {
        let list = self.params.get(key).map(Vec::as_slice).unwrap_or(&[]);
        list.iter()
            .map(|p| match p {
                Param::Formula(phi) => Ok(phi.clone()),
                _ => Err(RuleError::Malformed(format!("parameter `{}` must be a formula", key))),
            })
            .collect()
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error, Serialize)]
pub enum RuleError {
    #[error("{rule} takes {expected} premise(s), got {got}")]
    Arity { rule: Rule, expected: usize, got: usize },
    #[error("side condition ({note}) of {rule} violated: {detail}")]
    SideCondition { rule: Rule, note: u8, detail: String },
    #[error("{rule} needs a first-order {what}")]
    NotFirstOrder { rule: Rule, what: String },
    #[error("{rule}: premise does not have the required shape: {detail}")]
    Shape { rule: Rule, detail: String },
    #[error("{0}")]
    Malformed(String),
}

impl RuleError {
    /// The numbered side condition, if that is what failed.
    pub fn side_condition(&self) -> Option<u8> {
        match self {
            RuleError::SideCondition { note, .. } => Some(*note),
            _ => None,
        }
    }
}
