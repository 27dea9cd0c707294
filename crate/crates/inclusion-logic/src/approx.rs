//! First-order approximations of a normal-form sentence.
//!
//! Level `n` unfolds the inclusion atoms of a [`NormalForm`] `n` times: every
//! inclusion atom `ρ ⊆ σ` of a copy demands a child copy whose `σ` matches the
//! parent's `ρ`, and every simulated universal position `j` demands, for each
//! earlier copy and each universally chosen `y`, a child copy realising that `y`.
//! Copies are named by paths: the root is `0`, the child for inclusion atom `i`
//! of `p` is `p i<i>`, and the child for position `j` of copy `p` against the
//! `y` of level `k` is `p y<k> j<j>`.

use crate::normal_form::NormalForm;
use crate::semantics::{eval_fo_search, Assignment, EvalError, Model};
use crate::syntax::{Formula, Term, Var};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use thiserror::Error;

/// Largest level accepted by default.
pub const DEFAULT_MAX_LEVEL: usize = 3;
/// Largest number of copies accepted by default.
pub const DEFAULT_MAX_COPIES: usize = 5000;
/// Search steps allowed when evaluating an approximation.
pub const DEFAULT_SEARCH_BUDGET: u64 = 20_000_000;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ApproxError {
    #[error("level {level} exceeds the cap {cap}")]
    LevelCap { level: usize, cap: usize },
    #[error("level {level} needs {copies} copies, more than the cap {cap}")]
    TooLarge { level: usize, copies: usize, cap: usize },
    #[error("generated variable `{0}` clashes with another variable")]
    NameClash(Var),
    #[error("inclusion atom mentions `{0}`, which is not an existential variable")]
    AtomVariable(Var),
    #[error("approximations are built for sentences; free variables: {0}")]
    NotSentence(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct ApproxLimits {
    pub max_level: usize,
    pub max_copies: usize,
    pub search_budget: u64,
}

impl Default for ApproxLimits {
    fn default() -> ApproxLimits {
        ApproxLimits {
            max_level: DEFAULT_MAX_LEVEL,
            max_copies: DEFAULT_MAX_COPIES,
            search_budget: DEFAULT_SEARCH_BUDGET,
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Origin {
    Root,
    /// Child demanded by inclusion atom `atom` (1-based) of `parent`.
    Inclusion {
        parent: usize,
        atom: usize,
    },
    /// Child demanded by position `position` (1-based) of `parent` against the `y` of level `level`.
    Universal {
        parent: usize,
        level: usize,
        position: usize,
    },
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Copy {
    pub path: String,
    pub level: usize,
    pub origin: Origin,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct Level {
    /// Children from inclusion atoms.
    pub inclusion: Vec<usize>,
    /// Children from simulated universal positions.
    pub universal: Vec<usize>,
    /// Copy/level pairs first served at this level.
    pub pairs: Vec<(usize, usize)>,
}

impl Level {
    pub fn copies(&self) -> impl Iterator<Item = usize> + '_ {
        self.inclusion.iter().chain(&self.universal).copied()
    }
}

/// All copies up to some level.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct IndexBook {
    pub copies: Vec<Copy>,
    pub levels: Vec<Level>,
}

impl IndexBook {
    pub fn path(&self, c: usize) -> &str {
        &self.copies[c].path
    }

    pub fn len(&self) -> usize {
        self.copies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }
}

pub fn build_indices(nf: &NormalForm, n: usize) -> Result<IndexBook, ApproxError> {
    build_indices_with(nf, n, &ApproxLimits::default())
}

pub fn build_indices_with(nf: &NormalForm, n: usize, limits: &ApproxLimits) -> Result<IndexBook, ApproxError> {
    if n > limits.max_level {
        return Err(ApproxError::LevelCap { level: n, cap: limits.max_level });
    }
    let mut book = IndexBook {
        copies: vec![Copy { path: "0".into(), level: 0, origin: Origin::Root }],
        levels: vec![Level { inclusion: vec![0], ..Level::default() }],
    };
    let mut served: BTreeSet<(usize, usize)> = BTreeSet::new();
    for level in 1..=n {
        let mut next = Level::default();
        let parents: Vec<usize> = book.levels[level - 1].copies().collect();
        for &p in &parents {
            for atom in 1..=nf.i_atoms.len() {
                let path = format!("{}i{}", book.copies[p].path, atom);
                next.inclusion.push(book.copies.len());
                book.copies.push(Copy { path, level, origin: Origin::Inclusion { parent: p, atom } });
            }
        }
        if !nf.j_indices.is_empty() {
            let earlier: Vec<usize> = book.levels.iter().flat_map(|l| l.copies().collect::<Vec<_>>()).collect();
            for &p in &earlier {
                for y_level in 0..level {
                    if served.insert((p, y_level)) {
                        next.pairs.push((p, y_level));
                    }
                }
            }
            for &(p, y_level) in &next.pairs {
                for &position in &nf.j_indices {
                    let path = format!("{}y{}j{}", book.copies[p].path, y_level, position);
                    next.universal.push(book.copies.len());
                    book.copies.push(Copy {
                        path,
                        level,
                        origin: Origin::Universal { parent: p, level: y_level, position },
                    });
                }
            }
        }
        if book.copies.len() > limits.max_copies {
            return Err(ApproxError::TooLarge { level, copies: book.copies.len(), cap: limits.max_copies });
        }
        book.levels.push(next);
    }
    Ok(book)
}

/// An approximation together with the naming of its variables.
#[derive(Clone, Debug, Serialize)]
pub struct ApproxFormula {
    pub level: usize,
    pub strong: bool,
    pub formula: Formula,
    pub book: IndexBook,
    /// Name of the universal variable of each level.
    pub y_names: Vec<Var>,
}

impl ApproxFormula {
    pub fn size(&self) -> usize {
        self.formula.size()
    }
}

struct Namer<'a> {
    nf: &'a NormalForm,
    book: &'a IndexBook,
    copied: BTreeSet<Var>,
    names: HashMap<(usize, Var), Var>,
}

impl Namer<'_> {
    fn var(&mut self, copy: usize, v: &Var) -> Var {
        if !self.copied.contains(v) {
            return v.clone();
        }
        let path = &self.book.copies[copy].path;
        self.names.entry((copy, v.clone())).or_insert_with(|| Var::new(&format!("{}_{}", v, path))).clone()
    }

    fn vars(&mut self, copy: usize, vs: &[Var]) -> Vec<Var> {
        vs.iter().map(|v| self.var(copy, v)).collect()
    }

    fn block(&mut self, copy: usize) -> (Vec<Var>, Vec<Var>) {
        let (w, x) = (self.nf.w.clone(), self.nf.x.clone());
        (self.vars(copy, &w), self.vars(copy, &x))
    }

    fn alpha(&mut self, copy: usize) -> Formula {
        let map: HashMap<Var, Var> = self.copied.clone().into_iter().map(|v| (v.clone(), self.var(copy, &v))).collect();
        rename_free(&self.nf.alpha, &map)
    }
}

fn rename_free(phi: &Formula, map: &HashMap<Var, Var>) -> Formula {
    let v = |x: &Var| map.get(x).cloned().unwrap_or_else(|| x.clone());
    match phi {
        Formula::Bot => Formula::Bot,
        Formula::Eq(a, b) => Formula::Eq(rename_term(a, map), rename_term(b, map)),
        Formula::Rel(r, args) => Formula::Rel(r.clone(), args.iter().map(|a| rename_term(a, map)).collect()),
        Formula::Inc(xs, ys) => Formula::Inc(xs.iter().map(v).collect(), ys.iter().map(v).collect()),
        Formula::Not(b) => Formula::not(rename_free(b, map)),
        Formula::And(a, b) => Formula::and(rename_free(a, map), rename_free(b, map)),
        Formula::Or(a, b) => Formula::or(rename_free(a, map), rename_free(b, map)),
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let mut inner = map.clone();
            inner.remove(x);
            let body = rename_free(b, &inner);
            if matches!(phi, Formula::Exists(..)) {
                Formula::exists(x.clone(), body)
            } else {
                Formula::forall(x.clone(), body)
            }
        }
    }
}

fn rename_term(t: &Term, map: &HashMap<Var, Var>) -> Term {
    match t {
        Term::Var(x) => Term::Var(map.get(x).cloned().unwrap_or_else(|| x.clone())),
        Term::Const(c) => Term::Const(c.clone()),
        Term::App(f, args) => Term::App(f.clone(), args.iter().map(|a| rename_term(a, map)).collect()),
    }
}

fn equalities<'a>(lhs: &'a [Var], rhs: &'a [Var]) -> impl Iterator<Item = Formula> + 'a {
    lhs.iter().zip(rhs).map(|(a, b)| Formula::var_eq(a, b))
}

pub fn build_approx(nf: &NormalForm, n: usize, strong: bool) -> Result<ApproxFormula, ApproxError> {
    build_approx_with(nf, n, strong, &ApproxLimits::default())
}

pub fn build_approx_with(
    nf: &NormalForm,
    n: usize,
    strong: bool,
    limits: &ApproxLimits,
) -> Result<ApproxFormula, ApproxError> {
    let book = build_indices_with(nf, n, limits)?;
    let copied: BTreeSet<Var> = nf.w.iter().chain(&nf.x).cloned().collect();
    for (u, v) in &nf.i_atoms {
        if let Some(bad) = u.iter().chain(v).find(|a| !nf.w.contains(a)) {
            return Err(ApproxError::AtomVariable(bad.clone()));
        }
    }
    let y_names: Vec<Var> = (0..=n).map(|k| Var::new(&format!("{}_{}", nf.y, k))).collect();
    let mut namer = Namer { nf, book: &book, copied, names: HashMap::new() };

    let mut levels: Vec<(Vec<Var>, Formula)> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let level = &book.levels[k];
        let copies: Vec<usize> = level.copies().collect();
        let mut ws = Vec::new();
        let mut xs = Vec::new();
        let mut parts: Vec<Formula> = Vec::new();
        for &c in &copies {
            let (w, x) = namer.block(c);
            ws.extend(w);
            xs.extend(x);
            parts.push(namer.alpha(c));
        }
        if k > 0 {
            // Inclusion children copy the parent's left-hand side into their right-hand side.
            for &c in &level.inclusion {
                if let Origin::Inclusion { parent, atom } = book.copies[c].origin {
                    let (u, v) = &nf.i_atoms[atom - 1];
                    let lhs = namer.vars(parent, u);
                    let rhs = namer.vars(c, v);
                    parts.extend(equalities(&lhs, &rhs));
                }
            }
            // Universal children realise the chosen `y` at their position.
            for &c in &level.universal {
                if let Origin::Universal { parent, level: y_level, position } = book.copies[c].origin {
                    let (pi, tau) = nf.j_atom(position);
                    let mut lhs = namer.vars(parent, &pi[..pi.len() - 1]);
                    lhs.push(y_names[y_level].clone());
                    let rhs = namer.vars(c, &tau);
                    parts.extend(equalities(&lhs, &rhs));
                }
            }
        }
        if strong {
            if k == 0 {
                for (u, v) in &nf.i_atoms {
                    let (u, v) = (namer.vars(0, u), namer.vars(0, v));
                    parts.push(Formula::Inc(u, v));
                }
                for &j in &nf.j_indices {
                    let (pi, tau) = nf.j_atom(j);
                    let mut lhs = namer.vars(0, &pi[..pi.len() - 1]);
                    lhs.push(y_names[0].clone());
                    parts.push(Formula::Inc(lhs, namer.vars(0, &tau)));
                }
            } else if !nf.w.is_empty() || !nf.x.is_empty() {
                let (w0, x0) = namer.block(0);
                let root: Vec<Var> = w0.into_iter().chain(x0).collect();
                for &c in &copies {
                    let (w, x) = namer.block(c);
                    parts.push(Formula::Inc(w.into_iter().chain(x).collect(), root.clone()));
                }
            }
        }
        let block: Vec<Var> = ws.into_iter().chain(xs).collect();
        levels.push((block, Formula::conj(parts)));
    }

    let mut formula: Option<Formula> = None;
    for (k, (block, body)) in levels.into_iter().enumerate().rev() {
        let inner = match formula {
            Some(next) => Formula::and(body, next),
            None => body,
        };
        formula = Some(Formula::exists_seq(&block, Formula::forall(y_names[k].clone(), inner)));
    }
    let formula = formula.expect("level 0 always exists");

    let mut seen: BTreeSet<Var> = nf.z.iter().cloned().collect();
    let generated = namer.names.values().chain(&y_names);
    for v in generated {
        if !seen.insert(v.clone()) {
            return Err(ApproxError::NameClash(v.clone()));
        }
    }
    Ok(ApproxFormula { level: n, strong, formula, book, y_names })
}

/// Truth of the plain level-`n` approximation of a sentence in `m`.
pub fn check_approx(m: &Model, nf: &NormalForm, n: usize) -> Result<bool, ApproxError> {
    check_approx_with(m, nf, n, &ApproxLimits::default())
}

pub fn check_approx_with(m: &Model, nf: &NormalForm, n: usize, limits: &ApproxLimits) -> Result<bool, ApproxError> {
    if !nf.z.is_empty() {
        let names: Vec<&str> = nf.z.iter().map(Var::as_str).collect();
        return Err(ApproxError::NotSentence(names.join(", ")));
    }
    let approx = build_approx_with(nf, n, false, limits)?;
    Ok(eval_fo_search(m, &Assignment::new(), &approx.formula, limits.search_budget)?)
}

/// Paths of the copies at each level, for display.
pub fn describe_levels(book: &IndexBook) -> BTreeMap<usize, Vec<String>> {
    book.levels.iter().enumerate().map(|(k, l)| (k, l.copies().map(|c| book.path(c).to_string()).collect())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal_form::normal_form;
    use crate::syntax::{parse_formula_inferred, vars};

    fn shape(i_atoms: usize, j: &[usize]) -> NormalForm {
        NormalForm {
            z: vec![],
            w: vars(&["a", "b"]),
            x: vars(&["c", "d"]),
            y: Var::new("y"),
            i_atoms: (0..i_atoms).map(|_| (vars(&["a"]), vars(&["b"]))).collect(),
            j_indices: j.to_vec(),
            alpha: Formula::top(),
        }
    }

    #[test]
    fn inclusion_children_only() {
        let book = build_indices(&shape(1, &[]), 2).unwrap();
        let paths = describe_levels(&book);
        assert_eq!(paths[&0], vec!["0"]);
        assert_eq!(paths[&1], vec!["0i1"]);
        assert_eq!(paths[&2], vec!["0i1i1"]);
        assert!(book.levels.iter().all(|l| l.universal.is_empty() && l.pairs.is_empty()));
    }

    #[test]
    fn pairs_are_served_once() {
        let book = build_indices(&shape(0, &[1]), 2).unwrap();
        let paths = describe_levels(&book);
        assert_eq!(paths[&1], vec!["0y0j1"]);
        assert_eq!(paths[&2], vec!["0y1j1", "0y0j1y0j1", "0y0j1y1j1"]);
        let all: Vec<(usize, usize)> = book.levels.iter().flat_map(|l| l.pairs.clone()).collect();
        let unique: BTreeSet<_> = all.iter().collect();
        assert_eq!(all.len(), unique.len());
    }

    #[test]
    fn level_cap() {
        assert!(matches!(build_indices(&shape(1, &[]), 4), Err(ApproxError::LevelCap { .. })));
        let limits = ApproxLimits { max_copies: 3, ..ApproxLimits::default() };
        assert!(matches!(build_indices_with(&shape(2, &[1]), 2, &limits), Err(ApproxError::TooLarge { .. })));
    }

    #[test]
    fn level_zero_is_the_matrix() {
        let nf = shape(1, &[]);
        let a = build_approx(&nf, 0, false).unwrap();
        assert_eq!(a.formula.to_string(), "E a_0. E b_0. E c_0. E d_0. A y_0. ~bot");
        let strong = build_approx(&nf, 0, true).unwrap();
        assert!(!strong.formula.is_fo());
    }

    #[test]
    fn child_links_to_parent() {
        let nf = shape(1, &[2]);
        let a = build_approx(&nf, 1, false).unwrap();
        let text = a.formula.to_string();
        assert!(text.contains("a_0 = b_0i1"), "{}", text);
        assert!(text.contains("c_0 = c_0y0j2 & y_0 = d_0y0j2"), "{}", text);
        assert!(a.formula.is_fo());
        assert!(a.formula.free_vars().is_empty());
    }

    #[test]
    fn cycle_versus_line() {
        // Some element has an endless chain of predecessors.
        let phi = parse_formula_inferred("E x. E y. (y <= x & y < x)").unwrap().0;
        let nf = normal_form(&phi);
        let mut cycle = Model::with_size(3).unwrap();
        cycle.add_relation("<", 2, vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        let mut line = Model::with_size(3).unwrap();
        line.add_relation("<", 2, vec![vec![0, 1], vec![1, 2]]).unwrap();
        for n in 0..=3 {
            assert!(check_approx(&cycle, &nf, n).unwrap());
        }
        let on_line: Vec<bool> = (0..=3).map(|n| check_approx(&line, &nf, n).unwrap()).collect();
        assert!(on_line[0]);
        assert!(!on_line[3]);
        assert!(on_line.windows(2).all(|w| w[0] || !w[1]));
    }
}
