//! Seeded random formulas, models and teams for property testing.

use crate::semantics::{Elem, Model, Row, Team};
use crate::syntax::{Formula, Signature, Term, Var};
use rand::seq::SliceRandom;
use rand::Rng;
use std::collections::BTreeSet;

/// Shape of generated formulas.
#[derive(Clone, Debug)]
pub struct FormulaShape {
    pub vars: Vec<Var>,
    /// Upper bound on [`Formula::size`].
    pub max_size: usize,
    pub max_inclusion_width: usize,
    pub allow_inclusion: bool,
    /// Include the constant `c` and unary function `f` in atoms.
    pub use_terms: bool,
}

impl FormulaShape {
    pub fn new(var_names: &[&str], max_size: usize) -> FormulaShape {
        FormulaShape {
            vars: crate::syntax::vars(var_names),
            max_size,
            max_inclusion_width: 2,
            allow_inclusion: true,
            use_terms: false,
        }
    }

    pub fn first_order(mut self) -> FormulaShape {
        self.allow_inclusion = false;
        self
    }

    pub fn with_terms(mut self) -> FormulaShape {
        self.use_terms = true;
        self
    }
}

/// `<`/2 and `P`/1, plus `c` and `f`/1 when terms are in use.
pub fn signature(shape: &FormulaShape) -> Signature {
    let sig = Signature::new().with_relation("<", 2).with_relation("P", 1);
    if shape.use_terms {
        sig.with_constant("c").with_function("f", 1)
    } else {
        sig
    }
}

pub fn formula<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Formula {
    let size = rng.gen_range(1..=shape.max_size.max(1));
    node(rng, shape, size, !shape.allow_inclusion)
}

/// A formula whose free variables all lie in `free`, by closing the others existentially or universally.
pub fn formula_over<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape, free: &BTreeSet<Var>) -> Formula {
    let mut phi = formula(rng, shape);
    let extra: Vec<Var> = phi.free_vars().difference(free).cloned().collect();
    for v in extra.into_iter().rev() {
        phi = if rng.gen_bool(0.5) { Formula::exists(v, phi) } else { Formula::forall(v, phi) };
    }
    phi
}

fn node<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape, size: usize, fo: bool) -> Formula {
    if size <= 1 {
        return atom(rng, shape, fo);
    }
    let v = shape.vars.choose(rng).expect("variable pool is nonempty").clone();
    match rng.gen_range(0..6) {
        0 => {
            let body = node(rng, shape, size - 1, true);
            Formula::not(body)
        }
        1 | 2 if size >= 3 => {
            let left = rng.gen_range(1..=size - 2);
            let a = node(rng, shape, left, fo);
            let b = node(rng, shape, size - 1 - left, fo);
            if rng.gen_bool(0.5) {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        3 | 4 => Formula::exists(v, node(rng, shape, size - 1, fo)),
        _ => Formula::forall(v, node(rng, shape, size - 1, fo)),
    }
}

fn atom<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape, fo: bool) -> Formula {
    let kinds = if fo || !shape.allow_inclusion { 4 } else { 7 };
    match rng.gen_range(0..kinds) {
        0 => {
            if rng.gen_bool(0.15) {
                Formula::Bot
            } else {
                Formula::eq(term(rng, shape), term(rng, shape))
            }
        }
        1 => Formula::Eq(term(rng, shape), term(rng, shape)),
        2 => Formula::Rel("<".into(), vec![term(rng, shape), term(rng, shape)]),
        3 => Formula::Rel("P".into(), vec![term(rng, shape)]),
        _ => {
            let k = rng.gen_range(1..=shape.max_inclusion_width.max(1));
            let pick = |rng: &mut R| -> Vec<Var> { (0..k).map(|_| shape.vars.choose(rng).unwrap().clone()).collect() };
            let xs = pick(rng);
            let ys = pick(rng);
            Formula::Inc(xs, ys)
        }
    }
}

fn term<R: Rng + ?Sized>(rng: &mut R, shape: &FormulaShape) -> Term {
    let v = Term::Var(shape.vars.choose(rng).unwrap().clone());
    if !shape.use_terms {
        return v;
    }
    match rng.gen_range(0..6) {
        0 => Term::Const("c".into()),
        1 => Term::App("f".into(), vec![v]),
        _ => v,
    }
}

/// Random interpretation of every symbol of `sig` over `n` elements.
pub fn model<R: Rng + ?Sized>(rng: &mut R, sig: &Signature, n: usize) -> Model {
    let mut m = Model::with_size(n).expect("at least two elements");
    for (name, &arity) in &sig.relations {
        let density = rng.gen_range(0.2..0.8);
        let tuples: Vec<Vec<Elem>> = all_tuples(n, arity).into_iter().filter(|_| rng.gen_bool(density)).collect();
        m.add_relation(name, arity, tuples).expect("fresh relation");
    }
    for (name, &arity) in &sig.functions {
        let table: Vec<(Vec<Elem>, Elem)> =
            all_tuples(n, arity).into_iter().map(|t| (t, rng.gen_range(0..n as Elem))).collect();
        m.add_function(name, arity, table).expect("total table");
    }
    for name in &sig.constants {
        m.add_constant(name, rng.gen_range(0..n as Elem)).expect("fresh constant");
    }
    m
}

pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<Elem>> {
    let mut out = Vec::new();
    let mut t = vec![0 as Elem; arity];
    loop {
        out.push(t.clone());
        if !crate::semantics::next_tuple(&mut t, n) {
            return out;
        }
    }
}

/// Every interpretation of `sig` over `n` elements. Grows doubly exponentially; meant for tiny signatures.
pub fn all_models(sig: &Signature, n: usize) -> Vec<Model> {
    let mut models = vec![Model::with_size(n).expect("at least two elements")];
    for (name, &arity) in &sig.relations {
        let tuples = all_tuples(n, arity);
        let mut next = Vec::new();
        for m in &models {
            for mask in 0u64..1 << tuples.len() {
                let mut m = m.clone();
                let chosen = tuples.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, t)| t.clone());
                m.add_relation(name, arity, chosen).expect("fresh relation");
                next.push(m);
            }
        }
        models = next;
    }
    for (name, &arity) in &sig.functions {
        let args = all_tuples(n, arity);
        let mut next = Vec::new();
        for m in &models {
            for values in all_tuples(n, args.len()) {
                let mut m = m.clone();
                m.add_function(name, arity, args.iter().cloned().zip(values)).expect("total table");
                next.push(m);
            }
        }
        models = next;
    }
    for name in &sig.constants {
        let mut next = Vec::new();
        for m in &models {
            for e in 0..n as Elem {
                let mut m = m.clone();
                m.add_constant(name, e).expect("fresh constant");
                next.push(m);
            }
        }
        models = next;
    }
    models
}

/// Every team over `domain` with at most `max_rows` rows, the empty team included.
pub fn all_teams(m: &Model, domain: &[Var], max_rows: usize) -> Vec<Team> {
    let rows: Vec<Row> = all_tuples(m.size(), domain.len());
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn walk(rows: &[Row], start: usize, left: usize, chosen: &mut Vec<Row>, domain: &[Var], out: &mut Vec<Team>) {
        out.push(Team::new(domain.to_vec(), chosen.iter().cloned()).expect("distinct domain variables"));
        if left == 0 {
            return;
        }
        for i in start..rows.len() {
            chosen.push(rows[i].clone());
            walk(rows, i + 1, left - 1, chosen, domain, out);
            chosen.pop();
        }
    }
    walk(&rows, 0, max_rows, &mut chosen, domain, &mut out);
    out
}

/// Up to `max_rows` distinct random rows over `domain` (possibly none).
pub fn team<R: Rng + ?Sized>(rng: &mut R, m: &Model, domain: &[Var], max_rows: usize) -> Team {
    let rows_wanted = rng.gen_range(0..=max_rows);
    let mut rows: BTreeSet<Row> = BTreeSet::new();
    for _ in 0..rows_wanted {
        rows.insert(domain.iter().map(|_| rng.gen_range(0..m.size() as Elem)).collect());
    }
    Team::new(domain.to_vec(), rows).expect("distinct domain variables")
}

/// A nonempty team, unless the domain is empty in which case `{∅}`.
pub fn nonempty_team<R: Rng + ?Sized>(rng: &mut R, m: &Model, domain: &[Var], max_rows: usize) -> Team {
    loop {
        let t = team(rng, m, domain, max_rows.max(1));
        if !t.is_empty() {
            return t;
        }
    }
}
