//! First-order evaluation for formulas with many quantified variables.
//!
//! The formula is put in negation normal form, quantifiers are pushed inward
//! (`∀` over `∧`, vacuous quantifiers dropped, existential blocks split into
//! components that share no block variable), and each existential block is
//! solved by backtracking with equality propagation. Quantified subformulas
//! are memoized on the values of their free variables.

use super::fo::eval_fo;
use super::model::{Elem, Model};
use super::team::Assignment;
use super::EvalError;
use crate::syntax::{rename_bound, Formula, Term, Var};
use std::collections::{BTreeSet, HashMap};

/// Truth of a first-order formula under `s`, failing with a guard error after `budget` steps.
pub fn eval_fo_search(m: &Model, s: &Assignment, alpha: &Formula, budget: u64) -> Result<bool, EvalError> {
    // Delegate the error checks to the plain evaluator on a trivially small instance.
    if !alpha.is_fo() {
        return Err(EvalError::NotFirstOrder);
    }
    m.check_symbols(alpha).map_err(EvalError::Symbol)?;
    if let Some(v) = alpha.free_vars().into_iter().find(|v| !s.contains_key(v)) {
        return Err(EvalError::Unbound(v));
    }
    if alpha.quantifier_depth() == 0 {
        return eval_fo(m, s, alpha);
    }
    let reserved: BTreeSet<Var> = s.keys().cloned().collect();
    let renamed = rename_bound(alpha, &reserved);
    let mut c = Compiler::default();
    for v in s.keys() {
        c.slot(v);
    }
    let root = c.compile(&nnf(&renamed, false));
    let mut vals = vec![0 as Elem; c.slots.len()];
    for (v, &e) in s {
        vals[c.slots[v]] = e;
    }
    let mut solver = Solver { m, nodes: &c.nodes, memo: vec![HashMap::new(); c.nodes.len()], vals, steps: 0, budget };
    solver.eval(root)
}

fn nnf(phi: &Formula, negate: bool) -> Formula {
    match phi {
        Formula::Bot | Formula::Eq(..) | Formula::Rel(..) | Formula::Inc(..) => {
            if negate {
                Formula::not(phi.clone())
            } else {
                phi.clone()
            }
        }
        Formula::Not(b) => nnf(b, !negate),
        Formula::And(a, b) | Formula::Or(a, b) => {
            let (a, b) = (nnf(a, negate), nnf(b, negate));
            if matches!(phi, Formula::And(..)) != negate {
                Formula::and(a, b)
            } else {
                Formula::or(a, b)
            }
        }
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            let b = nnf(b, negate);
            if matches!(phi, Formula::Exists(..)) != negate {
                Formula::exists(x.clone(), b)
            } else {
                Formula::forall(x.clone(), b)
            }
        }
    }
}

#[derive(Clone, Debug)]
enum CTerm {
    Slot(usize),
    Const(String),
    App(String, Vec<CTerm>),
}

type NodeId = usize;

#[derive(Debug)]
enum Node {
    True,
    False,
    Eq(CTerm, CTerm, bool),
    Rel(String, Vec<CTerm>, bool),
    And(Vec<NodeId>),
    Or(Vec<NodeId>),
    /// Block variables in solving order; conjuncts grouped by the position at which they become closed.
    Exists {
        vars: Vec<usize>,
        checks: Vec<Vec<NodeId>>,
        forcing: Vec<Option<CTerm>>,
        free: Vec<usize>,
    },
    Forall {
        var: usize,
        body: NodeId,
        free: Vec<usize>,
    },
}

#[derive(Default)]
struct Compiler {
    slots: HashMap<Var, usize>,
    nodes: Vec<Node>,
    /// Free slots of every node.
    free: Vec<BTreeSet<usize>>,
}

impl Compiler {
    fn slot(&mut self, v: &Var) -> usize {
        let n = self.slots.len();
        *self.slots.entry(v.clone()).or_insert(n)
    }

    fn push(&mut self, node: Node, free: BTreeSet<usize>) -> NodeId {
        self.nodes.push(node);
        self.free.push(free);
        self.nodes.len() - 1
    }

    fn term(&mut self, t: &Term, free: &mut BTreeSet<usize>) -> CTerm {
        match t {
            Term::Var(v) => {
                let s = self.slot(v);
                free.insert(s);
                CTerm::Slot(s)
            }
            Term::Const(c) => CTerm::Const(c.clone()),
            Term::App(f, args) => CTerm::App(f.clone(), args.iter().map(|a| self.term(a, free)).collect()),
        }
    }

    fn compile(&mut self, phi: &Formula) -> NodeId {
        match phi {
            Formula::Bot => self.push(Node::False, BTreeSet::new()),
            Formula::Not(b) if **b == Formula::Bot => self.push(Node::True, BTreeSet::new()),
            Formula::Eq(..) | Formula::Rel(..) => self.literal(phi, true),
            Formula::Not(b) => self.literal(b, false),
            Formula::And(..) => {
                let parts: Vec<NodeId> = conjuncts(phi).into_iter().map(|c| self.compile(c)).collect();
                self.and(parts)
            }
            Formula::Or(a, b) => {
                let parts = vec![self.compile(a), self.compile(b)];
                let free = parts.iter().flat_map(|&p| self.free[p].clone()).collect();
                self.push(Node::Or(parts), free)
            }
            Formula::Exists(..) => {
                let mut block = Vec::new();
                let mut body = phi;
                while let Formula::Exists(x, b) = body {
                    block.push(x.clone());
                    body = b;
                }
                let parts: Vec<NodeId> = conjuncts(body).into_iter().map(|c| self.compile(c)).collect();
                let block: Vec<usize> = block.iter().map(|v| self.slot(v)).collect();
                self.exists(block, parts)
            }
            Formula::Forall(x, b) => {
                let var = self.slot(x);
                let parts: Vec<NodeId> = conjuncts(b).into_iter().map(|c| self.compile(c)).collect();
                let parts = self.flatten(parts);
                let mut out = Vec::new();
                for p in parts {
                    if self.free[p].contains(&var) {
                        let mut free = self.free[p].clone();
                        free.remove(&var);
                        let node = Node::Forall { var, body: p, free: free.iter().copied().collect() };
                        out.push(self.push(node, free));
                    } else {
                        out.push(p);
                    }
                }
                self.and(out)
            }
            Formula::Inc(..) => unreachable!("first-order input"),
        }
    }

    fn literal(&mut self, atom: &Formula, positive: bool) -> NodeId {
        let mut free = BTreeSet::new();
        let node = match atom {
            Formula::Eq(a, b) => Node::Eq(self.term(a, &mut free), self.term(b, &mut free), positive),
            Formula::Rel(r, args) => {
                let args = args.iter().map(|a| self.term(a, &mut free)).collect();
                Node::Rel(r.clone(), args, positive)
            }
            _ => unreachable!("negation normal form"),
        };
        self.push(node, free)
    }

    fn flatten(&self, parts: Vec<NodeId>) -> Vec<NodeId> {
        let mut flat = Vec::new();
        for p in parts {
            match &self.nodes[p] {
                Node::And(inner) => flat.extend(inner.iter().copied()),
                Node::True => {}
                _ => flat.push(p),
            }
        }
        flat
    }

    fn and(&mut self, parts: Vec<NodeId>) -> NodeId {
        let flat = self.flatten(parts);
        if flat.len() == 1 {
            return flat[0];
        }
        let free = flat.iter().flat_map(|&p| self.free[p].clone()).collect();
        self.push(Node::And(flat), free)
    }

    /// Splits `∃block ⋀parts` into independent components and orders each for solving.
    fn exists(&mut self, block: Vec<usize>, parts: Vec<NodeId>) -> NodeId {
        let parts = self.flatten(parts);
        let block_set: BTreeSet<usize> = block.iter().copied().collect();
        let mut outside = Vec::new();
        let mut inside: Vec<NodeId> = Vec::new();
        for p in parts {
            if self.free[p].is_disjoint(&block_set) {
                outside.push(p);
            } else {
                inside.push(p);
            }
        }
        // Union-find over block variables.
        let mut group: HashMap<usize, usize> = block.iter().map(|&v| (v, v)).collect();
        fn find(g: &mut HashMap<usize, usize>, v: usize) -> usize {
            let p = g[&v];
            if p == v {
                return v;
            }
            let r = find(g, p);
            g.insert(v, r);
            r
        }
        for &p in &inside {
            let vs: Vec<usize> = self.free[p].intersection(&block_set).copied().collect();
            for w in vs.windows(2) {
                let (a, b) = (find(&mut group, w[0]), find(&mut group, w[1]));
                group.insert(a, b);
            }
        }
        let mut components: Vec<(Vec<usize>, Vec<NodeId>)> = Vec::new();
        let mut index: HashMap<usize, usize> = HashMap::new();
        for &p in &inside {
            let v = *self.free[p].intersection(&block_set).next().unwrap();
            let root = find(&mut group, v);
            let k = *index.entry(root).or_insert_with(|| {
                components.push((Vec::new(), Vec::new()));
                components.len() - 1
            });
            components[k].1.push(p);
        }
        for &v in &block {
            let root = find(&mut group, v);
            if let Some(&k) = index.get(&root) {
                components[k].0.push(v);
            }
        }
        for (vars, conj) in components {
            let node = self.component(vars, conj);
            outside.push(node);
        }
        self.and(outside)
    }

    fn component(&mut self, vars: Vec<usize>, conj: Vec<NodeId>) -> NodeId {
        let var_set: BTreeSet<usize> = vars.iter().copied().collect();
        let mut free: BTreeSet<usize> = conj.iter().flat_map(|&p| self.free[p].clone()).collect();
        for v in &vars {
            free.remove(v);
        }
        let mut assigned: BTreeSet<usize> = BTreeSet::new();
        let mut order = Vec::new();
        while order.len() < vars.len() {
            let mut best: Option<(usize, (bool, usize, usize))> = None;
            for &v in vars.iter().filter(|v| !assigned.contains(v)) {
                let forced = conj.iter().any(|&p| self.forcing_term(p, v, &assigned, &var_set).is_some());
                let mut closes = 0;
                let mut touches = 0;
                for &p in &conj {
                    let open: Vec<usize> =
                        self.free[p].iter().filter(|s| var_set.contains(s) && !assigned.contains(s)).copied().collect();
                    if open.contains(&v) {
                        touches += 1;
                        if open.len() == 1 {
                            closes += 1;
                        }
                    }
                }
                let score = (forced, closes, touches);
                if best.as_ref().is_none_or(|(_, s)| score > *s) {
                    best = Some((v, score));
                }
            }
            let v = best.unwrap().0;
            order.push(v);
            assigned.insert(v);
        }
        let position: HashMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut checks = vec![Vec::new(); order.len()];
        for &p in &conj {
            let last = self.free[p].iter().filter_map(|s| position.get(s)).max().copied().unwrap();
            checks[last].push(p);
        }
        let mut forcing = Vec::with_capacity(order.len());
        let mut before: BTreeSet<usize> = BTreeSet::new();
        for &v in &order {
            forcing.push(conj.iter().find_map(|&p| self.forcing_term(p, v, &before, &var_set)));
            before.insert(v);
        }
        let node = Node::Exists { vars: order, checks, forcing, free: free.iter().copied().collect() };
        self.push(node, free)
    }

    /// For a positive equality `v = t` (or `t = v`) whose other side is already determined.
    fn forcing_term(&self, p: NodeId, v: usize, assigned: &BTreeSet<usize>, block: &BTreeSet<usize>) -> Option<CTerm> {
        if let Node::Eq(a, b, true) = &self.nodes[p] {
            let ready = |t: &CTerm| {
                let mut s = BTreeSet::new();
                term_slots(t, &mut s);
                !s.contains(&v) && s.iter().all(|x| !block.contains(x) || assigned.contains(x))
            };
            match (a, b) {
                (CTerm::Slot(s), other) if *s == v && ready(other) => return Some(other.clone()),
                (other, CTerm::Slot(s)) if *s == v && ready(other) => return Some(other.clone()),
                _ => {}
            }
        }
        None
    }
}

fn term_slots(t: &CTerm, out: &mut BTreeSet<usize>) {
    match t {
        CTerm::Slot(s) => {
            out.insert(*s);
        }
        CTerm::Const(_) => {}
        CTerm::App(_, args) => args.iter().for_each(|a| term_slots(a, out)),
    }
}

fn conjuncts(phi: &Formula) -> Vec<&Formula> {
    match phi {
        Formula::And(a, b) => {
            let mut out = conjuncts(a);
            out.extend(conjuncts(b));
            out
        }
        _ => vec![phi],
    }
}

struct Solver<'a> {
    m: &'a Model,
    nodes: &'a [Node],
    memo: Vec<HashMap<Vec<Elem>, bool>>,
    vals: Vec<Elem>,
    steps: u64,
    budget: u64,
}

impl Solver<'_> {
    fn term(&self, t: &CTerm) -> Elem {
        match t {
            CTerm::Slot(s) => self.vals[*s],
            CTerm::Const(c) => self.m.constant(c).expect("checked symbols"),
            CTerm::App(f, args) => {
                let a: Vec<Elem> = args.iter().map(|x| self.term(x)).collect();
                self.m.apply(f, &a).expect("total functions")
            }
        }
    }

    fn tick(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(EvalError::Guard(format!("more than {} search steps", self.budget)));
        }
        Ok(())
    }

    fn eval(&mut self, id: NodeId) -> Result<bool, EvalError> {
        let nodes = self.nodes;
        match &nodes[id] {
            Node::True => Ok(true),
            Node::False => Ok(false),
            Node::Eq(a, b, pos) => Ok((self.term(a) == self.term(b)) == *pos),
            Node::Rel(r, args, pos) => {
                let a: Vec<Elem> = args.iter().map(|x| self.term(x)).collect();
                Ok(self.m.holds(r, &a).expect("checked symbols") == *pos)
            }
            Node::And(parts) => {
                for &p in parts {
                    if !self.eval(p)? {
                        return Ok(false);
                    }
                }
                Ok(true)
            }
            Node::Or(parts) => {
                for &p in parts {
                    if self.eval(p)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            Node::Exists { free, .. } | Node::Forall { free, .. } => {
                let key: Vec<Elem> = free.iter().map(|&s| self.vals[s]).collect();
                if let Some(&v) = self.memo[id].get(&key) {
                    return Ok(v);
                }
                self.tick()?;
                let v = match &nodes[id] {
                    Node::Forall { var, body, .. } => {
                        let saved = self.vals[*var];
                        let mut all = true;
                        for a in self.m.elements() {
                            self.vals[*var] = a;
                            if !self.eval(*body)? {
                                all = false;
                                break;
                            }
                        }
                        self.vals[*var] = saved;
                        all
                    }
                    Node::Exists { vars, checks, forcing, .. } => {
                        let saved: Vec<Elem> = vars.iter().map(|&v| self.vals[v]).collect();
                        let found = self.search(vars, checks, forcing, 0)?;
                        for (&v, &e) in vars.iter().zip(&saved) {
                            self.vals[v] = e;
                        }
                        found
                    }
                    _ => unreachable!(),
                };
                self.memo[id].insert(key, v);
                Ok(v)
            }
        }
    }

    fn search(
        &mut self,
        vars: &[usize],
        checks: &[Vec<NodeId>],
        forcing: &[Option<CTerm>],
        depth: usize,
    ) -> Result<bool, EvalError> {
        if depth == vars.len() {
            return Ok(true);
        }
        self.tick()?;
        let candidates: Vec<Elem> = match &forcing[depth] {
            Some(t) => vec![self.term(t)],
            None => self.m.elements().collect(),
        };
        'values: for a in candidates {
            self.vals[vars[depth]] = a;
            for &c in &checks[depth] {
                if !self.eval(c)? {
                    continue 'values;
                }
            }
            if self.search(vars, checks, forcing, depth + 1)? {
                return Ok(true);
            }
        }
        Ok(false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_formula_inferred;

    fn cycle() -> Model {
        let mut m = Model::with_size(3).unwrap();
        m.add_relation("<", 2, vec![vec![0, 1], vec![1, 2], vec![2, 0]]).unwrap();
        m.add_relation("P", 1, vec![vec![1]]).unwrap();
        m
    }

    fn check(text: &str) {
        let phi = parse_formula_inferred(text).unwrap().0;
        let m = cycle();
        let s = Assignment::new();
        assert_eq!(eval_fo_search(&m, &s, &phi, 1_000_000).unwrap(), eval_fo(&m, &s, &phi).unwrap(), "{}", text);
    }

    #[test]
    fn agrees_with_plain_evaluation() {
        for t in [
            "A x. E y. x < y",
            "E x. A y. ~(y < x)",
            "A x. A y. (x < y | y < x | x = y)",
            "E x. E y. (x < y & P(y) & ~P(x))",
            "~(E x. (P(x) & A y. (y < x | x = y)))",
            "A x. (E y. (x < y & E z. (y < z & z < x)))",
            "E x. E y. E z. (x = y & y = z & P(z))",
        ] {
            check(t);
        }
    }

    #[test]
    fn many_independent_witnesses() {
        // Forty existentials in disjoint pairs: infeasible without splitting.
        let parts: Vec<String> = (0..20).map(|i| format!("E a{i}. E b{i}. (a{i} < b{i} & P(b{i}))")).collect();
        let text = parts.join(" & ");
        let phi = parse_formula_inferred(&format!("E r. ({})", text)).unwrap().0;
        assert!(eval_fo_search(&cycle(), &Assignment::new(), &phi, 100_000).unwrap());
    }

    #[test]
    fn budget_is_reported() {
        let phi = parse_formula_inferred("A x. A y. A z. E u. (u < x | u < y | u < z)").unwrap().0;
        assert!(matches!(eval_fo_search(&cycle(), &Assignment::new(), &phi, 3), Err(EvalError::Guard(_))));
    }
}
