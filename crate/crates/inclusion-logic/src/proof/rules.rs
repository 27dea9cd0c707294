use super::{Rule, RuleApp, RuleError, Sequent};
use crate::syntax::{substitute, substitute_many, Formula, Term, Var};
use std::collections::BTreeSet;

type Ctx = BTreeSet<Formula>;

/// Computes the conclusion of `app` from its premises, checking every side condition.
pub fn apply_rule(app: &RuleApp, premises: &[&Sequent]) -> Result<Sequent, RuleError> {
    let rule = app.rule;
    if premises.len() != rule.premise_count() {
        return Err(RuleError::Arity { rule, expected: rule.premise_count(), got: premises.len() });
    }
    for (key, list) in &app.params {
        if !rule.parameters().iter().any(|(k, _)| k == key) {
            return Err(RuleError::Malformed(format!("{} takes no parameter `{}`", rule, key)));
        }
        for p in list {
            if let super::Param::Formula(phi) = p {
                phi.validate().map_err(|e| RuleError::Malformed(e.to_string()))?;
            }
        }
    }
    let r = Rules { rule, app };
    match rule {
        Rule::EqI => r.eq_i(),
        Rule::EqSub => r.eq_sub(premises[0], premises[1]),
        Rule::NegI => r.neg_i(premises[0]),
        Rule::NegE => r.neg_e(premises[0], premises[1]),
        Rule::Raa => r.raa(premises[0]),
        Rule::AndI => Ok(Sequent {
            context: union(&[premises[0], premises[1]]),
            conclusion: Formula::and(premises[0].conclusion.clone(), premises[1].conclusion.clone()),
        }),
        Rule::AndEL | Rule::AndER => r.and_e(premises[0]),
        Rule::OrIL | Rule::OrIR => r.or_i(premises[0]),
        Rule::OrE => r.or_e(premises[0], premises[1], premises[2]),
        Rule::ExistsI => r.exists_i(premises[0]),
        Rule::ExistsE => r.exists_e(premises[0], premises[1]),
        Rule::ForallI => r.forall_i(premises[0]),
        Rule::ForallE => r.forall_e(premises[0]),
        Rule::ForallE0 => r.forall_e0(premises[0]),
        Rule::ForallSub => r.forall_sub(premises[0], premises[1]),
        Rule::ForallExc => r.forall_exc(premises[0]),
        Rule::ForallAndExt => r.forall_and_ext(premises[0], premises[1]),
        Rule::ForallOrExtFwd => r.forall_or_fwd(premises[0]),
        Rule::ForallOrExtBwd => r.forall_or_bwd(premises[0]),
        Rule::IncExc => r.inc_exc(premises[0]),
        Rule::IncCtr => r.inc_ctr(premises[0]),
        Rule::IncTrs => r.inc_trs(premises[0], premises[1]),
        Rule::IncCmp => r.inc_cmp(premises[0], premises[1]),
        Rule::IncExp => r.inc_exp(premises[0]),
        Rule::IncWex | Rule::IncWall => r.inc_weaken(premises[0]),
        Rule::IncSimFwd => r.inc_sim_fwd(premises[0]),
        Rule::IncSimBwd => r.inc_sim_bwd(premises[0]),
        Rule::IncExt => r.inc_ext(premises[0]),
        Rule::Weaken => {
            let mut context = premises[0].context.clone();
            context.extend(app.formulas("add")?);
            Ok(Sequent { context, conclusion: premises[0].conclusion.clone() })
        }
        Rule::Cut => r.cut(premises[0], premises[1]),
    }
}

fn union(seqs: &[&Sequent]) -> Ctx {
    seqs.iter().flat_map(|s| s.context.iter().cloned()).collect()
}

fn without(ctx: &Ctx, gone: &[&Formula]) -> Ctx {
    ctx.iter().filter(|f| !gone.contains(f)).cloned().collect()
}

fn free_in_ctx(ctx: &Ctx, x: &Var) -> Option<Formula> {
    ctx.iter().find(|f| f.is_free(x)).cloned()
}

fn names(vs: &[Var]) -> String {
    vs.iter().map(Var::as_str).collect::<Vec<_>>().join(" ")
}

fn distinct(vs: &[Var]) -> bool {
    vs.iter().collect::<BTreeSet<_>>().len() == vs.len()
}

fn var_terms(vs: &[Var]) -> Vec<Term> {
    vs.iter().cloned().map(Term::Var).collect()
}

/// Peels `n` leading quantifiers of one kind, returning the bound names and the body.
fn peel(phi: &Formula, n: usize, universal: bool) -> Option<(Vec<Var>, &Formula)> {
    let mut vs = Vec::new();
    let mut cur = phi;
    for _ in 0..n {
        match (cur, universal) {
            (Formula::Forall(x, b), true) | (Formula::Exists(x, b), false) => {
                vs.push(x.clone());
                cur = b;
            }
            _ => return None,
        }
    }
    Some((vs, cur))
}

/// Splits a left-nested conjunction into exactly `n` parts.
fn split_conj(phi: &Formula, n: usize) -> Option<Vec<Formula>> {
    let mut parts = Vec::new();
    let mut cur = phi;
    for _ in 1..n {
        match cur {
            Formula::And(a, b) => {
                parts.push((**b).clone());
                cur = a;
            }
            _ => return None,
        }
    }
    if n == 0 {
        return None;
    }
    parts.push(cur.clone());
    parts.reverse();
    Some(parts)
}

struct Rules<'a> {
    rule: Rule,
    app: &'a RuleApp,
}

impl Rules<'_> {
    fn shape<T>(&self, detail: impl Into<String>) -> Result<T, RuleError> {
        Err(RuleError::Shape { rule: self.rule, detail: detail.into() })
    }

    fn side<T>(&self, note: u8, detail: impl Into<String>) -> Result<T, RuleError> {
        Err(RuleError::SideCondition { rule: self.rule, note, detail: detail.into() })
    }

    fn fo(&self, phi: &Formula, what: &str) -> Result<(), RuleError> {
        if phi.is_fo() {
            Ok(())
        } else {
            Err(RuleError::NotFirstOrder { rule: self.rule, what: format!("{} (got {})", what, phi) })
        }
    }

    fn subst(&self, phi: &Formula, x: &Var, t: &Term) -> Result<Formula, RuleError> {
        substitute(phi, x, t).map_err(|e| RuleError::Shape { rule: self.rule, detail: e.to_string() })
    }

    /// `φ(xs/zs)` for a sequence of distinct variables `zs`.
    fn subst_seq(&self, phi: &Formula, zs: &[Var], xs: &[Var]) -> Result<Formula, RuleError> {
        if zs.len() != xs.len() {
            return Err(RuleError::Malformed(format!(
                "sequences `{}` and `{}` differ in length",
                names(zs),
                names(xs)
            )));
        }
        if !distinct(zs) {
            return Err(RuleError::Malformed(format!("`{}` repeats a variable", names(zs))));
        }
        let pairs: Vec<(Var, Term)> = zs.iter().cloned().zip(var_terms(xs)).collect();
        substitute_many(phi, &pairs).map_err(|e| RuleError::Shape { rule: self.rule, detail: e.to_string() })
    }

    fn inc<'f>(&self, phi: &'f Formula) -> Result<(&'f [Var], &'f [Var]), RuleError> {
        match phi {
            Formula::Inc(xs, ys) => Ok((xs, ys)),
            _ => self.shape(format!("expected an inclusion atom, got {}", phi)),
        }
    }

    fn make_inc(&self, xs: Vec<Var>, ys: Vec<Var>) -> Result<Formula, RuleError> {
        Formula::inc(xs, ys).map_err(|e| RuleError::Malformed(e.to_string()))
    }

    fn expect(&self, got: &Formula, want: &Formula, role: &str) -> Result<(), RuleError> {
        if got == want {
            Ok(())
        } else {
            self.shape(format!("{} should be {}, got {}", role, want, got))
        }
    }

    fn eq_i(&self) -> Result<Sequent, RuleError> {
        let t = self.app.term("t")?;
        Ok(Sequent::new([], Formula::eq(t.clone(), t)))
    }

    fn eq_sub(&self, eq: &Sequent, body: &Sequent) -> Result<Sequent, RuleError> {
        let (t, t2) = match &eq.conclusion {
            Formula::Eq(a, b) => (a, b),
            other => return self.shape(format!("first premise must be an equation, got {}", other)),
        };
        let x = self.app.var("x")?;
        let phi = self.app.formula("phi")?;
        self.expect(&body.conclusion, &self.subst(&phi, &x, t)?, "second premise")?;
        Ok(Sequent { context: union(&[eq, body]), conclusion: self.subst(&phi, &x, t2)? })
    }

    fn fo_context(&self, ctx: &Ctx, note: u8) -> Result<(), RuleError> {
        match ctx.iter().find(|f| !f.is_fo()) {
            Some(f) => self.side(note, format!("undischarged assumption {} is not first-order", f)),
            None => Ok(()),
        }
    }

    fn neg_i(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let alpha = self.app.formula("alpha")?;
        self.fo(&alpha, "formula alpha")?;
        self.expect(&d.conclusion, &Formula::Bot, "premise")?;
        self.fo_context(&d.context, 1)?;
        Ok(Sequent { context: without(&d.context, &[&alpha]), conclusion: Formula::not(alpha) })
    }

    fn raa(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let alpha = self.app.formula("alpha")?;
        self.fo(&alpha, "formula alpha")?;
        self.expect(&d.conclusion, &Formula::Bot, "premise")?;
        self.fo_context(&d.context, 1)?;
        Ok(Sequent { context: without(&d.context, &[&Formula::not(alpha.clone())]), conclusion: alpha })
    }

    fn neg_e(&self, pos: &Sequent, neg: &Sequent) -> Result<Sequent, RuleError> {
        self.fo(&pos.conclusion, "formula alpha")?;
        self.expect(&neg.conclusion, &Formula::not(pos.conclusion.clone()), "second premise")?;
        Ok(Sequent { context: union(&[pos, neg]), conclusion: self.app.formula("phi")? })
    }

    fn and_e(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        match &d.conclusion {
            Formula::And(a, b) => Ok(Sequent {
                context: d.context.clone(),
                conclusion: if self.rule == Rule::AndEL { (**a).clone() } else { (**b).clone() },
            }),
            other => self.shape(format!("expected a conjunction, got {}", other)),
        }
    }

    fn or_i(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let psi = self.app.formula("psi")?;
        let phi = d.conclusion.clone();
        Ok(Sequent {
            context: d.context.clone(),
            conclusion: if self.rule == Rule::OrIL { Formula::or(phi, psi) } else { Formula::or(psi, phi) },
        })
    }

    fn or_e(&self, d: &Sequent, left: &Sequent, right: &Sequent) -> Result<Sequent, RuleError> {
        let (phi, psi) = match &d.conclusion {
            Formula::Or(a, b) => (&**a, &**b),
            other => return self.shape(format!("first premise must be a disjunction, got {}", other)),
        };
        self.expect(&right.conclusion, &left.conclusion, "third premise")?;
        let rest_l = without(&left.context, &[phi]);
        let rest_r = without(&right.context, &[psi]);
        self.fo_context(&rest_l, 2)?;
        self.fo_context(&rest_r, 2)?;
        let mut context = d.context.clone();
        context.extend(rest_l);
        context.extend(rest_r);
        Ok(Sequent { context, conclusion: left.conclusion.clone() })
    }

    fn exists_i(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let x = self.app.var("x")?;
        let t = self.app.term("t")?;
        let phi = self.app.formula("phi")?;
        self.expect(&d.conclusion, &self.subst(&phi, &x, &t)?, "premise")?;
        Ok(Sequent { context: d.context.clone(), conclusion: Formula::exists(x, phi) })
    }

    fn exists_e(&self, d: &Sequent, d1: &Sequent) -> Result<Sequent, RuleError> {
        let (x, phi) = match &d.conclusion {
            Formula::Exists(x, b) => (x, &**b),
            other => return self.shape(format!("first premise must be existential, got {}", other)),
        };
        let rest = without(&d1.context, &[phi]);
        if d1.conclusion.is_free(x) {
            return self.side(3, format!("{} is free in the conclusion {}", x, d1.conclusion));
        }
        if let Some(f) = free_in_ctx(&rest, x) {
            return self.side(3, format!("{} is free in the assumption {}", x, f));
        }
        let mut context = d.context.clone();
        context.extend(rest);
        Ok(Sequent { context, conclusion: d1.conclusion.clone() })
    }

    fn forall_i(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let x = self.app.var("x")?;
        if let Some(f) = free_in_ctx(&d.context, &x) {
            return self.side(4, format!("{} is free in the assumption {}", x, f));
        }
        Ok(Sequent { context: d.context.clone(), conclusion: Formula::forall(x, d.conclusion.clone()) })
    }

    fn forall_body<'f>(&self, d: &'f Sequent) -> Result<(&'f Var, &'f Formula), RuleError> {
        match &d.conclusion {
            Formula::Forall(x, b) => Ok((x, b)),
            other => self.shape(format!("expected a universal formula, got {}", other)),
        }
    }

    fn forall_e(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (x, body) = self.forall_body(d)?;
        self.fo(body, "body")?;
        let t = self.app.term("t")?;
        Ok(Sequent { context: d.context.clone(), conclusion: self.subst(body, x, &t)? })
    }

    fn forall_e0(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (x, body) = self.forall_body(d)?;
        if body.is_free(x) {
            return self.side(5, format!("{} is free in {}", x, body));
        }
        Ok(Sequent { context: d.context.clone(), conclusion: body.clone() })
    }

    fn forall_sub(&self, d: &Sequent, d1: &Sequent) -> Result<Sequent, RuleError> {
        let (x, phi) = self.forall_body(d)?;
        let y = self.app.var("y")?;
        let instance = self.subst(phi, x, &Term::Var(y.clone()))?;
        if d.conclusion.is_free(&y) {
            return self.side(6, format!("{} is free in {}", y, d.conclusion));
        }
        let rest = without(&d1.context, &[&instance]);
        if let Some(f) = free_in_ctx(&rest, &y) {
            return self.side(6, format!("{} is free in the assumption {}", y, f));
        }
        let mut context = d.context.clone();
        context.extend(rest);
        Ok(Sequent { context, conclusion: Formula::forall(y, d1.conclusion.clone()) })
    }

    fn forall_exc(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (x, body) = self.forall_body(d)?;
        match body {
            Formula::Forall(y, phi) => Ok(Sequent {
                context: d.context.clone(),
                conclusion: Formula::forall(y.clone(), Formula::forall(x.clone(), (**phi).clone())),
            }),
            other => self.shape(format!("expected two universal quantifiers, got {}", other)),
        }
    }

    fn forall_and_ext(&self, a: &Sequent, b: &Sequent) -> Result<Sequent, RuleError> {
        let (x, phi) = self.forall_body(a)?;
        let (x2, psi) = self.forall_body(b)?;
        if x != x2 {
            return self.shape(format!("quantified variables {} and {} differ", x, x2));
        }
        Ok(Sequent {
            context: union(&[a, b]),
            conclusion: Formula::forall(x.clone(), Formula::and(phi.clone(), psi.clone())),
        })
    }

    fn forall_or_fwd(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (x, phi, psi) = match &d.conclusion {
            Formula::Or(a, psi) => match &**a {
                Formula::Forall(x, phi) => (x, &**phi, &**psi),
                other => return self.shape(format!("left disjunct must be universal, got {}", other)),
            },
            other => return self.shape(format!("expected a disjunction, got {}", other)),
        };
        if psi.is_free(x) {
            return self.side(7, format!("{} is free in {}", x, psi));
        }
        let y = self.app.var("y")?;
        let z = self.app.var("z")?;
        let used = d.all_vars();
        for v in [&y, &z] {
            if used.contains(v) {
                return self.side(7, format!("{} is not fresh", v));
            }
        }
        if y == z {
            return self.side(7, format!("{} is used for both fresh variables", y));
        }
        Ok(Sequent { context: d.context.clone(), conclusion: or_ext_shape(x, phi, psi, &y, &z) })
    }

    fn forall_or_bwd(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let bad = || format!("expected E y. E z. A x. ((phi & y = z) | (psi & ~y = z)), got {}", d.conclusion);
        let (names, inner) = match peel(&d.conclusion, 2, false) {
            Some(p) => p,
            None => return self.shape(bad()),
        };
        let (y, z) = (&names[0], &names[1]);
        let (x, matrix) = match inner {
            Formula::Forall(x, m) => (x, &**m),
            _ => return self.shape(bad()),
        };
        let (phi, psi) = match matrix {
            Formula::Or(l, r) => match (&**l, &**r) {
                (Formula::And(phi, _), Formula::And(psi, _)) => (&**phi, &**psi),
                _ => return self.shape(bad()),
            },
            _ => return self.shape(bad()),
        };
        if d.conclusion != or_ext_shape(x, phi, psi, y, z) {
            return self.shape(bad());
        }
        if psi.is_free(x) {
            return self.side(7, format!("{} is free in {}", x, psi));
        }
        if y == z || y == x || z == x {
            return self.side(7, "the three bound variables must be distinct");
        }
        for v in [y, z] {
            let mut used = phi.all_vars();
            used.extend(psi.all_vars());
            for f in &d.context {
                used.extend(f.all_vars());
            }
            if used.contains(v) {
                return self.side(7, format!("{} is not fresh", v));
            }
        }
        Ok(Sequent {
            context: d.context.clone(),
            conclusion: Formula::or(Formula::forall(x.clone(), phi.clone()), psi.clone()),
        })
    }

    fn inc_exc(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys) = self.inc(&d.conclusion)?;
        let k = self.app.nat("k")?;
        let l = self.app.nat("l")?;
        if k + l > xs.len() {
            return self.shape(format!("blocks of length {} and {} exceed the atom length {}", k, l, xs.len()));
        }
        let swap =
            |vs: &[Var]| -> Vec<Var> { vs[k..k + l].iter().chain(&vs[..k]).chain(&vs[k + l..]).cloned().collect() };
        Ok(Sequent { context: d.context.clone(), conclusion: self.make_inc(swap(xs), swap(ys))? })
    }

    fn inc_ctr(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys) = self.inc(&d.conclusion)?;
        let k = self.app.nat("k")?;
        if k > xs.len() {
            return self.shape(format!("prefix {} exceeds the atom length {}", k, xs.len()));
        }
        Ok(Sequent { context: d.context.clone(), conclusion: self.make_inc(xs[..k].to_vec(), ys[..k].to_vec())? })
    }

    fn inc_trs(&self, a: &Sequent, b: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys) = self.inc(&a.conclusion)?;
        let (ys2, zs) = self.inc(&b.conclusion)?;
        if ys != ys2 {
            return self.shape(format!("middle sequences `{}` and `{}` differ", names(ys), names(ys2)));
        }
        Ok(Sequent { context: union(&[a, b]), conclusion: self.make_inc(xs.to_vec(), zs.to_vec())? })
    }

    fn inc_cmp(&self, atom: &Sequent, body: &Sequent) -> Result<Sequent, RuleError> {
        let (ys, xs) = self.inc(&atom.conclusion)?;
        let zs = self.app.vars("z")?;
        let alpha = self.app.formula("alpha")?;
        self.fo(&alpha, "formula alpha")?;
        let at_x = self.subst_seq(&alpha, &zs, xs)?;
        self.expect(&body.conclusion, &at_x, "second premise")?;
        if let Some(v) = at_x.free_vars().into_iter().find(|v| !xs.contains(v)) {
            return self.side(1, format!("{} is free in {} but not among `{}`", v, at_x, names(xs)));
        }
        Ok(Sequent { context: union(&[atom, body]), conclusion: self.subst_seq(&alpha, &zs, ys)? })
    }

    fn inc_exp(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let ys = self.app.vars("y")?;
        let xs = self.app.vars("x")?;
        let zs = self.app.vars("z")?;
        let alpha = self.app.formula("alpha")?;
        self.fo(&alpha, "formula alpha")?;
        self.expect(&d.conclusion, &Formula::Bot, "premise")?;
        if !distinct(&ys) {
            return self.side(2, format!("`{}` repeats a variable", names(&ys)));
        }
        let atom = self.make_inc(ys.clone(), xs.clone())?;
        let at_y = self.subst_seq(&alpha, &zs, &ys)?;
        if let Some(v) = at_y.free_vars().into_iter().find(|v| !ys.contains(v)) {
            return self.side(2, format!("{} is free in {} but not among `{}`", v, at_y, names(&ys)));
        }
        let neg = Formula::not(at_y);
        let rest = without(&d.context, &[&atom, &neg]);
        for y in &ys {
            if let Some(f) = free_in_ctx(&rest, y) {
                return self.side(2, format!("{} is free in the assumption {}", y, f));
            }
        }
        Ok(Sequent { context: rest, conclusion: self.subst_seq(&alpha, &zs, &xs)? })
    }

    fn inc_weaken(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys) = self.inc(&d.conclusion)?;
        let ws = self.app.vars("w")?;
        let zs = self.app.vars("z")?;
        if ws.is_empty() || ws.len() != zs.len() {
            return Err(RuleError::Malformed("w and z must be non-empty and of equal length".into()));
        }
        if !distinct(&ws) {
            return self.side(3, format!("`{}` repeats a variable", names(&ws)));
        }
        if let Some(w) = ws.iter().find(|w| xs.contains(w) || ys.contains(w) || zs.contains(w)) {
            return self.side(3, format!("{} occurs among the atom variables or z", w));
        }
        let cat = |a: &[Var], b: &[Var]| -> Vec<Var> { a.iter().chain(b).cloned().collect() };
        let conclusion = if self.rule == Rule::IncWex {
            Formula::exists_seq(&ws, self.make_inc(cat(xs, &ws), cat(ys, &zs))?)
        } else {
            Formula::forall_seq(&ws, self.make_inc(cat(xs, &zs), cat(ys, &ws))?)
        };
        Ok(Sequent { context: d.context.clone(), conclusion })
    }

    fn sim_params(&self) -> Result<(Vec<Var>, Vec<Var>, Vec<Var>), RuleError> {
        let xs = self.app.vars("x")?;
        let ys = self.app.vars("y")?;
        let zs = self.app.vars("z")?;
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(RuleError::Malformed("x and y must be non-empty and of equal length".into()));
        }
        if !distinct(&zs) || !distinct(&ys) {
            return Err(RuleError::Malformed("z and y must not repeat variables".into()));
        }
        Ok((xs, ys, zs))
    }

    fn sim_shape(&self, xs: &[Var], ys: &[Var], zs: &[Var], phi: &Formula) -> Result<Formula, RuleError> {
        let left: Vec<Var> = zs.iter().chain(ys).cloned().collect();
        let right: Vec<Var> = zs.iter().chain(xs).cloned().collect();
        Ok(Formula::exists_seq(xs, Formula::forall_seq(ys, Formula::and(self.make_inc(left, right)?, phi.clone()))))
    }

    /// Shared checks: the free variables of `∀x φ` lie in `z`, and `y` is fresh.
    fn sim_checks(&self, universal: &Formula, ys: &[Var], zs: &[Var], used: BTreeSet<Var>) -> Result<(), RuleError> {
        if let Some(v) = universal.free_vars().into_iter().find(|v| !zs.contains(v)) {
            return self.shape(format!("{} is free in {} but not among z", v, universal));
        }
        if let Some(y) = ys.iter().find(|y| used.contains(y)) {
            return self.side(4, format!("{} is not fresh", y));
        }
        Ok(())
    }

    fn inc_sim_fwd(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys, zs) = self.sim_params()?;
        let phi = match peel(&d.conclusion, xs.len(), true) {
            Some((bound, phi)) if bound == xs => phi,
            _ => return self.shape(format!("expected a universal block over `{}`, got {}", names(&xs), d.conclusion)),
        };
        self.sim_checks(&d.conclusion, &ys, &zs, d.all_vars())?;
        Ok(Sequent { context: d.context.clone(), conclusion: self.sim_shape(&xs, &ys, &zs, phi)? })
    }

    fn inc_sim_bwd(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let (xs, ys, zs) = self.sim_params()?;
        let phi = match peel(&d.conclusion, xs.len(), false).and_then(|(_, b)| peel(b, ys.len(), true)).map(|(_, b)| b)
        {
            Some(Formula::And(_, phi)) => &**phi,
            _ => return self.shape(format!("unexpected premise {}", d.conclusion)),
        };
        if d.conclusion != self.sim_shape(&xs, &ys, &zs, phi)? {
            return self.shape(format!("premise {} does not match the parameters", d.conclusion));
        }
        let universal = Formula::forall_seq(&xs, phi.clone());
        let mut used = universal.all_vars();
        for f in &d.context {
            used.extend(f.all_vars());
        }
        self.sim_checks(&universal, &ys, &zs, used)?;
        Ok(Sequent { context: d.context.clone(), conclusion: universal })
    }

    fn inc_ext(&self, d: &Sequent) -> Result<Sequent, RuleError> {
        let xs = self.app.vars("x")?;
        let n = self.app.nat("atoms")?;
        let u = self.app.var("u")?;
        let v = self.app.var("v")?;
        let (left, phi) = match &d.conclusion {
            Formula::Or(a, b) => (&**a, &**b),
            other => return self.shape(format!("expected a disjunction, got {}", other)),
        };
        let body = match peel(left, xs.len(), false) {
            Some((bound, body)) if bound == xs => body,
            _ => return self.shape(format!("left disjunct must open with E {}", names(&xs))),
        };
        let parts = match split_conj(body, n + 1) {
            Some(p) => p,
            None => return self.shape(format!("expected {} inclusion atoms and a first-order formula", n)),
        };
        let alpha = &parts[n];
        self.fo(alpha, "last conjunct")?;
        let mut atoms = Vec::new();
        for atom in &parts[..n] {
            let (rho, sigma) = self.inc(atom)?;
            if let Some(w) = rho.iter().chain(sigma).find(|w| !xs.contains(w)) {
                return self.shape(format!("{} in {} is not among the quantified variables", w, atom));
            }
            let ext = |s: &[Var]| -> Vec<Var> { s.iter().chain([&u, &v]).cloned().collect() };
            atoms.push(self.make_inc(ext(rho), ext(sigma))?);
        }
        if let Some(w) = xs.iter().find(|w| phi.is_free(w)) {
            return self.shape(format!("{} is free in the right disjunct {}", w, phi));
        }
        let used = d.all_vars();
        for w in [&u, &v] {
            if used.contains(w) {
                return self.side(5, format!("{} is not fresh", w));
            }
        }
        if u == v {
            return self.side(5, format!("{} is used for both fresh variables", u));
        }
        atoms.push(Formula::iff(alpha.clone(), Formula::var_eq(&u, &v)));
        atoms.push(Formula::or(alpha.clone(), phi.clone()));
        let bound: Vec<Var> = xs.iter().chain([&u, &v]).cloned().collect();
        Ok(Sequent { context: d.context.clone(), conclusion: Formula::exists_seq(&bound, Formula::conj(atoms)) })
    }

    fn cut(&self, lemma: &Sequent, user: &Sequent) -> Result<Sequent, RuleError> {
        if !user.context.contains(&lemma.conclusion) {
            return self.shape(format!("{} is not an assumption of the second premise", lemma.conclusion));
        }
        let mut context = lemma.context.clone();
        context.extend(without(&user.context, &[&lemma.conclusion]));
        Ok(Sequent { context, conclusion: user.conclusion.clone() })
    }
}

fn or_ext_shape(x: &Var, phi: &Formula, psi: &Formula, y: &Var, z: &Var) -> Formula {
    Formula::exists(
        y.clone(),
        Formula::exists(
            z.clone(),
            Formula::forall(
                x.clone(),
                Formula::or(
                    Formula::and(phi.clone(), Formula::var_eq(y, z)),
                    Formula::and(psi.clone(), Formula::var_neq(y, z)),
                ),
            ),
        ),
    )
}
