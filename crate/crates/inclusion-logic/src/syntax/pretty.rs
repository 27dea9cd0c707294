use super::{Formula, Term, Var};

/// Renders a formula in the concrete syntax accepted by the parser.
/// Quantifiers are parenthesised whenever they are an operand.
pub fn pretty(phi: &Formula) -> String {
    let mut out = String::new();
    write(phi, Ctx::Top, &mut out);
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Top,
    OrLeft,
    OrRight,
    AndLeft,
    AndRight,
    Neg,
}

fn needs_parens(phi: &Formula, ctx: Ctx) -> bool {
    match phi {
        Formula::Exists(..) | Formula::Forall(..) => ctx != Ctx::Top,
        Formula::Or(..) => !matches!(ctx, Ctx::Top | Ctx::OrLeft),
        Formula::And(..) => !matches!(ctx, Ctx::Top | Ctx::OrLeft | Ctx::OrRight | Ctx::AndLeft),
        Formula::Eq(..) | Formula::Inc(..) => ctx == Ctx::Neg,
        Formula::Rel(r, args) => ctx == Ctx::Neg && r == "<" && args.len() == 2,
        Formula::Bot | Formula::Not(_) => false,
    }
}

fn write(phi: &Formula, ctx: Ctx, out: &mut String) {
    let parens = needs_parens(phi, ctx);
    if parens {
        out.push('(');
    }
    match phi {
        Formula::Bot => out.push_str("bot"),
        Formula::Eq(a, b) => {
            out.push_str(&a.to_string());
            out.push_str(" = ");
            out.push_str(&b.to_string());
        }
        Formula::Rel(r, args) if r == "<" && args.len() == 2 => {
            out.push_str(&format!("{} < {}", args[0], args[1]));
        }
        Formula::Rel(r, args) => {
            out.push_str(r);
            out.push('(');
            out.push_str(&join_terms(args));
            out.push(')');
        }
        Formula::Inc(xs, ys) => {
            out.push_str(&join_vars(xs));
            out.push_str(" <= ");
            out.push_str(&join_vars(ys));
        }
        Formula::Not(b) => {
            out.push('~');
            write(b, Ctx::Neg, out);
        }
        Formula::And(a, b) => {
            write(a, Ctx::AndLeft, out);
            out.push_str(" & ");
            write(b, Ctx::AndRight, out);
        }
        Formula::Or(a, b) => {
            write(a, Ctx::OrLeft, out);
            out.push_str(" | ");
            write(b, Ctx::OrRight, out);
        }
        Formula::Exists(x, b) | Formula::Forall(x, b) => {
            out.push_str(if matches!(phi, Formula::Exists(..)) { "E " } else { "A " });
            out.push_str(x.as_str());
            out.push_str(". ");
            write(b, Ctx::Top, out);
        }
    }
    if parens {
        out.push(')');
    }
}

pub(crate) fn join_vars(xs: &[Var]) -> String {
    xs.iter().map(|v| v.as_str()).collect::<Vec<_>>().join(",")
}

fn join_terms(ts: &[Term]) -> String {
    ts.iter().map(|t| t.to_string()).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_formula_inferred, vars};

    fn roundtrip(s: &str) {
        let f = parse_formula_inferred(s).unwrap().0;
        let printed = pretty(&f);
        let again = parse_formula_inferred(&printed).unwrap().0;
        assert_eq!(f, again, "{} printed as {}", s, printed);
    }

    #[test]
    fn basic_forms() {
        assert_eq!(pretty(&Formula::Inc(vars(&["x"]), vars(&["y"]))), "x <= y");
        assert_eq!(pretty(&Formula::Bot), "bot");
        let f = Formula::exists(Var::new("x"), Formula::var_eq(&Var::new("x"), &Var::new("x")));
        assert_eq!(pretty(&f), "E x. x = x");
    }

    #[test]
    fn nesting_roundtrips() {
        roundtrip("(a = b | c = d) & e = f");
        roundtrip("a = b & (c = d & e = f)");
        roundtrip("a = b | (c = d | e = f)");
        roundtrip("(E x. x = y) & y = y");
        roundtrip("(A x. x <= y) | E z. z <= y & R(z)");
        roundtrip("~~(x < y)");
        roundtrip("~(E x. x = x & ~bot)");
        roundtrip("x,y <= y,x & ~P()");
    }
}
