//! Recursive-descent parser for the ASCII formula syntax.
//!
//! Precedence is `~` > `&` > `|`; quantifiers `E x.` and `A x.` extend as far
//! right as possible. Sugar (`ups`, `snot`, `[..] <= [..]`) is expanded here.

use super::sugar::{desugar, SugarError, SugarForm};
use super::{Formula, Signature, SignatureError, Term, Var};
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub struct ParseError {
    pub pos: usize,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "at offset {}: {}", self.pos, self.kind)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("negation applied to a subformula that is not first-order")]
    NonFoNegation,
    #[error("inclusion atom sides have lengths {0} and {1}")]
    IncLength(usize, usize),
    #[error("inclusion atoms take variables only, found `{0}`")]
    NonVariable(String),
    #[error("unknown symbol `{0}`")]
    UnknownSymbol(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
    #[error(transparent)]
    Sugar(#[from] SugarError),
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Amp,
    Bar,
    Tilde,
    Eq,
    Neq,
    Le,
    Lt,
    End,
}

const KEYWORDS: [&str; 5] = ["bot", "E", "A", "ups", "snot"];

pub(crate) fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let two = |s: &str| text[i..].starts_with(s);
        let tok = if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() {
                let d = bytes[i] as char;
                if d.is_ascii_alphanumeric() || d == '_' || d == '\'' {
                    i += 1;
                } else {
                    break;
                }
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
            continue;
        } else if two("<=") {
            i += 1;
            Tok::Le
        } else if two("!=") {
            i += 1;
            Tok::Neq
        } else {
            match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                '&' => Tok::Amp,
                '|' => Tok::Bar,
                '~' => Tok::Tilde,
                '=' => Tok::Eq,
                '<' => Tok::Lt,
                _ => {
                    return Err(ParseError {
                        pos: i,
                        kind: ParseErrorKind::Syntax(format!("unexpected character `{}`", c)),
                    })
                }
            }
        };
        i += 1;
        out.push((tok, start));
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    at: usize,
    sig: SigMode<'a>,
}

enum SigMode<'a> {
    Fixed(&'a Signature),
    Inferred(Signature),
}

/// Parses against a fixed signature: unknown symbols and wrong arities are errors,
/// and identifiers declared as constants denote constants.
pub fn parse_formula(text: &str, sig: &Signature) -> Result<Formula, ParseError> {
    let mut p = Parser::new(text, SigMode::Fixed(sig))?;
    let f = p.formula()?;
    p.expect_end()?;
    Ok(f)
}

/// Parses with a signature inferred from use. Bare identifiers are variables.
pub fn parse_formula_inferred(text: &str) -> Result<(Formula, Signature), ParseError> {
    let mut p = Parser::new(text, SigMode::Inferred(Signature::new()))?;
    let f = p.formula()?;
    p.expect_end()?;
    match p.sig {
        SigMode::Inferred(sig) => Ok((f, sig)),
        SigMode::Fixed(_) => unreachable!(),
    }
}

/// Parses a single term.
pub fn parse_term(text: &str, sig: &Signature) -> Result<Term, ParseError> {
    let mut p = Parser::new(text, SigMode::Fixed(sig))?;
    let t = p.term()?;
    p.expect_end()?;
    Ok(t)
}

impl<'a> Parser<'a> {
    fn new(text: &str, sig: SigMode<'a>) -> Result<Parser<'a>, ParseError> {
        Ok(Parser { toks: lex(text)?, at: 0, sig })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn peek2(&self) -> &Tok {
        &self.toks[(self.at + 1).min(self.toks.len() - 1)].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { pos: self.pos(), kind })
    }

    fn err_at<T>(&self, pos: usize, kind: ParseErrorKind) -> Result<T, ParseError> {
        Err(ParseError { pos, kind })
    }

    fn syntax<T>(&self, msg: &str) -> Result<T, ParseError> {
        let found = match self.peek() {
            Tok::End => "end of input".to_string(),
            t => format!("{:?}", t),
        };
        self.err(ParseErrorKind::Syntax(format!("{}, found {}", msg, found)))
    }

    fn expect(&mut self, t: Tok, what: &str) -> Result<(), ParseError> {
        if *self.peek() == t {
            self.bump();
            Ok(())
        } else {
            self.syntax(&format!("expected {}", what))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::End {
            Ok(())
        } else {
            self.syntax("expected end of input")
        }
    }

    fn formula(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.conjunction()?;
        while *self.peek() == Tok::Bar {
            self.bump();
            let right = self.conjunction()?;
            left = Formula::or(left, right);
        }
        Ok(left)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut left = self.unary()?;
        while *self.peek() == Tok::Amp {
            self.bump();
            let right = self.unary()?;
            left = Formula::and(left, right);
        }
        Ok(left)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Tilde => {
                self.bump();
                let body = self.unary()?;
                if !body.is_fo() {
                    return self.err_at(pos, ParseErrorKind::NonFoNegation);
                }
                Ok(Formula::not(body))
            }
            Tok::Ident(k) if k == "snot" => {
                self.bump();
                let body = self.unary()?;
                desugar(&SugarForm::WeakNeg(body)).or_else(|e| self.err_at(pos, e.into()))
            }
            Tok::Ident(k) if k == "E" || k == "A" => {
                self.bump();
                let x = self.variable_name()?;
                self.expect(Tok::Dot, "`.` after quantified variable")?;
                let body = self.formula()?;
                Ok(if k == "E" { Formula::exists(x, body) } else { Formula::forall(x, body) })
            }
            _ => self.atom(),
        }
    }

    fn variable_name(&mut self) -> Result<Var, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) if !is_keyword(&name) => {
                if let SigMode::Fixed(sig) = &self.sig {
                    if sig.constants.contains(&name) {
                        return self.syntax("expected a variable, not a constant");
                    }
                }
                self.bump();
                Ok(Var::new(&name))
            }
            _ => self.syntax("expected a variable"),
        }
    }

    fn var_list(&mut self) -> Result<Vec<Var>, ParseError> {
        let mut out = vec![self.variable_name()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.variable_name()?);
        }
        Ok(out)
    }

    fn starts_variable(&self) -> bool {
        matches!(self.peek(), Tok::Ident(n) if !is_keyword(n))
    }

    fn atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(k) if k == "bot" => {
                self.bump();
                Ok(Formula::Bot)
            }
            Tok::Ident(k) if k == "ups" => {
                self.bump();
                let ys = if self.starts_variable() { self.var_list()? } else { Vec::new() };
                Ok(desugar(&SugarForm::Anonymity(Vec::new(), ys)).expect("anonymity always desugars"))
            }
            Tok::LBrack => {
                let left = self.bracket_terms()?;
                self.expect(Tok::Le, "`<=` in term inclusion")?;
                let right = self.bracket_terms()?;
                desugar(&SugarForm::TermInclusion(left, right)).or_else(|e| self.err_at(pos, e.into()))
            }
            Tok::Ident(_) => self.term_atom(),
            _ => self.syntax("expected a formula"),
        }
    }

    fn bracket_terms(&mut self) -> Result<Vec<Term>, ParseError> {
        self.expect(Tok::LBrack, "`[`")?;
        let mut out = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            out.push(self.term()?);
        }
        self.expect(Tok::RBrack, "`]`")?;
        Ok(out)
    }

    fn term_atom(&mut self) -> Result<Formula, ParseError> {
        let pos = self.pos();
        let first = self.term_or_relation()?;
        match self.peek() {
            Tok::Comma | Tok::Le => {
                let mut terms = vec![(first, pos)];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    let p = self.pos();
                    terms.push((self.term()?, p));
                }
                let xs = terms
                    .into_iter()
                    .map(|(t, p)| match t {
                        Term::Var(v) => Ok(v),
                        other => self.err_at(p, ParseErrorKind::NonVariable(other.to_string())),
                    })
                    .collect::<Result<Vec<Var>, _>>()?;
                match self.peek().clone() {
                    Tok::Le => {
                        self.bump();
                        let ys = self.var_list()?;
                        if xs.len() != ys.len() {
                            return self.err_at(pos, ParseErrorKind::IncLength(xs.len(), ys.len()));
                        }
                        Ok(Formula::Inc(xs, ys))
                    }
                    Tok::Ident(k) if k == "ups" => {
                        self.bump();
                        let ys = if self.starts_variable() { self.var_list()? } else { Vec::new() };
                        Ok(desugar(&SugarForm::Anonymity(xs, ys)).expect("anonymity always desugars"))
                    }
                    _ => self.syntax("expected `<=` or `ups` after a variable list"),
                }
            }
            Tok::Ident(k) if k == "ups" => {
                let x = match first {
                    Term::Var(v) => v,
                    other => return self.err_at(pos, ParseErrorKind::NonVariable(other.to_string())),
                };
                self.bump();
                let ys = if self.starts_variable() { self.var_list()? } else { Vec::new() };
                Ok(desugar(&SugarForm::Anonymity(vec![x], ys)).expect("anonymity always desugars"))
            }
            Tok::Eq => {
                self.bump();
                let rhs = self.term()?;
                Ok(Formula::Eq(first, rhs))
            }
            Tok::Neq => {
                self.bump();
                let rhs = self.term()?;
                Ok(Formula::not(Formula::Eq(first, rhs)))
            }
            Tok::Lt => {
                self.bump();
                let rhs = self.term()?;
                self.relation("<", vec![first, rhs], pos)
            }
            _ => match first {
                Term::App(name, args) => self.relation(&name, args, pos),
                _ => self.syntax("expected `=`, `<`, `<=` or `ups` after a term"),
            },
        }
    }

    fn relation(&mut self, name: &str, args: Vec<Term>, pos: usize) -> Result<Formula, ParseError> {
        match &mut self.sig {
            SigMode::Fixed(sig) => match sig.relations.get(name) {
                None => self.err_at(pos, ParseErrorKind::UnknownSymbol(name.to_string())),
                Some(&a) if a != args.len() => self.err_at(
                    pos,
                    SignatureError::Arity { name: name.to_string(), declared: a, found: args.len() }.into(),
                ),
                Some(_) => Ok(Formula::Rel(name.to_string(), args)),
            },
            SigMode::Inferred(sig) => match sig.add_relation(name, args.len()) {
                Ok(()) => Ok(Formula::Rel(name.to_string(), args)),
                Err(e) => Err(ParseError { pos, kind: e.into() }),
            },
        }
    }

    /// A term, where an application is not yet checked against the signature:
    /// at atom level it may turn out to be a relation.
    fn term_or_relation(&mut self) -> Result<Term, ParseError> {
        if let (Tok::Ident(name), Tok::LParen) = (self.peek().clone(), self.peek2().clone()) {
            if !is_keyword(&name) {
                let save = self.at;
                self.bump();
                self.bump();
                let mut args = Vec::new();
                if *self.peek() != Tok::RParen {
                    args.push(self.term()?);
                    while *self.peek() == Tok::Comma {
                        self.bump();
                        args.push(self.term()?);
                    }
                }
                self.expect(Tok::RParen, "`)`")?;
                let is_rel_position = !matches!(self.peek(), Tok::Eq | Tok::Neq | Tok::Lt | Tok::Comma | Tok::Le);
                if is_rel_position {
                    return Ok(Term::App(name, args));
                }
                self.at = save;
            }
        }
        self.term()
    }

    fn term(&mut self) -> Result<Term, ParseError> {
        let pos = self.pos();
        let name = match self.peek().clone() {
            Tok::Ident(n) if !is_keyword(&n) => n,
            _ => return self.syntax("expected a term"),
        };
        self.bump();
        if *self.peek() == Tok::LParen {
            self.bump();
            let mut args = vec![self.term()?];
            while *self.peek() == Tok::Comma {
                self.bump();
                args.push(self.term()?);
            }
            self.expect(Tok::RParen, "`)`")?;
            match &mut self.sig {
                SigMode::Fixed(sig) => match sig.functions.get(&name) {
                    None => return self.err_at(pos, ParseErrorKind::UnknownSymbol(name)),
                    Some(&a) if a != args.len() => {
                        return self.err_at(pos, SignatureError::Arity { name, declared: a, found: args.len() }.into())
                    }
                    Some(_) => {}
                },
                SigMode::Inferred(sig) => {
                    if let Err(e) = sig.add_function(&name, args.len()) {
                        return Err(ParseError { pos, kind: e.into() });
                    }
                }
            }
            return Ok(Term::App(name, args));
        }
        match &self.sig {
            SigMode::Fixed(sig) if sig.constants.contains(&name) => Ok(Term::Const(name)),
            SigMode::Fixed(sig) if sig.functions.contains_key(&name) || sig.relations.contains_key(&name) => {
                self.err_at(pos, ParseErrorKind::Syntax(format!("`{}` is not a term here", name)))
            }
            _ => Ok(Term::Var(Var::new(&name))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::vars;

    fn p(s: &str) -> Formula {
        parse_formula_inferred(s).unwrap().0
    }

    #[test]
    fn inclusion_atom() {
        assert_eq!(p("x,y <= u,v"), Formula::Inc(vars(&["x", "y"]), vars(&["u", "v"])));
    }

    #[test]
    fn negation_over_non_fo_is_rejected() {
        let err = parse_formula_inferred("~(E x. x <= y)").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonFoNegation);
        assert_eq!(err.pos, 0);
    }

    #[test]
    fn anonymity_desugars() {
        let expected = Formula::exists(
            Var::new("v"),
            Formula::and(
                Formula::Inc(vars(&["x", "y", "v"]), vars(&["x", "y", "z"])),
                Formula::var_neq(&Var::new("v"), &Var::new("z")),
            ),
        );
        assert_eq!(p("x,y ups z"), expected);
        assert_eq!(p("x ups"), Formula::Bot);
        assert_eq!(p("(x ups) & x = x"), Formula::and(Formula::Bot, p("x = x")));
    }

    #[test]
    fn unequal_inclusion_lengths() {
        let err = parse_formula_inferred("x,y <= z").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::IncLength(2, 1));
    }

    #[test]
    fn precedence_and_scope() {
        assert_eq!(p("a = b | c = d & e = f"), Formula::or(p("a = b"), p("c = d & e = f")));
        assert_eq!(p("E x. x = y & y = y"), Formula::exists(Var::new("x"), p("x = y & y = y")));
        assert_eq!(p("~x = y & R(x)"), Formula::and(p("~(x = y)"), p("R(x)")));
    }

    #[test]
    fn fixed_signature_checks() {
        let sig = Signature::new().with_relation("R", 2).with_function("f", 1).with_constant("c");
        assert!(parse_formula("R(x, f(c))", &sig).is_ok());
        let err = parse_formula("R(x)", &sig).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::Signature(SignatureError::Arity { .. })));
        let err = parse_formula("S(x)", &sig).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownSymbol("S".into()));
        assert_eq!(
            parse_formula("f(x) = c", &sig).unwrap(),
            Formula::Eq(Term::App("f".into(), vec![Term::var("x")]), Term::Const("c".into()))
        );
    }

    #[test]
    fn infix_order_and_nullary_relation() {
        assert_eq!(p("x < y"), Formula::Rel("<".into(), vec![Term::var("x"), Term::var("y")]));
        assert_eq!(p("P()"), Formula::Rel("P".into(), vec![]));
        assert_eq!(p("x != y"), p("~x = y"));
    }

    #[test]
    fn inclusion_rejects_terms() {
        let err = parse_formula_inferred("f(x) <= y").unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::NonVariable(_)));
    }

    #[test]
    fn syntax_error_position() {
        let err = parse_formula_inferred("x = y &").unwrap_err();
        assert_eq!(err.pos, 7);
        assert!(parse_formula_inferred("x = y )").is_err());
        assert!(parse_formula_inferred("x $ y").is_err());
    }
}
