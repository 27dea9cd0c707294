//! The `.ndp` text format and the line-by-line checker.
//!
//! ```text
//! # comment
//! 1: x <= y assume
//! 2: y <= z assume
//! 3: x <= y; y <= z |- x <= z by incTrs from 1, 2
//! qed 3
//! ```

use super::{apply_rule, Kind, Param, Rule, RuleApp, RuleError, Sequent};
use crate::syntax::parse::{is_identifier, is_keyword};
use crate::syntax::{parse_formula_inferred, Formula, Signature, Term, Var};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum Justification {
    Assume,
    Rule(RuleApp),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Line {
    pub id: String,
    pub sequent: Sequent,
    pub justification: Justification,
}

#[derive(Clone, PartialEq, Eq, Debug, Default, Serialize)]
pub struct ProofScript {
    pub lines: Vec<Line>,
    pub qed: String,
}

impl ProofScript {
    pub fn new() -> ProofScript {
        ProofScript::default()
    }

    pub fn assume(&mut self, id: &str, phi: Formula) -> &mut ProofScript {
        self.lines.push(Line {
            id: id.to_string(),
            sequent: Sequent::assumption(phi),
            justification: Justification::Assume,
        });
        self.qed = id.to_string();
        self
    }

    /// Appends a rule line whose sequent is computed by the rule itself.
    pub fn derive(&mut self, id: &str, app: RuleApp) -> Result<&Sequent, RuleError> {
        let premises: Vec<&Sequent> = app
            .premises
            .iter()
            .map(|p| {
                self.line(p).map(|l| &l.sequent).ok_or_else(|| RuleError::Malformed(format!("unknown line `{}`", p)))
            })
            .collect::<Result<_, _>>()?;
        let sequent = apply_rule(&app, &premises)?;
        self.lines.push(Line { id: id.to_string(), sequent, justification: Justification::Rule(app) });
        self.qed = id.to_string();
        Ok(&self.lines.last().unwrap().sequent)
    }

    pub fn line(&self, id: &str) -> Option<&Line> {
        self.lines.iter().find(|l| l.id == id)
    }

    /// The sequent the script claims to prove.
    pub fn claim(&self) -> Option<&Sequent> {
        self.line(&self.qed).map(|l| &l.sequent)
    }
}

impl fmt::Display for ProofScript {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        for line in &self.lines {
            match &line.justification {
                Justification::Assume => writeln!(f, "{}: {} assume", line.id, line.sequent.conclusion)?,
                Justification::Rule(app) => {
                    write!(f, "{}: {} by {}", line.id, line.sequent, app.rule)?;
                    let params: Vec<String> =
                        app.params.iter().flat_map(|(k, vs)| vs.iter().map(move |v| format!("{}={}", k, v))).collect();
                    if !params.is_empty() {
                        write!(f, "({})", params.join("; "))?;
                    }
                    if !app.premises.is_empty() {
                        write!(f, " from {}", app.premises.join(", "))?;
                    }
                    writeln!(f)?;
                }
            }
        }
        writeln!(f, "qed {}", self.qed)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error, Serialize)]
#[error("line {line}: {message}")]
pub struct ScriptError {
    pub line: usize,
    pub message: String,
}

struct RawLine<'a> {
    id: &'a str,
    body: RawBody<'a>,
}

enum RawBody<'a> {
    Assume(&'a str),
    Rule {
        context: Vec<&'a str>,
        conclusion: &'a str,
        rule: &'a str,
        params: Vec<(&'a str, &'a str)>,
        premises: Vec<&'a str>,
    },
}

fn err<T>(no: usize, message: impl Into<String>) -> Result<T, ScriptError> {
    Err(ScriptError { line: no, message: message.into() })
}

fn is_id(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.' || c == '\'')
}

fn raw_line(no: usize, text: &str) -> Result<RawLine<'_>, ScriptError> {
    let (id, rest) = match text.split_once(':') {
        Some((id, rest)) if is_id(id.trim()) => (id.trim(), rest.trim()),
        _ => return err(no, "expected `<id>: ...`"),
    };
    if let Some(phi) = rest.strip_suffix("assume") {
        if phi.ends_with(char::is_whitespace) && !phi.contains("|-") {
            return Ok(RawLine { id, body: RawBody::Assume(phi.trim()) });
        }
    }
    let (seq, just) = match rest.rsplit_once(" by ") {
        Some(p) => p,
        None => return err(no, "expected `by <rule>` or `assume`"),
    };
    let (ctx, conclusion) = match seq.split_once("|-") {
        Some(p) => p,
        None => return err(no, "expected a sequent `<context> |- <formula>`"),
    };
    let context: Vec<&str> = ctx.split(';').map(str::trim).filter(|s| !s.is_empty()).collect();
    let just = just.trim();
    let name_end = just.find(|c: char| !(c.is_ascii_alphanumeric() || c == '_')).unwrap_or(just.len());
    let rule = &just[..name_end];
    let mut tail = just[name_end..].trim_start();
    let mut params = Vec::new();
    if tail.starts_with('(') {
        let mut depth = 0usize;
        let mut close = None;
        for (i, c) in tail.char_indices() {
            match c {
                '(' => depth += 1,
                ')' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(i);
                        break;
                    }
                }
                _ => {}
            }
        }
        let close = match close {
            Some(i) => i,
            None => return err(no, "unbalanced parentheses in rule parameters"),
        };
        for item in tail[1..close].split(';').map(str::trim).filter(|s| !s.is_empty()) {
            match item.split_once('=') {
                Some((k, v)) if is_id(k.trim()) => params.push((k.trim(), v.trim())),
                _ => return err(no, format!("expected `key=value`, got `{}`", item)),
            }
        }
        tail = tail[close + 1..].trim_start();
    }
    let premises = if tail.is_empty() {
        Vec::new()
    } else if let Some(list) = tail.strip_prefix("from") {
        let ids: Vec<&str> = list.split(',').map(str::trim).collect();
        if ids.iter().any(|i| !is_id(i)) {
            return err(no, format!("bad premise list `{}`", list.trim()));
        }
        ids
    } else {
        return err(no, format!("unexpected `{}`", tail));
    };
    Ok(RawLine { id, body: RawBody::Rule { context, conclusion: conclusion.trim(), rule, params, premises } })
}

fn merge(sig: &mut Signature, other: &Signature) -> Result<(), String> {
    for (r, &a) in &other.relations {
        sig.add_relation(r, a).map_err(|e| e.to_string())?;
    }
    for (g, &a) in &other.functions {
        sig.add_function(g, a).map_err(|e| e.to_string())?;
    }
    Ok(())
}

struct Reader {
    sig: Signature,
}

impl Reader {
    fn formula(&mut self, no: usize, text: &str) -> Result<Formula, ScriptError> {
        let (phi, sig) = match parse_formula_inferred(text) {
            Ok(p) => p,
            Err(e) => return err(no, format!("in `{}`: {}", text, e)),
        };
        if let Err(e) = merge(&mut self.sig, &sig) {
            return err(no, e);
        }
        Ok(phi)
    }

    fn term(&mut self, no: usize, text: &str) -> Result<Term, ScriptError> {
        match self.formula(no, &format!("{0} = {0}", text))? {
            Formula::Eq(t, _) => Ok(t),
            _ => err(no, format!("`{}` is not a term", text)),
        }
    }

    fn param(&mut self, no: usize, kind: Kind, text: &str) -> Result<Param, ScriptError> {
        let var = |s: &str| {
            if is_identifier(s) && !is_keyword(s) {
                Ok(Var::new(s))
            } else {
                err(no, format!("`{}` is not a variable", s))
            }
        };
        Ok(match kind {
            Kind::Var => Param::Var(var(text)?),
            Kind::Vars => Param::Vars(
                text.split(',').map(str::trim).filter(|s| !s.is_empty()).map(var).collect::<Result<_, _>>()?,
            ),
            Kind::Nat => match text.parse() {
                Ok(n) => Param::Nat(n),
                Err(_) => return err(no, format!("`{}` is not a number", text)),
            },
            Kind::Term => Param::Term(self.term(no, text)?),
            Kind::Formula | Kind::Formulas => Param::Formula(self.formula(no, text)?),
        })
    }
}

/// Parses a script. Symbols are inferred from use and must agree across the whole script.
pub fn parse_script(text: &str) -> Result<ProofScript, ScriptError> {
    let mut reader = Reader { sig: Signature::new() };
    let mut script = ProofScript::new();
    let mut qed = None;
    for (i, raw) in text.lines().enumerate() {
        let no = i + 1;
        let raw = raw.split('#').next().unwrap_or("").trim();
        if raw.is_empty() {
            continue;
        }
        if qed.is_some() {
            return err(no, "nothing may follow `qed`");
        }
        if let Some(id) = raw.strip_prefix("qed ") {
            qed = Some(id.trim().to_string());
            continue;
        }
        let line = raw_line(no, raw)?;
        let (sequent, justification) = match line.body {
            RawBody::Assume(phi) => (Sequent::assumption(reader.formula(no, phi)?), Justification::Assume),
            RawBody::Rule { context, conclusion, rule, params, premises } => {
                let rule: Rule = match rule.parse() {
                    Ok(r) => r,
                    Err(e) => return err(no, e),
                };
                let mut app = RuleApp::new(rule).from(premises.iter().copied());
                for (key, value) in params {
                    let kind = match rule.parameters().iter().find(|(k, _)| *k == key) {
                        Some(&(_, kind)) => kind,
                        None => return err(no, format!("{} takes no parameter `{}`", rule, key)),
                    };
                    app = app.with(key, reader.param(no, kind, value)?);
                }
                let mut ctx = BTreeSet::new();
                for c in context {
                    ctx.insert(reader.formula(no, c)?);
                }
                let seq = Sequent { context: ctx, conclusion: reader.formula(no, conclusion)? };
                (seq, Justification::Rule(app))
            }
        };
        script.lines.push(Line { id: line.id.to_string(), sequent, justification });
    }
    match qed {
        Some(id) => script.qed = id,
        None => return err(text.lines().count(), "missing `qed <id>`"),
    }
    Ok(script)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
pub enum Verdict {
    Accepted,
    Rejected,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub enum LineStatus {
    Ok,
    Failed(String),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Failure {
    pub line: String,
    pub rule: Option<Rule>,
    pub side_condition: Option<u8>,
    pub message: String,
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct CheckReport {
    pub verdict: Verdict,
    pub lines: Vec<(String, LineStatus)>,
    pub first_failure: Option<Failure>,
    pub claim: Option<Sequent>,
}

impl CheckReport {
    pub fn accepted(&self) -> bool {
        self.verdict == Verdict::Accepted
    }
}

/// Checks each line against its stated premises; every line is checked even after a failure.
pub fn check_script(script: &ProofScript) -> CheckReport {
    let mut seen: BTreeMap<&str, &Sequent> = BTreeMap::new();
    let mut lines = Vec::new();
    let mut first_failure = None;
    let mut fail = |id: &str, rule: Option<Rule>, note: Option<u8>, message: String, lines: &mut Vec<_>| {
        if first_failure.is_none() {
            first_failure =
                Some(Failure { line: id.to_string(), rule, side_condition: note, message: message.clone() });
        }
        lines.push((id.to_string(), LineStatus::Failed(message)));
    };
    for line in &script.lines {
        if seen.contains_key(line.id.as_str()) {
            fail(&line.id, None, None, format!("duplicate line id `{}`", line.id), &mut lines);
            continue;
        }
        let outcome = match &line.justification {
            Justification::Assume => {
                if line.sequent.context.len() == 1 && line.sequent.context.contains(&line.sequent.conclusion) {
                    Ok(())
                } else {
                    Err((None, None, "an assumption line must have the form φ ⊢ φ".to_string()))
                }
            }
            Justification::Rule(app) => check_line(app, &line.sequent, &seen),
        };
        match outcome {
            Ok(()) => lines.push((line.id.clone(), LineStatus::Ok)),
            Err((rule, note, message)) => fail(&line.id, rule, note, message, &mut lines),
        }
        seen.insert(&line.id, &line.sequent);
    }
    match script.lines.last() {
        Some(last) if last.id == script.qed => {}
        _ => fail(&script.qed, None, None, format!("`qed {}` must name the last line", script.qed), &mut lines),
    }
    let verdict = if first_failure.is_none() { Verdict::Accepted } else { Verdict::Rejected };
    CheckReport { verdict, lines, first_failure, claim: script.claim().cloned() }
}

type LineError = (Option<Rule>, Option<u8>, String);

fn check_line(app: &RuleApp, stated: &Sequent, seen: &BTreeMap<&str, &Sequent>) -> Result<(), LineError> {
    let mut premises = Vec::new();
    for p in &app.premises {
        match seen.get(p.as_str()) {
            Some(s) => premises.push(*s),
            None => return Err((Some(app.rule), None, format!("premise `{}` is not an earlier line", p))),
        }
    }
    match apply_rule(app, &premises) {
        Ok(computed) if &computed == stated => Ok(()),
        Ok(computed) => Err((Some(app.rule), None, format!("stated sequent differs from the computed `{}`", computed))),
        Err(e) => Err((Some(app.rule), e.side_condition(), e.to_string())),
    }
}

/// Parses and checks; a parse error is reported as a rejection of the offending line.
pub fn check_text(text: &str) -> Result<CheckReport, ScriptError> {
    parse_script(text).map(|s| check_script(&s))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRANS: &str = "\
# transitivity
1: x <= y assume
2: y <= z assume
3: x <= y; y <= z |- x <= z by incTrs from 1, 2
qed 3
";

    #[test]
    fn accepts_and_reprints() {
        let s = parse_script(TRANS).unwrap();
        let report = check_script(&s);
        assert!(report.accepted(), "{:?}", report.first_failure);
        assert_eq!(report.claim.unwrap().to_string(), "x <= y; y <= z |- x <= z");
        let again = parse_script(&s.to_string()).unwrap();
        assert_eq!(again, s);
    }

    #[test]
    fn stated_sequent_must_match() {
        let bad = TRANS.replace("|- x <= z", "|- z <= x");
        let report = check_text(&bad).unwrap();
        assert_eq!(report.verdict, Verdict::Rejected);
        assert_eq!(report.first_failure.unwrap().line, "3");
    }

    #[test]
    fn parameters_and_empty_context() {
        let text = "a: |- f(x) = f(x) by eqI(t=f(x))\nqed a\n";
        assert!(check_text(text).unwrap().accepted());
        let text = "a: |- x = x by eqI(t=x; t=y)\nqed a\n";
        assert!(!check_text(text).unwrap().accepted());
    }

    #[test]
    fn structural_errors() {
        assert!(parse_script("1: x <= y assume\n").is_err());
        assert!(parse_script("1: x <= y by frob\nqed 1\n").is_err());
        assert!(parse_script("1: x <= y |- x <= y by incTrs(k=1) from 1\nqed 1\n").is_err());
        let forward = "1: x <= y; y <= z |- x <= z by incTrs from 2, 3\n2: x <= y assume\n3: y <= z assume\nqed 1\n";
        let report = check_text(forward).unwrap();
        assert!(!report.accepted());
        assert_eq!(report.first_failure.unwrap().line, "1");
        let dup = "1: x <= y assume\n1: x <= y assume\nqed 1\n";
        assert!(!check_text(dup).unwrap().accepted());
    }

    #[test]
    fn deterministic() {
        let bad = TRANS.replace("incTrs", "incCtr(k=1)");
        assert_eq!(check_text(&bad).unwrap(), check_text(&bad).unwrap());
    }
}
