//! Text formats for models and teams.
//!
//! Model files:
//!
//! ```text
//! # comment
//! universe: a b c
//! relation </2: (a,b) (b,c)
//! function f/1: (a)->b (b)->c (c)->a
//! constant zero: a
//! ```
//!
//! Team files are CSV with a header of variable names and one row of element
//! names per assignment. A file holding only `<empty-domain>` is the team
//! with one empty assignment.

use super::model::{Elem, Model, ModelError};
use super::team::{Team, TeamError};
use crate::syntax::Var;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Model { line: usize, source: ModelError },
    #[error("team: {0}")]
    Team(#[from] TeamError),
    #[error("team: {0}")]
    Csv(#[from] csv::Error),
    #[error("team: {0}")]
    Element(ModelError),
}

const EMPTY_DOMAIN: &str = "<empty-domain>";

pub fn parse_model(text: &str) -> Result<Model, FileError> {
    let mut model: Option<Model> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let syntax = |msg: &str| FileError::Syntax { line, msg: msg.to_string() };
        let (head, body) = content.split_once(':').ok_or_else(|| syntax("expected `keyword: ...`"))?;
        let head = head.trim();
        let body = body.trim();
        if head == "universe" {
            if model.is_some() {
                return Err(syntax("universe declared twice"));
            }
            let names: Vec<&str> = body.split_whitespace().collect();
            model = Some(Model::new(&names).map_err(|source| FileError::Model { line, source })?);
            continue;
        }
        let m = model.as_mut().ok_or_else(|| syntax("universe must come first"))?;
        let wrap = |source| FileError::Model { line, source };
        let (kind, decl) = head.split_once(char::is_whitespace).ok_or_else(|| syntax("missing symbol name"))?;
        let decl = decl.trim();
        match kind {
            "relation" | "function" => {
                let (name, arity) = decl.rsplit_once('/').ok_or_else(|| syntax("expected NAME/ARITY"))?;
                let arity: usize = arity.trim().parse().map_err(|_| syntax("arity is not a number"))?;
                let name = name.trim();
                if kind == "relation" {
                    let tuples = tuples(body)
                        .ok_or_else(|| syntax("expected tuples like (a,b)"))?
                        .into_iter()
                        .map(|t| elements(m, &t))
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(wrap)?;
                    m.add_relation(name, arity, tuples).map_err(wrap)?;
                } else {
                    let mut table = Vec::new();
                    for entry in body.split_whitespace() {
                        let (args, val) = entry.split_once("->").ok_or_else(|| syntax("expected (args)->value"))?;
                        let args = tuples(args).filter(|t| t.len() == 1).ok_or_else(|| syntax("bad argument tuple"))?;
                        let args = elements(m, &args[0]).map_err(wrap)?;
                        table.push((args, m.element(val).map_err(wrap)?));
                    }
                    m.add_function(name, arity, table).map_err(wrap)?;
                }
            }
            "constant" => {
                let e = m.element(body).map_err(wrap)?;
                m.add_constant(decl, e).map_err(wrap)?;
            }
            _ => return Err(syntax(&format!("unknown declaration `{}`", kind))),
        }
    }
    model.ok_or(FileError::Syntax { line: 0, msg: "no universe declared".to_string() })
}

/// `(a,b) (c,d)` or `()`, with whitespace tolerated inside tuples.
fn tuples(body: &str) -> Option<Vec<Vec<String>>> {
    let mut out = Vec::new();
    let mut rest = body.trim();
    while !rest.is_empty() {
        rest = rest.strip_prefix('(')?;
        let close = rest.find(')')?;
        let inner = rest[..close].trim();
        out.push(if inner.is_empty() { Vec::new() } else { inner.split(',').map(|s| s.trim().to_string()).collect() });
        rest = rest[close + 1..].trim_start();
    }
    Some(out)
}

fn elements(m: &Model, names: &[String]) -> Result<Vec<Elem>, ModelError> {
    names.iter().map(|n| m.element(n)).collect()
}

pub fn parse_team(text: &str, m: &Model) -> Result<Team, FileError> {
    if text.trim() == EMPTY_DOMAIN {
        return Ok(Team::unit());
    }
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let domain: Vec<Var> = reader.headers()?.iter().map(Var::new).collect();
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record?;
        let row =
            record.iter().map(|name| m.element(name)).collect::<Result<Vec<_>, _>>().map_err(FileError::Element)?;
        rows.push(row);
    }
    Ok(Team::new(domain, rows)?)
}

pub fn render_team(team: &Team, m: &Model) -> String {
    if team.domain().is_empty() && !team.is_empty() {
        return format!("{}\n", EMPTY_DOMAIN);
    }
    let mut out = String::new();
    let header: Vec<&str> = team.domain().iter().map(|v| v.as_str()).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for r in team.rows() {
        let names: Vec<&str> = r.iter().map(|&e| m.element_name(e)).collect();
        out.push_str(&names.join(","));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const CYCLE: &str = "# three-cycle\nuniverse: a b c\nrelation </2: (a,b) (b,c) (c,a)\n";

    #[test]
    fn model_with_all_kinds() {
        let text =
            "universe: 0 1\nrelation P/0: ()\nrelation R/1: (1)\nfunction s/1: (0)->1 (1)->0\nconstant zero: 0\n";
        let m = parse_model(text).unwrap();
        assert_eq!(m.holds("P", &[]), Some(true));
        assert_eq!(m.apply("s", &[1]), Some(0));
        assert_eq!(m.constant("zero"), Some(0));
        let m = parse_model(CYCLE).unwrap();
        assert_eq!(m.holds("<", &[2, 0]), Some(true));
    }

    #[test]
    fn model_errors_carry_line() {
        match parse_model("universe: a b\nrelation R/2: (a,z)\n") {
            Err(FileError::Model { line: 2, .. }) => {}
            other => panic!("{:?}", other),
        }
        assert!(parse_model("relation R/1: (a)\n").is_err());
        assert!(parse_model("universe: a\n").is_err());
    }

    #[test]
    fn team_formats() {
        let m = parse_model(CYCLE).unwrap();
        assert_eq!(parse_team("<empty-domain>\n", &m).unwrap(), Team::unit());
        let t = parse_team("y,x\n", &m).unwrap();
        assert!(t.is_empty());
        assert_eq!(t.domain().len(), 2);
        let t = parse_team("x, y\na, b\nb, c\n", &m).unwrap();
        assert_eq!(t.len(), 2);
        assert_eq!(parse_team(&render_team(&t, &m), &m).unwrap(), t);
        assert!(parse_team("x\nq\n", &m).is_err());
    }
}
