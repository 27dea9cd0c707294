use crate::output::Output;
use crate::{Cli, Command, EngineArg, FormulaSource, GuardArgs, Outcome};
use anyhow::{bail, Context, Result};
use inclusion_logic::approx::{build_approx_with, ApproxLimits};
use inclusion_logic::ind::{ind_implies, parse_atom, parse_atoms, IndProblem, IndVerdict, SearchBounds};
use inclusion_logic::normal_form::{normal_form, render};
use inclusion_logic::proof::{check_script, corpus, parse_script, CheckReport, LineStatus};
use inclusion_logic::semantics::files::{parse_model, parse_team, render_team};
use inclusion_logic::semantics::{eval, eval_fo_search, max_subteam, Assignment, Engine, Guards, Model, Team};
use inclusion_logic::suite::{self, SuiteReport};
use inclusion_logic::syntax::{parse_formula, parse_formula_inferred, Formula, Var};
use serde_json::{json, Value};
use std::path::Path;

/// Settings shared by the commands, gathered from flags.
#[derive(Clone, Debug)]
pub struct Config {
    pub engine: Engine,
    pub guards: Guards,
    pub limits: ApproxLimits,
    pub seed: u64,
}

impl Config {
    fn new(cli: &Cli) -> Config {
        Config { engine: Engine::default(), guards: Guards::default(), limits: ApproxLimits::default(), seed: cli.seed }
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn formula_text(source: &FormulaSource) -> Result<String> {
    match (&source.formula, &source.formula_file) {
        (Some(t), _) => Ok(t.clone()),
        (None, Some(p)) => read(p),
        (None, None) => bail!("give --formula or --formula-file"),
    }
}

/// Parses against the model's symbols when there is a model.
fn formula(source: &FormulaSource, model: Option<&Model>) -> Result<Formula> {
    let text = formula_text(source)?;
    let phi = match model {
        Some(m) => parse_formula(&text, m.signature())?,
        None => parse_formula_inferred(&text)?.0,
    };
    Ok(phi)
}

fn model(path: &Path) -> Result<Model> {
    parse_model(&read(path)?).with_context(|| format!("in model file {}", path.display()))
}

fn names(vs: &[Var]) -> Vec<&str> {
    vs.iter().map(Var::as_str).collect()
}

fn team_json(team: &Team, m: &Model) -> Value {
    let rows: Vec<Vec<&str>> = team.rows().iter().map(|r| r.iter().map(|&e| m.element_name(e)).collect()).collect();
    json!({ "domain": names(team.domain()), "rows": rows })
}

fn yes_no(b: bool) -> Outcome {
    if b {
        Outcome::Yes
    } else {
        Outcome::No
    }
}

pub fn run(cli: &Cli, out: &mut Output) -> Result<Outcome> {
    let mut config = Config::new(cli);
    match &cli.command {
        Command::Parse { source } => {
            let phi = formula(source, None)?;
            let free_vars = phi.free_vars();
            let free: Vec<&str> = free_vars.iter().map(Var::as_str).collect();
            let text = format!(
                "{}\nfree: {}\nsize: {}\nfirst-order: {}\n{:#?}",
                phi,
                free.join(" "),
                phi.size(),
                phi.is_fo(),
                phi
            );
            let record = json!({
                "command": "parse",
                "formula": phi.to_string(),
                "free": free,
                "size": phi.size(),
                "first_order": phi.is_fo(),
                "ast": serde_json::to_value(&phi)?,
            });
            out.emit(&text, record);
            Ok(Outcome::Yes)
        }
        Command::Eval { model: mpath, team: tpath, source, engine, max_subteam: want_max, guards } => {
            config.engine = match engine {
                EngineArg::Naive => Engine::Naive,
                EngineArg::Fast => Engine::Fast,
                EngineArg::Both => Engine::Both,
            };
            config.guards = guards_from(guards)?;
            let m = model(mpath)?;
            let team = parse_team(&read(tpath)?, &m).with_context(|| format!("in team file {}", tpath.display()))?;
            let phi = formula(source, Some(&m))?;
            let value = eval(config.engine, &config.guards, &m, &team, &phi)?;
            let mut text = value.to_string();
            let mut record = json!({ "command": "eval", "formula": phi.to_string(), "value": value });
            if *want_max {
                let best = max_subteam(&m, &team, &phi)?;
                text.push_str(&format!(
                    "\nlargest satisfying subteam ({} of {} rows):\n{}",
                    best.len(),
                    team.len(),
                    render_team(&best, &m)
                ));
                record["max_subteam"] = team_json(&best, &m);
            }
            out.emit(&text, record);
            Ok(yes_no(value))
        }
        Command::Nf { source } => {
            let phi = formula(source, None)?;
            let nf = normal_form(&phi);
            let rendered = render(&nf);
            let atoms: Vec<String> =
                nf.i_atoms.iter().map(|(l, r)| format!("{} <= {}", names(l).join(","), names(r).join(","))).collect();
            let record = json!({
                "command": "nf",
                "formula": phi.to_string(),
                "normal_form": rendered.to_string(),
                "z": names(&nf.z),
                "w": names(&nf.w),
                "x": names(&nf.x),
                "y": nf.y.as_str(),
                "atoms": atoms,
                "universal_positions": nf.j_indices,
                "matrix": nf.alpha.to_string(),
            });
            out.emit(&rendered.to_string(), record);
            Ok(Outcome::Yes)
        }
        Command::Approx { source, n, strong, model: mpath, cap } => {
            config.limits.max_level = *cap;
            let m = mpath.as_deref().map(model).transpose()?;
            let phi = formula(source, m.as_ref())?;
            let nf = normal_form(&phi);
            let approx = build_approx_with(&nf, *n, *strong, &config.limits)?;
            let mut text = approx.formula.to_string();
            let mut record = json!({
                "command": "approx",
                "formula": phi.to_string(),
                "level": n,
                "strong": strong,
                "copies": approx.book.len(),
                "size": approx.size(),
                "approximation": approx.formula.to_string(),
            });
            let mut outcome = Outcome::Yes;
            if let Some(m) = &m {
                if !approx.formula.free_vars().is_empty() {
                    bail!("truth on a model needs a sentence");
                }
                let value = eval_fo_search(m, &Assignment::new(), &approx.formula, config.limits.search_budget)?;
                text.push_str(&format!("\n{}", value));
                record["value"] = json!(value);
                outcome = yes_no(value);
            }
            out.emit(&text, record);
            Ok(outcome)
        }
        Command::Check { files } => {
            let mut all = true;
            for path in files {
                let script = parse_script(&read(path)?).with_context(|| format!("in {}", path.display()))?;
                let report = check_script(&script);
                all &= report.accepted();
                out.emit(
                    &report_text(&path.display().to_string(), &report),
                    report_json(&path.display().to_string(), &report),
                );
            }
            Ok(yes_no(all))
        }
        Command::Implies { gamma, phi, rows, elems, depth } => {
            if *rows == 0 || *elems == 0 || *depth == 0 {
                bail!("--rows, --elems and --depth must be positive");
            }
            let p = IndProblem::new(parse_atoms(gamma)?, parse_atom(phi)?);
            let verdict = ind_implies(&p, SearchBounds { depth: *depth, max_rows: *rows, max_elems: *elems });
            let mut record = json!({
                "command": "implies",
                "gamma": p.gamma.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "goal": p.goal.to_string(),
                "verdict": verdict.label(),
            });
            let text = match &verdict {
                IndVerdict::Derivable(d) => {
                    record["derivation"] = serde_json::to_value(d)?;
                    format!("derivable\n{}", d)
                }
                IndVerdict::Refuted { model, team } => {
                    record["counterexample"] = team_json(team, model);
                    format!("refuted by\n{}", render_team(team, model))
                }
                IndVerdict::Unknown { depth } => {
                    record["depth"] = json!(depth);
                    format!(
                        "unknown (no derivation within {} steps, no counterexample within {} rows over {} values)",
                        depth, rows, elems
                    )
                }
            };
            out.emit(&text, record);
            Ok(match verdict {
                IndVerdict::Derivable(_) => Outcome::Yes,
                IndVerdict::Refuted { .. } => Outcome::No,
                IndVerdict::Unknown { .. } => Outcome::Unknown,
            })
        }
        Command::Corpus { samples } => {
            let mut all = true;
            for entry in corpus() {
                let report = check_script(&parse_script(entry.text)?);
                all &= report.accepted();
                out.emit(&report_text(entry.name, &report), report_json(entry.name, &report));
            }
            let s = *samples;
            let seed = config.seed;
            let suites = [
                suite::corpus_and_mutants(),
                suite::corpus_soundness(2, 4),
                suite::oracle_equivalence(seed, s),
                suite::team_properties(seed, s),
                suite::normal_form_preservation(seed, s.div_ceil(10).max(1), 2),
                suite::well_foundedness(3),
                suite::approximation_direction(seed, s.div_ceil(50).max(1), 2),
                suite::ind_examples(),
                suite::anonymity(seed, s),
            ];
            for r in &suites {
                all &= r.passed();
                out.emit(&suite_text(r), suite_json(r));
            }
            Ok(yes_no(all))
        }
    }
}

fn guards_from(g: &GuardArgs) -> Result<Guards> {
    if g.guard_rows == 0 || g.guard_universe == 0 || g.guard_depth == 0 || g.guard_steps == 0 {
        bail!("guards must be positive");
    }
    Ok(Guards {
        max_rows: g.guard_rows,
        max_universe: g.guard_universe,
        max_depth: g.guard_depth,
        max_steps: g.guard_steps,
    })
}

fn report_text(name: &str, r: &CheckReport) -> String {
    let mut s = format!("{}: {}", name, if r.accepted() { "accepted" } else { "rejected" });
    if let Some(c) = &r.claim {
        s.push_str(&format!("\n  proves {}", c));
    }
    for (id, status) in &r.lines {
        if let LineStatus::Failed(msg) = status {
            s.push_str(&format!("\n  line {}: {}", id, msg));
        }
    }
    s
}

fn report_json(name: &str, r: &CheckReport) -> Value {
    let failed: Vec<Value> = r
        .lines
        .iter()
        .filter_map(|(id, st)| match st {
            LineStatus::Failed(msg) => Some(json!({ "line": id, "message": msg })),
            LineStatus::Ok => None,
        })
        .collect();
    json!({
        "command": "check",
        "script": name,
        "verdict": if r.accepted() { "accepted" } else { "rejected" },
        "lines": r.lines.len(),
        "claim": r.claim.as_ref().map(|c| c.to_string()),
        "failed_lines": failed,
        "first_failure": r.first_failure.as_ref().map(|f| json!({
            "line": f.line,
            "rule": f.rule.map(|x| x.name()),
            "side_condition": f.side_condition,
            "message": f.message,
        })),
    })
}

fn suite_text(r: &SuiteReport) -> String {
    let mut s = format!(
        "{} {}: {} checked, {} skipped, {} violations, {:.2}s",
        if r.passed() { "PASS" } else { "FAIL" },
        r.name,
        r.checked,
        r.skipped,
        r.violations,
        r.elapsed.as_secs_f64()
    );
    for e in &r.examples {
        s.push_str(&format!("\n  {}", e));
    }
    s
}

fn suite_json(r: &SuiteReport) -> Value {
    let mut v = serde_json::to_value(r).unwrap_or(Value::Null);
    v["command"] = json!("suite");
    v["passed"] = json!(r.passed());
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_guards_are_rejected() {
        let g = GuardArgs { guard_rows: 8, guard_universe: 4, guard_depth: 0, guard_steps: 10 };
        assert!(guards_from(&g).is_err());
        let g = GuardArgs { guard_depth: 2, ..g };
        assert_eq!(guards_from(&g).unwrap().max_depth, 2);
    }

    #[test]
    fn rejected_report_lists_failed_lines() {
        let script = parse_script("1: x <= y assume\n2: x <= y |- y <= y by incCtr(k=1) from 1\nqed 2\n").unwrap();
        let r = check_script(&script);
        let text = report_text("s", &r);
        assert!(text.starts_with("s: rejected"));
        assert!(text.contains("line 2:"));
        assert_eq!(report_json("s", &r)["failed_lines"][0]["line"], "2");
    }
}
