//! Reader and writer for the LP text format with bracketed quadratic terms.
//!
//! The reader accepts the subset the writer produces: whitespace-separated
//! tokens, `name:` labels, one `[ ... ]` group per expression (followed by
//! `/ 2` in the objective) and explicit bounds for every variable.

use std::collections::HashMap;
use std::fmt::Write as _;

use super::{Constraint, QuadExpr, QuadProgram, Variable};
use crate::error::{Error, Result};
use crate::lp::Sense;

const TERMS_PER_LINE: usize = 6;

fn push_term(out: &mut String, count: &mut usize, coef: f64, body: &str) {
    if *count > 0 && *count % TERMS_PER_LINE == 0 {
        out.push_str("\n   ");
    }
    let sign = if coef.is_sign_negative() { '-' } else { '+' };
    let _ = write!(out, " {sign} {} {body}", coef.abs());
    *count += 1;
}

fn write_expr(out: &mut String, expr: &QuadExpr, vars: &[Variable], halved: bool) {
    let mut count = 0;
    for &(j, c) in &expr.linear {
        push_term(out, &mut count, c, &vars[j].name);
    }
    if !expr.quadratic.is_empty() {
        out.push_str(" + [");
        for &(p, q, c) in &expr.quadratic {
            let c = if halved { 2.0 * c } else { c };
            push_term(out, &mut count, c, &format!("{} * {}", vars[p].name, vars[q].name));
        }
        out.push_str(" ]");
        if halved {
            out.push_str(" / 2");
        }
    }
    if count == 0 {
        out.push_str(" 0");
    }
}

pub(super) fn write(program: &QuadProgram) -> String {
    let vars = &program.variables;
    let mut out = String::from("\\ bilinear reformulation\nMinimize\n obj:");
    write_expr(&mut out, &program.objective, vars, true);
    out.push_str("\nSubject To\n");
    for row in &program.constraints {
        let _ = write!(out, " {}:", row.name);
        write_expr(&mut out, &row.expr, vars, false);
        let op = match row.sense {
            Sense::Ge => ">=",
            Sense::Le => "<=",
            Sense::Eq => "=",
        };
        let _ = writeln!(out, " {op} {}", row.rhs);
    }
    out.push_str("Bounds\n");
    for v in vars {
        let _ = match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => writeln!(out, " {} free", v.name),
            (false, true) => writeln!(out, " -inf <= {} <= {}", v.name, v.upper),
            (true, false) => writeln!(out, " {} >= {}", v.name, v.lower),
            (true, true) => writeln!(out, " {} <= {} <= {}", v.lower, v.name, v.upper),
        };
    }
    out.push_str("End\n");
    out
}

#[derive(Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Rows,
    Bounds,
}

fn section_of(line: &str) -> Option<Section> {
    match line.trim().to_ascii_lowercase().as_str() {
        "minimize" | "minimum" | "min" => Some(Section::Objective),
        "subject to" | "such that" | "st" | "s.t." => Some(Section::Rows),
        "bounds" => Some(Section::Bounds),
        "end" => Some(Section::None),
        _ => None,
    }
}

struct Names {
    index: HashMap<String, usize>,
    order: Vec<String>,
}

impl Names {
    fn get(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        self.order.push(name.to_string());
        self.index.insert(name.to_string(), self.order.len() - 1);
        self.order.len() - 1
    }
}

fn schema(msg: impl Into<String>) -> Error {
    Error::Schema(format!("LP text: {}", msg.into()))
}

fn number(tok: &str) -> Option<f64> {
    tok.parse::<f64>().ok()
}

/// A labelled statement: `label: expr [op rhs]`.
struct Statement {
    label: String,
    expr: QuadExpr,
    relation: Option<(Sense, f64)>,
}

fn parse_statement(tokens: &[&str], names: &mut Names) -> Result<Statement> {
    let (label, body) = match tokens.first() {
        Some(t) if t.ends_with(':') => (t.trim_end_matches(':').to_string(), &tokens[1..]),
        _ => return Err(schema("statement without a label")),
    };
    let mut expr = QuadExpr::default();
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    let mut in_quad = false;
    let mut quad_start = 0;
    let mut relation = None;
    let mut i = 0;
    while i < body.len() {
        let tok = body[i];
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            "[" => {
                in_quad = true;
                quad_start = expr.quadratic.len();
                sign = 1.0;
            }
            "]" => {
                in_quad = false;
                if body.get(i + 1) == Some(&"/") {
                    let div = body.get(i + 2).and_then(|t| number(t)).ok_or_else(|| schema("bad divisor"))?;
                    for term in &mut expr.quadratic[quad_start..] {
                        term.2 /= div;
                    }
                    i += 2;
                }
            }
            ">=" | "<=" | "=" | "=>" | "=<" => {
                let sense = match tok {
                    ">=" | "=>" => Sense::Ge,
                    "<=" | "=<" => Sense::Le,
                    _ => Sense::Eq,
                };
                let (neg, idx) = match body.get(i + 1) {
                    Some(&"-") => (-1.0, i + 2),
                    Some(&"+") => (1.0, i + 2),
                    _ => (1.0, i + 1),
                };
                let rhs = body.get(idx).and_then(|t| number(t)).ok_or_else(|| schema(format!("bad rhs in '{label}'")))?;
                relation = Some((sense, neg * rhs));
                if idx + 1 != body.len() {
                    return Err(schema(format!("trailing tokens in '{label}'")));
                }
                break;
            }
            _ => {
                if let Some(v) = number(tok) {
                    if coef.is_some() {
                        return Err(schema(format!("two coefficients in a row in '{label}'")));
                    }
                    coef = Some(v);
                } else {
                    let c = sign * coef.take().unwrap_or(1.0);
                    let p = names.get(tok);
                    if in_quad {
                        if body.get(i + 1) != Some(&"*") {
                            return Err(schema(format!("expected '*' after {tok} in '{label}'")));
                        }
                        let other = body.get(i + 2).ok_or_else(|| schema("dangling '*'"))?;
                        let q = names.get(other);
                        expr.quadratic.push((p, q, c));
                        i += 2;
                    } else {
                        expr.linear.push((p, c));
                    }
                    sign = 1.0;
                }
            }
        }
        i += 1;
    }
    if let Some(c) = coef {
        if c != 0.0 {
            return Err(schema(format!("constant term in '{label}'")));
        }
    }
    Ok(Statement { label, expr, relation })
}

fn parse_bound(tokens: &[&str], names: &mut Names, bounds: &mut HashMap<usize, (f64, f64)>) -> Result<usize> {
    let bad = || schema(format!("unrecognized bound '{}'", tokens.join(" ")));
    let num = |t: &str| number(t).ok_or_else(bad);
    let (var, lower, upper) = match tokens {
        [name, free] if free.eq_ignore_ascii_case("free") => (names.get(name), f64::NEG_INFINITY, f64::INFINITY),
        [lo, "<=", name, "<=", hi] => (names.get(name), num(lo)?, num(hi)?),
        [name, ">=", lo] => (names.get(name), num(lo)?, f64::INFINITY),
        [name, "<=", hi] => (names.get(name), 0.0, num(hi)?),
        [name, "=", v] => {
            let v = num(v)?;
            (names.get(name), v, v)
        }
        _ => return Err(bad()),
    };
    bounds.insert(var, (lower, upper));
    Ok(var)
}

/// Parses LP text produced by [`QuadProgram::to_lp_text`]. Variables are
/// ordered as listed in the bounds section, followed by any names that
/// appear only in rows (with the format's default bounds `[0, inf)`).
pub fn parse_lp_text(text: &str) -> Result<QuadProgram> {
    let mut section = Section::None;
    let mut chunks: Vec<(Section, Vec<&str>)> = Vec::new();
    for raw in text.lines() {
        let line = raw.split('\\').next().unwrap_or("");
        if let Some(s) = section_of(line) {
            section = s;
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.is_empty() {
            continue;
        }
        let starts_new = section == Section::Bounds || tokens[0].ends_with(':');
        match chunks.last_mut() {
            Some((s, toks)) if !starts_new && *s == section => toks.extend(tokens),
            _ => chunks.push((section, tokens)),
        }
    }

    let mut names = Names { index: HashMap::new(), order: Vec::new() };
    let mut objective = None;
    let mut constraints = Vec::new();
    let mut bounds = HashMap::new();
    let mut bound_order = Vec::new();
    for (sec, toks) in &chunks {
        match sec {
            Section::Objective => {
                let st = parse_statement(toks, &mut names)?;
                if st.relation.is_some() {
                    return Err(schema("objective carries a relation"));
                }
                objective = Some(st.expr);
            }
            Section::Rows => {
                let st = parse_statement(toks, &mut names)?;
                let (sense, rhs) = st.relation.ok_or_else(|| schema(format!("row '{}' has no relation", st.label)))?;
                constraints.push(Constraint { name: st.label, expr: st.expr, sense, rhs });
            }
            Section::Bounds => bound_order.push(parse_bound(toks, &mut names, &mut bounds)?),
            Section::None => return Err(schema("content outside of any section")),
        }
    }
    let objective = objective.ok_or_else(|| schema("missing objective"))?;

    // Renumber: bounds order first, then the rest in order of appearance.
    let mut new_index = vec![usize::MAX; names.order.len()];
    let mut variables = Vec::with_capacity(names.order.len());
    for old in bound_order.iter().copied().chain(0..names.order.len()) {
        if new_index[old] != usize::MAX {
            continue;
        }
        new_index[old] = variables.len();
        let (lower, upper) = bounds.get(&old).copied().unwrap_or((0.0, f64::INFINITY));
        variables.push(Variable { name: names.order[old].clone(), lower, upper });
    }
    let remap = |e: QuadExpr| QuadExpr {
        linear: e.linear.into_iter().map(|(j, c)| (new_index[j], c)).collect(),
        quadratic: e.quadratic.into_iter().map(|(p, q, c)| (new_index[p], new_index[q], c)).collect(),
    };
    Ok(QuadProgram {
        variables,
        objective: remap(objective),
        constraints: constraints
            .into_iter()
            .map(|c| Constraint { expr: remap(c.expr), ..c })
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_program() -> QuadProgram {
        let var = |name: &str, lower, upper| Variable { name: name.into(), lower, upper };
        QuadProgram {
            variables: vec![
                var("w_0_0", -1000.0, 1000.0),
                var("mu_0_0", f64::NEG_INFINITY, 0.0),
                var("d_0_0", 0.0, f64::INFINITY),
                var("d_0_1", f64::NEG_INFINITY, f64::INFINITY),
                var("g_0", 0.0, f64::INFINITY),
            ],
            objective: QuadExpr {
                linear: vec![(1, -0.1), (3, 1e-17)],
                quadratic: vec![(0, 2, 0.3), (0, 3, -1.0 / 3.0)],
            },
            constraints: vec![
                Constraint {
                    name: "dual_0_0".into(),
                    expr: QuadExpr { linear: vec![(1, 1.0)], quadratic: vec![(4, 0, 2.5)] },
                    sense: Sense::Eq,
                    rhs: -0.06666666666666667,
                },
                Constraint {
                    name: "primal_0_0".into(),
                    expr: QuadExpr { linear: vec![(2, -1.0), (3, -1.0), (4, 1.0)], quadratic: vec![] },
                    sense: Sense::Ge,
                    rhs: 0.0,
                },
            ],
        }
    }

    #[test]
    fn round_trip_is_exact() {
        let prog = sample_program();
        let text = write(&prog);
        assert!(text.contains("[ + 0.6 w_0_0 * d_0_0 - 0.6666666666666666 w_0_0 * d_0_1 ] / 2"));
        assert!(text.contains(" d_0_1 free"));
        assert!(text.contains(" -inf <= mu_0_0 <= 0"));
        assert_eq!(parse_lp_text(&text).unwrap(), prog);
    }

    #[test]
    fn long_rows_wrap_and_still_parse() {
        let mut prog = sample_program();
        let n = prog.variables.len();
        prog.constraints[1].expr.linear = (0..20).map(|t| (t % n, t as f64 + 0.5)).collect();
        let text = write(&prog);
        assert!(text.lines().count() > 12);
        assert_eq!(parse_lp_text(&text).unwrap(), prog);
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(parse_lp_text("Minimize\n obj: x\nSubject To\n r: x y >= \nEnd\n").is_err());
        assert!(parse_lp_text("Subject To\n r: x >= 1\nEnd\n").is_err());
    }
}
