//! CPLEX LP text for models and the plain solution-file format used by the
//! subprocess adapter.
//!
//! Variables are named `x_u_v` with `u < v`. A solution file holds one
//! `name value` pair per line, an `=obj= value` line, and optionally a
//! `=status= optimal|infeasible|limit` line. Variables missing from the file
//! are zero; blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;

use super::SolveStatus;
use crate::error::{Error, Result};
use crate::instances::{edge_count, edge_endpoints, edge_idx};
use crate::model::{IlpModel, LinearConstraint, Sense};

const TERMS_PER_LINE: usize = 8;

pub fn var_name(idx: usize) -> String {
    let (u, v) = edge_endpoints(idx);
    format!("x_{u}_{v}")
}

/// Inverse of [`var_name`].
pub fn parse_var_name(name: &str) -> Option<(usize, usize)> {
    let rest = name.strip_prefix("x_")?;
    let (u, v) = rest.split_once('_')?;
    let u: usize = u.parse().ok()?;
    let v: usize = v.parse().ok()?;
    (u < v).then_some((u, v))
}

fn write_terms(out: &mut String, terms: impl Iterator<Item = (usize, i64)>) {
    for (k, (e, c)) in terms.enumerate() {
        if k > 0 && k % TERMS_PER_LINE == 0 {
            out.push_str("\n   ");
        }
        let sign = if c < 0 { '-' } else { '+' };
        if k == 0 && c >= 0 {
            let _ = write!(out, " {} {}", c, var_name(e));
        } else {
            let _ = write!(out, " {sign} {} {}", c.abs(), var_name(e));
        }
    }
}

pub fn write_lp(model: &IlpModel) -> String {
    let mut out = String::new();
    let title: String = model.name.chars().filter(|c| !c.is_control()).collect();
    let _ = writeln!(out, "\\Problem name: {title}");
    out.push_str("Minimize\n obj:");
    write_terms(&mut out, model.objective().iter().copied().enumerate());
    out.push_str("\nSubject To\n");
    for row in model.rows() {
        let _ = write!(out, " {}:", row.name);
        write_terms(&mut out, row.terms.iter().copied());
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Binary\n");
    for e in 0..model.m() {
        let sep = if (e + 1) % TERMS_PER_LINE == 0 || e + 1 == model.m() {
            "\n"
        } else {
            ""
        };
        let _ = write!(out, " {}{sep}", var_name(e));
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, PartialEq)]
enum Section {
    Preamble,
    Objective,
    Constraints,
    Binary,
    End,
}

fn lp_err(line: usize, msg: impl Into<String>) -> Error {
    Error::parse(line, msg)
}

/// Parses a linear expression given as tokens into terms over edge indices.
fn parse_expr(tokens: &[(usize, String)]) -> Result<Vec<(usize, i64)>> {
    let mut terms = Vec::new();
    let mut sign = 1i64;
    let mut coef: Option<i64> = None;
    for (line, tok) in tokens {
        match tok.as_str() {
            "+" => sign = 1,
            "-" => sign = -1,
            t => {
                if let Ok(c) = t.parse::<i64>() {
                    if coef.is_some() {
                        return Err(lp_err(*line, format!("two coefficients in a row at '{t}'")));
                    }
                    coef = Some(c);
                } else {
                    let (u, v) =
                        parse_var_name(t).ok_or_else(|| lp_err(*line, format!("unknown variable '{t}'")))?;
                    terms.push((edge_idx(u, v), sign * coef.take().unwrap_or(1)));
                    sign = 1;
                }
            }
        }
    }
    if coef.is_some() {
        return Err(Error::structure("dangling coefficient in expression"));
    }
    Ok(terms)
}

fn parse_row(name: String, tokens: &[(usize, String)]) -> Result<LinearConstraint> {
    let pos = tokens
        .iter()
        .position(|(_, t)| matches!(t.as_str(), "<=" | ">=" | "=" | "=<" | "=>"))
        .ok_or_else(|| Error::structure(format!("row {name} has no relation")))?;
    let sense = match tokens[pos].1.as_str() {
        "<=" | "=<" => Sense::Le,
        ">=" | "=>" => Sense::Ge,
        _ => Sense::Eq,
    };
    let rhs_tokens = &tokens[pos + 1..];
    let rhs = match rhs_tokens {
        [(line, t)] => t
            .parse::<i64>()
            .map_err(|_| lp_err(*line, format!("bad right-hand side '{t}'")))?,
        [(_, s), (line, t)] if s == "-" => -t
            .parse::<i64>()
            .map_err(|_| lp_err(*line, format!("bad right-hand side '{t}'")))?,
        _ => {
            return Err(Error::structure(format!(
                "row {name} has a malformed right-hand side"
            )))
        }
    };
    Ok(LinearConstraint::new(
        name,
        parse_expr(&tokens[..pos])?,
        sense,
        rhs,
    ))
}

/// Tokens with their line numbers.
type Tokens = Vec<(usize, String)>;

/// Splits a section's tokens at `name:` labels.
fn split_rows(tokens: Tokens) -> Result<Vec<(String, Tokens)>> {
    let mut rows: Vec<(String, Tokens)> = Vec::new();
    for (line, tok) in tokens {
        if let Some(label) = tok.strip_suffix(':') {
            rows.push((label.to_string(), Vec::new()));
        } else {
            match rows.last_mut() {
                Some(row) => row.1.push((line, tok)),
                None => return Err(lp_err(line, "expression before any row label")),
            }
        }
    }
    Ok(rows)
}

/// Reads LP text in the subset produced by [`write_lp`].
pub fn read_lp(text: &str) -> Result<IlpModel> {
    let mut name = String::new();
    let mut section = Section::Preamble;
    let mut obj_tokens = Vec::new();
    let mut row_tokens = Vec::new();
    let mut binaries = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if let Some(comment) = trimmed.strip_prefix('\\') {
            if let Some(title) = comment.trim().strip_prefix("Problem name:") {
                name = title.trim().to_string();
            }
            continue;
        }
        if trimmed.is_empty() {
            continue;
        }
        let next = match trimmed.to_ascii_lowercase().as_str() {
            "minimize" | "minimum" | "min" => Some(Section::Objective),
            "subject to" | "st" | "s.t." => Some(Section::Constraints),
            "binary" | "binaries" | "bin" => Some(Section::Binary),
            "end" => Some(Section::End),
            _ => None,
        };
        if let Some(s) = next {
            section = s;
            continue;
        }
        let tokens = trimmed.split_whitespace().map(|t| (line, t.to_string()));
        match section {
            Section::Preamble => return Err(lp_err(line, "content before 'Minimize'")),
            Section::Objective => obj_tokens.extend(tokens),
            Section::Constraints => row_tokens.extend(tokens),
            Section::Binary => binaries.extend(tokens),
            Section::End => return Err(lp_err(line, "content after 'End'")),
        }
    }
    if section != Section::End {
        return Err(Error::structure("LP text does not end with 'End'"));
    }

    let mut n = 0;
    for (line, b) in &binaries {
        let (_, v) = parse_var_name(b).ok_or_else(|| lp_err(*line, format!("bad binary '{b}'")))?;
        n = n.max(v + 1);
    }
    if n < 3 || binaries.len() != edge_count(n) {
        return Err(Error::structure(format!(
            "{} binaries do not cover the complete graph on {n} vertices",
            binaries.len()
        )));
    }

    let objective_rows = split_rows(obj_tokens)?;
    let [(_, obj_expr)] = objective_rows.as_slice() else {
        return Err(Error::structure("objective must be a single labelled expression"));
    };
    let mut objective = vec![0i64; edge_count(n)];
    for (e, c) in parse_expr(obj_expr)? {
        if e >= objective.len() {
            return Err(Error::structure(format!(
                "objective references undeclared {}",
                var_name(e)
            )));
        }
        objective[e] += c;
    }

    let mut degree_rows = Vec::new();
    let mut sec_rows = Vec::new();
    for (label, tokens) in split_rows(row_tokens)? {
        let is_degree = label
            .strip_prefix('d')
            .is_some_and(|r| r.parse::<usize>().is_ok());
        let row = parse_row(label, &tokens)?;
        if is_degree {
            degree_rows.push(row);
        } else {
            sec_rows.push(row);
        }
    }
    IlpModel::from_parts(name, n, objective, degree_rows, sec_rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParsedSolution {
    pub status: Option<SolveStatus>,
    pub objective: Option<f64>,
    /// Edge indices with value one, sorted.
    pub chosen: Vec<usize>,
}

fn status_label(status: SolveStatus) -> &'static str {
    match status {
        SolveStatus::Optimal => "optimal",
        SolveStatus::Infeasible => "infeasible",
        SolveStatus::LimitReached => "limit",
    }
}

pub fn parse_solution(text: &str, m: usize) -> Result<ParsedSolution> {
    let mut status = None;
    let mut objective = None;
    let mut chosen = Vec::new();
    for (k, raw) in text.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed.split_whitespace();
        let (Some(key), Some(value), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(lp_err(line, format!("expected 'name value', got '{trimmed}'")));
        };
        match key {
            "=status=" => {
                status = Some(match value {
                    "optimal" => SolveStatus::Optimal,
                    "infeasible" => SolveStatus::Infeasible,
                    "limit" => SolveStatus::LimitReached,
                    other => return Err(lp_err(line, format!("unknown status '{other}'"))),
                })
            }
            "=obj=" => {
                let v: f64 = value
                    .parse()
                    .map_err(|_| lp_err(line, format!("bad objective '{value}'")))?;
                objective = Some(v);
            }
            var => {
                let (u, v) =
                    parse_var_name(var).ok_or_else(|| lp_err(line, format!("unknown variable '{var}'")))?;
                let idx = edge_idx(u, v);
                if idx >= m {
                    return Err(lp_err(line, format!("variable '{var}' outside the model")));
                }
                let x: f64 = value
                    .parse()
                    .map_err(|_| lp_err(line, format!("bad value '{value}'")))?;
                let r = x.round();
                if (x - r).abs() > 1e-6 || !(r == 0.0 || r == 1.0) {
                    return Err(lp_err(line, format!("'{var}' is not binary: {value}")));
                }
                if r == 1.0 {
                    chosen.push(idx);
                }
            }
        }
    }
    chosen.sort_unstable();
    chosen.dedup();
    Ok(ParsedSolution {
        status,
        objective,
        chosen,
    })
}

/// Solution text for a solve result; only chosen variables are listed.
pub fn write_solution(status: SolveStatus, objective: Option<i64>, chosen: &[usize]) -> String {
    let mut out = format!("=status= {}\n", status_label(status));
    if let Some(obj) = objective {
        let _ = writeln!(out, "=obj= {obj}");
    }
    for &e in chosen {
        let _ = writeln!(out, "{} 1", var_name(e));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{gen_random_euclidean, Instance, Source};
    use crate::model::{build_base_model, SecForm};

    #[test]
    fn triangle_lp_shape() {
        let tri = Instance::from_weights("tri", Source::Explicit, 3, vec![3, 4, 5], None).unwrap();
        let text = write_lp(&build_base_model(&tri));
        assert!(text.contains("Minimize\n obj: 3 x_0_1 + 4 x_0_2 + 5 x_1_2\n"));
        assert!(text.contains(" d0: 1 x_0_1 + 1 x_0_2 = 2\n"));
        assert!(text.contains("Binary\n x_0_1 x_0_2 x_1_2\nEnd\n"));
        assert_eq!(
            text.lines().filter(|l| l.trim_start().starts_with('d')).count(),
            3
        );
    }

    #[test]
    fn round_trip_all_forms() {
        let inst = gen_random_euclidean(11, 4).unwrap();
        let mut model = build_base_model(&inst);
        model.add_sec(&[0, 1, 2], SecForm::Packing).unwrap();
        model.add_sec(&[3, 4, 5, 6, 7, 8, 9], SecForm::Cut).unwrap();
        model.add_sec(&[1, 2, 3, 4, 5, 6, 7, 8], SecForm::Hybrid).unwrap();
        let text = write_lp(&model);
        assert_eq!(text, write_lp(&model));
        let back = read_lp(&text).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn reader_rejects_garbage() {
        assert!(read_lp("Minimize\n obj: 1 x_0_1\nEnd\n").is_err());
        assert!(read_lp("hello\n").is_err());
        let tri = Instance::from_weights("tri", Source::Explicit, 3, vec![3, 4, 5], None).unwrap();
        let text = write_lp(&build_base_model(&tri)).replace("End\n", "");
        assert!(read_lp(&text).is_err());
    }

    #[test]
    fn solution_values_are_rounded() {
        let sol = parse_solution("=obj= 12\nx_0_1 0.9999999\nx_0_2 1\nx_1_2 1e-9\n", 3).unwrap();
        assert_eq!(sol.chosen, vec![0, 1]);
        assert_eq!(sol.objective, Some(12.0));
        assert!(parse_solution("x_0_1 0.5\n", 3).is_err());
        assert!(parse_solution("x_0_9 1\n", 3).is_err());
        assert!(parse_solution("y 1\n", 3).is_err());
    }

    #[test]
    fn solution_round_trip() {
        let text = write_solution(SolveStatus::Optimal, Some(12), &[0, 1, 2]);
        let sol = parse_solution(&text, 3).unwrap();
        assert_eq!(sol.status, Some(SolveStatus::Optimal));
        assert_eq!(sol.chosen, vec![0, 1, 2]);
    }
}
