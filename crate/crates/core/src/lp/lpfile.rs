//! Plain-text LP files in the common algebraic layout
//! (`Minimize` / `Subject To` / `Bounds` / `Binaries` / `Generals` / `End`).
//!
//! Output is deterministic: variables and rows appear in index order and
//! numbers use Rust's shortest round-trip formatting.

use std::fmt::Write as _;

use thiserror::Error;

use super::milp::MilpProblem;
use super::problem::{LpProblem, Sense};

#[derive(Debug, Error, PartialEq)]
pub enum LpFileError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing section {0}")]
    MissingSection(&'static str),
}

fn push_term(out: &mut String, first: bool, coef: f64, name: &str) {
    if coef < 0.0 {
        let _ = write!(out, " - {} {}", -coef, name);
    } else if first {
        let _ = write!(out, " {} {}", coef, name);
    } else {
        let _ = write!(out, " + {} {}", coef, name);
    }
}

fn fmt_bound(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Render `problem` with the given variable and row names.
pub fn write_lp(problem: &MilpProblem, var_names: &[String], row_names: &[String]) -> String {
    let lp = &problem.lp;
    assert_eq!(var_names.len(), lp.num_vars());
    assert_eq!(row_names.len(), lp.num_rows());
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, &c) in lp.obj.iter().enumerate() {
        if c != 0.0 {
            push_term(&mut out, first, c, &var_names[j]);
            first = false;
        }
    }
    if lp.obj_offset != 0.0 || first {
        if lp.obj_offset < 0.0 {
            let _ = write!(out, " - {}", -lp.obj_offset);
        } else if first {
            let _ = write!(out, " {}", lp.obj_offset);
        } else {
            let _ = write!(out, " + {}", lp.obj_offset);
        }
    }
    out.push_str("\nSubject To\n");
    for (row, name) in lp.rows.iter().zip(row_names) {
        let _ = write!(out, " {name}:");
        if row.coeffs.is_empty() {
            let _ = write!(
                out,
                " 0 {}",
                var_names.first().map(String::as_str).unwrap_or("x")
            );
        }
        for (k, &(j, a)) in row.coeffs.iter().enumerate() {
            push_term(&mut out, k == 0, a, &var_names[j]);
        }
        let _ = writeln!(out, " {} {}", row.sense.symbol(), row.rhs);
    }
    out.push_str("Bounds\n");
    for j in 0..lp.num_vars() {
        let (lo, hi) = (lp.lower[j], lp.upper[j]);
        if lo == f64::NEG_INFINITY && hi == f64::INFINITY {
            let _ = writeln!(out, " {} free", var_names[j]);
        } else {
            let _ = writeln!(
                out,
                " {} <= {} <= {}",
                fmt_bound(lo),
                var_names[j],
                fmt_bound(hi)
            );
        }
    }
    let binaries: Vec<&str> = (0..lp.num_vars())
        .filter(|&j| problem.integer[j] && lp.lower[j] == 0.0 && lp.upper[j] == 1.0)
        .map(|j| var_names[j].as_str())
        .collect();
    let generals: Vec<&str> = (0..lp.num_vars())
        .filter(|&j| problem.integer[j] && !(lp.lower[j] == 0.0 && lp.upper[j] == 1.0))
        .map(|j| var_names[j].as_str())
        .collect();
    if !binaries.is_empty() {
        out.push_str("Binaries\n");
        for name in binaries {
            let _ = writeln!(out, " {name}");
        }
    }
    if !generals.is_empty() {
        out.push_str("Generals\n");
        for name in generals {
            let _ = writeln!(out, " {name}");
        }
    }
    out.push_str("End\n");
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Objective,
    Constraints,
    Bounds,
    Binaries,
    Generals,
}

fn parse_num(tok: &str, line: usize) -> Result<f64, LpFileError> {
    match tok {
        "+inf" | "inf" | "+infinity" | "infinity" => Ok(f64::INFINITY),
        "-inf" | "-infinity" => Ok(f64::NEG_INFINITY),
        _ => tok.parse().map_err(|_| LpFileError::Parse {
            line,
            msg: format!("expected a number, found `{tok}`"),
        }),
    }
}

fn is_number(tok: &str) -> bool {
    tok.parse::<f64>().is_ok()
}

/// Parsed linear expression: terms plus a constant.
fn parse_expr(
    tokens: &[&str],
    line: usize,
    lookup: &mut dyn FnMut(&str) -> usize,
) -> Result<(Vec<(usize, f64)>, f64), LpFileError> {
    let mut terms: Vec<(usize, f64)> = Vec::new();
    let mut constant = 0.0;
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            t if is_number(t) => {
                if let Some(c) = coef {
                    constant += c;
                }
                coef = Some(sign * parse_num(t, line)?);
                sign = 1.0;
            }
            name => {
                let c = coef.take().unwrap_or(sign);
                sign = 1.0;
                let j = lookup(name);
                if let Some(entry) = terms.iter_mut().find(|(k, _)| *k == j) {
                    entry.1 += c;
                } else {
                    terms.push((j, c));
                }
            }
        }
    }
    if let Some(c) = coef {
        constant += c;
    }
    Ok((terms, constant))
}

/// Parsed LP file with its names.
#[derive(Debug, Clone, PartialEq)]
pub struct LpFile {
    pub problem: MilpProblem,
    pub var_names: Vec<String>,
    pub row_names: Vec<String>,
}

/// Read an LP file in the layout produced by [`write_lp`]. Variables default
/// to `[0, +inf)` unless listed in `Bounds`.
pub fn read_lp(text: &str) -> Result<LpFile, LpFileError> {
    let mut names: Vec<String> = Vec::new();
    let mut index = std::collections::HashMap::new();
    let mut lp = LpProblem::new();
    let mut row_names = Vec::new();
    let mut integer_names: Vec<(String, bool)> = Vec::new();
    let mut section = Section::None;
    let mut seen_objective = false;

    let mut lookup_or_add = |name: &str, lp: &mut LpProblem, names: &mut Vec<String>| -> usize {
        if let Some(&j) = index.get(name) {
            return j;
        }
        let j = lp.add_var(0.0, 0.0, f64::INFINITY);
        names.push(name.to_string());
        index.insert(name.to_string(), j);
        j
    };

    for (lineno, raw) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = raw.split('\\').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let lower = content.to_ascii_lowercase();
        match lower.as_str() {
            "minimize" | "minimise" | "min" => {
                section = Section::Objective;
                continue;
            }
            "subject to" | "st" | "s.t." => {
                section = Section::Constraints;
                continue;
            }
            "bounds" => {
                section = Section::Bounds;
                continue;
            }
            "binaries" | "binary" => {
                section = Section::Binaries;
                continue;
            }
            "generals" | "general" => {
                section = Section::Generals;
                continue;
            }
            "end" => break,
            _ => {}
        }
        let (label, body) = match content.find(':') {
            Some(pos) => (Some(content[..pos].trim()), content[pos + 1..].trim()),
            None => (None, content),
        };
        let tokens: Vec<&str> = body.split_whitespace().collect();
        match section {
            Section::None => {
                return Err(LpFileError::Parse {
                    line,
                    msg: "content before the objective section".into(),
                })
            }
            Section::Objective => {
                seen_objective = true;
                let mut lookup = |n: &str| lookup_or_add(n, &mut lp, &mut names);
                let (terms, constant) = parse_expr(&tokens, line, &mut lookup)?;
                for (j, c) in terms {
                    lp.obj[j] += c;
                }
                lp.obj_offset += constant;
            }
            Section::Constraints => {
                let pos = tokens
                    .iter()
                    .position(|t| matches!(*t, "<=" | ">=" | "=" | "=<" | "=>"))
                    .ok_or(LpFileError::Parse {
                        line,
                        msg: "constraint without relation".into(),
                    })?;
                let sense = match tokens[pos] {
                    "<=" | "=<" => Sense::Le,
                    ">=" | "=>" => Sense::Ge,
                    _ => Sense::Eq,
                };
                let rhs_tokens = &tokens[pos + 1..];
                let mut rhs = 0.0;
                let mut sign = 1.0;
                for t in rhs_tokens {
                    match *t {
                        "-" => sign = -1.0,
                        "+" => sign = 1.0,
                        t => rhs += sign * parse_num(t, line)?,
                    }
                }
                let mut lookup = |n: &str| lookup_or_add(n, &mut lp, &mut names);
                let (mut terms, constant) = parse_expr(&tokens[..pos], line, &mut lookup)?;
                terms.retain(|&(_, c)| c != 0.0);
                let name = label
                    .map(str::to_string)
                    .unwrap_or_else(|| format!("r{}", row_names.len()));
                row_names.push(name);
                lp.add_row(terms, sense, rhs - constant);
            }
            Section::Bounds => {
                if tokens.len() == 2 && tokens[1].eq_ignore_ascii_case("free") {
                    let j = lookup_or_add(tokens[0], &mut lp, &mut names);
                    lp.lower[j] = f64::NEG_INFINITY;
                    lp.upper[j] = f64::INFINITY;
                } else if tokens.len() == 5 && tokens[1] == "<=" && tokens[3] == "<=" {
                    let j = lookup_or_add(tokens[2], &mut lp, &mut names);
                    lp.lower[j] = parse_num(tokens[0], line)?;
                    lp.upper[j] = parse_num(tokens[4], line)?;
                } else if tokens.len() == 3 {
                    let j = lookup_or_add(tokens[0], &mut lp, &mut names);
                    let v = parse_num(tokens[2], line)?;
                    match tokens[1] {
                        "<=" => lp.upper[j] = v,
                        ">=" => lp.lower[j] = v,
                        "=" => {
                            lp.lower[j] = v;
                            lp.upper[j] = v;
                        }
                        other => {
                            return Err(LpFileError::Parse {
                                line,
                                msg: format!("unknown bound relation `{other}`"),
                            })
                        }
                    }
                } else {
                    return Err(LpFileError::Parse {
                        line,
                        msg: format!("unrecognised bound `{body}`"),
                    });
                }
            }
            Section::Binaries | Section::Generals => {
                for t in tokens {
                    integer_names.push((t.to_string(), section == Section::Binaries));
                }
            }
        }
    }
    if !seen_objective {
        return Err(LpFileError::MissingSection("Minimize"));
    }
    let mut integer = vec![false; lp.num_vars()];
    for (name, binary) in integer_names {
        let j = lookup_or_add(&name, &mut lp, &mut names);
        integer.resize(lp.num_vars(), false);
        integer[j] = true;
        if binary {
            lp.lower[j] = lp.lower[j].max(0.0);
            lp.upper[j] = lp.upper[j].min(1.0);
        }
    }
    integer.resize(lp.num_vars(), false);
    Ok(LpFile {
        problem: MilpProblem::new(lp, integer),
        var_names: names,
        row_names,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> (MilpProblem, Vec<String>, Vec<String>) {
        let mut lp = LpProblem::new();
        lp.add_var(-3.0, 0.0, 1.0);
        lp.add_var(-4.0, 0.0, 1.0);
        lp.add_var(0.5, f64::NEG_INFINITY, f64::INFINITY);
        lp.add_var(0.0, 0.0, f64::INFINITY);
        lp.obj_offset = 2.25;
        lp.add_row(vec![(0, 2.0), (1, 3.0)], Sense::Le, 4.0);
        lp.add_row(vec![(2, -1.0), (3, 1.0)], Sense::Eq, -0.125);
        lp.add_row(vec![(3, 1e-7)], Sense::Ge, 0.0);
        let names = vec!["x1".into(), "x2".into(), "f".into(), "r0".into()];
        let rows = vec!["knap".into(), "link".into(), "tiny".into()];
        (
            MilpProblem::new(lp, vec![true, true, false, false]),
            names,
            rows,
        )
    }

    #[test]
    fn write_then_read_preserves_the_model() {
        let (p, names, rows) = sample();
        let text = write_lp(&p, &names, &rows);
        let back = read_lp(&text).unwrap();
        assert_eq!(back.var_names, names);
        assert_eq!(back.row_names, rows);
        assert_eq!(back.problem, p);
        assert_eq!(
            write_lp(&back.problem, &back.var_names, &back.row_names),
            text
        );
    }

    #[test]
    fn layout_is_stable() {
        let (p, names, rows) = sample();
        let text = write_lp(&p, &names, &rows);
        assert!(text.starts_with("Minimize\n obj: - 3 x1 - 4 x2 + 0.5 f + 2.25\n"));
        assert!(text.contains(" knap: 2 x1 + 3 x2 <= 4\n"));
        assert!(text.contains(" f free\n"));
        assert!(text.contains("Binaries\n x1\n x2\n"));
    }

    #[test]
    fn missing_relation_is_reported() {
        let err = read_lp("Minimize\n obj: x\nSubject To\n c: x 3\nEnd\n").unwrap_err();
        assert!(matches!(err, LpFileError::Parse { line: 4, .. }));
    }
}
