//! Text formats for instances and solutions.
//!
//! Instance files:
//!
//! ```text
//! # optional comment lines anywhere
//! MWIS <n> <m>
//! <n whitespace-separated costs>
//! <m lines, one clique each: 0-based node indices>
//! ```
//!
//! Solution files hold `VALUE <objective>` followed by the selected node
//! indices in ascending order.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{ParseError, Result};
use crate::instance::ProblemInstance;

struct Token<'a> {
    text: &'a str,
    column: usize,
}

fn tokens(line: &str) -> Vec<Token<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Token {
                    text: &line[s..pos],
                    column: s + 1,
                });
            }
        } else if start.is_none() {
            start = Some(pos);
        }
    }
    if let Some(s) = start {
        out.push(Token {
            text: &line[s..],
            column: s + 1,
        });
    }
    out
}

/// Lines that carry content, paired with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(k, line)| {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            None
        } else {
            Some((k + 1, line))
        }
    })
}

fn err(line: usize, column: usize, message: impl Into<String>) -> ParseError {
    ParseError {
        line,
        column,
        message: message.into(),
    }
}

fn parse_usize(tok: &Token<'_>, line: usize, what: &str) -> Result<usize, ParseError> {
    tok.text.parse().map_err(|_| {
        err(
            line,
            tok.column,
            format!("expected {what}, found `{}`", tok.text),
        )
    })
}

fn parse_cost(tok: &Token<'_>, line: usize) -> Result<f64, ParseError> {
    match tok.text.parse::<f64>() {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(err(
            line,
            tok.column,
            format!("expected a finite cost, found `{}`", tok.text),
        )),
    }
}

/// Parses the instance grammar. The edge set is the union of clique pairs.
pub fn parse_instance(text: &str) -> Result<ProblemInstance, ParseError> {
    let mut lines = content_lines(text);
    let (hline, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing `MWIS <n> <m>` header"))?;
    let htoks = tokens(header);
    if htoks.len() != 3 || htoks[0].text != "MWIS" {
        return Err(err(hline, 1, "expected header `MWIS <n> <m>`"));
    }
    let n = parse_usize(&htoks[1], hline, "node count")?;
    let m = parse_usize(&htoks[2], hline, "clique count")?;

    let mut costs = Vec::with_capacity(n);
    let mut last_line = hline;
    if n > 0 {
        let (cline, cost_line) = lines
            .next()
            .ok_or_else(|| err(hline + 1, 1, format!("expected {n} costs")))?;
        last_line = cline;
        let ctoks = tokens(cost_line);
        if ctoks.len() != n {
            let column = ctoks.get(n).map_or(cost_line.len() + 1, |t| t.column);
            return Err(err(
                cline,
                column,
                format!("expected {n} costs, found {}", ctoks.len()),
            ));
        }
        for tok in &ctoks {
            costs.push(parse_cost(tok, cline)?);
        }
    }

    let mut cliques = Vec::with_capacity(m);
    for (lno, line) in lines {
        if cliques.len() == m {
            return Err(err(lno, 1, format!("more than the declared {m} cliques")));
        }
        let mut clique = Vec::new();
        for tok in tokens(line) {
            let i = parse_usize(&tok, lno, "node index")?;
            if i >= n {
                return Err(err(
                    lno,
                    tok.column,
                    format!("node index {i} out of range for n = {n}"),
                ));
            }
            clique.push(i);
        }
        cliques.push(clique);
        last_line = lno;
    }
    if cliques.len() != m {
        return Err(err(
            last_line + 1,
            1,
            format!("expected {m} cliques, found {}", cliques.len()),
        ));
    }
    Ok(ProblemInstance::from_cliques(costs, cliques))
}

/// Serializes an instance. Costs use the shortest representation that
/// parses back to the same `f64`.
pub fn format_instance(instance: &ProblemInstance) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "MWIS {} {}",
        instance.node_count(),
        instance.clique_count()
    );
    if instance.node_count() > 0 {
        let costs: Vec<String> = instance.costs().iter().map(|c| c.to_string()).collect();
        let _ = writeln!(out, "{}", costs.join(" "));
    }
    for clique in instance.cliques() {
        let ids: Vec<String> = clique.iter().map(usize::to_string).collect();
        let _ = writeln!(out, "{}", ids.join(" "));
    }
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<ProblemInstance> {
    let text = fs::read_to_string(path)?;
    Ok(parse_instance(&text)?)
}

pub fn write_instance(path: impl AsRef<Path>, instance: &ProblemInstance) -> Result<()> {
    fs::write(path, format_instance(instance))?;
    Ok(())
}

/// Objective value and selected nodes as stored in a solution file.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub value: f64,
    pub selected: Vec<usize>,
}

pub fn format_solution(value: f64, selected: &[usize]) -> String {
    let mut sorted = selected.to_vec();
    sorted.sort_unstable();
    let ids: Vec<String> = sorted.iter().map(usize::to_string).collect();
    format!("VALUE {value}\n{}\n", ids.join(" "))
}

pub fn parse_solution(text: &str) -> Result<SolutionFile, ParseError> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim_start().starts_with('#'));
    let (k, header) = lines
        .next()
        .ok_or_else(|| err(1, 1, "missing `VALUE <objective>` line"))?;
    let htoks = tokens(header);
    if htoks.len() != 2 || htoks[0].text != "VALUE" {
        return Err(err(k + 1, 1, "expected `VALUE <objective>`"));
    }
    let value = parse_cost(&htoks[1], k + 1)?;
    let mut selected = Vec::new();
    if let Some((k, line)) = lines.next() {
        for tok in tokens(line) {
            selected.push(parse_usize(&tok, k + 1, "node index")?);
        }
    }
    if let Some((k, line)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        let column = tokens(line).first().map_or(1, |t| t.column);
        return Err(err(
            k + 1,
            column,
            "unexpected content after the selection line",
        ));
    }
    if selected.windows(2).any(|w| w[0] >= w[1]) {
        return Err(err(2, 1, "selected indices must be strictly ascending"));
    }
    Ok(SolutionFile { value, selected })
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionFile> {
    let text = fs::read_to_string(path)?;
    Ok(parse_solution(&text)?)
}

pub fn write_solution(path: impl AsRef<Path>, value: f64, selected: &[usize]) -> Result<()> {
    fs::write(path, format_solution(value, selected))?;
    Ok(())
}
