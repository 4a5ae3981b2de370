//! Minimal LP and fixed-MPS readers, enough to read back what the writers emit.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Continuous,
    Integer,
    Binary,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub name: String,
    pub sense: String,
    pub terms: BTreeMap<String, f64>,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Parsed {
    pub objective: BTreeMap<String, f64>,
    pub rows: Vec<Row>,
    /// name -> (kind, lower, upper)
    pub columns: BTreeMap<String, (Kind, f64, f64)>,
}

fn num(s: &str) -> f64 {
    match s {
        "inf" | "+inf" | "infinity" => f64::INFINITY,
        "-inf" | "-infinity" => f64::NEG_INFINITY,
        _ => s.parse().unwrap_or_else(|_| panic!("bad number {s:?}")),
    }
}

/// Parses `[+|-] coef name ...` into a term map.
fn terms(tokens: &[&str], into: &mut BTreeMap<String, f64>) {
    let mut sign = 1.0;
    let mut coef: Option<f64> = None;
    for &tok in tokens {
        match tok {
            "+" => sign = 1.0,
            "-" => sign = -1.0,
            _ => match tok.parse::<f64>() {
                Ok(c) => coef = Some(c),
                Err(_) => {
                    *into.entry(tok.to_string()).or_insert(0.0) += sign * coef.unwrap_or(1.0);
                    sign = 1.0;
                    coef = None;
                }
            },
        }
    }
}

pub fn read_lp(text: &str) -> Parsed {
    let mut out = Parsed::default();
    let mut section = "";
    let mut pending: Vec<String> = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let finish_row = |pending: &mut Vec<String>, out: &mut Parsed, section: &str| {
        if pending.is_empty() {
            return;
        }
        let joined = pending.join(" ");
        pending.clear();
        let (name, body) = joined.split_once(':').expect("row label");
        let tokens: Vec<&str> = body.split_whitespace().collect();
        if section == "obj" {
            terms(&tokens, &mut out.objective);
            return;
        }
        let s = tokens
            .iter()
            .position(|t| matches!(*t, "<=" | ">=" | "="))
            .expect("sense");
        let mut row = Row {
            name: name.trim().to_string(),
            sense: tokens[s].to_string(),
            terms: BTreeMap::new(),
            rhs: num(tokens[s + 1]),
        };
        terms(&tokens[..s], &mut row.terms);
        row.terms.retain(|_, c| *c != 0.0);
        out.rows.push(row);
    };
    for line in text.lines() {
        if line.starts_with('\\') {
            continue;
        }
        let header = match line.trim() {
            "Minimize" => Some("obj"),
            "Subject To" => Some("rows"),
            "Bounds" => Some("bounds"),
            "Generals" => Some("generals"),
            "Binaries" => Some("binaries"),
            "End" => Some("end"),
            _ => None,
        };
        if let Some(h) = header {
            finish_row(&mut pending, &mut out, section);
            section = h;
            continue;
        }
        match section {
            "obj" | "rows" => {
                // continuation lines start with two spaces; new rows with one and a label
                if !line.starts_with("  ") {
                    finish_row(&mut pending, &mut out, section);
                }
                pending.push(line.trim().to_string());
                if section == "rows" {
                    names.extend(
                        line.split_whitespace()
                            .filter(|t| {
                                t.parse::<f64>().is_err()
                                    && !matches!(*t, "+" | "-" | "<=" | ">=" | "=")
                                    && !t.ends_with(':')
                            })
                            .map(String::from),
                    );
                }
            }
            "bounds" => {
                let t: Vec<&str> = line.split_whitespace().collect();
                let (name, lo, hi) = match t.as_slice() {
                    [n, "=", v] => (*n, num(v), num(v)),
                    [n, "free"] => (*n, f64::NEG_INFINITY, f64::INFINITY),
                    [n, ">=", v] => (*n, num(v), f64::INFINITY),
                    [lo, "<=", n, "<=", hi] => (*n, num(lo), num(hi)),
                    _ => panic!("bad bound line {line:?}"),
                };
                out.columns
                    .insert(name.to_string(), (Kind::Continuous, lo, hi));
            }
            "generals" | "binaries" => {
                for n in line.split_whitespace() {
                    let kind = if section == "generals" {
                        Kind::Integer
                    } else {
                        Kind::Binary
                    };
                    let e = out.columns.entry(n.to_string()).or_insert((
                        kind,
                        0.0,
                        if kind == Kind::Binary {
                            1.0
                        } else {
                            f64::INFINITY
                        },
                    ));
                    e.0 = kind;
                }
            }
            _ => {}
        }
    }
    for n in names
        .into_iter()
        .chain(out.objective.keys().cloned().collect::<Vec<_>>())
    {
        out.columns
            .entry(n)
            .or_insert((Kind::Continuous, 0.0, f64::INFINITY));
    }
    out.objective.retain(|_, c| *c != 0.0);
    out
}

/// Reads fixed MPS; `codes` maps shortened names back to full ones.
pub fn read_mps(text: &str, codes: &[(String, String)]) -> Parsed {
    let full = |s: &str| {
        codes
            .iter()
            .find(|(c, _)| c == s)
            .map_or(s.to_string(), |(_, n)| n.clone())
    };
    let mut out = Parsed::default();
    let mut row_index: BTreeMap<String, usize> = BTreeMap::new();
    let mut section = "";
    let mut integer = false;
    for line in text.lines() {
        if !line.starts_with(' ') {
            section = line.split_whitespace().next().unwrap_or("");
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        match section {
            "ROWS" => {
                if f[0] != "N" {
                    let sense = match f[0] {
                        "L" => "<=",
                        "G" => ">=",
                        _ => "=",
                    };
                    row_index.insert(f[1].to_string(), out.rows.len());
                    out.rows.push(Row {
                        name: full(f[1]),
                        sense: sense.into(),
                        terms: BTreeMap::new(),
                        rhs: 0.0,
                    });
                }
            }
            "COLUMNS" => {
                if f.get(1) == Some(&"'MARKER'") {
                    integer = f[2] == "'INTORG'";
                    continue;
                }
                let col = full(f[0]);
                let kind = if integer {
                    Kind::Integer
                } else {
                    Kind::Continuous
                };
                out.columns
                    .entry(col.clone())
                    .or_insert((kind, 0.0, f64::INFINITY));
                for pair in f[1..].chunks(2) {
                    let v = num(pair[1]);
                    if pair[0] == "COST" {
                        if v != 0.0 {
                            out.objective.insert(col.clone(), v);
                        }
                    } else {
                        out.rows[row_index[pair[0]]].terms.insert(col.clone(), v);
                    }
                }
            }
            "RHS" => {
                for pair in f[1..].chunks(2) {
                    out.rows[row_index[pair[0]]].rhs = num(pair[1]);
                }
            }
            "BOUNDS" => {
                let col = full(f[2]);
                let e = out
                    .columns
                    .get_mut(&col)
                    .expect("bounded column is declared");
                match f[0] {
                    "BV" => *e = (Kind::Binary, 0.0, 1.0),
                    "FX" => (e.1, e.2) = (num(f[3]), num(f[3])),
                    "FR" => (e.1, e.2) = (f64::NEG_INFINITY, f64::INFINITY),
                    "MI" => e.1 = f64::NEG_INFINITY,
                    "LO" => e.1 = num(f[3]),
                    "UP" => e.2 = num(f[3]),
                    "PL" => e.2 = f64::INFINITY,
                    other => panic!("unknown bound type {other}"),
                }
            }
            _ => {}
        }
    }
    out
}
