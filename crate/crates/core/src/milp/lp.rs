//! CPLEX LP text format.

use std::fmt::Write;

use super::{fmt_num, MilpError, MilpModel, VarId, VarKind};

const LINE_WIDTH: usize = 250;

/// Writes the model as CPLEX LP text. Variables and rows keep insertion order.
pub fn export_lp(model: &MilpModel) -> Result<String, MilpError> {
    model.check()?;
    let vars = model.variables();
    let mut out = String::new();
    let _ = writeln!(out, "\\ Problem: {}", model.name);
    out.push_str("Minimize\n");
    let mut line = String::from(" obj:");
    if model.objective().is_empty() && !vars.is_empty() {
        line.push_str(&format!(" 0 {}", vars[0].name));
    }
    push_terms(&mut out, &mut line, model, model.objective());
    out.push_str(&line);
    out.push('\n');

    out.push_str("Subject To\n");
    for c in model.constraints() {
        let mut line = format!(" {}:", c.name);
        if c.terms.is_empty() {
            // a row with no variables still has to name one
            if let Some(v) = vars.first() {
                line.push_str(&format!(" 0 {}", v.name));
            }
        }
        push_terms(&mut out, &mut line, model, &c.terms);
        push_token(
            &mut out,
            &mut line,
            &format!("{} {}", c.sense.symbol(), fmt_num(c.rhs)),
        );
        out.push_str(&line);
        out.push('\n');
    }

    out.push_str("Bounds\n");
    for v in vars {
        let default = match v.kind {
            VarKind::Binary => v.lower == 0.0 && v.upper == 1.0,
            _ => v.lower == 0.0 && v.upper == f64::INFINITY,
        };
        if default {
            continue;
        }
        if v.lower == v.upper {
            let _ = writeln!(out, " {} = {}", v.name, fmt_num(v.lower));
        } else if v.upper == f64::INFINITY {
            if v.lower == f64::NEG_INFINITY {
                let _ = writeln!(out, " {} free", v.name);
            } else {
                let _ = writeln!(out, " {} >= {}", v.name, fmt_num(v.lower));
            }
        } else {
            let lo = if v.lower == f64::NEG_INFINITY {
                "-inf".to_string()
            } else {
                fmt_num(v.lower)
            };
            let _ = writeln!(out, " {lo} <= {} <= {}", v.name, fmt_num(v.upper));
        }
    }
    section(
        &mut out,
        "Generals",
        vars.iter()
            .filter(|v| v.kind == VarKind::Integer)
            .map(|v| v.name.as_str()),
    );
    section(
        &mut out,
        "Binaries",
        vars.iter()
            .filter(|v| v.kind == VarKind::Binary)
            .map(|v| v.name.as_str()),
    );
    out.push_str("End\n");
    Ok(out)
}

fn push_terms(out: &mut String, line: &mut String, model: &MilpModel, terms: &[(VarId, f64)]) {
    for (k, &(v, c)) in terms.iter().enumerate() {
        let name = &model.var(v).name;
        let token = if c < 0.0 {
            format!("- {} {name}", fmt_num(-c))
        } else if k == 0 {
            format!("{} {name}", fmt_num(c))
        } else {
            format!("+ {} {name}", fmt_num(c))
        };
        push_token(out, line, &token);
    }
}

fn push_token(out: &mut String, line: &mut String, token: &str) {
    if line.len() + 1 + token.len() > LINE_WIDTH {
        out.push_str(line);
        out.push('\n');
        line.clear();
        line.push_str("  ");
    } else {
        line.push(' ');
    }
    line.push_str(token);
}

fn section<'a>(out: &mut String, title: &str, names: impl Iterator<Item = &'a str>) {
    let names: Vec<&str> = names.collect();
    if names.is_empty() {
        return;
    }
    out.push_str(title);
    out.push('\n');
    let mut line = String::new();
    for n in names {
        if !line.is_empty() && line.len() + 1 + n.len() > LINE_WIDTH {
            out.push_str(&line);
            out.push('\n');
            line.clear();
        }
        line.push(' ');
        line.push_str(n);
    }
    out.push_str(&line);
    out.push('\n');
}
