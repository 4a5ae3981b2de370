//! Fixed-field MPS format.
//!
//! Fixed MPS allows names of at most eight characters. Longer names are
//! replaced by index codes (`#C` or `#R` followed by six base-36 digits); the
//! returned [`MpsExport::name_map`] maps every code back to its full name.

use std::fmt::Write;

use super::{fmt_num, MilpError, MilpModel, VarKind};

const NAME_LIMIT: usize = 8;
const NUMBER_WIDTH: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct MpsExport {
    pub text: String,
    /// `(code, full name)` for every shortened name, columns first.
    pub name_map: Vec<(String, String)>,
}

impl MpsExport {
    /// Sidecar file content: one `code<TAB>name` pair per line.
    pub fn name_map_text(&self) -> String {
        self.name_map
            .iter()
            .map(|(c, n)| format!("{c}\t{n}\n"))
            .collect()
    }
}

fn base36(mut k: usize) -> String {
    const DIGITS: &[u8] = b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZ";
    let mut s = [b'0'; 6];
    for slot in s.iter_mut().rev() {
        *slot = DIGITS[k % 36];
        k /= 36;
    }
    String::from_utf8(s.to_vec()).expect("ascii")
}

fn short_name(name: &str, prefix: char, index: usize, map: &mut Vec<(String, String)>) -> String {
    if name.len() <= NAME_LIMIT && !name.starts_with('#') && !name.contains(char::is_whitespace) {
        name.to_string()
    } else {
        let code = format!("#{prefix}{}", base36(index));
        map.push((code.clone(), name.to_string()));
        code
    }
}

/// Shortest decimal text of at most twelve characters.
fn mps_num(x: f64) -> String {
    let s = fmt_num(x);
    if s.len() <= NUMBER_WIDTH {
        return s;
    }
    for digits in (0..=10).rev() {
        let s = format!("{x:.digits$e}");
        if s.len() <= NUMBER_WIDTH {
            return s;
        }
    }
    format!("{x:.0e}")
}

fn field_line(out: &mut String, f1: &str, f2: &str, f3: &str, f4: &str, f5: &str, f6: &str) {
    // columns 2-3, 5-12, 15-22, 25-36, 40-47, 50-61
    let mut line = format!(" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}");
    if !f5.is_empty() {
        let _ = write!(line, "   {f5:<8}  {f6:>12}");
    }
    out.push_str(line.trim_end());
    out.push('\n');
}

pub fn export_mps(model: &MilpModel) -> Result<MpsExport, MilpError> {
    model.check()?;
    let mut name_map = Vec::new();
    let cols: Vec<String> = model
        .variables()
        .iter()
        .enumerate()
        .map(|(k, v)| short_name(&v.name, 'C', k, &mut name_map))
        .collect();
    let rows: Vec<String> = model
        .constraints()
        .iter()
        .enumerate()
        .map(|(k, c)| short_name(&c.name, 'R', k, &mut name_map))
        .collect();

    let mut out = String::new();
    let _ = writeln!(
        out,
        "NAME          {}",
        model
            .name
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
    );
    out.push_str("ROWS\n");
    out.push_str(" N  COST\n");
    for (c, name) in model.constraints().iter().zip(&rows) {
        let t = match c.sense {
            super::Sense::Le => "L",
            super::Sense::Ge => "G",
            super::Sense::Eq => "E",
        };
        let _ = writeln!(out, " {t}  {name}");
    }

    // column-major coefficient lists
    let mut entries: Vec<Vec<(usize, f64)>> = vec![Vec::new(); cols.len()];
    for (r, c) in model.constraints().iter().enumerate() {
        for &(v, k) in &c.terms {
            entries[v.0].push((r, k));
        }
    }
    let mut cost = vec![0.0; cols.len()];
    for &(v, k) in model.objective() {
        cost[v.0] = k;
    }

    out.push_str("COLUMNS\n");
    let mut in_int = false;
    let mut marker = 0;
    for (j, v) in model.variables().iter().enumerate() {
        let int = v.kind != VarKind::Continuous;
        if int != in_int {
            let kind = if int { "'INTORG'" } else { "'INTEND'" };
            let _ = writeln!(out, "    M{marker:07}  'MARKER'                 {kind}");
            marker += 1;
            in_int = int;
        }
        let mut cells: Vec<(String, f64)> = Vec::new();
        if cost[j] != 0.0 {
            cells.push(("COST".into(), cost[j]));
        }
        cells.extend(entries[j].iter().map(|&(r, k)| (rows[r].clone(), k)));
        if cells.is_empty() {
            // keep the column declared
            cells.push(("COST".into(), 0.0));
        }
        for pair in cells.chunks(2) {
            let (r1, k1) = &pair[0];
            match pair.get(1) {
                Some((r2, k2)) => {
                    field_line(&mut out, "", &cols[j], r1, &mps_num(*k1), r2, &mps_num(*k2))
                }
                None => field_line(&mut out, "", &cols[j], r1, &mps_num(*k1), "", ""),
            }
        }
    }
    if in_int {
        let _ = writeln!(out, "    M{marker:07}  'MARKER'                 'INTEND'");
    }

    out.push_str("RHS\n");
    for (c, name) in model.constraints().iter().zip(&rows) {
        if c.rhs != 0.0 {
            field_line(&mut out, "", "RHS", name, &mps_num(c.rhs), "", "");
        }
    }

    out.push_str("BOUNDS\n");
    for (v, name) in model.variables().iter().zip(&cols) {
        match v.kind {
            VarKind::Binary if v.lower == 0.0 && v.upper == 1.0 => {
                field_line(&mut out, "BV", "BND", name, "", "", "");
            }
            VarKind::Binary | VarKind::Integer => {
                // explicit bounds: some readers default marked integers to [0, 1]
                write_bounds(&mut out, name, v.lower, v.upper, true);
            }
            VarKind::Continuous => write_bounds(&mut out, name, v.lower, v.upper, false),
        }
    }
    out.push_str("ENDATA\n");
    Ok(MpsExport {
        text: out,
        name_map,
    })
}

fn write_bounds(out: &mut String, name: &str, lower: f64, upper: f64, explicit: bool) {
    if lower == upper {
        field_line(out, "FX", "BND", name, &mps_num(lower), "", "");
        return;
    }
    if lower == f64::NEG_INFINITY && upper == f64::INFINITY {
        field_line(out, "FR", "BND", name, "", "", "");
        return;
    }
    if lower == f64::NEG_INFINITY {
        field_line(out, "MI", "BND", name, "", "", "");
    } else if lower != 0.0 || explicit {
        field_line(out, "LO", "BND", name, &mps_num(lower), "", "");
    }
    if upper == f64::INFINITY {
        if explicit {
            field_line(out, "PL", "BND", name, "", "", "");
        }
    } else {
        field_line(out, "UP", "BND", name, &mps_num(upper), "", "");
    }
}
