use std::fmt::Write;

use super::{LinearProgram, Relation, Sense};

/// Renders a program in the CPLEX LP text format.
///
/// `binary` marks variables for the `Binaries` section; `quadratic` is the
/// dense `n × n` matrix of a `½ xᵀQx` objective term. Names are sanitized to
/// the characters the format accepts.
pub fn write_lp_format(p: &LinearProgram, binary: Option<&[bool]>, quadratic: Option<&[f64]>) -> String {
    let names: Vec<String> = p
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| sanitize(&v.name, 'x', i))
        .collect();
    let mut out = String::new();
    out.push_str(match p.sense {
        Sense::Minimize => "Minimize\n",
        Sense::Maximize => "Maximize\n",
    });
    let mut obj = String::new();
    for (j, &c) in p.objective.iter().enumerate() {
        if c != 0.0 {
            push_term(&mut obj, c, &names[j]);
        }
    }
    if let Some(q) = quadratic {
        let n = names.len();
        let mut quad = String::new();
        for i in 0..n {
            for j in i..n {
                let coef = if i == j { q[i * n + i] } else { q[i * n + j] + q[j * n + i] };
                if coef == 0.0 {
                    continue;
                }
                let term = if i == j {
                    format!("{} ^2", names[i])
                } else {
                    format!("{} * {}", names[i], names[j])
                };
                push_term(&mut quad, coef, &term);
            }
        }
        if !quad.is_empty() {
            let _ = write!(obj, " + [{quad} ] / 2");
        }
    }
    if p.objective_offset != 0.0 {
        push_constant(&mut obj, p.objective_offset);
    }
    if obj.is_empty() {
        obj.push_str(" 0 ");
        obj.push_str(names.first().map(String::as_str).unwrap_or("x0"));
    }
    let _ = writeln!(out, " obj:{obj}");
    out.push_str("Subject To\n");
    for (r, c) in p.constraints.iter().enumerate() {
        let mut row = String::new();
        for &(v, a) in &c.terms {
            push_term(&mut row, a, &names[v.0]);
        }
        if row.is_empty() {
            row.push_str(" 0 ");
            row.push_str(&names[0]);
        }
        let op = match c.relation {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        };
        let _ = writeln!(out, " {}:{row} {op} {}", sanitize(&c.name, 'c', r), fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (j, v) in p.variables.iter().enumerate() {
        if binary.is_some_and(|b| b[j]) {
            continue;
        }
        let name = &names[j];
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {name} = {}", fmt_num(v.lower));
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", fmt_num(v.lower), fmt_num(v.upper));
            }
            (true, false) => {
                if v.lower != 0.0 {
                    let _ = writeln!(out, " {name} >= {}", fmt_num(v.lower));
                }
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", fmt_num(v.upper));
            }
        }
    }
    if let Some(b) = binary {
        let bins: Vec<&str> = names
            .iter()
            .zip(b)
            .filter(|(_, &is_bin)| is_bin)
            .map(|(n, _)| n.as_str())
            .collect();
        if !bins.is_empty() {
            out.push_str("Binaries\n");
            for chunk in bins.chunks(8) {
                let _ = writeln!(out, " {}", chunk.join(" "));
            }
        }
    }
    out.push_str("End\n");
    out
}

fn push_term(buf: &mut String, coef: f64, name: &str) {
    let sign = if coef < 0.0 { '-' } else { '+' };
    let mag = coef.abs();
    if buf.is_empty() && sign == '+' {
        buf.push(' ');
    } else {
        let _ = write!(buf, " {sign} ");
    }
    if mag == 1.0 {
        buf.push_str(name);
    } else {
        let _ = write!(buf, "{} {name}", fmt_num(mag));
    }
}

fn push_constant(buf: &mut String, value: f64) {
    let sign = if value < 0.0 { '-' } else { '+' };
    let _ = write!(buf, " {sign} {}", fmt_num(value.abs()));
}

fn fmt_num(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v:.17}").trim_end_matches('0').to_string()
    }
}

fn sanitize(name: &str, prefix: char, index: usize) -> String {
    let cleaned: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || "_.()".contains(c) { c } else { '_' })
        .collect();
    match cleaned.chars().next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => cleaned,
        _ => format!("{prefix}{index}_{cleaned}"),
    }
}
