//! Plain-text LP listing of a model, one constraint per line, for checking a
//! model by hand or feeding it to an external solver.

use std::fmt::Write;

use crate::formulation::{Comparator, MilpModel};

fn term(out: &mut String, first: bool, coef: f64, name: &str) {
    if first {
        if coef < 0.0 {
            out.push_str("- ");
        }
    } else if coef < 0.0 {
        out.push_str(" - ");
    } else {
        out.push_str(" + ");
    }
    let _ = write!(out, "{} {}", fmt_num(coef.abs()), name);
}

fn fmt_num(v: f64) -> String {
    if v == f64::INFINITY {
        "+inf".into()
    } else if v == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{v}")
    }
}

/// Variables are written as `x<id>` with their model name in a comment map
/// at the end.
pub fn write_lp(m: &MilpModel) -> String {
    let mut out = String::new();
    out.push_str("Minimize\n obj:");
    let mut first = true;
    for (j, v) in m.variables.iter().enumerate() {
        if v.cost != 0.0 {
            out.push(' ');
            term(&mut out, first, v.cost, &format!("x{j}"));
            first = false;
        }
    }
    if first {
        out.push_str(" 0");
    }
    out.push_str("\nSubject To\n");
    for c in &m.constraints {
        let _ = write!(out, " {}: ", c.kind);
        if c.coeffs.is_empty() {
            out.push('0');
        }
        for (k, &(j, a)) in c.coeffs.iter().enumerate() {
            term(&mut out, k == 0, a, &format!("x{j}"));
        }
        let op = match c.cmp {
            Comparator::Le => "<=",
            Comparator::Eq => "=",
            Comparator::Ge => ">=",
        };
        let _ = writeln!(out, " {op} {}", fmt_num(c.rhs));
    }
    out.push_str("Bounds\n");
    for (j, v) in m.variables.iter().enumerate() {
        if v.lower == v.upper {
            let _ = writeln!(out, " x{j} = {}", fmt_num(v.lower));
        } else {
            let _ = writeln!(out, " {} <= x{j} <= {}", fmt_num(v.lower), fmt_num(v.upper));
        }
    }
    let bins: Vec<String> = m.binaries().map(|j| format!("x{j}")).collect();
    if !bins.is_empty() {
        out.push_str("Binary\n");
        for b in bins {
            let _ = writeln!(out, " {b}");
        }
    }
    out.push_str("End\n");
    for (j, v) in m.variables.iter().enumerate() {
        let _ = writeln!(out, "\\ x{j} {}", v.name);
    }
    out
}
