use std::fmt::Write;

use crate::{LinearExpr, LpProblem};

fn var_name(p: &LpProblem, j: usize) -> String {
    match &p.variables()[j].name {
        Some(n) => n.clone(),
        None => format!("x{j}"),
    }
}

fn write_expr(out: &mut String, p: &LpProblem, e: &LinearExpr) {
    let mut first = true;
    for (v, c) in e.terms() {
        let sign = if c < 0.0 { "-" } else if first { "" } else { "+" };
        if !first || c < 0.0 {
            out.push(' ');
        }
        out.push_str(sign);
        if !first || c < 0.0 {
            out.push(' ');
        }
        let a = c.abs();
        if a != 1.0 {
            let _ = write!(out, "{a} ");
        }
        out.push_str(&var_name(p, v.index()));
        first = false;
    }
    if first {
        out.push('0');
    }
}

pub(crate) fn write_lp(p: &LpProblem) -> String {
    let mut out = String::from("Minimize\n obj: ");
    write_expr(&mut out, p, p.objective());
    if p.objective().constant() != 0.0 {
        let _ = write!(out, " + {}", p.objective().constant());
    }
    out.push_str("\nSubject To\n");
    for (i, c) in p.constraints().iter().enumerate() {
        let name = c.name.clone().unwrap_or_else(|| format!("c{i}"));
        let _ = write!(out, " {name}: ");
        write_expr(&mut out, p, &c.expr);
        let _ = writeln!(out, " {} {}", c.sense, c.rhs - c.expr.constant());
    }
    out.push_str("Bounds\n");
    for (j, v) in p.variables().iter().enumerate() {
        let name = var_name(p, j);
        match (v.lower.is_finite(), v.upper.is_finite()) {
            (true, true) if v.lower == v.upper => {
                let _ = writeln!(out, " {name} = {}", v.lower);
            }
            (true, true) => {
                let _ = writeln!(out, " {} <= {name} <= {}", v.lower, v.upper);
            }
            (true, false) => {
                let _ = writeln!(out, " {name} >= {}", v.lower);
            }
            (false, true) => {
                let _ = writeln!(out, " -inf <= {name} <= {}", v.upper);
            }
            (false, false) => {
                let _ = writeln!(out, " {name} free");
            }
        }
    }
    out.push_str("End\n");
    out
}
