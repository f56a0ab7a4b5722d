use std::fmt::Write as _;

use super::ast::*;
use super::parser::precedence;

const NOT_PREC: u8 = 5;
const POSTFIX_PREC: u8 = 6;

pub fn pretty_print(t: &Transformation) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "module {};", t.name);
    let _ = writeln!(out, "create {} : {} from {} : {};", t.target_alias, t.target_mm, t.source_alias, t.source_mm);
    for r in &t.rules {
        out.push('\n');
        let _ = writeln!(out, "rule {} {{", r.name);
        let _ = write!(out, "\tfrom {} : {}", r.input.var, r.input.ty);
        match &r.input.guard {
            Some(g) => {
                let _ = writeln!(out, " (\n\t\t{}\n\t)", expr_to_string(g));
            }
            None => out.push('\n'),
        }
        for (i, o) in r.outputs.iter().enumerate() {
            let lead = if i == 0 { "\tto " } else { "\t   " };
            let _ = write!(out, "{lead}{} : {} (", o.var, o.ty);
            if o.bindings.is_empty() {
                out.push(')');
            } else {
                for (j, b) in o.bindings.iter().enumerate() {
                    let sep = if j + 1 < o.bindings.len() { "," } else { "" };
                    let _ = write!(out, "\n\t\t{} <- {}{sep}", b.target, expr_to_string(&b.expr));
                }
                out.push_str("\n\t)");
            }
            out.push_str(if i + 1 < r.outputs.len() { ",\n" } else { "\n" });
        }
        out.push_str("}\n");
    }
    out
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

fn quote(s: &str) -> String {
    let mut out = String::from("'");
    for c in s.chars() {
        match c {
            '\'' => out.push_str("\\'"),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            c => out.push(c),
        }
    }
    out.push('\'');
    out
}

fn list(out: &mut String, items: &[Expr]) {
    for (i, a) in items.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, a, 0);
    }
}

fn write_expr(out: &mut String, e: &Expr, min_prec: u8) {
    let own = match e {
        Expr::Binary { op, .. } => precedence(*op),
        Expr::Not(_) => NOT_PREC,
        _ => POSTFIX_PREC,
    };
    let paren = own < min_prec;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Var(v) => out.push_str(v),
        Expr::Lit(Literal::Str(s)) => out.push_str(&quote(s)),
        Expr::Lit(Literal::Bool(b)) => {
            let _ = write!(out, "{b}");
        }
        Expr::Lit(Literal::Int(i)) => {
            let _ = write!(out, "{i}");
        }
        Expr::Nav { receiver, feature } => {
            write_expr(out, receiver, POSTFIX_PREC);
            out.push('.');
            out.push_str(feature);
        }
        Expr::Collection { kind, items } => {
            let _ = write!(out, "{kind}{{");
            list(out, items);
            out.push('}');
        }
        Expr::Binary { op, lhs, rhs } => {
            let p = precedence(*op);
            let lhs_min = if matches!(op, BinaryOp::Eq | BinaryOp::Ne) { p + 1 } else { p };
            write_expr(out, lhs, lhs_min);
            let _ = write!(out, " {op} ");
            write_expr(out, rhs, p + 1);
        }
        Expr::Not(inner) => {
            out.push_str("not ");
            write_expr(out, inner, NOT_PREC);
        }
        Expr::TypeTest { receiver, op, ty } => {
            write_expr(out, receiver, POSTFIX_PREC);
            let _ = write!(out, ".{op}({ty})");
        }
        Expr::CollOp { receiver, op, args } => {
            write_expr(out, receiver, POSTFIX_PREC);
            let _ = write!(out, "->{op}(");
            list(out, args);
            out.push(')');
        }
        Expr::Iterate { receiver, op, var, body } => {
            write_expr(out, receiver, POSTFIX_PREC);
            let _ = write!(out, "->{op}({var} | ");
            write_expr(out, body, 0);
            out.push(')');
        }
        Expr::Predef { receiver, op, args } => {
            write_expr(out, receiver, POSTFIX_PREC);
            let _ = write!(out, ".{op}(");
            list(out, args);
            out.push(')');
        }
    }
    if paren {
        out.push(')');
    }
}
