//! Canonical pretty-printer. Reparsing the output yields a structurally
//! equal model (positions aside).

use super::ast::*;

pub fn format_model(model: &GclModel) -> String {
    let mut out = String::new();
    for v in &model.vars {
        out.push_str(&format!("var {}: {}..{} = {};\n", v.name, v.lo, v.hi, v.init));
    }
    for p in &model.procs {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("proc {} {{\n", p.name));
        for (i, c) in p.commands.iter().enumerate() {
            out.push_str("  ");
            out.push_str(&format_expr(&c.guard, 0));
            out.push_str(" -> ");
            let updates: Vec<String> = c
                .updates
                .iter()
                .map(|u| format!("{} := {}", u.var, format_expr(&u.expr, 0)))
                .collect();
            out.push_str(&updates.join(", "));
            if i + 1 < p.commands.len() {
                out.push(';');
            }
            out.push('\n');
        }
        out.push_str("}\n");
    }
    if let Some(accept) = &model.accept {
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&format!("accept {}\n", format_expr(accept, 0)));
    }
    out
}

fn precedence(op: BinOp) -> u8 {
    match op {
        BinOp::Or => 1,
        BinOp::And => 2,
        BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => 3,
        BinOp::Add | BinOp::Sub => 4,
        BinOp::Mul | BinOp::Div | BinOp::Mod => 5,
    }
}

fn op_text(op: BinOp) -> &'static str {
    match op {
        BinOp::Add => "+",
        BinOp::Sub => "-",
        BinOp::Mul => "*",
        BinOp::Div => "/",
        BinOp::Mod => "%",
        BinOp::Eq => "==",
        BinOp::Ne => "!=",
        BinOp::Lt => "<",
        BinOp::Le => "<=",
        BinOp::Gt => ">",
        BinOp::Ge => ">=",
        BinOp::And => "&&",
        BinOp::Or => "||",
    }
}

/// Print with the minimal parentheses that preserve structure under the
/// parser's precedence and associativity rules.
fn format_expr(expr: &Expr, min_prec: u8) -> String {
    match &expr.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Var(name) => name.clone(),
        ExprKind::Unary(op, inner) => {
            let text = format!(
                "{}{}",
                match op {
                    UnOp::Neg => "-",
                    UnOp::Not => "!",
                },
                format_expr(inner, 6)
            );
            if min_prec > 6 {
                format!("({text})")
            } else {
                text
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let prec = precedence(*op);
            // Comparisons are non-associative: both operands must bind
            // tighter. Other binary operators are left-associative.
            let (lp, rp) = if prec == 3 { (prec + 1, prec + 1) } else { (prec, prec + 1) };
            let text = format!(
                "{} {} {}",
                format_expr(lhs, lp),
                op_text(*op),
                format_expr(rhs, rp)
            );
            if min_prec > prec {
                format!("({text})")
            } else {
                text
            }
        }
    }
}
