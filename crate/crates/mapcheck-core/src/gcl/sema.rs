//! Semantic checks: declarations, bounds and a two-type (int/bool) type
//! discipline. Guards and the accept expression must be boolean, update
//! right-hand sides must be integer.

use std::collections::HashMap;

use super::ast::*;
use super::GclError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Ty {
    Int,
    Bool,
}

impl Ty {
    fn name(self) -> &'static str {
        match self {
            Ty::Int => "int",
            Ty::Bool => "bool",
        }
    }
}

pub fn check(model: &GclModel) -> Result<(), GclError> {
    let mut vars: HashMap<&str, &VarDecl> = HashMap::new();
    for v in &model.vars {
        if vars.insert(v.name.as_str(), v).is_some() {
            return Err(GclError::Semantic {
                pos: v.pos,
                message: format!("variable `{}` declared twice", v.name),
            });
        }
        if v.lo > v.hi {
            return Err(GclError::Semantic {
                pos: v.pos,
                message: format!("empty range {}..{} for variable `{}`", v.lo, v.hi, v.name),
            });
        }
        if v.init < v.lo || v.init > v.hi {
            return Err(GclError::Semantic {
                pos: v.pos,
                message: format!(
                    "initial value {} of `{}` outside {}..{}",
                    v.init, v.name, v.lo, v.hi
                ),
            });
        }
    }

    let mut proc_names: HashMap<&str, Pos> = HashMap::new();
    for p in &model.procs {
        if proc_names.insert(p.name.as_str(), p.pos).is_some() {
            return Err(GclError::Semantic {
                pos: p.pos,
                message: format!("process `{}` declared twice", p.name),
            });
        }
        for cmd in &p.commands {
            expect_ty(&cmd.guard, Ty::Bool, &vars, "guard")?;
            let mut targets: HashMap<&str, Pos> = HashMap::new();
            for u in &cmd.updates {
                if !vars.contains_key(u.var.as_str()) {
                    return Err(GclError::Semantic {
                        pos: u.pos,
                        message: format!("assignment to undeclared variable `{}`", u.var),
                    });
                }
                if targets.insert(u.var.as_str(), u.pos).is_some() {
                    return Err(GclError::Semantic {
                        pos: u.pos,
                        message: format!("variable `{}` updated twice in one command", u.var),
                    });
                }
                expect_ty(&u.expr, Ty::Int, &vars, "update expression")?;
            }
        }
    }

    if let Some(accept) = &model.accept {
        expect_ty(accept, Ty::Bool, &vars, "accept expression")?;
    }
    Ok(())
}

fn expect_ty(
    expr: &Expr,
    want: Ty,
    vars: &HashMap<&str, &VarDecl>,
    what: &str,
) -> Result<(), GclError> {
    let got = infer(expr, vars)?;
    if got != want {
        return Err(GclError::Semantic {
            pos: expr.pos,
            message: format!("{what} must be {}, found {}", want.name(), got.name()),
        });
    }
    Ok(())
}

fn infer(expr: &Expr, vars: &HashMap<&str, &VarDecl>) -> Result<Ty, GclError> {
    match &expr.kind {
        ExprKind::Int(_) => Ok(Ty::Int),
        ExprKind::Var(name) => {
            if vars.contains_key(name.as_str()) {
                Ok(Ty::Int)
            } else {
                Err(GclError::Semantic {
                    pos: expr.pos,
                    message: format!("undeclared variable `{name}`"),
                })
            }
        }
        ExprKind::Unary(op, inner) => {
            let want = match op {
                UnOp::Neg => Ty::Int,
                UnOp::Not => Ty::Bool,
            };
            let got = infer(inner, vars)?;
            if got != want {
                return Err(GclError::Semantic {
                    pos: inner.pos,
                    message: format!(
                        "operand of `{}` must be {}, found {}",
                        match op {
                            UnOp::Neg => "-",
                            UnOp::Not => "!",
                        },
                        want.name(),
                        got.name()
                    ),
                });
            }
            Ok(want)
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let (operand, result) = match op {
                BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod => (Ty::Int, Ty::Int),
                BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge => {
                    (Ty::Int, Ty::Bool)
                }
                BinOp::And | BinOp::Or => (Ty::Bool, Ty::Bool),
            };
            for side in [lhs, rhs] {
                let got = infer(side, vars)?;
                if got != operand {
                    return Err(GclError::Semantic {
                        pos: side.pos,
                        message: format!(
                            "operand must be {}, found {}",
                            operand.name(),
                            got.name()
                        ),
                    });
                }
            }
            Ok(result)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;

    #[test]
    fn rejects_duplicate_variable() {
        let err = parse("var x: 0..1 = 0; var x: 0..2 = 1;").unwrap_err();
        assert!(matches!(err, GclError::Semantic { .. }));
    }

    #[test]
    fn rejects_empty_range() {
        let err = parse("var x: 5..3 = 4;").unwrap_err();
        assert!(err.to_string().contains("empty range"));
    }

    #[test]
    fn rejects_bool_guard_mismatch() {
        let err = parse("var x: 0..1 = 0; proc P { x + 1 -> x := 0 }").unwrap_err();
        assert!(err.to_string().contains("guard must be bool"));
    }

    #[test]
    fn rejects_int_accept_mismatch() {
        let err = parse("var x: 0..1 = 0; accept x + 1").unwrap_err();
        assert!(err.to_string().contains("accept expression must be bool"));
    }

    #[test]
    fn rejects_double_update_of_same_variable() {
        let err = parse("var x: 0..3 = 0; proc P { x == 0 -> x := 1, x := 2 }").unwrap_err();
        assert!(err.to_string().contains("updated twice"));
    }

    #[test]
    fn rejects_logical_op_on_ints() {
        let err = parse("var x: 0..1 = 0; accept x && x").unwrap_err();
        assert!(matches!(err, GclError::Semantic { .. }));
    }
}
