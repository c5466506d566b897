//! Recursive-descent parser for GCL.
//!
//! ```text
//! model   := item*
//! item    := `var` IDENT `:` bound `..` bound `=` bound `;`
//!          | `proc` IDENT `{` [command (`;` command)* [`;`]] `}`
//!          | `accept` expr [`;`]
//! bound   := [`-`] INT
//! command := expr `->` update (`,` update)*
//! update  := IDENT `:=` expr
//! ```
//!
//! Expression precedence, loosest first: `||`, `&&`, comparisons
//! (non-associative), `+ -`, `* / %`, unary `! -`.

use super::ast::*;
use super::lexer::{Spanned, Tok};
use super::GclError;

pub fn parse_tokens(tokens: &[Spanned]) -> Result<GclModel, GclError> {
    let mut p = Parser { tokens, at: 0 };
    p.model()
}

struct Parser<'a> {
    tokens: &'a [Spanned],
    at: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Spanned {
        &self.tokens[self.at]
    }

    fn bump(&mut self) -> &Spanned {
        let t = &self.tokens[self.at];
        if self.at + 1 < self.tokens.len() {
            self.at += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if &self.peek().tok == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Pos, GclError> {
        let got = self.peek().clone();
        if got.tok == tok {
            self.bump();
            Ok(got.pos)
        } else {
            Err(GclError::Syntax {
                pos: got.pos,
                message: format!("expected {} in {what}, found {}", tok.describe(), got.tok.describe()),
            })
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Pos), GclError> {
        let got = self.peek().clone();
        if let Tok::Ident(name) = got.tok {
            self.bump();
            Ok((name, got.pos))
        } else {
            Err(GclError::Syntax {
                pos: got.pos,
                message: format!("expected identifier in {what}, found {}", got.tok.describe()),
            })
        }
    }

    fn model(&mut self) -> Result<GclModel, GclError> {
        let mut model = GclModel::default();
        loop {
            let here = self.peek().clone();
            match here.tok {
                Tok::KwVar => model.vars.push(self.var_decl()?),
                Tok::KwProc => model.procs.push(self.proc_decl()?),
                Tok::KwAccept => {
                    self.bump();
                    if model.accept.is_some() {
                        return Err(GclError::Syntax {
                            pos: here.pos,
                            message: "duplicate `accept` declaration".into(),
                        });
                    }
                    model.accept = Some(self.expr()?);
                    self.eat(&Tok::Semi);
                }
                Tok::Eof => return Ok(model),
                other => {
                    return Err(GclError::Syntax {
                        pos: here.pos,
                        message: format!(
                            "expected `var`, `proc` or `accept`, found {}",
                            other.describe()
                        ),
                    });
                }
            }
        }
    }

    fn var_decl(&mut self) -> Result<VarDecl, GclError> {
        let pos = self.expect(Tok::KwVar, "variable declaration")?;
        let (name, _) = self.expect_ident("variable declaration")?;
        self.expect(Tok::Colon, "variable declaration")?;
        let lo = self.bound()?;
        self.expect(Tok::DotDot, "variable range")?;
        let hi = self.bound()?;
        self.expect(Tok::Eq, "variable initializer")?;
        let init = self.bound()?;
        self.expect(Tok::Semi, "variable declaration")?;
        Ok(VarDecl { name, lo, hi, init, pos })
    }

    fn bound(&mut self) -> Result<i64, GclError> {
        let negative = self.eat(&Tok::Minus);
        let got = self.peek().clone();
        if let Tok::Int(v) = got.tok {
            self.bump();
            Ok(if negative { -v } else { v })
        } else {
            Err(GclError::Syntax {
                pos: got.pos,
                message: format!("expected integer bound, found {}", got.tok.describe()),
            })
        }
    }

    fn proc_decl(&mut self) -> Result<ProcDecl, GclError> {
        let pos = self.expect(Tok::KwProc, "process declaration")?;
        let (name, _) = self.expect_ident("process declaration")?;
        self.expect(Tok::LBrace, "process body")?;
        let mut commands = Vec::new();
        if !self.eat(&Tok::RBrace) {
            loop {
                commands.push(self.command()?);
                if self.eat(&Tok::Semi) {
                    // Allow a trailing separator before the closing brace.
                    if self.eat(&Tok::RBrace) {
                        break;
                    }
                    continue;
                }
                self.expect(Tok::RBrace, "process body")?;
                break;
            }
        }
        Ok(ProcDecl { name, commands, pos })
    }

    fn command(&mut self) -> Result<Command, GclError> {
        let pos = self.peek().pos;
        let guard = self.expr()?;
        self.expect(Tok::Arrow, "command")?;
        let mut updates = vec![self.update()?];
        while self.eat(&Tok::Comma) {
            updates.push(self.update()?);
        }
        Ok(Command { guard, updates, pos })
    }

    fn update(&mut self) -> Result<Update, GclError> {
        let (var, pos) = self.expect_ident("update")?;
        self.expect(Tok::Assign, "update")?;
        let expr = self.expr()?;
        Ok(Update { var, expr, pos })
    }

    fn expr(&mut self) -> Result<Expr, GclError> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> Result<Expr, GclError> {
        let mut lhs = self.and_expr()?;
        while self.peek().tok == Tok::OrOr {
            let pos = self.bump().pos;
            let rhs = self.and_expr()?;
            lhs = Expr {
                kind: ExprKind::Binary(BinOp::Or, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, GclError> {
        let mut lhs = self.cmp_expr()?;
        while self.peek().tok == Tok::AndAnd {
            let pos = self.bump().pos;
            let rhs = self.cmp_expr()?;
            lhs = Expr {
                kind: ExprKind::Binary(BinOp::And, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, GclError> {
        let lhs = self.add_expr()?;
        let op = match self.peek().tok {
            Tok::EqEq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Lt => BinOp::Lt,
            Tok::Le => BinOp::Le,
            Tok::Gt => BinOp::Gt,
            Tok::Ge => BinOp::Ge,
            _ => return Ok(lhs),
        };
        let pos = self.bump().pos;
        let rhs = self.add_expr()?;
        Ok(Expr {
            kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            pos,
        })
    }

    fn add_expr(&mut self) -> Result<Expr, GclError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek().tok {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.mul_expr()?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, GclError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek().tok {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                Tok::Percent => BinOp::Mod,
                _ => return Ok(lhs),
            };
            let pos = self.bump().pos;
            let rhs = self.unary_expr()?;
            lhs = Expr {
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, GclError> {
        let here = self.peek().clone();
        let op = match here.tok {
            Tok::Bang => Some(UnOp::Not),
            Tok::Minus => Some(UnOp::Neg),
            _ => None,
        };
        if let Some(op) = op {
            self.bump();
            let inner = self.unary_expr()?;
            return Ok(Expr {
                kind: ExprKind::Unary(op, Box::new(inner)),
                pos: here.pos,
            });
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, GclError> {
        let here = self.peek().clone();
        match here.tok {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Int(v),
                    pos: here.pos,
                })
            }
            Tok::Ident(name) => {
                self.bump();
                Ok(Expr {
                    kind: ExprKind::Var(name),
                    pos: here.pos,
                })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "parenthesized expression")?;
                Ok(inner)
            }
            other => Err(GclError::Syntax {
                pos: here.pos,
                message: format!("expected an expression, found {}", other.describe()),
            }),
        }
    }
}
