//! A small guarded-command modeling language (GCL).
//!
//! A model declares bounded integer variables, processes made of guarded
//! commands, and an acceptance predicate over states:
//!
//! ```text
//! var x: 0..1 = 0;
//!
//! proc P {
//!   x == 0 -> x := 1
//! }
//!
//! accept x == 1
//! ```
//!
//! Semantics are interleaving: one enabled command of one process fires per
//! step, applying its updates atomically. A command whose guard faults
//! (division or modulo by zero, arithmetic overflow) or whose updates would
//! drive a variable out of its declared bounds is disabled for that state:
//! the successor is simply not produced. This keeps every compiled system
//! total and finite without runtime faults. Acceptance is a plain state
//! predicate; a faulting accept expression marks the state non-accepting.

mod ast;
mod compile;
mod lexer;
mod parser;
mod print;
mod sema;

pub use ast::{BinOp, Command, Expr, ExprKind, GclModel, Pos, ProcDecl, UnOp, Update, VarDecl};
pub use compile::{compile, GclSystem};
pub use print::format_model;

use std::fmt;

/// Front-end failure: lexical, syntactic or semantic, each carrying a
/// 1-based line:column position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GclError {
    Lexical { pos: Pos, message: String },
    Syntax { pos: Pos, message: String },
    Semantic { pos: Pos, message: String },
}

impl GclError {
    pub fn pos(&self) -> Pos {
        match self {
            GclError::Lexical { pos, .. }
            | GclError::Syntax { pos, .. }
            | GclError::Semantic { pos, .. } => *pos,
        }
    }
}

impl fmt::Display for GclError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GclError::Lexical { pos, message } => {
                write!(f, "lexical error at {}:{}: {}", pos.line, pos.col, message)
            }
            GclError::Syntax { pos, message } => {
                write!(f, "syntax error at {}:{}: {}", pos.line, pos.col, message)
            }
            GclError::Semantic { pos, message } => {
                write!(f, "semantic error at {}:{}: {}", pos.line, pos.col, message)
            }
        }
    }
}

impl std::error::Error for GclError {}

/// Parse GCL source into a checked model.
///
/// The returned AST has passed all semantic checks (declarations, bounds,
/// types), so it is ready for [`compile`].
pub fn parse(text: &str) -> Result<GclModel, GclError> {
    let tokens = lexer::lex(text)?;
    let model = parser::parse_tokens(&tokens)?;
    sema::check(&model)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_model() {
        let m = parse("var x:0..1=0; proc P { x==0 -> x:=1 } accept x==1").unwrap();
        assert_eq!(m.vars.len(), 1);
        assert_eq!(m.procs.len(), 1);
        assert_eq!(m.procs[0].commands.len(), 1);
        assert!(m.accept.is_some());
    }

    #[test]
    fn undeclared_variable_is_a_semantic_error_with_position() {
        let err = parse("accept y==1").unwrap_err();
        match err {
            GclError::Semantic { pos, ref message } => {
                assert_eq!((pos.line, pos.col), (1, 8));
                assert!(message.contains('y'), "{message}");
            }
            other => panic!("expected semantic error, got {other}"),
        }
    }

    #[test]
    fn error_kinds_are_distinct() {
        assert!(matches!(
            parse("var x: 0..1 = 0; proc P { x == $ -> x := 1 }"),
            Err(GclError::Lexical { .. })
        ));
        assert!(matches!(
            parse("var x 0..1 = 0;"),
            Err(GclError::Syntax { .. })
        ));
        assert!(matches!(
            parse("var x: 0..1 = 7;"),
            Err(GclError::Semantic { .. })
        ));
    }
}
