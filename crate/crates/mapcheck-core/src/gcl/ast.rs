//! GCL abstract syntax. Every node carries its source position.

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl Pos {
    pub fn new(line: u32, col: u32) -> Self {
        Pos { line, col }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Int(i64),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub lo: i64,
    pub hi: i64,
    pub init: i64,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Update {
    pub var: String,
    pub expr: Expr,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Command {
    pub guard: Expr,
    pub updates: Vec<Update>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcDecl {
    pub name: String,
    pub commands: Vec<Command>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct GclModel {
    pub vars: Vec<VarDecl>,
    pub procs: Vec<ProcDecl>,
    pub accept: Option<Expr>,
}

impl Expr {
    fn strip(&self) -> Expr {
        Expr {
            kind: match &self.kind {
                ExprKind::Int(v) => ExprKind::Int(*v),
                ExprKind::Var(n) => ExprKind::Var(n.clone()),
                ExprKind::Unary(op, e) => ExprKind::Unary(*op, Box::new(e.strip())),
                ExprKind::Binary(op, l, r) => {
                    ExprKind::Binary(*op, Box::new(l.strip()), Box::new(r.strip()))
                }
            },
            pos: Pos::default(),
        }
    }
}

impl GclModel {
    /// Copy with all source positions zeroed, for structural comparison.
    pub fn normalized(&self) -> GclModel {
        GclModel {
            vars: self
                .vars
                .iter()
                .map(|v| VarDecl {
                    pos: Pos::default(),
                    name: v.name.clone(),
                    ..*v
                })
                .collect(),
            procs: self
                .procs
                .iter()
                .map(|p| ProcDecl {
                    name: p.name.clone(),
                    pos: Pos::default(),
                    commands: p
                        .commands
                        .iter()
                        .map(|c| Command {
                            guard: c.guard.strip(),
                            pos: Pos::default(),
                            updates: c
                                .updates
                                .iter()
                                .map(|u| Update {
                                    var: u.var.clone(),
                                    expr: u.expr.strip(),
                                    pos: Pos::default(),
                                })
                                .collect(),
                        })
                        .collect(),
                })
                .collect(),
            accept: self.accept.as_ref().map(|e| e.strip()),
        }
    }
}
