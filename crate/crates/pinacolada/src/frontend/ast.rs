use std::fmt;

use super::Loc;
use crate::goto::{BinOp, Ty, UnOp};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ast {
    pub globals: Vec<GlobalDecl>,
    pub functions: Vec<FunctionDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalDecl {
    pub name: String,
    pub ty: Ty,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FunctionDecl {
    pub name: String,
    pub params: Vec<Param>,
    /// None means `void`.
    pub ret: Option<Ty>,
    pub body: Block,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Ty,
    pub loc: Loc,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    pub stmts: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Decl {
        ty: Ty,
        name: String,
        init: Option<Expr>,
        loc: Loc,
    },
    Assign {
        name: String,
        expr: Expr,
        loc: Loc,
    },
    If {
        cond: Expr,
        then_blk: Block,
        else_blk: Option<Block>,
        loc: Loc,
    },
    While {
        cond: Expr,
        body: Block,
        loc: Loc,
    },
    Assert {
        cond: Expr,
        loc: Loc,
    },
    Assume {
        cond: Expr,
        loc: Loc,
    },
    /// Expression-statement call (result, if any, is discarded).
    Call {
        callee: String,
        args: Vec<Expr>,
        loc: Loc,
    },
    Return {
        expr: Option<Expr>,
        loc: Loc,
    },
    Block {
        block: Block,
        loc: Loc,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64, Loc),
    Bool(bool, Loc),
    Var(String, Loc),
    Un(UnOp, Box<Expr>, Loc),
    Bin(BinOp, Box<Expr>, Box<Expr>, Loc),
    Call {
        callee: String,
        args: Vec<Expr>,
        loc: Loc,
    },
    NondetInt(Loc),
    NondetBool(Loc),
}

impl Expr {
    pub fn loc(&self) -> Loc {
        match self {
            Expr::Int(_, loc)
            | Expr::Bool(_, loc)
            | Expr::Var(_, loc)
            | Expr::Un(_, _, loc)
            | Expr::Bin(_, _, _, loc)
            | Expr::Call { loc, .. }
            | Expr::NondetInt(loc)
            | Expr::NondetBool(loc) => *loc,
        }
    }
}

/// Binding strength used by both the parser and the printer. Higher binds
/// tighter; all binary operators are left-associative.
pub fn binop_prec(op: BinOp) -> u8 {
    use BinOp::*;
    match op {
        Or => 1,
        And => 2,
        BitOr => 3,
        BitXor => 4,
        BitAnd => 5,
        Eq | Ne => 6,
        Lt | Le | Gt | Ge => 7,
        Shl | Shr => 8,
        Add | Sub => 9,
        Mul | Div | Rem => 10,
    }
}

const UNARY_PREC: u8 = 11;

// ---------------------------------------------------------------------------
// Pretty printer. `parse(tokenize(print(ast)))` reconstructs the same AST
// modulo source positions; the round-trip property test relies on this.
// ---------------------------------------------------------------------------

fn fmt_expr(e: &Expr, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
    match e {
        Expr::Int(v, _) => {
            // Negative literals only appear via constant folding in tests;
            // print through unary minus so the result re-lexes.
            if *v < 0 {
                if min_prec > UNARY_PREC {
                    write!(f, "(-{})", v.unsigned_abs())
                } else {
                    write!(f, "-{}", v.unsigned_abs())
                }
            } else {
                write!(f, "{v}")
            }
        }
        Expr::Bool(b, _) => write!(f, "{b}"),
        Expr::Var(name, _) => write!(f, "{name}"),
        Expr::Un(op, inner, _) => {
            if min_prec > UNARY_PREC {
                write!(f, "({}", op.symbol())?;
                fmt_expr(inner, f, UNARY_PREC)?;
                write!(f, ")")
            } else {
                write!(f, "{}", op.symbol())?;
                fmt_expr(inner, f, UNARY_PREC)
            }
        }
        Expr::Bin(op, lhs, rhs, _) => {
            let prec = binop_prec(*op);
            let parens = prec < min_prec;
            if parens {
                write!(f, "(")?;
            }
            fmt_expr(lhs, f, prec)?;
            write!(f, " {} ", op.symbol())?;
            fmt_expr(rhs, f, prec + 1)?;
            if parens {
                write!(f, ")")?;
            }
            Ok(())
        }
        Expr::Call { callee, args, .. } => {
            write!(f, "{callee}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                fmt_expr(a, f, 0)?;
            }
            write!(f, ")")
        }
        Expr::NondetInt(_) => write!(f, "nondet_int()"),
        Expr::NondetBool(_) => write!(f, "nondet_bool()"),
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_expr(self, f, 0)
    }
}

fn indent(f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    for _ in 0..depth {
        write!(f, "    ")?;
    }
    Ok(())
}

fn fmt_block(b: &Block, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    writeln!(f, "{{")?;
    for s in &b.stmts {
        fmt_stmt(s, f, depth + 1)?;
    }
    indent(f, depth)?;
    write!(f, "}}")
}

fn fmt_stmt(s: &Stmt, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    indent(f, depth)?;
    match s {
        Stmt::Decl { ty, name, init, .. } => match init {
            Some(e) => writeln!(f, "{ty} {name} = {e};"),
            None => writeln!(f, "{ty} {name};"),
        },
        Stmt::Assign { name, expr, .. } => writeln!(f, "{name} = {expr};"),
        Stmt::If {
            cond,
            then_blk,
            else_blk,
            ..
        } => {
            write!(f, "if ({cond}) ")?;
            fmt_block(then_blk, f, depth)?;
            if let Some(e) = else_blk {
                // Print `else if` chains back in their source-level shape.
                if e.stmts.len() == 1 {
                    if let Stmt::If { .. } = &e.stmts[0] {
                        write!(f, " else ")?;
                        return fmt_stmt_bare(&e.stmts[0], f, depth);
                    }
                }
                write!(f, " else ")?;
                fmt_block(e, f, depth)?;
            }
            writeln!(f)
        }
        Stmt::While { cond, body, .. } => {
            write!(f, "while ({cond}) ")?;
            fmt_block(body, f, depth)?;
            writeln!(f)
        }
        Stmt::Assert { cond, .. } => writeln!(f, "assert({cond});"),
        Stmt::Assume { cond, .. } => writeln!(f, "assume({cond});"),
        Stmt::Call { callee, args, .. } => {
            write!(f, "{callee}(")?;
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{a}")?;
            }
            writeln!(f, ");")
        }
        Stmt::Return { expr, .. } => match expr {
            Some(e) => writeln!(f, "return {e};"),
            None => writeln!(f, "return;"),
        },
        Stmt::Block { block, .. } => {
            fmt_block(block, f, depth)?;
            writeln!(f)
        }
    }
}

/// Like `fmt_stmt` but without leading indentation (used by `else if`).
fn fmt_stmt_bare(s: &Stmt, f: &mut fmt::Formatter<'_>, depth: usize) -> fmt::Result {
    if let Stmt::If {
        cond,
        then_blk,
        else_blk,
        ..
    } = s
    {
        write!(f, "if ({cond}) ")?;
        fmt_block(then_blk, f, depth)?;
        if let Some(e) = else_blk {
            if e.stmts.len() == 1 {
                if let Stmt::If { .. } = &e.stmts[0] {
                    write!(f, " else ")?;
                    return fmt_stmt_bare(&e.stmts[0], f, depth);
                }
            }
            write!(f, " else ")?;
            fmt_block(e, f, depth)?;
        }
        writeln!(f)
    } else {
        unreachable!("fmt_stmt_bare is only used for if statements")
    }
}

impl fmt::Display for Ast {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.globals {
            writeln!(f, "{} {};", g.ty, g.name)?;
        }
        for (i, func) in self.functions.iter().enumerate() {
            if i > 0 || !self.globals.is_empty() {
                writeln!(f)?;
            }
            let ret = match func.ret {
                Some(ty) => ty.to_string(),
                None => "void".to_string(),
            };
            let params: Vec<String> = func
                .params
                .iter()
                .map(|p| format!("{} {}", p.ty, p.name))
                .collect();
            write!(f, "{ret} {}({}) ", func.name, params.join(", "))?;
            fmt_block(&func.body, f, 0)?;
            writeln!(f)?;
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Location stripping, for structural AST comparison in round-trip tests.
// ---------------------------------------------------------------------------

pub fn strip_locs(ast: &Ast) -> Ast {
    Ast {
        globals: ast
            .globals
            .iter()
            .map(|g| GlobalDecl {
                name: g.name.clone(),
                ty: g.ty,
                loc: Loc::default(),
            })
            .collect(),
        functions: ast
            .functions
            .iter()
            .map(|func| FunctionDecl {
                name: func.name.clone(),
                params: func
                    .params
                    .iter()
                    .map(|p| Param {
                        name: p.name.clone(),
                        ty: p.ty,
                        loc: Loc::default(),
                    })
                    .collect(),
                ret: func.ret,
                body: strip_block(&func.body),
                loc: Loc::default(),
            })
            .collect(),
    }
}

fn strip_block(b: &Block) -> Block {
    Block {
        stmts: b.stmts.iter().map(strip_stmt).collect(),
    }
}

fn strip_stmt(s: &Stmt) -> Stmt {
    let z = Loc::default();
    match s {
        Stmt::Decl { ty, name, init, .. } => Stmt::Decl {
            ty: *ty,
            name: name.clone(),
            init: init.as_ref().map(strip_expr),
            loc: z,
        },
        Stmt::Assign { name, expr, .. } => Stmt::Assign {
            name: name.clone(),
            expr: strip_expr(expr),
            loc: z,
        },
        Stmt::If {
            cond,
            then_blk,
            else_blk,
            ..
        } => Stmt::If {
            cond: strip_expr(cond),
            then_blk: strip_block(then_blk),
            else_blk: else_blk.as_ref().map(strip_block),
            loc: z,
        },
        Stmt::While { cond, body, .. } => Stmt::While {
            cond: strip_expr(cond),
            body: strip_block(body),
            loc: z,
        },
        Stmt::Assert { cond, .. } => Stmt::Assert {
            cond: strip_expr(cond),
            loc: z,
        },
        Stmt::Assume { cond, .. } => Stmt::Assume {
            cond: strip_expr(cond),
            loc: z,
        },
        Stmt::Call { callee, args, .. } => Stmt::Call {
            callee: callee.clone(),
            args: args.iter().map(strip_expr).collect(),
            loc: z,
        },
        Stmt::Return { expr, .. } => Stmt::Return {
            expr: expr.as_ref().map(strip_expr),
            loc: z,
        },
        Stmt::Block { block, .. } => Stmt::Block {
            block: strip_block(block),
            loc: z,
        },
    }
}

fn strip_expr(e: &Expr) -> Expr {
    let z = Loc::default();
    match e {
        Expr::Int(v, _) => Expr::Int(*v, z),
        Expr::Bool(b, _) => Expr::Bool(*b, z),
        Expr::Var(name, _) => Expr::Var(name.clone(), z),
        Expr::Un(op, inner, _) => Expr::Un(*op, Box::new(strip_expr(inner)), z),
        Expr::Bin(op, lhs, rhs, _) => Expr::Bin(
            *op,
            Box::new(strip_expr(lhs)),
            Box::new(strip_expr(rhs)),
            z,
        ),
        Expr::Call { callee, args, .. } => Expr::Call {
            callee: callee.clone(),
            args: args.iter().map(strip_expr).collect(),
            loc: z,
        },
        Expr::NondetInt(_) => Expr::NondetInt(z),
        Expr::NondetBool(_) => Expr::NondetBool(z),
    }
}
