//! The flat intermediate representation the verifier runs on.
//!
//! Each function body is an indexed list of instructions with explicit
//! two-way branches; structured control flow from the frontend is gone by the
//! time a program reaches this form. `loop_heads` marks the targets of
//! back-edges so the exploration engine can meter loop unrolling.

pub mod lower;
pub mod reach;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::frontend::Loc;

/// Interned-ish name: cheap to clone, thread-safe.
pub type Name = Arc<str>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ty {
    Int,
    Bool,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ty::Int => write!(f, "int"),
            Ty::Bool => write!(f, "bool"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnOp {
    /// Arithmetic negation on int.
    Neg,
    /// Bitwise complement on int.
    BitNot,
    /// Logical not on bool.
    Not,
}

impl UnOp {
    pub fn symbol(self) -> &'static str {
        match self {
            UnOp::Neg => "-",
            UnOp::BitNot => "~",
            UnOp::Not => "!",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    Shl,
    Shr,
    BitAnd,
    BitOr,
    BitXor,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        use BinOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            Shl => "<<",
            Shr => ">>",
            BitAnd => "&",
            BitOr => "|",
            BitXor => "^",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
            And => "&&",
            Or => "||",
        }
    }

    /// Type of the operation's result; operand types are the checker's job.
    pub fn result_ty(self) -> Ty {
        use BinOp::*;
        match self {
            Add | Sub | Mul | Div | Rem | Shl | Shr | BitAnd | BitOr | BitXor => Ty::Int,
            Lt | Le | Gt | Ge | Eq | Ne | And | Or => Ty::Bool,
        }
    }
}

/// A resolved variable reference: unique within its function (locals and
/// params) or program-wide (globals).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VarRef {
    pub name: Name,
    pub global: bool,
    pub ty: Ty,
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

/// Pure expression over variables of type `V`. The lowering guarantees
/// expressions in instructions contain no calls, no nondet markers and no
/// short-circuit operators (`&&`/`||` become branches).
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr<V> {
    Int(i64),
    Bool(bool),
    Var(V, Ty),
    Un(UnOp, Box<Expr<V>>),
    Bin(BinOp, Box<Expr<V>>, Box<Expr<V>>),
}

impl<V> Expr<V> {
    pub fn ty(&self) -> Ty {
        match self {
            Expr::Int(_) => Ty::Int,
            Expr::Bool(_) => Ty::Bool,
            Expr::Var(_, ty) => *ty,
            Expr::Un(op, _) => match op {
                UnOp::Neg | UnOp::BitNot => Ty::Int,
                UnOp::Not => Ty::Bool,
            },
            Expr::Bin(op, ..) => op.result_ty(),
        }
    }

    /// Rewrite every variable, preserving structure.
    pub fn map_vars<W>(&self, f: &mut impl FnMut(&V) -> W) -> Expr<W> {
        match self {
            Expr::Int(v) => Expr::Int(*v),
            Expr::Bool(b) => Expr::Bool(*b),
            Expr::Var(v, ty) => Expr::Var(f(v), *ty),
            Expr::Un(op, e) => Expr::Un(*op, Box::new(e.map_vars(f))),
            Expr::Bin(op, a, b) => {
                Expr::Bin(*op, Box::new(a.map_vars(f)), Box::new(b.map_vars(f)))
            }
        }
    }

    pub fn for_each_var(&self, f: &mut impl FnMut(&V)) {
        match self {
            Expr::Int(_) | Expr::Bool(_) => {}
            Expr::Var(v, _) => f(v),
            Expr::Un(_, e) => e.for_each_var(f),
            Expr::Bin(_, a, b) => {
                a.for_each_var(f);
                b.for_each_var(f);
            }
        }
    }

    pub fn has_vars(&self) -> bool {
        match self {
            Expr::Int(_) | Expr::Bool(_) => false,
            Expr::Var(..) => true,
            Expr::Un(_, e) => e.has_vars(),
            Expr::Bin(_, a, b) => a.has_vars() || b.has_vars(),
        }
    }
}

impl<V: fmt::Display> fmt::Display for Expr<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(v) => write!(f, "{v}"),
            Expr::Bool(b) => write!(f, "{b}"),
            Expr::Var(v, _) => write!(f, "{v}"),
            Expr::Un(op, e) => write!(f, "{}{e}", op.symbol()),
            Expr::Bin(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Instruction {
    Assign {
        var: VarRef,
        expr: Expr<VarRef>,
        loc: Loc,
    },
    Branch {
        cond: Expr<VarRef>,
        target_true: usize,
        target_false: usize,
        loc: Loc,
    },
    Goto {
        target: usize,
        loc: Loc,
    },
    Assert {
        cond: Expr<VarRef>,
        loc: Loc,
    },
    Assume {
        cond: Expr<VarRef>,
        loc: Loc,
    },
    Call {
        dest: Option<VarRef>,
        callee: Name,
        args: Vec<Expr<VarRef>>,
        loc: Loc,
    },
    Return {
        expr: Option<Expr<VarRef>>,
        loc: Loc,
    },
    Halt {
        loc: Loc,
    },
    Nondet {
        var: VarRef,
        ty: Ty,
        loc: Loc,
    },
}

impl Instruction {
    pub fn loc(&self) -> Loc {
        match self {
            Instruction::Assign { loc, .. }
            | Instruction::Branch { loc, .. }
            | Instruction::Goto { loc, .. }
            | Instruction::Assert { loc, .. }
            | Instruction::Assume { loc, .. }
            | Instruction::Call { loc, .. }
            | Instruction::Return { loc, .. }
            | Instruction::Halt { loc }
            | Instruction::Nondet { loc, .. } => *loc,
        }
    }
}

impl fmt::Display for Instruction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Instruction::Assign { var, expr, .. } => write!(f, "ASSIGN {var} := {expr}"),
            Instruction::Branch {
                cond,
                target_true,
                target_false,
                ..
            } => write!(f, "BRANCH {cond} then {target_true} else {target_false}"),
            Instruction::Goto { target, .. } => write!(f, "GOTO {target}"),
            Instruction::Assert { cond, .. } => write!(f, "ASSERT {cond}"),
            Instruction::Assume { cond, .. } => write!(f, "ASSUME {cond}"),
            Instruction::Call {
                dest, callee, args, ..
            } => {
                match dest {
                    Some(d) => write!(f, "CALL {d} := {callee}(")?,
                    None => write!(f, "CALL {callee}(")?,
                }
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{a}")?;
                }
                write!(f, ")")
            }
            Instruction::Return { expr, .. } => match expr {
                Some(e) => write!(f, "RETURN {e}"),
                None => write!(f, "RETURN"),
            },
            Instruction::Halt { .. } => write!(f, "HALT"),
            Instruction::Nondet { var, ty, .. } => write!(f, "NONDET {var} : {ty}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GotoFunction {
    pub name: Name,
    pub params: Vec<VarRef>,
    pub locals: Vec<VarRef>,
    /// None for void functions.
    pub ret: Option<Ty>,
    pub body: Vec<Instruction>,
    /// Targets of back-edges (target index <= source index).
    pub loop_heads: BTreeSet<usize>,
}

#[derive(Debug, Clone)]
pub struct GotoProgram {
    pub globals: Vec<VarRef>,
    pub functions: BTreeMap<Name, GotoFunction>,
}

impl GotoProgram {
    pub fn main(&self) -> &GotoFunction {
        self.functions
            .get("main")
            .expect("lowered program always has main")
    }

    pub fn function(&self, name: &str) -> &GotoFunction {
        self.functions
            .get(name)
            .unwrap_or_else(|| panic!("unknown function {name}"))
    }
}

impl fmt::Display for GotoProgram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.globals {
            writeln!(f, "global {} {}", g.ty, g.name)?;
        }
        for (name, func) in &self.functions {
            let ret = match func.ret {
                Some(ty) => ty.to_string(),
                None => "void".to_string(),
            };
            let params: Vec<String> = func
                .params
                .iter()
                .map(|p| format!("{} {}", p.ty, p.name))
                .collect();
            writeln!(f, "{ret} {name}({}):", params.join(", "))?;
            for (i, ins) in func.body.iter().enumerate() {
                let head = if func.loop_heads.contains(&i) { "*" } else { " " };
                writeln!(f, " {head}{i}: {ins}")?;
            }
        }
        Ok(())
    }
}
