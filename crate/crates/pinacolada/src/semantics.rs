//! Fixed-width two's-complement value semantics.
//!
//! Every component that evaluates MiniC expressions concretely (the constant
//! folder, the concrete oracle, witness replay) goes through this module, and
//! the CNF encoder implements the same operation tables bit by bit. Keeping
//! one shared definition is what makes the encoder/oracle differential tests
//! meaningful.

use crate::goto::{BinOp, Expr, Ty, UnOp};

/// Smallest supported integer width.
pub const MIN_WIDTH: u32 = 4;
/// Largest supported integer width.
pub const MAX_WIDTH: u32 = 64;

/// A runtime value: a W-bit signed integer (stored sign-extended) or a bool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Value {
    Int(i64),
    Bool(bool),
}

impl Value {
    pub fn ty(&self) -> Ty {
        match self {
            Value::Int(_) => Ty::Int,
            Value::Bool(_) => Ty::Bool,
        }
    }

    pub fn as_int(&self) -> i64 {
        match self {
            Value::Int(v) => *v,
            Value::Bool(_) => panic!("expected int value"),
        }
    }

    pub fn as_bool(&self) -> bool {
        match self {
            Value::Bool(b) => *b,
            Value::Int(_) => panic!("expected bool value"),
        }
    }

    /// Default value of a type: uninitialized variables read as 0 / false.
    pub fn zero_of(ty: Ty) -> Value {
        match ty {
            Ty::Int => Value::Int(0),
            Ty::Bool => Value::Bool(false),
        }
    }
}

/// Truncate to the low `width` bits and sign-extend back to i64.
pub fn truncate(width: u32, v: i128) -> i64 {
    debug_assert!((MIN_WIDTH..=MAX_WIDTH).contains(&width));
    let masked = (v as u64) & mask(width);
    let sign_bit = 1u64 << (width - 1);
    if masked & sign_bit != 0 {
        (masked | !mask(width)) as i64
    } else {
        masked as i64
    }
}

/// Bit mask with the low `width` bits set.
pub fn mask(width: u32) -> u64 {
    if width == 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

/// Reinterpret a W-bit signed value as its unsigned bit pattern.
pub fn to_unsigned(width: u32, v: i64) -> u64 {
    (v as u64) & mask(width)
}

/// Truncated signed division and remainder, total on all inputs.
///
/// Division by zero yields (0, 0). The quotient rounds toward zero and the
/// remainder takes the sign of the dividend; MIN/-1 wraps to MIN like every
/// other overflowing operation.
pub fn div_mod(width: u32, a: i64, b: i64) -> (i64, i64) {
    if b == 0 {
        return (0, 0);
    }
    let q = (a as i128) / (b as i128);
    let r = (a as i128) % (b as i128);
    (truncate(width, q), truncate(width, r))
}

/// Shift amount semantics: the amount operand is reinterpreted as an
/// unsigned W-bit value and reduced modulo W.
pub fn shift_amount(width: u32, amount: i64) -> u32 {
    (to_unsigned(width, amount) % width as u64) as u32
}

pub fn eval_unop(width: u32, op: UnOp, v: Value) -> Value {
    match (op, v) {
        (UnOp::Neg, Value::Int(a)) => Value::Int(truncate(width, -(a as i128))),
        (UnOp::BitNot, Value::Int(a)) => Value::Int(truncate(width, !(a as i128))),
        (UnOp::Not, Value::Bool(b)) => Value::Bool(!b),
        (op, v) => panic!("type error in eval_unop: {op:?} on {v:?}"),
    }
}

pub fn eval_binop(width: u32, op: BinOp, lhs: Value, rhs: Value) -> Value {
    use BinOp::*;
    match (lhs, rhs) {
        (Value::Int(a), Value::Int(b)) => match op {
            Add => Value::Int(truncate(width, a as i128 + b as i128)),
            Sub => Value::Int(truncate(width, a as i128 - b as i128)),
            Mul => Value::Int(truncate(width, a as i128 * b as i128)),
            Div => Value::Int(div_mod(width, a, b).0),
            Rem => Value::Int(div_mod(width, a, b).1),
            Shl => {
                let s = shift_amount(width, b);
                Value::Int(truncate(width, (to_unsigned(width, a) as i128) << s))
            }
            Shr => {
                // Arithmetic shift: ints are signed.
                let s = shift_amount(width, b);
                Value::Int(truncate(width, (a as i128) >> s))
            }
            BitAnd => Value::Int(truncate(width, (a & b) as i128)),
            BitOr => Value::Int(truncate(width, (a | b) as i128)),
            BitXor => Value::Int(truncate(width, (a ^ b) as i128)),
            Lt => Value::Bool(a < b),
            Le => Value::Bool(a <= b),
            Gt => Value::Bool(a > b),
            Ge => Value::Bool(a >= b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            And | Or => panic!("type error: boolean op on ints"),
        },
        (Value::Bool(a), Value::Bool(b)) => match op {
            And => Value::Bool(a && b),
            Or => Value::Bool(a || b),
            Eq => Value::Bool(a == b),
            Ne => Value::Bool(a != b),
            _ => panic!("type error: {op:?} on bools"),
        },
        _ => panic!("type error: mixed operand types for {op:?}"),
    }
}

/// Evaluate a pure expression, resolving variables through `lookup`.
pub fn eval_expr<V>(
    width: u32,
    expr: &Expr<V>,
    lookup: &mut impl FnMut(&V, Ty) -> Value,
) -> Value {
    match expr {
        Expr::Int(v) => Value::Int(truncate(width, *v as i128)),
        Expr::Bool(b) => Value::Bool(*b),
        Expr::Var(v, ty) => lookup(v, *ty),
        Expr::Un(op, e) => eval_unop(width, *op, eval_expr(width, e, lookup)),
        Expr::Bin(op, a, b) => {
            let va = eval_expr(width, a, lookup);
            let vb = eval_expr(width, b, lookup);
            eval_binop(width, *op, va, vb)
        }
    }
}

/// Fold an expression to a value if it contains no variables.
pub fn const_eval<V>(width: u32, expr: &Expr<V>) -> Option<Value> {
    if expr.has_vars() {
        return None;
    }
    Some(eval_expr(width, expr, &mut |_, _| {
        unreachable!("expression has no variables")
    }))
}
