//! Bit-blasting IR expressions to CNF.
//!
//! Words are little-endian `Vec<Lit>` in two's complement at the configured
//! width; booleans are single literals. Tseitin gates fold constants (the
//! shared TRUE literal anchors them), so expressions over literals cost no
//! clauses. Arithmetic is ripple-carry; comparison is the sign bit of a
//! one-bit-extended subtraction (sign- or zero-extended); multiplication is
//! shift-and-add; shifts are barrel shifters over the amount reduced modulo
//! the width; division constrains fresh quotient/remainder words with an
//! exact double-width multiply-add relation plus the two special cases
//! (division by zero yields 0,0; the minimum value divided by -1 wraps).
//!
//! When a guard literal is set, every emitted clause `C` becomes `¬g ∨ C`,
//! so the encoded facts only bind on branches where `g` is assumed or
//! committed — the mechanism behind the single-solver exploration mode.

use crate::goto::{BinOp, Expr, Ty, UnOp};
use crate::semantics::{self, truncate, Value};
use crate::solver::{Lit, Solver};
use crate::ssa::{Def, SsaName};
use std::collections::HashMap;

/// Encoded value: an integer word (LSB first) or a single boolean literal.
#[derive(Clone, Debug)]
pub enum Enc {
    Word(Vec<Lit>),
    Bit(Lit),
}

impl Enc {
    pub fn as_word(&self) -> &[Lit] {
        match self {
            Enc::Word(w) => w,
            Enc::Bit(_) => panic!("expected a word, found a bit (type checker should prevent this)"),
        }
    }

    pub fn as_bit(&self) -> Lit {
        match self {
            Enc::Bit(b) => *b,
            Enc::Word(_) => panic!("expected a bit, found a word (type checker should prevent this)"),
        }
    }
}

/// SSA name → encoding, one per explored state; names absent here either
/// read as zero (version 0) or get minted as fresh inputs on first use.
pub type Memo = HashMap<SsaName, Enc>;

#[derive(Clone)]
pub struct Encoder {
    pub width: u32,
    const_true: Lit,
    guard: Option<Lit>,
    pub clauses_added: u64,
}

impl Encoder {
    /// Creates the shared TRUE literal in `solver` (one unguarded unit
    /// clause). The encoder is tied to this solver's variable space.
    pub fn new(solver: &mut Solver, width: u32) -> Encoder {
        assert!(
            (semantics::MIN_WIDTH..=semantics::MAX_WIDTH).contains(&width),
            "width {width} out of range"
        );
        let t = Lit::pos(solver.new_var());
        solver.add_clause(&[t]);
        Encoder {
            width,
            const_true: t,
            guard: None,
            clauses_added: 1,
        }
    }

    pub fn true_lit(&self) -> Lit {
        self.const_true
    }

    pub fn false_lit(&self) -> Lit {
        !self.const_true
    }

    pub fn guard(&self) -> Option<Lit> {
        self.guard
    }

    /// All clauses emitted from now on are activated by `guard` (if any).
    pub fn set_guard(&mut self, guard: Option<Lit>) {
        self.guard = guard;
    }

    fn emit(&mut self, solver: &mut Solver, lits: &[Lit]) {
        self.clauses_added += 1;
        match self.guard {
            None => {
                solver.add_clause(lits);
            }
            Some(g) => {
                let mut c = Vec::with_capacity(lits.len() + 1);
                c.push(!g);
                c.extend_from_slice(lits);
                solver.add_clause(&c);
            }
        }
    }

    fn known(&self, l: Lit) -> Option<bool> {
        if l == self.const_true {
            Some(true)
        } else if l == !self.const_true {
            Some(false)
        } else {
            None
        }
    }

    pub fn bit(&self, b: bool) -> Lit {
        if b {
            self.const_true
        } else {
            !self.const_true
        }
    }

    /// Constant word at the encoder width.
    pub fn word(&self, value: i64) -> Vec<Lit> {
        self.word_at(self.width as usize, value as i128)
    }

    fn word_at(&self, len: usize, value: i128) -> Vec<Lit> {
        (0..len).map(|i| self.bit((value >> i) & 1 == 1)).collect()
    }

    /// If every bit is constant, the signed value of the word.
    fn word_value(&self, w: &[Lit]) -> Option<i64> {
        let mut bits: u64 = 0;
        for (i, &l) in w.iter().enumerate() {
            bits |= u64::from(self.known(l)?) << i;
        }
        Some(truncate(w.len() as u32, bits as i128))
    }

    pub fn fresh_bit(&mut self, solver: &mut Solver) -> Lit {
        Lit::pos(solver.new_var())
    }

    pub fn fresh_word(&mut self, solver: &mut Solver) -> Vec<Lit> {
        self.fresh_word_at(solver, self.width as usize)
    }

    fn fresh_word_at(&mut self, solver: &mut Solver, len: usize) -> Vec<Lit> {
        (0..len).map(|_| Lit::pos(solver.new_var())).collect()
    }

    // -- gates -----------------------------------------------------------------

    fn and2(&mut self, s: &mut Solver, a: Lit, b: Lit) -> Lit {
        match (self.known(a), self.known(b)) {
            (Some(false), _) | (_, Some(false)) => self.false_lit(),
            (Some(true), _) => b,
            (_, Some(true)) => a,
            _ if a == b => a,
            _ if a == !b => self.false_lit(),
            _ => {
                let g = Lit::pos(s.new_var());
                self.emit(s, &[!g, a]);
                self.emit(s, &[!g, b]);
                self.emit(s, &[g, !a, !b]);
                g
            }
        }
    }

    fn or2(&mut self, s: &mut Solver, a: Lit, b: Lit) -> Lit {
        !self.and2(s, !a, !b)
    }

    fn xor2(&mut self, s: &mut Solver, a: Lit, b: Lit) -> Lit {
        match (self.known(a), self.known(b)) {
            (Some(x), Some(y)) => self.bit(x ^ y),
            (Some(false), _) => b,
            (Some(true), _) => !b,
            (_, Some(false)) => a,
            (_, Some(true)) => !a,
            _ if a == b => self.false_lit(),
            _ if a == !b => self.true_lit(),
            _ => {
                let g = Lit::pos(s.new_var());
                self.emit(s, &[!g, a, b]);
                self.emit(s, &[!g, !a, !b]);
                self.emit(s, &[g, !a, b]);
                self.emit(s, &[g, a, !b]);
                g
            }
        }
    }

    fn iff(&mut self, s: &mut Solver, a: Lit, b: Lit) -> Lit {
        !self.xor2(s, a, b)
    }

    fn ite(&mut self, s: &mut Solver, c: Lit, t: Lit, e: Lit) -> Lit {
        match self.known(c) {
            Some(true) => return t,
            Some(false) => return e,
            None => {}
        }
        if t == e {
            return t;
        }
        if self.known(t) == Some(true) && self.known(e) == Some(false) {
            return c;
        }
        if self.known(t) == Some(false) && self.known(e) == Some(true) {
            return !c;
        }
        let g = Lit::pos(s.new_var());
        self.emit(s, &[!g, !c, t]);
        self.emit(s, &[!g, c, e]);
        self.emit(s, &[g, !c, !t]);
        self.emit(s, &[g, c, !e]);
        g
    }

    fn and_many(&mut self, s: &mut Solver, xs: &[Lit]) -> Lit {
        let mut ins: Vec<Lit> = Vec::with_capacity(xs.len());
        for &x in xs {
            match self.known(x) {
                Some(false) => return self.false_lit(),
                Some(true) => {}
                None => ins.push(x),
            }
        }
        ins.sort();
        ins.dedup();
        if ins.windows(2).any(|w| w[0] == !w[1]) {
            return self.false_lit();
        }
        match ins.len() {
            0 => self.true_lit(),
            1 => ins[0],
            _ => {
                let g = Lit::pos(s.new_var());
                for &x in &ins {
                    self.emit(s, &[!g, x]);
                }
                let mut last: Vec<Lit> = vec![g];
                last.extend(ins.iter().map(|&x| !x));
                self.emit(s, &last);
                g
            }
        }
    }

    // -- words -------------------------------------------------------------------

    fn not_word(&self, a: &[Lit]) -> Vec<Lit> {
        a.iter().map(|&l| !l).collect()
    }

    fn add_with_carry(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit], carry_in: Lit) -> Vec<Lit> {
        debug_assert_eq!(a.len(), b.len());
        let mut carry = carry_in;
        let mut out = Vec::with_capacity(a.len());
        for i in 0..a.len() {
            let axb = self.xor2(s, a[i], b[i]);
            out.push(self.xor2(s, axb, carry));
            let c1 = self.and2(s, a[i], b[i]);
            let c2 = self.and2(s, axb, carry);
            carry = self.or2(s, c1, c2);
        }
        out
    }

    fn add(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let f = self.false_lit();
        self.add_with_carry(s, a, b, f)
    }

    fn sub(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        let nb = self.not_word(b);
        let t = self.true_lit();
        self.add_with_carry(s, a, &nb, t)
    }

    fn neg(&mut self, s: &mut Solver, a: &[Lit]) -> Vec<Lit> {
        let zero = self.word_at(a.len(), 0);
        self.sub(s, &zero, a)
    }

    fn mul(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> Vec<Lit> {
        debug_assert_eq!(a.len(), b.len());
        let w = a.len();
        let mut acc = self.word_at(w, 0);
        for i in 0..w {
            let mut partial = self.word_at(w, 0);
            for j in i..w {
                partial[j] = self.and2(s, b[i], a[j - i]);
            }
            acc = self.add(s, &acc, &partial);
        }
        acc
    }

    fn sext(&self, a: &[Lit], len: usize) -> Vec<Lit> {
        debug_assert!(len >= a.len() && !a.is_empty());
        let mut out = a.to_vec();
        let sign = *a.last().unwrap();
        out.resize(len, sign);
        out
    }

    fn zext(&self, a: &[Lit], len: usize) -> Vec<Lit> {
        let mut out = a.to_vec();
        out.resize(len, self.false_lit());
        out
    }

    /// `a < b`, at one extra bit so the difference's sign is exact.
    fn cmp_lt(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit], signed: bool) -> Lit {
        let n = a.len() + 1;
        let (ae, be) = if signed {
            (self.sext(a, n), self.sext(b, n))
        } else {
            (self.zext(a, n), self.zext(b, n))
        };
        let d = self.sub(s, &ae, &be);
        *d.last().unwrap()
    }

    fn ult(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> Lit {
        self.cmp_lt(s, a, b, false)
    }

    fn eq_word(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> Lit {
        debug_assert_eq!(a.len(), b.len());
        let iffs: Vec<Lit> = (0..a.len()).map(|i| self.iff(s, a[i], b[i])).collect();
        self.and_many(s, &iffs)
    }

    fn ite_word(&mut self, s: &mut Solver, c: Lit, t: &[Lit], e: &[Lit]) -> Vec<Lit> {
        debug_assert_eq!(t.len(), e.len());
        (0..t.len()).map(|i| self.ite(s, c, t[i], e[i])).collect()
    }

    // -- shifts -------------------------------------------------------------------

    /// Shift amount: the unsigned value of `b` reduced mod the width. For a
    /// power-of-two width that's just the low bits; otherwise a conditional
    /// subtraction remainder circuit.
    fn shift_amount(&mut self, s: &mut Solver, b: &[Lit]) -> Vec<Lit> {
        let w = b.len() as u64;
        if w.is_power_of_two() {
            let keep = w.trailing_zeros() as usize;
            let mut amt = vec![self.false_lit(); b.len()];
            amt[..keep].copy_from_slice(&b[..keep]);
            amt
        } else {
            self.umod_const(s, b, w)
        }
    }

    /// Unsigned remainder by the constant `m` (restoring division, MSB
    /// first). Needs `2m ≤ 2^w`, which holds for any width ≥ 4.
    fn umod_const(&mut self, s: &mut Solver, b: &[Lit], m: u64) -> Vec<Lit> {
        let w = b.len();
        let mconst = self.word_at(w, m as i128);
        let mut r = self.word_at(w, 0);
        for i in (0..w).rev() {
            let mut shifted = Vec::with_capacity(w);
            shifted.push(b[i]);
            shifted.extend_from_slice(&r[..w - 1]);
            let lt = self.ult(s, &shifted, &mconst);
            let reduced = self.sub(s, &shifted, &mconst);
            r = self.ite_word(s, !lt, &reduced, &shifted);
        }
        r
    }

    fn shift(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit], left: bool) -> Vec<Lit> {
        let w = a.len();
        let amount = self.shift_amount(s, b);
        let mut cur = a.to_vec();
        for (j, &sel) in amount.iter().enumerate() {
            if self.known(sel) == Some(false) {
                continue;
            }
            let step = 1usize.checked_shl(j as u32).unwrap_or(usize::MAX);
            let mut moved = Vec::with_capacity(w);
            for k in 0..w {
                let bit = if left {
                    if k >= step.min(w) {
                        cur[k - step]
                    } else {
                        self.false_lit()
                    }
                } else {
                    // arithmetic right: fill with the (preserved) sign bit
                    if k.checked_add(step).is_some_and(|t| t < w) {
                        cur[k + step]
                    } else {
                        cur[w - 1]
                    }
                };
                moved.push(bit);
            }
            cur = self.ite_word(s, sel, &moved, &cur);
        }
        cur
    }

    // -- division -------------------------------------------------------------------

    /// Truncated signed division and remainder as fresh constrained words.
    /// Three exclusive cases: `b = 0` gives `(0, 0)`; `MIN / -1` wraps to
    /// `(MIN, 0)`; otherwise the unique `(q, r)` with `b·q + r = a` (exact in
    /// double width), `|r| < |b|` and `r` zero or of `a`'s sign.
    fn div_rem(&mut self, s: &mut Solver, a: &[Lit], b: &[Lit]) -> (Vec<Lit>, Vec<Lit>) {
        let w = a.len();
        if let (Some(av), Some(bv)) = (self.word_value(a), self.word_value(b)) {
            let (q, r) = semantics::div_mod(w as u32, av, bv);
            return (self.word_at(w, q as i128), self.word_at(w, r as i128));
        }
        let q = self.fresh_word_at(s, w);
        let r = self.fresh_word_at(s, w);
        let zero = self.word_at(w, 0);
        let min = self.word_at(w, -(1i128 << (w - 1)));
        let neg1 = self.word_at(w, -1);

        let b_zero = self.eq_word(s, b, &zero);
        let a_min = self.eq_word(s, a, &min);
        let b_neg1 = self.eq_word(s, b, &neg1);
        let wraps = self.and2(s, a_min, b_neg1);

        self.imply_eq(s, b_zero, &q, &zero);
        self.imply_eq(s, b_zero, &r, &zero);
        self.imply_eq(s, wraps, &q, &min);
        self.imply_eq(s, wraps, &r, &zero);

        let ordinary = self.and2(s, !b_zero, !wraps);
        let n = 2 * w;
        let ax = self.sext(a, n);
        let bx = self.sext(b, n);
        let qx = self.sext(&q, n);
        let rx = self.sext(&r, n);
        let prod = self.mul(s, &bx, &qx);
        let sum = self.add(s, &prod, &rx);
        let exact = self.eq_word(s, &sum, &ax);

        let abs_r = self.abs(s, &r);
        let abs_b = self.abs(s, b);
        let small = self.ult(s, &abs_r, &abs_b);

        let r_zero = self.eq_word(s, &r, &zero);
        let same_sign = self.iff(s, r[w - 1], a[w - 1]);
        let sign_ok = self.or2(s, r_zero, same_sign);

        let holds = self.and_many(s, &[exact, small, sign_ok]);
        self.emit(s, &[!ordinary, holds]);
        (q, r)
    }

    /// |x| as an unsigned word (exact even for MIN, whose absolute value is
    /// representable unsigned).
    fn abs(&mut self, s: &mut Solver, x: &[Lit]) -> Vec<Lit> {
        let negated = self.neg(s, x);
        self.ite_word(s, x[x.len() - 1], &negated, x)
    }

    fn imply_eq(&mut self, s: &mut Solver, c: Lit, w: &[Lit], k: &[Lit]) {
        if self.known(c) == Some(false) {
            return;
        }
        for i in 0..w.len() {
            let target = match self.known(k[i]) {
                Some(true) => w[i],
                Some(false) => !w[i],
                None => self.iff(s, w[i], k[i]),
            };
            if self.known(c) == Some(true) {
                self.emit(s, &[target]);
            } else {
                self.emit(s, &[!c, target]);
            }
        }
    }

    // -- expressions -------------------------------------------------------------------

    fn lookup(&mut self, s: &mut Solver, memo: &mut Memo, name: &SsaName, ty: Ty) -> Enc {
        if let Some(e) = memo.get(name) {
            return e.clone();
        }
        let enc = if name.is_initial() {
            // Never assigned on this path: reads as zero / false.
            match ty {
                Ty::Int => Enc::Word(self.word(0)),
                Ty::Bool => Enc::Bit(self.false_lit()),
            }
        } else {
            // Assigned but not defined: a nondet input, fully unconstrained.
            match ty {
                Ty::Int => Enc::Word(self.fresh_word(s)),
                Ty::Bool => Enc::Bit(self.fresh_bit(s)),
            }
        };
        memo.insert(name.clone(), enc.clone());
        enc
    }

    pub fn encode_expr(&mut self, s: &mut Solver, memo: &mut Memo, e: &Expr<SsaName>) -> Enc {
        match e {
            Expr::Int(v) => Enc::Word(self.word(*v)),
            Expr::Bool(b) => Enc::Bit(self.bit(*b)),
            Expr::Var(name, ty) => self.lookup(s, memo, name, *ty),
            Expr::Un(op, inner) => {
                let i = self.encode_expr(s, memo, inner);
                match op {
                    UnOp::Neg => Enc::Word(self.neg(s, i.as_word())),
                    UnOp::BitNot => Enc::Word(self.not_word(i.as_word())),
                    UnOp::Not => Enc::Bit(!i.as_bit()),
                }
            }
            Expr::Bin(op, lhs, rhs) => {
                let operand_ty = lhs.ty();
                let l = self.encode_expr(s, memo, lhs);
                let r = self.encode_expr(s, memo, rhs);
                self.encode_binop(s, *op, operand_ty, &l, &r)
            }
        }
    }

    fn encode_binop(&mut self, s: &mut Solver, op: BinOp, operand_ty: Ty, l: &Enc, r: &Enc) -> Enc {
        use BinOp::*;
        match op {
            Add => Enc::Word(self.add(s, l.as_word(), r.as_word())),
            Sub => Enc::Word(self.sub(s, l.as_word(), r.as_word())),
            Mul => Enc::Word(self.mul(s, l.as_word(), r.as_word())),
            Div => Enc::Word(self.div_rem(s, l.as_word(), r.as_word()).0),
            Rem => Enc::Word(self.div_rem(s, l.as_word(), r.as_word()).1),
            BitAnd | BitOr | BitXor => {
                let (a, b) = (l.as_word(), r.as_word());
                let bits: Vec<Lit> = (0..a.len())
                    .map(|i| match op {
                        BitAnd => self.and2(s, a[i], b[i]),
                        BitOr => self.or2(s, a[i], b[i]),
                        _ => self.xor2(s, a[i], b[i]),
                    })
                    .collect();
                Enc::Word(bits)
            }
            Shl => Enc::Word(self.shift(s, l.as_word(), r.as_word(), true)),
            Shr => Enc::Word(self.shift(s, l.as_word(), r.as_word(), false)),
            Eq | Ne => {
                let same = match operand_ty {
                    Ty::Int => self.eq_word(s, l.as_word(), r.as_word()),
                    Ty::Bool => self.iff(s, l.as_bit(), r.as_bit()),
                };
                Enc::Bit(if op == Eq { same } else { !same })
            }
            Lt => Enc::Bit(self.cmp_lt(s, l.as_word(), r.as_word(), true)),
            Gt => Enc::Bit(self.cmp_lt(s, r.as_word(), l.as_word(), true)),
            Le => {
                let gt = self.cmp_lt(s, r.as_word(), l.as_word(), true);
                Enc::Bit(!gt)
            }
            Ge => {
                let lt = self.cmp_lt(s, l.as_word(), r.as_word(), true);
                Enc::Bit(!lt)
            }
            And => Enc::Bit(self.and2(s, l.as_bit(), r.as_bit())),
            Or => Enc::Bit(self.or2(s, l.as_bit(), r.as_bit())),
        }
    }

    /// Encode a boolean expression to its literal.
    pub fn encode_bool(&mut self, s: &mut Solver, memo: &mut Memo, e: &Expr<SsaName>) -> Lit {
        self.encode_expr(s, memo, e).as_bit()
    }

    /// Encode a definition: the defined name always gets fresh bits tied to
    /// the right-hand side with equality clauses, so every definition is a
    /// visible, locally-invertible unit of the CNF.
    pub fn encode_def(&mut self, s: &mut Solver, memo: &mut Memo, def: &Def) {
        let rhs = self.encode_expr(s, memo, &def.expr);
        let enc = match rhs {
            Enc::Word(bits) => {
                let fresh = self.fresh_word_at(s, bits.len());
                for (f, b) in fresh.iter().zip(&bits) {
                    self.emit(s, &[!*f, *b]);
                    self.emit(s, &[*f, !*b]);
                }
                Enc::Word(fresh)
            }
            Enc::Bit(b) => {
                let f = self.fresh_bit(s);
                self.emit(s, &[!f, b]);
                self.emit(s, &[f, !b]);
                Enc::Bit(f)
            }
        };
        memo.insert(def.name.clone(), enc);
    }

    /// Read an encoded value out of a model.
    pub fn value_from_model(&self, model: &[bool], enc: &Enc) -> Value {
        match enc {
            Enc::Bit(l) => Value::Bool(lit_in_model(model, *l)),
            Enc::Word(w) => {
                let mut bits: u64 = 0;
                for (i, &l) in w.iter().enumerate() {
                    bits |= u64::from(lit_in_model(model, l)) << i;
                }
                Value::Int(truncate(w.len() as u32, bits as i128))
            }
        }
    }
}

fn lit_in_model(model: &[bool], l: Lit) -> bool {
    model[l.var().index()] == l.is_pos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::goto::Name;
    use crate::solver::Verdict;

    fn name(base: &str) -> SsaName {
        SsaName {
            base: Name::from(base),
            frame: 1,
            version: 1,
        }
    }

    fn pin_word(s: &mut Solver, w: &[Lit], value: i64) {
        for (i, &l) in w.iter().enumerate() {
            let want = (value >> i) & 1 == 1;
            s.add_clause(&[if want { l } else { !l }]);
        }
    }

    /// Run `a op b` through the circuit with both operands as pinned
    /// symbolic words and read the result from the model.
    fn circuit_binop(width: u32, op: BinOp, a: i64, b: i64) -> Value {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, width);
        let mut memo = Memo::new();
        let (na, nb) = (name("a"), name("b"));
        let expr = Expr::Bin(
            op,
            Box::new(Expr::Var(na.clone(), Ty::Int)),
            Box::new(Expr::Var(nb.clone(), Ty::Int)),
        );
        let out = enc.encode_expr(&mut s, &mut memo, &expr);
        pin_word(&mut s, memo[&na].as_word(), truncate(width, a as i128));
        pin_word(&mut s, memo[&nb].as_word(), truncate(width, b as i128));
        assert_eq!(s.solve(&[]), Verdict::Sat, "{op:?} {a} {b}");
        enc.value_from_model(s.model().unwrap(), &out)
    }

    fn reference_binop(width: u32, op: BinOp, a: i64, b: i64) -> Value {
        let e: Expr<SsaName> = Expr::Bin(
            op,
            Box::new(Expr::Int(truncate(width, a as i128))),
            Box::new(Expr::Int(truncate(width, b as i128))),
        );
        semantics::const_eval(width, &e).expect("closed expression")
    }

    fn check_binop(width: u32, op: BinOp, a: i64, b: i64) {
        let got = circuit_binop(width, op, a, b);
        let want = reference_binop(width, op, a, b);
        assert_eq!(got, want, "width {width}: {a} {op:?} {b}");
    }

    const INT_OPS: [BinOp; 10] = [
        BinOp::Add,
        BinOp::Sub,
        BinOp::Mul,
        BinOp::Div,
        BinOp::Rem,
        BinOp::BitAnd,
        BinOp::BitOr,
        BinOp::BitXor,
        BinOp::Shl,
        BinOp::Shr,
    ];

    const CMP_OPS: [BinOp; 6] = [
        BinOp::Eq,
        BinOp::Ne,
        BinOp::Lt,
        BinOp::Le,
        BinOp::Gt,
        BinOp::Ge,
    ];

    #[test]
    fn constants_fold_without_clauses() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 8);
        let mut memo = Memo::new();
        let e: Expr<SsaName> = Expr::Bin(
            BinOp::Mul,
            Box::new(Expr::Int(7)),
            Box::new(Expr::Bin(BinOp::Add, Box::new(Expr::Int(3)), Box::new(Expr::Int(2)))),
        );
        let out = enc.encode_expr(&mut s, &mut memo, &e);
        assert_eq!(enc.word_value(out.as_word()), Some(35));
        assert_eq!(enc.clauses_added, 1); // only the TRUE anchor
        assert_eq!(s.num_vars(), 1);
    }

    #[test]
    fn sampled_pairs_match_reference_at_width_4() {
        let interesting = [-8i64, -7, -5, -2, -1, 0, 1, 2, 3, 5, 7];
        for op in INT_OPS.into_iter().chain(CMP_OPS) {
            for &a in &interesting {
                for &b in &interesting {
                    check_binop(4, op, a, b);
                }
            }
        }
    }

    #[test]
    fn non_power_of_two_width_shifts_and_div() {
        for op in [BinOp::Shl, BinOp::Shr, BinOp::Div, BinOp::Rem] {
            for &(a, b) in &[
                (11i64, 3i64),
                (-13, 3),
                (-16, -1),
                (9, 0),
                (1, -1),
                (-16, 5),
                (7, 19),
            ] {
                check_binop(5, op, a, b);
            }
        }
    }

    #[test]
    fn wider_width_spot_checks() {
        check_binop(32, BinOp::Mul, 123_456, -789);
        check_binop(32, BinOp::Div, i32::MIN as i64, -1);
        check_binop(32, BinOp::Rem, -7, 2);
        check_binop(32, BinOp::Shl, 1, 31);
        check_binop(32, BinOp::Shr, i32::MIN as i64, 1);
        check_binop(32, BinOp::Lt, i32::MIN as i64, i32::MAX as i64);
        check_binop(64, BinOp::Add, i64::MAX, 1);
        check_binop(64, BinOp::Shl, 1, -1);
    }

    #[test]
    fn division_edge_rows() {
        // b = 0 → (0,0); MIN / -1 wraps; sign of remainder follows a.
        check_binop(4, BinOp::Div, 5, 0);
        check_binop(4, BinOp::Rem, 5, 0);
        check_binop(4, BinOp::Div, -8, -1);
        check_binop(4, BinOp::Rem, -8, -1);
        check_binop(4, BinOp::Div, -7, 2);
        check_binop(4, BinOp::Rem, -7, 2);
        check_binop(4, BinOp::Div, 7, -2);
        check_binop(4, BinOp::Rem, 7, -2);
    }

    #[test]
    fn unary_ops_match_reference() {
        for v in -8i64..8 {
            for (op, f) in [
                (UnOp::Neg, &(|x: i64| -x) as &dyn Fn(i64) -> i64),
                (UnOp::BitNot, &|x: i64| !x),
            ] {
                let mut s = Solver::new();
                let mut enc = Encoder::new(&mut s, 4);
                let mut memo = Memo::new();
                let n = name("x");
                let e = Expr::Un(op, Box::new(Expr::Var(n.clone(), Ty::Int)));
                let out = enc.encode_expr(&mut s, &mut memo, &e);
                pin_word(&mut s, memo[&n].as_word(), v);
                assert_eq!(s.solve(&[]), Verdict::Sat);
                let got = enc.value_from_model(s.model().unwrap(), &out);
                assert_eq!(got, Value::Int(truncate(4, f(v) as i128)), "{op:?} {v}");
            }
        }
    }

    #[test]
    fn initial_version_reads_as_zero() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 8);
        let mut memo = Memo::new();
        let zero_read = SsaName {
            base: Name::from("x"),
            frame: 1,
            version: 0,
        };
        let e = Expr::Bin(
            BinOp::Add,
            Box::new(Expr::Var(zero_read, Ty::Int)),
            Box::new(Expr::Int(9)),
        );
        let out = enc.encode_expr(&mut s, &mut memo, &e);
        assert_eq!(enc.word_value(out.as_word()), Some(9));
    }

    #[test]
    fn nondet_mints_once_per_memo() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 8);
        let mut memo = Memo::new();
        let n = name("x");
        let e = Expr::Var(n.clone(), Ty::Int);
        let first = enc.encode_expr(&mut s, &mut memo, &e);
        let again = enc.encode_expr(&mut s, &mut memo, &e);
        assert_eq!(first.as_word(), again.as_word());
        let mut other_memo = Memo::new();
        let fresh = enc.encode_expr(&mut s, &mut other_memo, &e);
        assert_ne!(first.as_word()[0], fresh.as_word()[0]);
    }

    #[test]
    fn encode_def_pins_fresh_bits_to_rhs() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 8);
        let mut memo = Memo::new();
        let x = name("x");
        let def = Def {
            name: name("y"),
            ty: Ty::Int,
            expr: Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Var(x.clone(), Ty::Int)),
                Box::new(Expr::Int(3)),
            ),
            loc: crate::frontend::Loc::default(),
        };
        enc.encode_def(&mut s, &mut memo, &def);
        pin_word(&mut s, memo[&x].as_word(), 14);
        assert_eq!(s.solve(&[]), Verdict::Sat);
        let y = enc.value_from_model(s.model().unwrap(), &memo[&name("y")]);
        assert_eq!(y, Value::Int(42));
        // Even a constant rhs gets fresh, equality-bound bits.
        let before = s.num_vars();
        let konst = Def {
            name: name("z"),
            ty: Ty::Int,
            expr: Expr::Int(5),
            loc: crate::frontend::Loc::default(),
        };
        enc.encode_def(&mut s, &mut memo, &konst);
        assert_eq!(s.num_vars(), before + 8);
    }

    #[test]
    fn guarded_clauses_only_bind_under_the_guard() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 4);
        let mut memo = Memo::new();
        let g = enc.fresh_bit(&mut s);
        enc.set_guard(Some(g));
        // Under g: y := x + 1 and (contradiction) y = x.
        let x = name("x");
        let def = Def {
            name: name("y"),
            ty: Ty::Int,
            expr: Expr::Bin(
                BinOp::Add,
                Box::new(Expr::Var(x.clone(), Ty::Int)),
                Box::new(Expr::Int(1)),
            ),
            loc: crate::frontend::Loc::default(),
        };
        enc.encode_def(&mut s, &mut memo, &def);
        let eq = Expr::Bin(
            BinOp::Eq,
            Box::new(Expr::Var(name("y"), Ty::Int)),
            Box::new(Expr::Var(x.clone(), Ty::Int)),
        );
        let same = enc.encode_bool(&mut s, &mut memo, &eq);
        enc.set_guard(None);
        assert_eq!(s.solve(&[g, same]), Verdict::Unsat);
        assert_eq!(s.solve(&[same]), Verdict::Sat); // without g nothing binds
        assert_eq!(s.solve(&[g]), Verdict::Sat);
    }

    #[test]
    fn booleans_compare_with_iff() {
        let mut s = Solver::new();
        let mut enc = Encoder::new(&mut s, 4);
        let mut memo = Memo::new();
        let a = SsaName { base: Name::from("a"), frame: 1, version: 1 };
        let e = Expr::Bin(
            BinOp::Eq,
            Box::new(Expr::Var(a.clone(), Ty::Bool)),
            Box::new(Expr::Bool(false)),
        );
        let out = enc.encode_bool(&mut s, &mut memo, &e);
        s.add_clause(&[memo[&a].as_bit()]); // a := true
        assert_eq!(s.solve(&[out]), Verdict::Unsat);
        assert_eq!(s.solve(&[!out]), Verdict::Sat);
    }
}
