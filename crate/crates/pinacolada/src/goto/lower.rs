//! Lowering from the MiniC AST to the flat instruction IR.
//!
//! Structured control flow compiles to `BRANCH`/`GOTO`. `&&`/`||` become
//! nested branches (short-circuit), so downstream consumers never see lazy
//! boolean operators. Calls and nondet markers embedded in expressions are
//! hoisted into fresh `$t<n>` temporaries; a direct `x = nondet_int();`
//! assigns into `x` itself so counterexamples name the user's variable.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::frontend::ast;
use crate::frontend::Loc;
use crate::goto::{BinOp, Expr, GotoFunction, GotoProgram, Instruction, Name, Ty, UnOp, VarRef};

/// Lower a type-checked AST. Total: any failure here is a frontend bug.
pub fn lower(program: &ast::Ast) -> GotoProgram {
    let globals: Vec<VarRef> = program
        .globals
        .iter()
        .map(|g| VarRef {
            name: Name::from(g.name.as_str()),
            global: true,
            ty: g.ty,
        })
        .collect();
    let global_map: HashMap<&str, VarRef> = globals
        .iter()
        .map(|v| (v.name.as_ref() as &str, v.clone()))
        .collect();
    let sigs: HashMap<&str, Option<Ty>> = program
        .functions
        .iter()
        .map(|f| (f.name.as_str(), f.ret))
        .collect();

    let mut functions = BTreeMap::new();
    for f in &program.functions {
        // Borrow global_map/sigs per function; maps are read-only here.
        let lowered = FnLowerer::new(f, &global_map, &sigs).run();
        functions.insert(lowered.name.clone(), lowered);
    }
    GotoProgram { globals, functions }
}

/// Forward-reference label; all branch targets go through the patch table.
type Label = usize;

struct FnLowerer<'a> {
    func: &'a ast::FunctionDecl,
    global_map: &'a HashMap<&'a str, VarRef>,
    sigs: &'a HashMap<&'a str, Option<Ty>>,
    body: Vec<Instruction>,
    labels: Vec<Option<usize>>,
    locals: Vec<VarRef>,
    local_map: HashMap<String, VarRef>,
    next_temp: u32,
}

impl<'a> FnLowerer<'a> {
    fn new(
        func: &'a ast::FunctionDecl,
        global_map: &'a HashMap<&'a str, VarRef>,
        sigs: &'a HashMap<&'a str, Option<Ty>>,
    ) -> FnLowerer<'a> {
        FnLowerer {
            func,
            global_map,
            sigs,
            body: Vec::new(),
            labels: Vec::new(),
            locals: Vec::new(),
            local_map: HashMap::new(),
            next_temp: 0,
        }
    }

    fn run(mut self) -> GotoFunction {
        let params: Vec<VarRef> = self
            .func
            .params
            .iter()
            .map(|p| VarRef {
                name: Name::from(p.name.as_str()),
                global: false,
                ty: p.ty,
            })
            .collect();
        for p in &params {
            self.local_map.insert(p.name.to_string(), p.clone());
        }

        let falls = self.lower_block(&self.func.body);
        if falls {
            // Falling off the end returns the type's zero (0 / false).
            let expr = match self.func.ret {
                Some(Ty::Int) => Some(Expr::Int(0)),
                Some(Ty::Bool) => Some(Expr::Bool(false)),
                None => None,
            };
            self.body.push(Instruction::Return {
                expr,
                loc: self.func.loc,
            });
        }

        self.patch_targets();
        let loop_heads = compute_loop_heads(&self.body);
        GotoFunction {
            name: Name::from(self.func.name.as_str()),
            params,
            locals: self.locals,
            ret: self.func.ret,
            body: self.body,
            loop_heads,
        }
    }

    // -- label plumbing ----------------------------------------------------

    fn new_label(&mut self) -> Label {
        self.labels.push(None);
        self.labels.len() - 1
    }

    fn bind(&mut self, label: Label) {
        debug_assert!(self.labels[label].is_none(), "label bound twice");
        self.labels[label] = Some(self.body.len());
    }

    fn patch_targets(&mut self) {
        let resolve = |label: usize, labels: &[Option<usize>]| -> usize {
            labels[label].expect("unbound label")
        };
        for ins in &mut self.body {
            match ins {
                Instruction::Branch {
                    target_true,
                    target_false,
                    ..
                } => {
                    *target_true = resolve(*target_true, &self.labels);
                    *target_false = resolve(*target_false, &self.labels);
                }
                Instruction::Goto { target, .. } => {
                    *target = resolve(*target, &self.labels);
                }
                _ => {}
            }
        }
    }

    // -- variables ----------------------------------------------------------

    fn resolve(&self, name: &str) -> VarRef {
        if let Some(v) = self.local_map.get(name) {
            return v.clone();
        }
        self.global_map
            .get(name)
            .cloned()
            .unwrap_or_else(|| panic!("unresolved variable `{name}` survived type checking"))
    }

    fn declare_local(&mut self, name: &str, ty: Ty) -> VarRef {
        let v = VarRef {
            name: Name::from(name),
            global: false,
            ty,
        };
        self.locals.push(v.clone());
        self.local_map.insert(name.to_string(), v.clone());
        v
    }

    fn fresh_temp(&mut self, ty: Ty) -> VarRef {
        let name = format!("$t{}", self.next_temp);
        self.next_temp += 1;
        let v = VarRef {
            name: Name::from(name.as_str()),
            global: false,
            ty,
        };
        self.locals.push(v.clone());
        v
    }

    // -- statements ----------------------------------------------------------

    /// Lower a block; returns whether control can fall out of its end.
    /// Statements after a `return` are still emitted (they get an
    /// unreachable-code warning later) but cannot make the block fall.
    fn lower_block(&mut self, block: &ast::Block) -> bool {
        let mut falls = true;
        for stmt in &block.stmts {
            let stmt_falls = self.lower_stmt(stmt);
            falls = falls && stmt_falls;
        }
        falls
    }

    fn lower_stmt(&mut self, stmt: &ast::Stmt) -> bool {
        match stmt {
            ast::Stmt::Decl {
                ty,
                name,
                init,
                loc,
            } => {
                // Declare after lowering the initializer; `int x = x;` is
                // already rejected upstream.
                match init {
                    Some(e) => {
                        let prepared = self.prepare_assign_rhs(e);
                        let var = self.declare_local(name, *ty);
                        self.finish_assign(var, prepared, *loc);
                    }
                    None => {
                        self.declare_local(name, *ty);
                    }
                }
                true
            }
            ast::Stmt::Assign { name, expr, loc } => {
                let prepared = self.prepare_assign_rhs(expr);
                let var = self.resolve(name);
                self.finish_assign(var, prepared, *loc);
                true
            }
            ast::Stmt::If {
                cond,
                then_blk,
                else_blk,
                loc,
            } => {
                let then_lbl = self.new_label();
                let else_lbl = self.new_label();
                let join_lbl = self.new_label();
                self.lower_cond(cond, then_lbl, else_lbl);
                self.bind(then_lbl);
                let falls_then = self.lower_block(then_blk);
                if falls_then {
                    self.body.push(Instruction::Goto {
                        target: join_lbl,
                        loc: *loc,
                    });
                }
                let falls_else = match else_blk {
                    Some(e) => {
                        self.bind(else_lbl);
                        let falls = self.lower_block(e);
                        if falls {
                            self.body.push(Instruction::Goto {
                                target: join_lbl,
                                loc: *loc,
                            });
                        }
                        falls
                    }
                    None => {
                        self.bind(else_lbl);
                        true
                    }
                };
                self.bind(join_lbl);
                falls_then || falls_else
            }
            ast::Stmt::While { cond, body, loc } => {
                let head_lbl = self.new_label();
                let body_lbl = self.new_label();
                let exit_lbl = self.new_label();
                self.bind(head_lbl);
                self.lower_cond(cond, body_lbl, exit_lbl);
                self.bind(body_lbl);
                let falls = self.lower_block(body);
                if falls {
                    self.body.push(Instruction::Goto {
                        target: head_lbl,
                        loc: *loc,
                    });
                }
                self.bind(exit_lbl);
                true
            }
            ast::Stmt::Assert { cond, loc } => {
                let pure = self.lower_expr(cond);
                self.body.push(Instruction::Assert { cond: pure, loc: *loc });
                true
            }
            ast::Stmt::Assume { cond, loc } => {
                let pure = self.lower_expr(cond);
                self.body.push(Instruction::Assume { cond: pure, loc: *loc });
                true
            }
            ast::Stmt::Call { callee, args, loc } => {
                let args: Vec<Expr<VarRef>> = args.iter().map(|a| self.lower_expr(a)).collect();
                self.body.push(Instruction::Call {
                    dest: None,
                    callee: Name::from(callee.as_str()),
                    args,
                    loc: *loc,
                });
                true
            }
            ast::Stmt::Return { expr, loc } => {
                let expr = expr.as_ref().map(|e| self.lower_expr(e));
                self.body.push(Instruction::Return { expr, loc: *loc });
                false
            }
            ast::Stmt::Block { block, .. } => self.lower_block(block),
        }
    }

    // -- assignments ----------------------------------------------------------

    /// Right-hand sides that are exactly a call or a nondet marker become the
    /// matching instruction with the user's variable as destination; anything
    /// else lowers to a pure expression first.
    fn prepare_assign_rhs(&mut self, expr: &ast::Expr) -> PreparedRhs {
        match expr {
            ast::Expr::NondetInt(_) => PreparedRhs::Nondet(Ty::Int),
            ast::Expr::NondetBool(_) => PreparedRhs::Nondet(Ty::Bool),
            ast::Expr::Call { callee, args, .. } => {
                let args: Vec<Expr<VarRef>> = args.iter().map(|a| self.lower_expr(a)).collect();
                PreparedRhs::Call(Name::from(callee.as_str()), args)
            }
            other => PreparedRhs::Pure(self.lower_expr(other)),
        }
    }

    fn finish_assign(&mut self, var: VarRef, rhs: PreparedRhs, loc: Loc) {
        match rhs {
            PreparedRhs::Nondet(ty) => self.body.push(Instruction::Nondet { var, ty, loc }),
            PreparedRhs::Call(callee, args) => self.body.push(Instruction::Call {
                dest: Some(var),
                callee,
                args,
                loc,
            }),
            PreparedRhs::Pure(expr) => self.body.push(Instruction::Assign { var, expr, loc }),
        }
    }

    // -- conditions ----------------------------------------------------------

    /// Jumping lowering for branch conditions: `&&`, `||` and `!` become
    /// control flow, everything else becomes one BRANCH on a pure expression.
    fn lower_cond(&mut self, cond: &ast::Expr, true_lbl: Label, false_lbl: Label) {
        match cond {
            ast::Expr::Bin(BinOp::And, lhs, rhs, _) => {
                let mid = self.new_label();
                self.lower_cond(lhs, mid, false_lbl);
                self.bind(mid);
                self.lower_cond(rhs, true_lbl, false_lbl);
            }
            ast::Expr::Bin(BinOp::Or, lhs, rhs, _) => {
                let mid = self.new_label();
                self.lower_cond(lhs, true_lbl, mid);
                self.bind(mid);
                self.lower_cond(rhs, true_lbl, false_lbl);
            }
            ast::Expr::Un(UnOp::Not, inner, _) => {
                self.lower_cond(inner, false_lbl, true_lbl);
            }
            other => {
                let pure = self.lower_expr(other);
                self.body.push(Instruction::Branch {
                    cond: pure,
                    target_true: true_lbl,
                    target_false: false_lbl,
                    loc: other.loc(),
                });
            }
        }
    }

    // -- expressions ----------------------------------------------------------

    /// Lower to a pure IR expression, hoisting calls, nondets and
    /// short-circuit operators into temporaries (left-to-right).
    fn lower_expr(&mut self, expr: &ast::Expr) -> Expr<VarRef> {
        match expr {
            ast::Expr::Int(v, _) => Expr::Int(*v),
            ast::Expr::Bool(b, _) => Expr::Bool(*b),
            ast::Expr::Var(name, _) => {
                let v = self.resolve(name);
                let ty = v.ty;
                Expr::Var(v, ty)
            }
            ast::Expr::Un(op, inner, _) => Expr::Un(*op, Box::new(self.lower_expr(inner))),
            ast::Expr::Bin(BinOp::And, lhs, rhs, loc) => {
                // t = lhs; if (t) { t = rhs; }
                self.lower_short_circuit(lhs, rhs, *loc, true)
            }
            ast::Expr::Bin(BinOp::Or, lhs, rhs, loc) => {
                // t = lhs; if (!t) { t = rhs; }
                self.lower_short_circuit(lhs, rhs, *loc, false)
            }
            ast::Expr::Bin(op, lhs, rhs, _) => {
                let l = self.lower_expr(lhs);
                let r = self.lower_expr(rhs);
                Expr::Bin(*op, Box::new(l), Box::new(r))
            }
            ast::Expr::Call { callee, args, loc } => {
                let args: Vec<Expr<VarRef>> = args.iter().map(|a| self.lower_expr(a)).collect();
                let ret = self.sigs[callee.as_str()].expect("void call in expression rejected");
                let t = self.fresh_temp(ret);
                self.body.push(Instruction::Call {
                    dest: Some(t.clone()),
                    callee: Name::from(callee.as_str()),
                    args,
                    loc: *loc,
                });
                let ty = t.ty;
                Expr::Var(t, ty)
            }
            ast::Expr::NondetInt(loc) => {
                let t = self.fresh_temp(Ty::Int);
                self.body.push(Instruction::Nondet {
                    var: t.clone(),
                    ty: Ty::Int,
                    loc: *loc,
                });
                Expr::Var(t, Ty::Int)
            }
            ast::Expr::NondetBool(loc) => {
                let t = self.fresh_temp(Ty::Bool);
                self.body.push(Instruction::Nondet {
                    var: t.clone(),
                    ty: Ty::Bool,
                    loc: *loc,
                });
                Expr::Var(t, Ty::Bool)
            }
        }
    }

    fn lower_short_circuit(
        &mut self,
        lhs: &ast::Expr,
        rhs: &ast::Expr,
        loc: Loc,
        is_and: bool,
    ) -> Expr<VarRef> {
        let t = self.fresh_temp(Ty::Bool);
        let l = self.lower_expr(lhs);
        self.body.push(Instruction::Assign {
            var: t.clone(),
            expr: l,
            loc,
        });
        let eval_rhs = self.new_label();
        let done = self.new_label();
        let cond = Expr::Var(t.clone(), Ty::Bool);
        let (target_true, target_false) = if is_and {
            (eval_rhs, done)
        } else {
            (done, eval_rhs)
        };
        self.body.push(Instruction::Branch {
            cond,
            target_true,
            target_false,
            loc,
        });
        self.bind(eval_rhs);
        let r = self.lower_expr(rhs);
        self.body.push(Instruction::Assign {
            var: t.clone(),
            expr: r,
            loc,
        });
        self.bind(done);
        Expr::Var(t, Ty::Bool)
    }
}

enum PreparedRhs {
    Pure(Expr<VarRef>),
    Call(Name, Vec<Expr<VarRef>>),
    Nondet(Ty),
}

fn compute_loop_heads(body: &[Instruction]) -> BTreeSet<usize> {
    let mut heads = BTreeSet::new();
    for (i, ins) in body.iter().enumerate() {
        match ins {
            Instruction::Goto { target, .. } if *target <= i => {
                heads.insert(*target);
            }
            Instruction::Branch {
                target_true,
                target_false,
                ..
            } => {
                if *target_true <= i {
                    heads.insert(*target_true);
                }
                if *target_false <= i {
                    heads.insert(*target_false);
                }
            }
            _ => {}
        }
    }
    heads
}
