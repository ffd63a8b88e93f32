use std::collections::{HashMap, HashSet};

use super::ast::*;
use super::{FrontendError, Loc, Warning};
use crate::goto::{BinOp, Ty, UnOp};

/// Validate an AST: scoping, types, call shapes and the `main` contract.
/// Returns advisory warnings (reads that may precede any assignment).
pub fn check(ast: &Ast) -> Result<Vec<Warning>, FrontendError> {
    let mut checker = Checker::new(ast)?;
    for func in &ast.functions {
        checker.check_function(func)?;
    }
    checker.check_main(ast)?;
    let mut warnings = Vec::new();
    for func in &ast.functions {
        warn_unassigned_reads(func, &checker.globals, &mut warnings);
    }
    Ok(warnings)
}

struct FuncSig {
    params: Vec<Ty>,
    ret: Option<Ty>,
}

struct Checker {
    globals: HashMap<String, Ty>,
    sigs: HashMap<String, FuncSig>,
}

fn type_error(loc: Loc, message: String) -> FrontendError {
    FrontendError::Type {
        line: loc.line,
        column: loc.col,
        message,
    }
}

impl Checker {
    fn new(ast: &Ast) -> Result<Checker, FrontendError> {
        let mut globals = HashMap::new();
        for g in &ast.globals {
            if globals.insert(g.name.clone(), g.ty).is_some() {
                return Err(type_error(g.loc, format!("redeclared global `{}`", g.name)));
            }
        }
        let mut sigs = HashMap::new();
        for f in &ast.functions {
            if f.name == "nondet_int" || f.name == "nondet_bool" {
                return Err(type_error(
                    f.loc,
                    format!("`{}` is a reserved builtin name", f.name),
                ));
            }
            let sig = FuncSig {
                params: f.params.iter().map(|p| p.ty).collect(),
                ret: f.ret,
            };
            if sigs.insert(f.name.clone(), sig).is_some() {
                return Err(type_error(
                    f.loc,
                    format!("redeclared function `{}`", f.name),
                ));
            }
        }
        Ok(Checker { globals, sigs })
    }

    fn check_main(&self, ast: &Ast) -> Result<(), FrontendError> {
        let Some(main) = ast.functions.iter().find(|f| f.name == "main") else {
            return Err(type_error(
                Loc::new(1, 1),
                "program must define `int main()`".to_string(),
            ));
        };
        if !main.params.is_empty() {
            return Err(type_error(main.loc, "main takes no parameters".to_string()));
        }
        if main.ret != Some(Ty::Int) {
            return Err(type_error(main.loc, "main must return int".to_string()));
        }
        Ok(())
    }

    fn check_function(&mut self, func: &FunctionDecl) -> Result<(), FrontendError> {
        let mut scopes = Scopes::new();
        scopes.push();
        let mut declared: HashSet<String> = HashSet::new();
        for p in &func.params {
            if !declared.insert(p.name.clone()) {
                return Err(type_error(
                    p.loc,
                    format!("redeclared parameter `{}`", p.name),
                ));
            }
            scopes.declare(&p.name, p.ty);
        }
        self.check_block(&func.body, func, &mut scopes, &mut declared)?;
        scopes.pop();
        Ok(())
    }

    fn check_block(
        &self,
        block: &Block,
        func: &FunctionDecl,
        scopes: &mut Scopes,
        declared: &mut HashSet<String>,
    ) -> Result<(), FrontendError> {
        scopes.push();
        for stmt in &block.stmts {
            self.check_stmt(stmt, func, scopes, declared)?;
        }
        scopes.pop();
        Ok(())
    }

    fn check_stmt(
        &self,
        stmt: &Stmt,
        func: &FunctionDecl,
        scopes: &mut Scopes,
        declared: &mut HashSet<String>,
    ) -> Result<(), FrontendError> {
        match stmt {
            Stmt::Decl {
                ty,
                name,
                init,
                loc,
            } => {
                if let Some(e) = init {
                    let ety = self.expr_ty(e, scopes)?;
                    if ety != *ty {
                        return Err(type_error(
                            e.loc(),
                            format!("initializer of `{name}` has type {ety}, expected {ty}"),
                        ));
                    }
                }
                // Locals are unique per function: exploration and witness
                // naming key on the bare identifier.
                if !declared.insert(name.clone()) {
                    return Err(type_error(*loc, format!("redeclared variable `{name}`")));
                }
                scopes.declare(name, *ty);
                Ok(())
            }
            Stmt::Assign { name, expr, loc } => {
                let Some(vty) = scopes.lookup(name).or_else(|| self.globals.get(name).copied())
                else {
                    return Err(type_error(*loc, format!("undeclared variable `{name}`")));
                };
                let ety = self.expr_ty(expr, scopes)?;
                if ety != vty {
                    return Err(type_error(
                        expr.loc(),
                        format!("cannot assign {ety} to `{name}` of type {vty}"),
                    ));
                }
                Ok(())
            }
            Stmt::If {
                cond,
                then_blk,
                else_blk,
                ..
            } => {
                self.require_bool(cond, scopes, "if condition")?;
                self.check_block(then_blk, func, scopes, declared)?;
                if let Some(e) = else_blk {
                    self.check_block(e, func, scopes, declared)?;
                }
                Ok(())
            }
            Stmt::While { cond, body, .. } => {
                self.require_bool(cond, scopes, "while condition")?;
                self.check_block(body, func, scopes, declared)
            }
            Stmt::Assert { cond, .. } => self.require_bool(cond, scopes, "assert condition"),
            Stmt::Assume { cond, .. } => self.require_bool(cond, scopes, "assume condition"),
            Stmt::Call { callee, args, loc } => {
                self.check_call(callee, args, *loc, scopes)?;
                Ok(())
            }
            Stmt::Return { expr, loc } => match (func.ret, expr) {
                (None, None) => Ok(()),
                (None, Some(e)) => Err(type_error(
                    e.loc(),
                    format!("void function `{}` cannot return a value", func.name),
                )),
                (Some(ty), None) => Err(type_error(
                    *loc,
                    format!("function `{}` must return {ty}", func.name),
                )),
                (Some(ty), Some(e)) => {
                    let ety = self.expr_ty(e, scopes)?;
                    if ety != ty {
                        return Err(type_error(
                            e.loc(),
                            format!("return type mismatch: expected {ty}, found {ety}"),
                        ));
                    }
                    Ok(())
                }
            },
            Stmt::Block { block, .. } => self.check_block(block, func, scopes, declared),
        }
    }

    fn require_bool(
        &self,
        expr: &Expr,
        scopes: &Scopes,
        what: &str,
    ) -> Result<(), FrontendError> {
        let ty = self.expr_ty(expr, scopes)?;
        if ty != Ty::Bool {
            return Err(type_error(expr.loc(), format!("{what} must be bool, found {ty}")));
        }
        Ok(())
    }

    fn check_call(
        &self,
        callee: &str,
        args: &[Expr],
        loc: Loc,
        scopes: &Scopes,
    ) -> Result<Option<Ty>, FrontendError> {
        let Some(sig) = self.sigs.get(callee) else {
            return Err(type_error(loc, format!("unknown function `{callee}`")));
        };
        if sig.params.len() != args.len() {
            return Err(type_error(
                loc,
                format!(
                    "`{callee}` takes {} argument(s), {} given",
                    sig.params.len(),
                    args.len()
                ),
            ));
        }
        for (arg, want) in args.iter().zip(&sig.params) {
            let got = self.expr_ty(arg, scopes)?;
            if got != *want {
                return Err(type_error(
                    arg.loc(),
                    format!("argument to `{callee}` has type {got}, expected {want}"),
                ));
            }
        }
        Ok(sig.ret)
    }

    fn expr_ty(&self, expr: &Expr, scopes: &Scopes) -> Result<Ty, FrontendError> {
        match expr {
            Expr::Int(..) => Ok(Ty::Int),
            Expr::Bool(..) => Ok(Ty::Bool),
            Expr::Var(name, loc) => scopes
                .lookup(name)
                .or_else(|| self.globals.get(name).copied())
                .ok_or_else(|| type_error(*loc, format!("undeclared variable `{name}`"))),
            Expr::Un(op, inner, _) => {
                let ity = self.expr_ty(inner, scopes)?;
                let want = match op {
                    UnOp::Neg | UnOp::BitNot => Ty::Int,
                    UnOp::Not => Ty::Bool,
                };
                if ity != want {
                    return Err(type_error(
                        inner.loc(),
                        format!("operand of `{}` must be {want}, found {ity}", op.symbol()),
                    ));
                }
                Ok(want)
            }
            Expr::Bin(op, lhs, rhs, loc) => {
                let lty = self.expr_ty(lhs, scopes)?;
                let rty = self.expr_ty(rhs, scopes)?;
                use BinOp::*;
                match op {
                    Add | Sub | Mul | Div | Rem | Shl | Shr | BitAnd | BitOr | BitXor => {
                        if lty != Ty::Int || rty != Ty::Int {
                            return Err(type_error(
                                *loc,
                                format!("`{}` requires int operands", op.symbol()),
                            ));
                        }
                        Ok(Ty::Int)
                    }
                    Lt | Le | Gt | Ge => {
                        if lty != Ty::Int || rty != Ty::Int {
                            return Err(type_error(
                                *loc,
                                format!("`{}` requires int operands", op.symbol()),
                            ));
                        }
                        Ok(Ty::Bool)
                    }
                    Eq | Ne => {
                        if lty != rty {
                            return Err(type_error(
                                *loc,
                                format!("`{}` requires operands of one type", op.symbol()),
                            ));
                        }
                        Ok(Ty::Bool)
                    }
                    And | Or => {
                        if lty != Ty::Bool || rty != Ty::Bool {
                            return Err(type_error(
                                *loc,
                                format!("`{}` requires bool operands", op.symbol()),
                            ));
                        }
                        Ok(Ty::Bool)
                    }
                }
            }
            Expr::Call { callee, args, loc } => match self.check_call(callee, args, *loc, scopes)? {
                Some(ty) => Ok(ty),
                None => Err(type_error(
                    *loc,
                    format!("void function `{callee}` used in an expression"),
                )),
            },
            Expr::NondetInt(_) => Ok(Ty::Int),
            Expr::NondetBool(_) => Ok(Ty::Bool),
        }
    }
}

struct Scopes {
    stack: Vec<HashMap<String, Ty>>,
}

impl Scopes {
    fn new() -> Scopes {
        Scopes { stack: Vec::new() }
    }
    fn push(&mut self) {
        self.stack.push(HashMap::new());
    }
    fn pop(&mut self) {
        self.stack.pop();
    }
    fn declare(&mut self, name: &str, ty: Ty) {
        self.stack
            .last_mut()
            .expect("scope stack never empty while checking")
            .insert(name.to_string(), ty);
    }
    fn lookup(&self, name: &str) -> Option<Ty> {
        self.stack.iter().rev().find_map(|s| s.get(name).copied())
    }
}

// ---------------------------------------------------------------------------
// Read-before-assignment warnings. Flow-insensitive apart from tracking the
// assigned set through blocks: branches merge by intersection, loop bodies
// contribute nothing (they may not run). Uninitialized reads are well-defined
// (value 0), so these are advisory only.
// ---------------------------------------------------------------------------

fn warn_unassigned_reads(
    func: &FunctionDecl,
    globals: &HashMap<String, Ty>,
    warnings: &mut Vec<Warning>,
) {
    let mut assigned: HashSet<String> = func.params.iter().map(|p| p.name.clone()).collect();
    let mut reported: HashSet<String> = HashSet::new();
    walk_block(&func.body, &mut assigned, globals, &mut reported, warnings);
}

fn walk_block(
    block: &Block,
    assigned: &mut HashSet<String>,
    globals: &HashMap<String, Ty>,
    reported: &mut HashSet<String>,
    warnings: &mut Vec<Warning>,
) {
    for stmt in &block.stmts {
        match stmt {
            Stmt::Decl { name, init, .. } => {
                if let Some(e) = init {
                    note_reads(e, assigned, globals, reported, warnings);
                    assigned.insert(name.clone());
                }
            }
            Stmt::Assign { name, expr, .. } => {
                note_reads(expr, assigned, globals, reported, warnings);
                assigned.insert(name.clone());
            }
            Stmt::If {
                cond,
                then_blk,
                else_blk,
                ..
            } => {
                note_reads(cond, assigned, globals, reported, warnings);
                let mut then_set = assigned.clone();
                walk_block(then_blk, &mut then_set, globals, reported, warnings);
                let mut else_set = assigned.clone();
                if let Some(e) = else_blk {
                    walk_block(e, &mut else_set, globals, reported, warnings);
                }
                *assigned = then_set.intersection(&else_set).cloned().collect();
            }
            Stmt::While { cond, body, .. } => {
                note_reads(cond, assigned, globals, reported, warnings);
                let mut body_set = assigned.clone();
                walk_block(body, &mut body_set, globals, reported, warnings);
            }
            Stmt::Assert { cond, .. } | Stmt::Assume { cond, .. } => {
                note_reads(cond, assigned, globals, reported, warnings);
            }
            Stmt::Call { args, .. } => {
                for a in args {
                    note_reads(a, assigned, globals, reported, warnings);
                }
            }
            Stmt::Return { expr, .. } => {
                if let Some(e) = expr {
                    note_reads(e, assigned, globals, reported, warnings);
                }
            }
            Stmt::Block { block, .. } => {
                walk_block(block, assigned, globals, reported, warnings);
            }
        }
    }
}

fn note_reads(
    expr: &Expr,
    assigned: &HashSet<String>,
    globals: &HashMap<String, Ty>,
    reported: &mut HashSet<String>,
    warnings: &mut Vec<Warning>,
) {
    match expr {
        Expr::Var(name, loc) => {
            // Globals are zero-initialized by definition and never warn; a
            // local shadowing a global is indistinguishable here and stays
            // silent too (the warning is advisory).
            if !globals.contains_key(name) && !assigned.contains(name) && reported.insert(name.clone())
            {
                warnings.push(Warning {
                    loc: *loc,
                    message: format!("variable `{name}` may be read before assignment"),
                });
            }
        }
        Expr::Un(_, inner, _) => note_reads(inner, assigned, globals, reported, warnings),
        Expr::Bin(_, lhs, rhs, _) => {
            note_reads(lhs, assigned, globals, reported, warnings);
            note_reads(rhs, assigned, globals, reported, warnings);
        }
        Expr::Call { args, .. } => {
            for a in args {
                note_reads(a, assigned, globals, reported, warnings);
            }
        }
        Expr::Int(..) | Expr::Bool(..) | Expr::NondetInt(_) | Expr::NondetBool(_) => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_program;

    fn check_src(src: &str) -> Result<Vec<Warning>, FrontendError> {
        parse_program(src).map(|(_, w)| w)
    }

    #[test]
    fn accepts_valid_program() {
        check_src("int add(int a, int b){return a + b;} int main(){int x; x = add(1, 2); assert(x == 3); return 0;}")
            .unwrap();
    }

    #[test]
    fn rejects_undeclared_variable() {
        let err = check_src("int main(){y = 1; return 0;}").unwrap_err();
        let FrontendError::Type { message, .. } = err else {
            panic!()
        };
        assert!(message.contains("undeclared variable `y`"));
    }

    #[test]
    fn rejects_missing_main() {
        assert!(check_src("int f(){return 0;}").is_err());
        assert!(check_src("int main(int a){return a;}").is_err());
        assert!(check_src("void main(){}").is_err());
    }

    #[test]
    fn rejects_type_mixing() {
        assert!(check_src("int main(){int x; x = true; return 0;}").is_err());
        assert!(check_src("int main(){bool b; b = 1 + 2; return 0;}").is_err());
        assert!(check_src("int main(){if (1) {} return 0;}").is_err());
        assert!(check_src("int main(){int x; x = 1 && 2; return 0;}").is_err());
        assert!(check_src("int main(){bool b; b = true < false; return 0;}").is_err());
        assert!(check_src("int main(){assert(true == 1); return 0;}").is_err());
    }

    #[test]
    fn comparisons_bridge_to_bool() {
        check_src("int main(){bool b; b = 1 < 2; assert(b == true); return 0;}").unwrap();
    }

    #[test]
    fn rejects_scope_escape() {
        assert!(check_src("int main(){ { int x; x = 1; } x = 2; return 0;}").is_err());
        assert!(check_src("int main(){ { int x; } { int x; } return 0;}").is_err());
    }

    #[test]
    fn local_shadows_global() {
        check_src("int g; int main(){int g; g = 5; assert(g == 5); return 0;}").unwrap();
    }

    #[test]
    fn call_arity_and_void() {
        assert!(check_src("int f(int a){return a;} int main(){int x; x = f(); return 0;}").is_err());
        assert!(
            check_src("void f(){} int main(){int x; x = f(); return 0;}").is_err()
        );
        assert!(check_src("int main(){int x; x = g(); return 0;}").is_err());
        check_src("void f(){} int main(){f(); return 0;}").unwrap();
    }

    #[test]
    fn return_shapes() {
        assert!(check_src("void f(){return 1;} int main(){return 0;}").is_err());
        assert!(check_src("int f(){return;} int main(){return 0;}").is_err());
        assert!(check_src("int f(){return true;} int main(){return 0;}").is_err());
    }

    #[test]
    fn warns_on_possible_unassigned_read() {
        let w = check_src("int main(){int x; int y; y = x + 1; return y;}").unwrap();
        assert_eq!(w.len(), 1);
        assert!(w[0].message.contains("`x`"));
        // Globals read as 0 by design and never warn.
        let w = check_src("int g; int main(){return g;}").unwrap();
        assert!(w.is_empty());
        // Assignment on both arms counts.
        let w = check_src(
            "int main(){int x; bool c; c = nondet_bool(); if (c) {x=1;} else {x=2;} return x;}",
        )
        .unwrap();
        assert!(w.is_empty());
        // Assignment only inside a loop body does not count.
        let w = check_src(
            "int main(){int x; int i; i = 0; while (i < 3) {x = 1; i = i + 1;} return x;}",
        )
        .unwrap();
        assert_eq!(w.len(), 1);
    }
}
