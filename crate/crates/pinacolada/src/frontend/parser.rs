use super::ast::*;
use super::token::{Token, TokenKind};
use super::{FrontendError, Loc};
use crate::goto::{BinOp, Ty, UnOp};

/// Parse a token stream produced by `lexer::tokenize`.
pub fn parse(tokens: &[Token]) -> Result<Ast, FrontendError> {
    let mut p = Parser { tokens, pos: 0 };
    p.parse_program()
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let t = self.tokens.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Position reported for end-of-input errors.
    fn eof_loc(&self) -> Loc {
        match self.tokens.last() {
            Some(t) => Loc::new(t.line, t.col + t.text.chars().count() as u32),
            None => Loc::new(1, 1),
        }
    }

    fn err_here(&self, expected: &str) -> FrontendError {
        match self.peek() {
            Some(t) => FrontendError::Parse {
                line: t.line,
                column: t.col,
                expected: expected.to_string(),
                found: format!("`{}`", t.text),
            },
            None => {
                let loc = self.eof_loc();
                FrontendError::Parse {
                    line: loc.line,
                    column: loc.col,
                    expected: expected.to_string(),
                    found: "end of input".to_string(),
                }
            }
        }
    }

    fn loc_here(&self) -> Loc {
        match self.peek() {
            Some(t) => Loc::new(t.line, t.col),
            None => self.eof_loc(),
        }
    }

    fn at_text(&self, text: &str) -> bool {
        self.peek().is_some_and(|t| t.text == text)
    }

    fn eat_text(&mut self, text: &str) -> bool {
        if self.at_text(text) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_text(&mut self, text: &str) -> Result<Loc, FrontendError> {
        match self.peek() {
            Some(t) if t.text == text => {
                let loc = Loc::new(t.line, t.col);
                self.pos += 1;
                Ok(loc)
            }
            _ => Err(self.err_here(&format!("`{text}`"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, Loc), FrontendError> {
        match self.peek() {
            Some(t) if t.kind == TokenKind::Ident => {
                let out = (t.text.clone(), Loc::new(t.line, t.col));
                self.pos += 1;
                Ok(out)
            }
            _ => Err(self.err_here(what)),
        }
    }

    fn parse_program(&mut self) -> Result<Ast, FrontendError> {
        let mut globals = Vec::new();
        let mut functions = Vec::new();
        while self.peek().is_some() {
            let loc = self.loc_here();
            let ret = self.parse_ret_type()?;
            let (name, name_loc) = self.expect_ident("identifier")?;
            if self.at_text("(") {
                functions.push(self.parse_function(ret, name, loc)?);
            } else {
                let ty = match ret {
                    Some(ty) => ty,
                    None => {
                        return Err(FrontendError::Parse {
                            line: name_loc.line,
                            column: name_loc.col,
                            expected: "`(` (void is only valid as a function return type)"
                                .to_string(),
                            found: format!("`{name}`"),
                        })
                    }
                };
                self.expect_text(";")?;
                globals.push(GlobalDecl { name, ty, loc });
            }
        }
        Ok(Ast { globals, functions })
    }

    fn parse_ret_type(&mut self) -> Result<Option<Ty>, FrontendError> {
        if self.eat_text("int") {
            Ok(Some(Ty::Int))
        } else if self.eat_text("bool") {
            Ok(Some(Ty::Bool))
        } else if self.eat_text("void") {
            Ok(None)
        } else {
            Err(self.err_here("`int`, `bool` or `void`"))
        }
    }

    fn parse_var_type(&mut self) -> Result<Ty, FrontendError> {
        if self.eat_text("int") {
            Ok(Ty::Int)
        } else if self.eat_text("bool") {
            Ok(Ty::Bool)
        } else {
            Err(self.err_here("`int` or `bool`"))
        }
    }

    fn parse_function(
        &mut self,
        ret: Option<Ty>,
        name: String,
        loc: Loc,
    ) -> Result<FunctionDecl, FrontendError> {
        self.expect_text("(")?;
        let mut params = Vec::new();
        if !self.at_text(")") {
            loop {
                let ploc = self.loc_here();
                let ty = self.parse_var_type()?;
                let (pname, _) = self.expect_ident("parameter name")?;
                params.push(Param {
                    name: pname,
                    ty,
                    loc: ploc,
                });
                if !self.eat_text(",") {
                    break;
                }
            }
        }
        self.expect_text(")")?;
        let body = self.parse_block()?;
        Ok(FunctionDecl {
            name,
            params,
            ret,
            body,
            loc,
        })
    }

    fn parse_block(&mut self) -> Result<Block, FrontendError> {
        self.expect_text("{")?;
        let mut stmts = Vec::new();
        while !self.at_text("}") {
            if self.peek().is_none() {
                return Err(self.err_here("`}`"));
            }
            stmts.push(self.parse_stmt()?);
        }
        self.expect_text("}")?;
        Ok(Block { stmts })
    }

    fn parse_stmt(&mut self) -> Result<Stmt, FrontendError> {
        let loc = self.loc_here();
        let tok = self.peek().ok_or_else(|| self.err_here("statement"))?;
        match (tok.kind, tok.text.as_str()) {
            (TokenKind::Keyword, "int") | (TokenKind::Keyword, "bool") => {
                let ty = self.parse_var_type()?;
                let (name, _) = self.expect_ident("variable name")?;
                let init = if self.eat_text("=") {
                    Some(self.parse_expr()?)
                } else {
                    None
                };
                self.expect_text(";")?;
                Ok(Stmt::Decl {
                    ty,
                    name,
                    init,
                    loc,
                })
            }
            (TokenKind::Keyword, "if") => {
                self.bump();
                self.expect_text("(")?;
                let cond = self.parse_expr()?;
                self.expect_text(")")?;
                let then_blk = self.parse_block()?;
                let else_blk = if self.eat_text("else") {
                    if self.at_text("if") {
                        // `else if` sugars to an else-block holding one if.
                        let inner = self.parse_stmt()?;
                        Some(Block { stmts: vec![inner] })
                    } else {
                        Some(self.parse_block()?)
                    }
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then_blk,
                    else_blk,
                    loc,
                })
            }
            (TokenKind::Keyword, "while") => {
                self.bump();
                self.expect_text("(")?;
                let cond = self.parse_expr()?;
                self.expect_text(")")?;
                let body = self.parse_block()?;
                Ok(Stmt::While { cond, body, loc })
            }
            (TokenKind::Keyword, "assert") | (TokenKind::Keyword, "assume") => {
                let is_assert = tok.text == "assert";
                self.bump();
                self.expect_text("(")?;
                let cond = self.parse_expr()?;
                self.expect_text(")")?;
                self.expect_text(";")?;
                Ok(if is_assert {
                    Stmt::Assert { cond, loc }
                } else {
                    Stmt::Assume { cond, loc }
                })
            }
            (TokenKind::Keyword, "return") => {
                self.bump();
                let expr = if self.at_text(";") {
                    None
                } else {
                    Some(self.parse_expr()?)
                };
                self.expect_text(";")?;
                Ok(Stmt::Return { expr, loc })
            }
            (TokenKind::Punct, "{") => {
                let block = self.parse_block()?;
                Ok(Stmt::Block { block, loc })
            }
            (TokenKind::Ident, _) => {
                let (name, name_loc) = self.expect_ident("identifier")?;
                if self.eat_text("=") {
                    let expr = self.parse_expr()?;
                    self.expect_text(";")?;
                    Ok(Stmt::Assign { name, expr, loc })
                } else if self.at_text("(") {
                    let args = self.parse_call_args()?;
                    self.expect_text(";")?;
                    if name == "nondet_int" || name == "nondet_bool" {
                        return Err(FrontendError::Parse {
                            line: name_loc.line,
                            column: name_loc.col,
                            expected: "an assignment target for the nondet value".to_string(),
                            found: format!("`{name}` as a statement"),
                        });
                    }
                    Ok(Stmt::Call { callee: name, args, loc })
                } else {
                    Err(self.err_here("`=` or `(`"))
                }
            }
            _ => Err(self.err_here("statement")),
        }
    }

    fn parse_call_args(&mut self) -> Result<Vec<Expr>, FrontendError> {
        self.expect_text("(")?;
        let mut args = Vec::new();
        if !self.at_text(")") {
            loop {
                args.push(self.parse_expr()?);
                if !self.eat_text(",") {
                    break;
                }
            }
        }
        self.expect_text(")")?;
        Ok(args)
    }

    pub(crate) fn parse_expr(&mut self) -> Result<Expr, FrontendError> {
        self.parse_bin(1)
    }

    fn parse_bin(&mut self, min_prec: u8) -> Result<Expr, FrontendError> {
        let mut lhs = self.parse_unary()?;
        while let Some(tok) = self.peek() {
            if tok.kind != TokenKind::Op {
                break;
            }
            let Some(op) = binop_from_text(&tok.text) else {
                break;
            };
            let prec = binop_prec(op);
            if prec < min_prec {
                break;
            }
            let op_loc = Loc::new(tok.line, tok.col);
            self.bump();
            let rhs = self.parse_bin(prec + 1)?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs), op_loc);
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, FrontendError> {
        let loc = self.loc_here();
        if self.eat_text("-") {
            return Ok(Expr::Un(UnOp::Neg, Box::new(self.parse_unary()?), loc));
        }
        if self.eat_text("!") {
            return Ok(Expr::Un(UnOp::Not, Box::new(self.parse_unary()?), loc));
        }
        if self.eat_text("~") {
            return Ok(Expr::Un(UnOp::BitNot, Box::new(self.parse_unary()?), loc));
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, FrontendError> {
        let tok = self.peek().ok_or_else(|| self.err_here("expression"))?;
        let loc = Loc::new(tok.line, tok.col);
        match (tok.kind, tok.text.as_str()) {
            (TokenKind::Int, _) => {
                let text = tok.text.clone();
                self.bump();
                let value: i64 = text.parse().map_err(|_| FrontendError::Parse {
                    line: loc.line,
                    column: loc.col,
                    expected: "an integer literal fitting in 64 bits".to_string(),
                    found: format!("`{text}`"),
                })?;
                Ok(Expr::Int(value, loc))
            }
            (TokenKind::Keyword, "true") => {
                self.bump();
                Ok(Expr::Bool(true, loc))
            }
            (TokenKind::Keyword, "false") => {
                self.bump();
                Ok(Expr::Bool(false, loc))
            }
            (TokenKind::Punct, "(") => {
                self.bump();
                let e = self.parse_expr()?;
                self.expect_text(")")?;
                Ok(e)
            }
            (TokenKind::Ident, _) => {
                let (name, _) = self.expect_ident("identifier")?;
                if self.at_text("(") {
                    let args = self.parse_call_args()?;
                    match name.as_str() {
                        "nondet_int" | "nondet_bool" if !args.is_empty() => {
                            Err(FrontendError::Parse {
                                line: loc.line,
                                column: loc.col,
                                expected: format!("`{name}()` with no arguments"),
                                found: format!("{} argument(s)", args.len()),
                            })
                        }
                        "nondet_int" => Ok(Expr::NondetInt(loc)),
                        "nondet_bool" => Ok(Expr::NondetBool(loc)),
                        _ => Ok(Expr::Call {
                            callee: name,
                            args,
                            loc,
                        }),
                    }
                } else {
                    Ok(Expr::Var(name, loc))
                }
            }
            _ => Err(self.err_here("expression")),
        }
    }
}

fn binop_from_text(text: &str) -> Option<BinOp> {
    use BinOp::*;
    Some(match text {
        "+" => Add,
        "-" => Sub,
        "*" => Mul,
        "/" => Div,
        "%" => Rem,
        "<<" => Shl,
        ">>" => Shr,
        "&" => BitAnd,
        "|" => BitOr,
        "^" => BitXor,
        "<" => Lt,
        "<=" => Le,
        ">" => Gt,
        ">=" => Ge,
        "==" => Eq,
        "!=" => Ne,
        "&&" => And,
        "||" => Or,
        _ => return None,
    })
}
