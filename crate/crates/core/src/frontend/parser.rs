//! Recursive descent parser. The first error aborts the parse.

use thiserror::Error;

use super::ast::*;
use super::lexer::{Token, TokenKind};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: expected {expected}, found {found}")]
pub struct ParseError {
    pub line: u32,
    pub column: u32,
    pub expected: String,
    pub found: String,
}

type PResult<T> = Result<T, ParseError>;

pub fn parse(tokens: &[Token]) -> Result<Module, ParseError> {
    let mut p = Parser { tokens, pos: 0 };
    p.module()
}

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        let i = self.pos.min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    fn advance(&mut self) -> &'t Token {
        let t = self.peek();
        if t.kind != TokenKind::Eof {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> Pos {
        let t = self.peek();
        Pos::new(t.line, t.column)
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        let t = self.peek();
        Err(ParseError {
            line: t.line,
            column: t.column,
            expected: expected.into(),
            found: t.describe(),
        })
    }

    fn at(&self, kind: TokenKind, text: &str) -> bool {
        self.peek().is(kind, text)
    }

    fn at_kw(&self, kw: &str) -> bool {
        self.at(TokenKind::Keyword, kw)
    }

    fn at_punct(&self, p: &str) -> bool {
        self.at(TokenKind::Punctuation, p)
    }

    fn at_op(&self, op: &str) -> bool {
        self.at(TokenKind::Operator, op)
    }

    fn eat(&mut self, kind: TokenKind, text: &str) -> bool {
        if self.at(kind, text) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, text: &str) -> PResult<&'t Token> {
        if self.at(kind, text) {
            Ok(self.advance())
        } else {
            self.error(format!("`{text}`"))
        }
    }

    fn expect_kind(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            self.error(kind.to_string())
        }
    }

    fn ident(&mut self) -> PResult<Ident> {
        let t = self.expect_kind(TokenKind::Identifier)?;
        Ok(Ident::new(t.text.clone(), Pos::new(t.line, t.column)))
    }

    fn module(&mut self) -> PResult<Module> {
        let mut items = Vec::new();
        loop {
            match self.peek().kind {
                TokenKind::Eof => break,
                TokenKind::Newline => {
                    self.advance();
                }
                _ => items.push(self.item()?),
            }
        }
        Ok(Module { items })
    }

    fn item(&mut self) -> PResult<Item> {
        if self.at_kw("fun") {
            Ok(Item::Function(self.func()?))
        } else if self.at_kw("act") {
            Ok(Item::Action(self.act_decl()?))
        } else if self.at_kw("cls") {
            Ok(Item::Class(self.class()?))
        } else {
            self.error("`fun`, `act` or `cls`")
        }
    }

    fn func(&mut self) -> PResult<FuncDecl> {
        let pos = self.here();
        self.expect(TokenKind::Keyword, "fun")?;
        let name = self.ident()?;
        let params = self.params()?;
        let ret = if self.eat(TokenKind::Operator, "->") {
            Some(self.type_expr()?)
        } else {
            None
        };
        let body = self.block()?;
        Ok(FuncDecl {
            name,
            params,
            ret,
            body,
            pos,
        })
    }

    fn act_decl(&mut self) -> PResult<ActDecl> {
        let pos = self.here();
        self.expect(TokenKind::Keyword, "act")?;
        let name = self.ident()?;
        let params = self.params()?;
        self.expect(TokenKind::Operator, "->")?;
        let class_name = self.ident()?;
        let body = self.block()?;
        Ok(ActDecl {
            name,
            params,
            class_name,
            body,
            pos,
        })
    }

    fn class(&mut self) -> PResult<ClsDecl> {
        let pos = self.here();
        self.expect(TokenKind::Keyword, "cls")?;
        let name = self.ident()?;
        self.expect(TokenKind::Punctuation, ":")?;
        self.expect_kind(TokenKind::Newline)?;
        self.expect_kind(TokenKind::Indent)?;
        let mut fields = Vec::new();
        let mut methods = Vec::new();
        while !matches!(self.peek().kind, TokenKind::Dedent | TokenKind::Eof) {
            if self.at_kw("fun") {
                methods.push(self.func()?);
            } else {
                let ty = self.type_expr()?;
                let name = self.ident()?;
                self.expect_kind(TokenKind::Newline)?;
                fields.push(Param { name, ty });
            }
        }
        self.expect_kind(TokenKind::Dedent)?;
        Ok(ClsDecl {
            name,
            fields,
            methods,
            pos,
        })
    }

    /// `(Type name, ...)`
    fn params(&mut self) -> PResult<Vec<Param>> {
        self.expect(TokenKind::Punctuation, "(")?;
        let mut params = Vec::new();
        if !self.at_punct(")") {
            loop {
                let ty = self.type_expr()?;
                let name = self.ident()?;
                params.push(Param { name, ty });
                if !self.eat(TokenKind::Punctuation, ",") {
                    break;
                }
            }
        }
        self.expect(TokenKind::Punctuation, ")")?;
        Ok(params)
    }

    fn type_expr(&mut self) -> PResult<TypeExpr> {
        let pos = self.here();
        let name = self.ident()?;
        let mut kind = match name.name.as_str() {
            "Bool" => TypeKind::Bool,
            "Float" => TypeKind::Float,
            "Int" if self.at_op("<") => {
                self.advance();
                let min = self.signed_int()?;
                self.expect(TokenKind::Punctuation, ",")?;
                let max = self.signed_int()?;
                self.expect(TokenKind::Operator, ">")?;
                TypeKind::BoundedInt { min, max }
            }
            "Int" => TypeKind::Int,
            _ => TypeKind::Named(name.name),
        };
        while self.at_punct("[") {
            self.advance();
            let t = self.expect_kind(TokenKind::IntLiteral)?;
            let len: u64 = t.text.parse().expect("lexer validated integer literal");
            self.expect(TokenKind::Punctuation, "]")?;
            kind = TypeKind::Array {
                elem: Box::new(TypeExpr { kind, pos }),
                len,
            };
        }
        Ok(TypeExpr { kind, pos })
    }

    fn signed_int(&mut self) -> PResult<i64> {
        let neg = self.eat(TokenKind::Operator, "-");
        if self.peek().kind != TokenKind::IntLiteral {
            return self.error("integer literal");
        }
        let t = self.advance();
        let v: i64 = t.text.parse().expect("lexer validated integer literal");
        Ok(if neg { -v } else { v })
    }

    /// `:` followed by either an indented block or a single simple statement
    /// on the same line.
    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(TokenKind::Punctuation, ":")?;
        if self.peek().kind != TokenKind::Newline {
            let s = self.simple_stmt()?;
            self.expect_kind(TokenKind::Newline)?;
            return Ok(vec![s]);
        }
        self.advance();
        self.expect_kind(TokenKind::Indent)?;
        let mut body = Vec::new();
        while !matches!(self.peek().kind, TokenKind::Dedent | TokenKind::Eof) {
            body.push(self.stmt()?);
        }
        self.expect_kind(TokenKind::Dedent)?;
        Ok(body)
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let pos = self.here();
        if self.at_kw("if") {
            return self.if_stmt();
        }
        if self.at_kw("while") {
            self.advance();
            let cond = self.expr()?;
            let body = self.block()?;
            return Ok(Stmt {
                kind: StmtKind::While { cond, body },
                pos,
            });
        }
        let s = self.simple_stmt()?;
        self.expect_kind(TokenKind::Newline)?;
        Ok(s)
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.here();
        self.expect(TokenKind::Keyword, "if")?;
        let cond = self.expr()?;
        let then_body = self.block()?;
        let else_body = if self.eat(TokenKind::Keyword, "else") {
            if self.at_kw("if") {
                vec![self.if_stmt()?]
            } else {
                self.block()?
            }
        } else {
            Vec::new()
        };
        Ok(Stmt {
            kind: StmtKind::If {
                cond,
                then_body,
                else_body,
            },
            pos,
        })
    }

    fn simple_stmt(&mut self) -> PResult<Stmt> {
        let pos = self.here();
        let kind = if self.at_kw("let") || self.at_kw("frm") {
            let is_frm = self.advance().text == "frm";
            let name = self.ident()?;
            let ty = if self.eat(TokenKind::Punctuation, ":") {
                Some(self.type_expr()?)
            } else {
                None
            };
            let init = if self.eat(TokenKind::Operator, "=") {
                Some(self.expr()?)
            } else {
                None
            };
            if ty.is_none() && init.is_none() {
                return self.error("`:` or `=`");
            }
            if is_frm {
                StmtKind::Frm { name, ty, init }
            } else {
                StmtKind::Let { name, ty, init }
            }
        } else if self.at_kw("return") {
            self.advance();
            if self.peek().kind == TokenKind::Newline {
                StmtKind::Return(None)
            } else {
                StmtKind::Return(Some(self.expr()?))
            }
        } else if self.at_kw("act") {
            StmtKind::Action(self.action_stmt()?)
        } else {
            let target = self.expr()?;
            if self.eat(TokenKind::Operator, "=") {
                let value = self.expr()?;
                StmtKind::Assign { target, value }
            } else {
                StmtKind::Expr(target)
            }
        };
        Ok(Stmt { kind, pos })
    }

    fn action_stmt(&mut self) -> PResult<ActionStmt> {
        self.expect(TokenKind::Keyword, "act")?;
        let name = self.ident()?;
        let params = self.params()?;
        let mut preconditions = Vec::new();
        if self.eat(TokenKind::Punctuation, "{") {
            while !self.at_punct("}") {
                preconditions.push(self.expr()?);
                if !self.eat(TokenKind::Punctuation, ",") {
                    break;
                }
            }
            self.expect(TokenKind::Punctuation, "}")?;
        }
        Ok(ActionStmt {
            name,
            params,
            preconditions,
        })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.binary(1)
    }

    fn binary_op(&self) -> Option<BinaryOp> {
        let t = self.peek();
        let op = match (t.kind, t.text.as_str()) {
            (TokenKind::Keyword, "or") => BinaryOp::Or,
            (TokenKind::Keyword, "and") => BinaryOp::And,
            (TokenKind::Operator, "==") => BinaryOp::Eq,
            (TokenKind::Operator, "!=") => BinaryOp::Ne,
            (TokenKind::Operator, "<") => BinaryOp::Lt,
            (TokenKind::Operator, "<=") => BinaryOp::Le,
            (TokenKind::Operator, ">") => BinaryOp::Gt,
            (TokenKind::Operator, ">=") => BinaryOp::Ge,
            (TokenKind::Operator, "+") => BinaryOp::Add,
            (TokenKind::Operator, "-") => BinaryOp::Sub,
            (TokenKind::Operator, "*") => BinaryOp::Mul,
            (TokenKind::Operator, "/") => BinaryOp::Div,
            (TokenKind::Operator, "%") => BinaryOp::Rem,
            _ => return None,
        };
        Some(op)
    }

    /// Precedence climbing; every binary level is left-associative.
    fn binary(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while let Some(op) = self.binary_op() {
            let prec = op.precedence();
            if prec < min_prec {
                break;
            }
            self.advance();
            let rhs = self.binary(prec + 1)?;
            let pos = lhs.pos;
            lhs = Expr {
                kind: ExprKind::Binary {
                    op,
                    lhs: Box::new(lhs),
                    rhs: Box::new(rhs),
                },
                pos,
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let pos = self.here();
        let op = if self.at_op("!") || self.at_kw("not") {
            Some(UnaryOp::Not)
        } else if self.at_op("-") {
            Some(UnaryOp::Neg)
        } else {
            None
        };
        match op {
            Some(op) => {
                self.advance();
                let operand = self.unary()?;
                Ok(Expr {
                    kind: ExprKind::Unary {
                        op,
                        operand: Box::new(operand),
                    },
                    pos,
                })
            }
            None => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.at_op(".") {
                self.advance();
                let name = self.ident()?;
                let pos = e.pos;
                if self.at_punct("(") {
                    let args = self.args()?;
                    e = Expr {
                        kind: ExprKind::MethodCall {
                            receiver: Box::new(e),
                            method: name,
                            args,
                        },
                        pos,
                    };
                } else {
                    e = Expr {
                        kind: ExprKind::Field {
                            base: Box::new(e),
                            field: name,
                        },
                        pos,
                    };
                }
            } else if self.at_punct("[") {
                self.advance();
                let index = self.expr()?;
                self.expect(TokenKind::Punctuation, "]")?;
                let pos = e.pos;
                e = Expr {
                    kind: ExprKind::Index {
                        base: Box::new(e),
                        index: Box::new(index),
                    },
                    pos,
                };
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> PResult<Vec<Expr>> {
        self.expect(TokenKind::Punctuation, "(")?;
        let mut args = Vec::new();
        if !self.at_punct(")") {
            loop {
                args.push(self.expr()?);
                if !self.eat(TokenKind::Punctuation, ",") {
                    break;
                }
            }
        }
        self.expect(TokenKind::Punctuation, ")")?;
        Ok(args)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.here();
        let t = self.peek();
        let kind = match t.kind {
            TokenKind::IntLiteral => {
                self.advance();
                ExprKind::Int(t.text.parse().expect("lexer validated integer literal"))
            }
            TokenKind::FloatLiteral => {
                self.advance();
                ExprKind::Float(t.text.parse().expect("lexer validated float literal"))
            }
            TokenKind::BoolLiteral => {
                self.advance();
                ExprKind::Bool(t.text == "true")
            }
            TokenKind::Identifier => {
                let name = self.ident()?;
                if self.at_punct("(") {
                    let args = self.args()?;
                    ExprKind::Call { callee: name, args }
                } else {
                    ExprKind::Ident(name.name)
                }
            }
            TokenKind::Punctuation if t.text == "(" => {
                self.advance();
                let mut inner = self.expr()?;
                self.expect(TokenKind::Punctuation, ")")?;
                inner.pos = pos;
                return Ok(inner);
            }
            _ => return self.error("expression"),
        };
        Ok(Expr { kind, pos })
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn parse_src(src: &str) -> Result<Module, ParseError> {
        parse(&tokenize(src).unwrap())
    }

    #[test]
    fn minimal_function_on_one_line() {
        let m = parse_src("fun f() -> Int: return 1").unwrap();
        assert_eq!(m.functions().count(), 1);
        let f = m.functions().next().unwrap();
        assert_eq!(f.name.name, "f");
        assert!(matches!(
            f.body[0].kind,
            StmtKind::Return(Some(Expr {
                kind: ExprKind::Int(1),
                ..
            }))
        ));
    }

    #[test]
    fn precedence() {
        let m = parse_src("fun f() -> Bool: return !a or b and c == 1 + 2 * -3").unwrap();
        let f = m.functions().next().unwrap();
        let StmtKind::Return(Some(e)) = &f.body[0].kind else {
            panic!()
        };
        // or(not a, and(b, ==(c, +(1, *(2, neg 3)))))
        let ExprKind::Binary { op: BinaryOp::Or, lhs, rhs } = &e.kind else {
            panic!("{e:?}")
        };
        assert!(matches!(lhs.kind, ExprKind::Unary { op: UnaryOp::Not, .. }));
        let ExprKind::Binary { op: BinaryOp::And, rhs, .. } = &rhs.kind else {
            panic!()
        };
        let ExprKind::Binary { op: BinaryOp::Eq, rhs, .. } = &rhs.kind else {
            panic!()
        };
        let ExprKind::Binary { op: BinaryOp::Add, rhs, .. } = &rhs.kind else {
            panic!()
        };
        let ExprKind::Binary { op: BinaryOp::Mul, rhs, .. } = &rhs.kind else {
            panic!()
        };
        assert!(matches!(rhs.kind, ExprKind::Unary { op: UnaryOp::Neg, .. }));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let m = parse_src("fun f() -> Int: return 1 - 2 - 3").unwrap();
        let f = m.functions().next().unwrap();
        let StmtKind::Return(Some(e)) = &f.body[0].kind else {
            panic!()
        };
        let ExprKind::Binary { lhs, rhs, .. } = &e.kind else {
            panic!()
        };
        assert!(matches!(lhs.kind, ExprKind::Binary { .. }));
        assert!(matches!(rhs.kind, ExprKind::Int(3)));
    }

    #[test]
    fn types() {
        let m = parse_src("cls C:\n  Int<-1,5>[3][2] grid\n  Bool flag\n").unwrap();
        let c = m.classes().next().unwrap();
        let TypeKind::Array { elem, len: 2 } = &c.fields[0].ty.kind else {
            panic!()
        };
        let TypeKind::Array { elem, len: 3 } = &elem.kind else {
            panic!()
        };
        assert_eq!(elem.kind, TypeKind::BoundedInt { min: -1, max: 5 });
        assert_eq!(c.fields[1].ty.kind, TypeKind::Bool);
    }

    #[test]
    fn else_if_chains() {
        let src = "fun f(Int x) -> Int:\n  if x == 0:\n    return 1\n  else if x == 1:\n    return 2\n  else:\n    return 3\n";
        let m = parse_src(src).unwrap();
        let f = m.functions().next().unwrap();
        let StmtKind::If { else_body, .. } = &f.body[0].kind else {
            panic!()
        };
        assert_eq!(else_body.len(), 1);
        assert!(matches!(else_body[0].kind, StmtKind::If { .. }));
    }

    #[test]
    fn errors_report_position() {
        let err = parse_src("fun f(Int) -> Int: return 1").unwrap_err();
        assert_eq!((err.line, err.column), (1, 10));
        assert_eq!(err.expected, "identifier");
        let err = parse_src("let x = 1").unwrap_err();
        assert_eq!(err.expected, "`fun`, `act` or `cls`");
        let err = parse_src("fun f():\n  return 1 +\n").unwrap_err();
        assert_eq!(err.line, 2);
    }
}
