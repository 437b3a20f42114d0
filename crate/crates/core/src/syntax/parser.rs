//! Recursive-descent parser.
//!
//! ```text
//! program  := import* class*
//! import   := 'import' qname ';'
//! class    := 'class' Ident generics? '{' member* '}'
//! generics := '<' Ident ('extends' type ('&' type)*)? (',' ...)* '>'
//! member   := generics? type? Ident '(' params? ')' block     -- method
//!           | type? Ident ('=' expr)? ';'                     -- field
//! stmt     := 'var' Ident ('=' expr)? ';' | type Ident ('=' expr)? ';'
//!           | 'while' '(' expr ')' stmt | 'return' expr? ';' | block | expr ';'
//! expr     := lambda | or ('=' expr)?
//! lambda   := (Ident | '(' params? ')') '->' (expr | block)
//! or       := le ('||' le)*        le  := add ('<=' add)?
//! add      := mul ('+' mul)*       mul := postfix ('*' postfix)*
//! postfix  := primary ('.' Ident ('(' args ')')? | '++')*
//! primary  := Int | String | 'true' | 'false' | 'this' | '(' expr ')'
//!           | 'new' qname ('<' types? '>')? '(' args ')' | Ident ('(' args ')')?
//! ```

use super::ast::*;
use super::lexer::{lex, Tok, Token};
use crate::error::{Error, Pos, Result};

const UNSUPPORTED_KEYWORDS: &[&str] = &[
    "try", "catch", "finally", "throw", "throws", "if", "else", "for", "do", "switch", "break",
    "continue", "static", "interface", "abstract", "final", "public", "private", "protected",
    "super", "instanceof", "null", "package",
];

pub fn parse(source: &str) -> Result<Program> {
    let raw = lex(source)?;
    let mut tokens = Vec::with_capacity(raw.len());
    let mut comments = Vec::new();
    let mut pending = Vec::new();
    for t in raw {
        match t.tok {
            Tok::Comment(text) => pending.push(text),
            _ => {
                tokens.push(t);
                comments.push(std::mem::take(&mut pending));
            }
        }
    }
    let mut p = Parser { tokens, comments, at: 0, next_id: 0 };
    p.program()
}

struct Parser {
    tokens: Vec<Token>,
    /// Line comments immediately preceding each token.
    comments: Vec<Vec<String>>,
    at: usize,
    next_id: u32,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.at].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.at + n).min(self.tokens.len() - 1);
        &self.tokens[i].tok
    }

    fn pos(&self) -> Pos {
        self.tokens[self.at].pos
    }

    fn advance(&mut self) -> Token {
        let t = self.tokens[self.at].clone();
        if self.at < self.tokens.len() - 1 {
            self.at += 1;
        }
        t
    }

    fn id(&mut self) -> NodeId {
        let id = NodeId(self.next_id);
        self.next_id += 1;
        id
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == kw)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(Error::Syntax { pos: self.pos(), msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Str(_) => "string literal".into(),
            Tok::Sym(s) => format!("`{s}`"),
            Tok::Comment(_) => "comment".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.check_unsupported()?;
            self.error(format!("expected `{s}`, found {}", self.describe()))
        }
    }

    fn check_unsupported(&self) -> Result<()> {
        match self.peek() {
            Tok::Ident(k) if UNSUPPORTED_KEYWORDS.contains(&k.as_str()) => {
                Err(Error::UnsupportedFeature { pos: self.pos(), what: format!("`{k}`") })
            }
            Tok::Sym(s) if matches!(*s, "?") => {
                Err(Error::UnsupportedFeature { pos: self.pos(), what: "wildcard types".into() })
            }
            Tok::Sym(s) if matches!(*s, "==" | "!=" | ">=" | "&&" | "+=" | "-=" | "-" | "/" | "!" | "%" | "[" | "@") => {
                Err(Error::UnsupportedFeature { pos: self.pos(), what: format!("operator `{s}`") })
            }
            _ => Ok(()),
        }
    }

    fn ident(&mut self) -> Result<(String, Pos)> {
        self.check_unsupported()?;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.advance();
                Ok((s, pos))
            }
            _ => self.error(format!("expected identifier, found {}", self.describe())),
        }
    }

    fn qname(&mut self) -> Result<(String, Pos)> {
        let (mut name, pos) = self.ident()?;
        while self.is_sym(".") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            let (part, _) = self.ident()?;
            name.push('.');
            name.push_str(&part);
        }
        Ok((name, pos))
    }

    fn program(&mut self) -> Result<Program> {
        let mut imports = Vec::new();
        while self.is_kw("import") {
            self.advance();
            let (name, pos) = self.qname()?;
            if self.is_sym(".") {
                return Err(Error::UnsupportedFeature { pos: self.pos(), what: "wildcard imports".into() });
            }
            self.expect_sym(";")?;
            imports.push(Import { name, pos });
        }
        let mut classes = Vec::new();
        while !matches!(self.peek(), Tok::Eof) {
            classes.push(self.class()?);
        }
        Ok(Program { imports, classes })
    }

    fn class(&mut self) -> Result<ClassDecl> {
        self.check_unsupported()?;
        if !self.is_kw("class") {
            return self.error(format!("expected `class`, found {}", self.describe()));
        }
        let pos = self.pos();
        self.advance();
        let (name, _) = self.ident()?;
        let generics = if self.is_sym("<") { self.generics()? } else { Vec::new() };
        if self.is_kw("extends") || self.is_kw("implements") {
            return Err(Error::UnsupportedFeature { pos: self.pos(), what: "class inheritance".into() });
        }
        self.expect_sym("{")?;
        let mut class = ClassDecl { name, generics, fields: vec![], methods: vec![], order: vec![], pos };
        while !self.eat_sym("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.error("unexpected end of input inside class body");
            }
            self.member(&mut class)?;
        }
        Ok(class)
    }

    fn generics(&mut self) -> Result<Vec<GenericParam>> {
        self.expect_sym("<")?;
        let mut out = Vec::new();
        loop {
            let (name, _) = self.ident()?;
            let mut bounds = Vec::new();
            if self.is_kw("extends") {
                self.advance();
                bounds.push(self.type_ann()?);
                while self.eat_sym("&") {
                    bounds.push(self.type_ann()?);
                }
            }
            out.push(GenericParam { name, bounds });
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(">")?;
        Ok(out)
    }

    fn type_ann(&mut self) -> Result<TypeAnn> {
        self.check_unsupported()?;
        let pos = self.pos();
        if self.is_kw("void") {
            self.advance();
            return Ok(TypeAnn::Void { pos });
        }
        let (name, pos) = self.qname()?;
        let mut args = Vec::new();
        if self.is_sym("<") {
            self.advance();
            loop {
                args.push(self.type_ann()?);
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym(">")?;
        }
        Ok(TypeAnn::Named { name, args, pos })
    }

    /// Try to parse `type Ident`, restoring the position on failure.
    fn try_typed_name(&mut self) -> Option<TypeAnn> {
        let save = self.at;
        if let Ok(t) = self.type_ann() {
            if matches!(self.peek(), Tok::Ident(s) if !is_reserved(s)) {
                return Some(t);
            }
        }
        self.at = save;
        None
    }

    fn member(&mut self, class: &mut ClassDecl) -> Result<()> {
        self.check_unsupported()?;
        let doc = self.comments[self.at].clone();
        let pos = self.pos();
        let generics = if self.is_sym("<") { self.generics()? } else { Vec::new() };
        let is_bare_method = matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("("));
        let ty = if is_bare_method || (matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("=" | ";"))) {
            TypeSlot::Infer
        } else {
            TypeSlot::Annotated(self.type_ann()?)
        };
        let (name, name_pos) = self.ident()?;
        if self.is_sym("(") {
            let params = self.params()?;
            let body = self.block()?;
            let id = self.id();
            class.order.push(Member::Method(class.methods.len()));
            class.methods.push(MethodDecl { id, name, generics, params, ret: ty, body, doc, pos });
            return Ok(());
        }
        if !generics.is_empty() {
            return self.error("generic parameters are only allowed on classes and methods");
        }
        let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
        self.expect_sym(";")?;
        let id = self.id();
        class.order.push(Member::Field(class.fields.len()));
        class.fields.push(FieldDecl { id, name, ty, init, pos: name_pos });
        Ok(())
    }

    fn params(&mut self) -> Result<Vec<Param>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if self.eat_sym(")") {
            return Ok(out);
        }
        loop {
            out.push(self.param()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn param(&mut self) -> Result<Param> {
        let ty = match self.try_typed_name() {
            Some(t) => TypeSlot::Annotated(t),
            None => TypeSlot::Infer,
        };
        let (name, pos) = self.ident()?;
        let id = self.id();
        Ok(Param { id, name, ty, pos })
    }

    fn block(&mut self) -> Result<Vec<Stmt>> {
        self.expect_sym("{")?;
        let mut out = Vec::new();
        while !self.eat_sym("}") {
            if matches!(self.peek(), Tok::Eof) {
                return self.error("unexpected end of input inside block");
            }
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt> {
        self.check_unsupported()?;
        let pos = self.pos();
        if self.is_sym("{") {
            return Ok(Stmt::Block(self.block()?));
        }
        if self.is_kw("while") {
            self.advance();
            self.expect_sym("(")?;
            let cond = self.expr()?;
            self.expect_sym(")")?;
            let body = match self.stmt()? {
                Stmt::Block(b) => b,
                other => vec![other],
            };
            return Ok(Stmt::While { cond, body, pos });
        }
        if self.is_kw("return") {
            self.advance();
            let value = if self.is_sym(";") { None } else { Some(self.expr()?) };
            self.expect_sym(";")?;
            return Ok(Stmt::Return { value, pos });
        }
        if self.is_kw("var") && matches!(self.peek_at(1), Tok::Ident(_)) {
            self.advance();
            return self.local(TypeSlot::Infer);
        }
        if let Some(t) = self.try_typed_name() {
            return self.local(TypeSlot::Annotated(t));
        }
        let e = self.expr()?;
        self.expect_sym(";")?;
        Ok(Stmt::Expr(e))
    }

    fn local(&mut self, ty: TypeSlot) -> Result<Stmt> {
        let (name, pos) = self.ident()?;
        let init = if self.eat_sym("=") { Some(self.expr()?) } else { None };
        self.expect_sym(";")?;
        let id = self.id();
        Ok(Stmt::Local { id, name, ty, init, pos })
    }

    fn mk(&mut self, kind: ExprKind, pos: Pos) -> Expr {
        let id = self.id();
        Expr { id, kind, slot: TypeSlot::Infer, pos }
    }

    fn looks_like_lambda(&self) -> bool {
        match self.peek() {
            Tok::Ident(_) => matches!(self.peek_at(1), Tok::Sym("->")),
            Tok::Sym("(") => {
                let mut depth = 0usize;
                let mut n = 0;
                loop {
                    match self.peek_at(n) {
                        Tok::Sym("(") => depth += 1,
                        Tok::Sym(")") => {
                            depth -= 1;
                            if depth == 0 {
                                return matches!(self.peek_at(n + 1), Tok::Sym("->"));
                            }
                        }
                        Tok::Eof => return false,
                        _ => {}
                    }
                    n += 1;
                }
            }
            _ => false,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        if self.looks_like_lambda() {
            return self.lambda();
        }
        let pos = self.pos();
        let lhs = self.or()?;
        if self.eat_sym("=") {
            if !matches!(lhs.kind, ExprKind::Var(_) | ExprKind::Field { .. }) {
                return Err(Error::Syntax { pos, msg: "invalid assignment target".into() });
            }
            let value = self.expr()?;
            return Ok(self.mk(ExprKind::Assign { target: Box::new(lhs), value: Box::new(value) }, pos));
        }
        Ok(lhs)
    }

    fn lambda(&mut self) -> Result<Expr> {
        let pos = self.pos();
        let params = if self.is_sym("(") {
            self.params()?
        } else {
            let (name, ppos) = self.ident()?;
            let id = self.id();
            vec![Param { id, name, ty: TypeSlot::Infer, pos: ppos }]
        };
        self.expect_sym("->")?;
        let body = if self.is_sym("{") {
            LambdaBody::Block(self.block()?)
        } else {
            LambdaBody::Expr(Box::new(self.expr()?))
        };
        Ok(self.mk(ExprKind::Lambda { params, body }, pos))
    }

    fn binary(&mut self, op: BinOp, lhs: Expr, rhs: Expr) -> Expr {
        let pos = lhs.pos;
        self.mk(ExprKind::Binary { op, lhs: Box::new(lhs), rhs: Box::new(rhs) }, pos)
    }

    fn or(&mut self) -> Result<Expr> {
        let mut lhs = self.le()?;
        while self.eat_sym("||") {
            let rhs = self.le()?;
            lhs = self.binary(BinOp::Or, lhs, rhs);
        }
        Ok(lhs)
    }

    fn le(&mut self) -> Result<Expr> {
        let lhs = self.add()?;
        if self.eat_sym("<=") {
            let rhs = self.add()?;
            return Ok(self.binary(BinOp::Le, lhs, rhs));
        }
        Ok(lhs)
    }

    fn add(&mut self) -> Result<Expr> {
        let mut lhs = self.mul()?;
        while self.eat_sym("+") {
            let rhs = self.mul()?;
            lhs = self.binary(BinOp::Add, lhs, rhs);
        }
        Ok(lhs)
    }

    fn mul(&mut self) -> Result<Expr> {
        let mut lhs = self.postfix()?;
        while self.eat_sym("*") {
            let rhs = self.postfix()?;
            lhs = self.binary(BinOp::Mul, lhs, rhs);
        }
        Ok(lhs)
    }

    fn postfix(&mut self) -> Result<Expr> {
        let mut e = self.primary()?;
        loop {
            if self.is_sym(".") {
                self.advance();
                let (name, pos) = self.ident()?;
                if self.is_sym("(") {
                    let args = self.args()?;
                    e = self.mk(ExprKind::Call { receiver: Some(Box::new(e)), name, args }, pos);
                } else {
                    e = self.mk(ExprKind::Field { receiver: Box::new(e), name }, pos);
                }
            } else if self.is_sym("++") {
                let pos = self.pos();
                self.advance();
                if !matches!(e.kind, ExprKind::Var(_) | ExprKind::Field { .. }) {
                    return Err(Error::Syntax { pos, msg: "`++` needs a variable".into() });
                }
                e = self.mk(ExprKind::PostInc(Box::new(e)), pos);
            } else {
                return Ok(e);
            }
        }
    }

    fn args(&mut self) -> Result<Vec<Expr>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if self.eat_sym(")") {
            return Ok(out);
        }
        loop {
            out.push(self.expr()?);
            if !self.eat_sym(",") {
                break;
            }
        }
        self.expect_sym(")")?;
        Ok(out)
    }

    fn primary(&mut self) -> Result<Expr> {
        self.check_unsupported()?;
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.advance();
                Ok(self.mk(ExprKind::Lit(Literal::Int(v)), pos))
            }
            Tok::Str(s) => {
                self.advance();
                Ok(self.mk(ExprKind::Lit(Literal::Str(s)), pos))
            }
            Tok::Sym("(") => {
                self.advance();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "true" || k == "false" => {
                self.advance();
                Ok(self.mk(ExprKind::Lit(Literal::Bool(k == "true")), pos))
            }
            Tok::Ident(k) if k == "this" => {
                self.advance();
                Ok(self.mk(ExprKind::This, pos))
            }
            Tok::Ident(k) if k == "new" => {
                self.advance();
                let (class, _) = self.qname()?;
                let mut type_args = None;
                if self.eat_sym("<") {
                    let mut ts = Vec::new();
                    if !self.is_sym(">") {
                        loop {
                            ts.push(self.type_ann()?);
                            if !self.eat_sym(",") {
                                break;
                            }
                        }
                    }
                    self.expect_sym(">")?;
                    type_args = Some(ts);
                }
                let args = self.args()?;
                Ok(self.mk(ExprKind::New { class, type_args, args }, pos))
            }
            Tok::Ident(_) => {
                let (name, pos) = self.ident()?;
                if self.is_sym("(") {
                    let args = self.args()?;
                    Ok(self.mk(ExprKind::Call { receiver: None, name, args }, pos))
                } else {
                    Ok(self.mk(ExprKind::Var(name), pos))
                }
            }
            _ => self.error(format!("expected expression, found {}", self.describe())),
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "class" | "import" | "var" | "while" | "return" | "new" | "this" | "true" | "false" | "void" | "extends"
    ) || UNSUPPORTED_KEYWORDS.contains(&s)
}
