//! Syntax tree of the supported language subset.
//!
//! Every declaration and expression carries a [`NodeId`] so later stages can
//! attach types through side tables. Omitted annotations are kept as
//! [`TypeSlot::Infer`].

use crate::error::Pos;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub u32);

/// A type written in source. Names are unresolved at this point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeAnn {
    Named { name: String, args: Vec<TypeAnn>, pos: Pos },
    Void { pos: Pos },
}

impl TypeAnn {
    pub fn named(name: impl Into<String>, args: Vec<TypeAnn>) -> Self {
        TypeAnn::Named { name: name.into(), args, pos: Pos::default() }
    }

    pub fn pos(&self) -> Pos {
        match self {
            TypeAnn::Named { pos, .. } | TypeAnn::Void { pos } => *pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TypeSlot {
    Infer,
    Annotated(TypeAnn),
}

impl TypeSlot {
    pub fn annotation(&self) -> Option<&TypeAnn> {
        match self {
            TypeSlot::Infer => None,
            TypeSlot::Annotated(a) => Some(a),
        }
    }

    pub fn is_infer(&self) -> bool {
        matches!(self, TypeSlot::Infer)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenericParam {
    pub name: String,
    /// Empty means bounded by `Object`.
    pub bounds: Vec<TypeAnn>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub imports: Vec<Import>,
    pub classes: Vec<ClassDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Import {
    pub name: String,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDecl {
    pub name: String,
    pub generics: Vec<GenericParam>,
    pub fields: Vec<FieldDecl>,
    pub methods: Vec<MethodDecl>,
    /// Declaration order of fields and methods interleaved, for printing.
    pub order: Vec<Member>,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Member {
    Field(usize),
    Method(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldDecl {
    pub id: NodeId,
    pub name: String,
    pub ty: TypeSlot,
    pub init: Option<Expr>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDecl {
    pub id: NodeId,
    pub name: String,
    pub generics: Vec<GenericParam>,
    pub params: Vec<Param>,
    pub ret: TypeSlot,
    pub body: Vec<Stmt>,
    /// Comment lines printed above the declaration (used for intersection
    /// type reports). Not part of the language.
    pub doc: Vec<String>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub id: NodeId,
    pub name: String,
    pub ty: TypeSlot,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    /// `var x = e;`, `T x = e;` or `var x;`
    Local { id: NodeId, name: String, ty: TypeSlot, init: Option<Expr>, pos: Pos },
    While { cond: Expr, body: Vec<Stmt>, pos: Pos },
    Return { value: Option<Expr>, pos: Pos },
    Block(Vec<Stmt>),
    Expr(Expr),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Mul,
    Le,
    Or,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Mul => "*",
            BinOp::Le => "<=",
            BinOp::Or => "||",
        }
    }

    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::Le => 2,
            BinOp::Add => 3,
            BinOp::Mul => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Literal {
    Int(i64),
    Bool(bool),
    Str(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Expr {
    pub id: NodeId,
    pub kind: ExprKind,
    pub slot: TypeSlot,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExprKind {
    Lit(Literal),
    Var(String),
    This,
    Assign { target: Box<Expr>, value: Box<Expr> },
    PostInc(Box<Expr>),
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr> },
    Call { receiver: Option<Box<Expr>>, name: String, args: Vec<Expr> },
    Field { receiver: Box<Expr>, name: String },
    /// `new C<>(args)`; `type_args` is `None` without angle brackets and
    /// `Some(vec![])` for the diamond.
    New { class: String, type_args: Option<Vec<TypeAnn>>, args: Vec<Expr> },
    Lambda { params: Vec<Param>, body: LambdaBody },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LambdaBody {
    Expr(Box<Expr>),
    Block(Vec<Stmt>),
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDecl> {
        self.classes.iter().find(|c| c.name == name)
    }
}

impl ClassDecl {
    pub fn method_ids(&self) -> Vec<String> {
        self.methods
            .iter()
            .enumerate()
            .map(|(i, m)| self.method_id(i).unwrap_or_else(|| m.name.clone()))
            .collect()
    }

    /// Display id of the `index`-th method: its name, or `name#k` when the
    /// name is declared more than once (`k` counts from 1).
    pub fn method_id(&self, index: usize) -> Option<String> {
        let m = self.methods.get(index)?;
        let same: Vec<usize> = (0..self.methods.len())
            .filter(|&j| self.methods[j].name == m.name)
            .collect();
        if same.len() == 1 {
            Some(m.name.clone())
        } else {
            let k = same.iter().position(|&j| j == index).unwrap() + 1;
            Some(format!("{}#{}", m.name, k))
        }
    }
}

/// Visit every expression in a statement list, outermost first.
pub fn walk_stmts<'a>(stmts: &'a [Stmt], f: &mut impl FnMut(&'a Expr)) {
    for s in stmts {
        walk_stmt(s, f);
    }
}

pub fn walk_stmt<'a>(stmt: &'a Stmt, f: &mut impl FnMut(&'a Expr)) {
    match stmt {
        Stmt::Local { init, .. } => {
            if let Some(e) = init {
                walk_expr(e, f);
            }
        }
        Stmt::While { cond, body, .. } => {
            walk_expr(cond, f);
            walk_stmts(body, f);
        }
        Stmt::Return { value, .. } => {
            if let Some(e) = value {
                walk_expr(e, f);
            }
        }
        Stmt::Block(b) => walk_stmts(b, f),
        Stmt::Expr(e) => walk_expr(e, f),
    }
}

pub fn walk_expr<'a>(e: &'a Expr, f: &mut impl FnMut(&'a Expr)) {
    f(e);
    match &e.kind {
        ExprKind::Lit(_) | ExprKind::Var(_) | ExprKind::This => {}
        ExprKind::Assign { target, value } => {
            walk_expr(target, f);
            walk_expr(value, f);
        }
        ExprKind::PostInc(t) => walk_expr(t, f),
        ExprKind::Binary { lhs, rhs, .. } => {
            walk_expr(lhs, f);
            walk_expr(rhs, f);
        }
        ExprKind::Call { receiver, args, .. } => {
            if let Some(r) = receiver {
                walk_expr(r, f);
            }
            args.iter().for_each(|a| walk_expr(a, f));
        }
        ExprKind::Field { receiver, .. } => walk_expr(receiver, f),
        ExprKind::New { args, .. } => args.iter().for_each(|a| walk_expr(a, f)),
        ExprKind::Lambda { body, .. } => match body {
            LambdaBody::Expr(b) => walk_expr(b, f),
            LambdaBody::Block(s) => walk_stmts(s, f),
        },
    }
}

/// Visit every expression of a program, including field initialisers.
pub fn walk_program<'a>(p: &'a Program, f: &mut impl FnMut(&'a Expr)) {
    for c in &p.classes {
        for fd in &c.fields {
            if let Some(e) = &fd.init {
                walk_expr(e, f);
            }
        }
        for m in &c.methods {
            walk_stmts(&m.body, f);
        }
    }
}
