//! Untyped syntax tree produced by the parser.
//!
//! Every node carries the [`Pos`] of its first token. Structural comparison
//! that ignores positions goes through [`Module::without_positions`].

use std::fmt;

/// 1-based source position.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub column: u32,
}

impl Pos {
    pub const fn new(line: u32, column: u32) -> Self {
        Self { line, column }
    }
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ident {
    pub name: String,
    pub pos: Pos,
}

impl Ident {
    pub fn new(name: impl Into<String>, pos: Pos) -> Self {
        Self {
            name: name.into(),
            pos,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TypeExpr {
    pub kind: TypeKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum TypeKind {
    Bool,
    Int,
    Float,
    /// `Int<min,max>`, both ends inclusive.
    BoundedInt { min: i64, max: i64 },
    Array { elem: Box<TypeExpr>, len: u64 },
    Named(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: Ident,
    pub ty: TypeExpr,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Module {
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Item {
    Function(FuncDecl),
    Action(ActDecl),
    Class(ClsDecl),
}

impl Item {
    pub fn name(&self) -> &Ident {
        match self {
            Item::Function(f) => &f.name,
            Item::Action(a) => &a.name,
            Item::Class(c) => &c.name,
        }
    }
}

impl Module {
    pub fn functions(&self) -> impl Iterator<Item = &FuncDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Function(f) => Some(f),
            _ => None,
        })
    }

    pub fn actions(&self) -> impl Iterator<Item = &ActDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Action(a) => Some(a),
            _ => None,
        })
    }

    pub fn classes(&self) -> impl Iterator<Item = &ClsDecl> {
        self.items.iter().filter_map(|i| match i {
            Item::Class(c) => Some(c),
            _ => None,
        })
    }

    /// Copy of the tree with every position reset, for structural equality.
    pub fn without_positions(&self) -> Module {
        let mut m = self.clone();
        m.visit_positions(&mut |p| *p = Pos::default());
        m
    }

    /// Calls `f` on every position stored in the tree.
    pub fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        for item in &mut self.items {
            match item {
                Item::Function(func) => func.visit_positions(f),
                Item::Action(act) => {
                    f(&mut act.pos);
                    f(&mut act.name.pos);
                    f(&mut act.class_name.pos);
                    act.params.iter_mut().for_each(|p| p.visit_positions(f));
                    act.body.iter_mut().for_each(|s| s.visit_positions(f));
                }
                Item::Class(cls) => {
                    f(&mut cls.pos);
                    f(&mut cls.name.pos);
                    cls.fields.iter_mut().for_each(|p| p.visit_positions(f));
                    cls.methods.iter_mut().for_each(|m| m.visit_positions(f));
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FuncDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    /// `None` for functions without `-> T`.
    pub ret: Option<TypeExpr>,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

impl FuncDecl {
    fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        f(&mut self.pos);
        f(&mut self.name.pos);
        self.params.iter_mut().for_each(|p| p.visit_positions(f));
        if let Some(t) = &mut self.ret {
            t.visit_positions(f);
        }
        self.body.iter_mut().for_each(|s| s.visit_positions(f));
    }
}

/// `act name(params) -> ClassName:` declaration.
#[derive(Debug, Clone, PartialEq)]
pub struct ActDecl {
    pub name: Ident,
    pub params: Vec<Param>,
    pub class_name: Ident,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClsDecl {
    pub name: Ident,
    pub fields: Vec<Param>,
    pub methods: Vec<FuncDecl>,
    pub pos: Pos,
}

/// A suspension point inside an act body.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionStmt {
    pub name: Ident,
    pub params: Vec<Param>,
    pub preconditions: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let {
        name: Ident,
        ty: Option<TypeExpr>,
        init: Option<Expr>,
    },
    Frm {
        name: Ident,
        ty: Option<TypeExpr>,
        init: Option<Expr>,
    },
    Assign {
        target: Expr,
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    Return(Option<Expr>),
    Action(ActionStmt),
    Expr(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UnaryOp {
    Not,
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinaryOp {
    Mul,
    Div,
    Rem,
    Add,
    Sub,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    /// Binding strength; higher binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinaryOp::Or => 1,
            BinaryOp::And => 2,
            BinaryOp::Eq
            | BinaryOp::Ne
            | BinaryOp::Lt
            | BinaryOp::Le
            | BinaryOp::Gt
            | BinaryOp::Ge => 3,
            BinaryOp::Add | BinaryOp::Sub => 4,
            BinaryOp::Mul | BinaryOp::Div | BinaryOp::Rem => 5,
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Rem => "%",
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Eq => "==",
            BinaryOp::Ne => "!=",
            BinaryOp::Lt => "<",
            BinaryOp::Le => "<=",
            BinaryOp::Gt => ">",
            BinaryOp::Ge => ">=",
            BinaryOp::And => "and",
            BinaryOp::Or => "or",
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 3
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Float(f64),
    Bool(bool),
    Ident(String),
    Field {
        base: Box<Expr>,
        field: Ident,
    },
    Index {
        base: Box<Expr>,
        index: Box<Expr>,
    },
    Call {
        callee: Ident,
        args: Vec<Expr>,
    },
    MethodCall {
        receiver: Box<Expr>,
        method: Ident,
        args: Vec<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Param {
    fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        f(&mut self.name.pos);
        self.ty.visit_positions(f);
    }
}

impl TypeExpr {
    fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        f(&mut self.pos);
        if let TypeKind::Array { elem, .. } = &mut self.kind {
            elem.visit_positions(f);
        }
    }
}

impl Stmt {
    fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        f(&mut self.pos);
        match &mut self.kind {
            StmtKind::Let { name, ty, init } | StmtKind::Frm { name, ty, init } => {
                f(&mut name.pos);
                if let Some(t) = ty {
                    t.visit_positions(f);
                }
                if let Some(e) = init {
                    e.visit_positions(f);
                }
            }
            StmtKind::Assign { target, value } => {
                target.visit_positions(f);
                value.visit_positions(f);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                cond.visit_positions(f);
                then_body.iter_mut().for_each(|s| s.visit_positions(f));
                else_body.iter_mut().for_each(|s| s.visit_positions(f));
            }
            StmtKind::While { cond, body } => {
                cond.visit_positions(f);
                body.iter_mut().for_each(|s| s.visit_positions(f));
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    e.visit_positions(f);
                }
            }
            StmtKind::Action(a) => {
                f(&mut a.name.pos);
                a.params.iter_mut().for_each(|p| p.visit_positions(f));
                a.preconditions.iter_mut().for_each(|e| e.visit_positions(f));
            }
            StmtKind::Expr(e) => e.visit_positions(f),
        }
    }
}

impl Expr {
    pub fn visit_positions(&mut self, f: &mut dyn FnMut(&mut Pos)) {
        f(&mut self.pos);
        match &mut self.kind {
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Bool(_) | ExprKind::Ident(_) => {}
            ExprKind::Field { base, field } => {
                base.visit_positions(f);
                f(&mut field.pos);
            }
            ExprKind::Index { base, index } => {
                base.visit_positions(f);
                index.visit_positions(f);
            }
            ExprKind::Call { callee, args } => {
                f(&mut callee.pos);
                args.iter_mut().for_each(|a| a.visit_positions(f));
            }
            ExprKind::MethodCall {
                receiver,
                method,
                args,
            } => {
                receiver.visit_positions(f);
                f(&mut method.pos);
                args.iter_mut().for_each(|a| a.visit_positions(f));
            }
            ExprKind::Unary { operand, .. } => operand.visit_positions(f),
            ExprKind::Binary { lhs, rhs, .. } => {
                lhs.visit_positions(f);
                rhs.visit_positions(f);
            }
        }
    }
}
