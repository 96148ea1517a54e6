//! Canonical source rendering with 2-space indentation.
//!
//! Parentheses are emitted only where precedence or associativity requires
//! them, so `parse(pretty_print(m))` reproduces `m` up to positions.

use std::fmt::Write;

use super::ast::*;

const INDENT: &str = "  ";

pub fn pretty_print(module: &Module) -> String {
    let mut out = String::new();
    for (i, item) in module.items.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match item {
            Item::Function(f) => func(&mut out, f, 0),
            Item::Action(a) => {
                let _ = writeln!(
                    out,
                    "act {}({}) -> {}:",
                    a.name.name,
                    params(&a.params),
                    a.class_name.name
                );
                block(&mut out, &a.body, 1);
            }
            Item::Class(c) => {
                let _ = writeln!(out, "cls {}:", c.name.name);
                for f in &c.fields {
                    let _ = writeln!(out, "{INDENT}{} {}", type_expr(&f.ty), f.name.name);
                }
                for (j, m) in c.methods.iter().enumerate() {
                    if j > 0 || !c.fields.is_empty() {
                        out.push('\n');
                    }
                    func(&mut out, m, 1);
                }
            }
        }
    }
    out
}

fn func(out: &mut String, f: &FuncDecl, depth: usize) {
    let ret = f
        .ret
        .as_ref()
        .map(|t| format!(" -> {}", type_expr(t)))
        .unwrap_or_default();
    let _ = writeln!(
        out,
        "{}fun {}({}){}:",
        INDENT.repeat(depth),
        f.name.name,
        params(&f.params),
        ret
    );
    block(out, &f.body, depth + 1);
}

fn params(ps: &[Param]) -> String {
    ps.iter()
        .map(|p| format!("{} {}", type_expr(&p.ty), p.name.name))
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn type_expr(t: &TypeExpr) -> String {
    match &t.kind {
        TypeKind::Bool => "Bool".into(),
        TypeKind::Int => "Int".into(),
        TypeKind::Float => "Float".into(),
        TypeKind::BoundedInt { min, max } => format!("Int<{min},{max}>"),
        TypeKind::Array { elem, len } => format!("{}[{len}]", type_expr(elem)),
        TypeKind::Named(n) => n.clone(),
    }
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = INDENT.repeat(depth);
    match &s.kind {
        StmtKind::Let { name, ty, init } | StmtKind::Frm { name, ty, init } => {
            let kw = if matches!(s.kind, StmtKind::Let { .. }) {
                "let"
            } else {
                "frm"
            };
            let _ = write!(out, "{pad}{kw} {}", name.name);
            if let Some(t) = ty {
                let _ = write!(out, " : {}", type_expr(t));
            }
            if let Some(e) = init {
                let _ = write!(out, " = {}", expr(e));
            }
            out.push('\n');
        }
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{pad}{} = {}", expr(target), expr(value));
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let _ = writeln!(out, "{pad}if {}:", expr(cond));
            block(out, then_body, depth + 1);
            if !else_body.is_empty() {
                let _ = writeln!(out, "{pad}else:");
                block(out, else_body, depth + 1);
            }
        }
        StmtKind::While { cond, body } => {
            let _ = writeln!(out, "{pad}while {}:", expr(cond));
            block(out, body, depth + 1);
        }
        StmtKind::Return(None) => {
            let _ = writeln!(out, "{pad}return");
        }
        StmtKind::Return(Some(e)) => {
            let _ = writeln!(out, "{pad}return {}", expr(e));
        }
        StmtKind::Action(a) => {
            let _ = write!(out, "{pad}act {}({})", a.name.name, params(&a.params));
            if !a.preconditions.is_empty() {
                let conds: Vec<_> = a.preconditions.iter().map(expr).collect();
                let _ = write!(out, " {{ {} }}", conds.join(", "));
            }
            out.push('\n');
        }
        StmtKind::Expr(e) => {
            let _ = writeln!(out, "{pad}{}", expr(e));
        }
    }
}

/// Precedence of the outermost construct of `e`; atoms bind tightest.
fn expr_prec(e: &Expr) -> u8 {
    match &e.kind {
        ExprKind::Binary { op, .. } => op.precedence(),
        ExprKind::Unary { .. } => 6,
        _ => 7,
    }
}

fn wrap(e: &Expr, needs_parens: bool) -> String {
    if needs_parens {
        format!("({})", expr(e))
    } else {
        expr(e)
    }
}

pub fn expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(v) => v.to_string(),
        ExprKind::Float(v) => float_literal(*v),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Ident(n) => n.clone(),
        ExprKind::Field { base, field } => format!("{}.{}", wrap(base, expr_prec(base) < 7), field.name),
        ExprKind::Index { base, index } => {
            format!("{}[{}]", wrap(base, expr_prec(base) < 7), expr(index))
        }
        ExprKind::Call { callee, args } => format!("{}({})", callee.name, list(args)),
        ExprKind::MethodCall {
            receiver,
            method,
            args,
        } => format!(
            "{}.{}({})",
            wrap(receiver, expr_prec(receiver) < 7),
            method.name,
            list(args)
        ),
        ExprKind::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Not => "!",
                UnaryOp::Neg => "-",
            };
            // A literal operand needs no parentheses but `- -x` must not
            // collapse into a different token sequence.
            let inner = wrap(operand, expr_prec(operand) < 6);
            if *op == UnaryOp::Neg && inner.starts_with('-') {
                format!("{sym}({inner})")
            } else {
                format!("{sym}{inner}")
            }
        }
        ExprKind::Binary { op, lhs, rhs } => {
            let p = op.precedence();
            format!(
                "{} {} {}",
                wrap(lhs, expr_prec(lhs) < p),
                op.symbol(),
                wrap(rhs, expr_prec(rhs) <= p)
            )
        }
    }
}

fn list(args: &[Expr]) -> String {
    args.iter().map(expr).collect::<Vec<_>>().join(", ")
}

/// Shortest representation that reads back as the same float literal.
fn float_literal(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains(['.', 'e', 'E']) || !v.is_finite() {
        s
    } else {
        format!("{s}.0")
    }
}
