//! Which methods write through `self`, and the rule that preconditions
//! never modify the frame they are evaluated against.

use std::cell::Cell;

use super::tir::*;
use super::{TResult, TypeError};

pub(super) fn analyze(m: &mut TypedModule) -> TResult<()> {
    loop {
        let mut changed = false;
        for id in 0..m.functions.len() {
            let f = &m.functions[id];
            if f.self_class.is_none() || f.mutates_self {
                continue;
            }
            let mutates = Cell::new(false);
            walk_stmts(
                &f.body,
                &mut |s| {
                    if matches!(&s.kind, TStmtKind::Assign { place, .. } if place.root == PlaceRoot::This) {
                        mutates.set(true);
                    }
                },
                &mut |e| {
                    if writes_this(m, e) {
                        mutates.set(true);
                    }
                },
            );
            if mutates.get() {
                m.functions[id].mutates_self = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    for act in &m.acts {
        for point in &act.points {
            for cond in &point.preconditions {
                let mut offender = None;
                walk_expr(cond, &mut |e| {
                    if offender.is_none() && writes_this(m, e) {
                        let name = match &e.kind {
                            TExprKind::Method { func, .. } => m.functions[*func].name.clone(),
                            TExprKind::Apply { act, action, .. } => {
                                m.acts[*act].actions[*action].name.clone()
                            }
                            _ => unreachable!(),
                        };
                        offender = Some((e.pos, name));
                    }
                });
                if let Some((pos, name)) = offender {
                    return Err(TypeError::new(
                        pos,
                        format!(
                            "precondition of `{}` calls `{name}`, which modifies the frame",
                            point.name
                        ),
                    ));
                }
            }
        }
    }
    Ok(())
}

/// Whether evaluating `e` itself (not its children) may write through the
/// current receiver or frame.
fn writes_this(m: &TypedModule, e: &TExpr) -> bool {
    let rooted = |r: &Receiver| matches!(r, Receiver::Place(p) if p.root == PlaceRoot::This);
    match &e.kind {
        TExprKind::Method { recv, func, .. } => rooted(recv) && m.functions[*func].mutates_self,
        TExprKind::Apply { recv, .. } => rooted(recv),
        _ => false,
    }
}

pub(crate) fn walk_stmts(
    body: &[TStmt],
    on_stmt: &mut dyn FnMut(&TStmt),
    on_expr: &mut dyn FnMut(&TExpr),
) {
    for s in body {
        on_stmt(s);
        match &s.kind {
            TStmtKind::Let { init, .. } | TStmtKind::FrameInit { init, .. } => {
                walk_expr(init, on_expr)
            }
            TStmtKind::Assign { place, value } => {
                walk_place(place, on_expr);
                walk_expr(value, on_expr);
            }
            TStmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                walk_expr(cond, on_expr);
                walk_stmts(then_body, on_stmt, on_expr);
                walk_stmts(else_body, on_stmt, on_expr);
            }
            TStmtKind::While { cond, body } => {
                walk_expr(cond, on_expr);
                walk_stmts(body, on_stmt, on_expr);
            }
            TStmtKind::Return(Some(e)) | TStmtKind::Expr(e) => walk_expr(e, on_expr),
            TStmtKind::Return(None) | TStmtKind::Action(_) => {}
        }
    }
}

fn walk_place(p: &TPlace, f: &mut dyn FnMut(&TExpr)) {
    for proj in &p.projections {
        if let Projection::Index { index, .. } = proj {
            walk_expr(index, f);
        }
    }
}

fn walk_receiver(r: &Receiver, f: &mut dyn FnMut(&TExpr)) {
    match r {
        Receiver::Place(p) => walk_place(p, f),
        Receiver::Value(e) => walk_expr(e, f),
    }
}

pub(crate) fn walk_expr(e: &TExpr, f: &mut dyn FnMut(&TExpr)) {
    f(e);
    match &e.kind {
        TExprKind::Lit(_) => {}
        TExprKind::Read(p) => walk_place(p, f),
        TExprKind::Field(b, _) | TExprKind::Unary(_, b) | TExprKind::Convert(_, b) => {
            walk_expr(b, f)
        }
        TExprKind::Index(a, b) | TExprKind::Binary(_, a, b) => {
            walk_expr(a, f);
            walk_expr(b, f);
        }
        TExprKind::Call(_, args) | TExprKind::Construct(_, args) => {
            args.iter().for_each(|a| walk_expr(a, f))
        }
        TExprKind::Method { recv, args, .. }
        | TExprKind::CanApply { recv, args, .. }
        | TExprKind::Apply { recv, args, .. } => {
            walk_receiver(recv, f);
            args.iter().for_each(|a| walk_expr(a, f));
        }
        TExprKind::IsDone(recv) => walk_receiver(recv, f),
    }
}
