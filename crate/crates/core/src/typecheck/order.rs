//! Dependency ordering of `act` declarations.
//!
//! An act depends on another when its body, directly or through the free
//! functions and declared classes it references, names the other act's
//! constructor or generated class. The generated class of a callee must be
//! complete before a caller is checked, so the dependency graph has to be
//! acyclic; functions on their own may recurse freely.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::*;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ActionCycleError {
    /// Acts on the cycle, starting from the earliest in source order.
    pub cycle: Vec<String>,
    pub pos: Pos,
}

impl fmt::Display for ActionCycleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.cycle.len() == 1 {
            write!(f, "act `{}` depends on itself", self.cycle[0])
        } else {
            let mut path = self.cycle.join(" -> ");
            path.push_str(" -> ");
            path.push_str(&self.cycle[0]);
            write!(f, "mutually recursive acts: {path}")
        }
    }
}

/// Returns the acts of `module` in dependency order, ties broken by source
/// order.
pub fn order_actions(module: &Module) -> Result<Vec<&ActDecl>, ActionCycleError> {
    let acts: Vec<&ActDecl> = module.actions().collect();
    let deps = act_dependencies(module, &acts);

    // Cycle detection first so the error names the whole cycle.
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(
        i: usize,
        deps: &[BTreeSet<usize>],
        marks: &mut [Mark],
        stack: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        marks[i] = Mark::Active;
        stack.push(i);
        for &d in &deps[i] {
            match marks[d] {
                Mark::Active => {
                    let start = stack.iter().position(|&s| s == d).unwrap();
                    return Some(stack[start..].to_vec());
                }
                Mark::New => {
                    if let Some(c) = visit(d, deps, marks, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        marks[i] = Mark::Done;
        None
    }
    let mut marks = vec![Mark::New; acts.len()];
    for i in 0..acts.len() {
        if marks[i] == Mark::New {
            if let Some(mut cycle) = visit(i, &deps, &mut marks, &mut Vec::new()) {
                let first = (0..cycle.len()).min_by_key(|&k| cycle[k]).unwrap();
                cycle.rotate_left(first);
                return Err(ActionCycleError {
                    cycle: cycle.iter().map(|&k| acts[k].name.name.clone()).collect(),
                    pos: acts[cycle[0]].pos,
                });
            }
        }
    }

    // Kahn's algorithm, always emitting the earliest ready act.
    let mut remaining: Vec<usize> = deps.iter().map(|d| d.len()).collect();
    let mut emitted = vec![false; acts.len()];
    let mut order = Vec::with_capacity(acts.len());
    while order.len() < acts.len() {
        let next = (0..acts.len())
            .find(|&i| !emitted[i] && remaining[i] == 0)
            .expect("acyclic graph always has a ready node");
        emitted[next] = true;
        order.push(acts[next]);
        for (i, d) in deps.iter().enumerate() {
            if d.contains(&next) {
                remaining[i] -= 1;
            }
        }
    }
    Ok(order)
}

/// For each act (by position in `acts`), the set of acts it depends on.
fn act_dependencies(module: &Module, acts: &[&ActDecl]) -> Vec<BTreeSet<usize>> {
    // Names that identify an act: its constructor and its class.
    let mut act_names: HashMap<&str, usize> = HashMap::new();
    for (i, a) in acts.iter().enumerate() {
        act_names.insert(&a.name.name, i);
        act_names.insert(&a.class_name.name, i);
    }
    let functions: HashMap<&str, &FuncDecl> =
        module.functions().map(|f| (f.name.name.as_str(), f)).collect();
    let classes: HashMap<&str, &ClsDecl> =
        module.classes().map(|c| (c.name.name.as_str(), c)).collect();

    acts.iter()
        .map(|act| {
            let mut seen = BTreeSet::new();
            let mut work: Vec<String> = Vec::new();
            let mut refs = Refs::default();
            act.params.iter().for_each(|p| refs.ty(&p.ty));
            refs.stmts(&act.body);
            work.extend(refs.0);
            let mut deps = BTreeSet::new();
            while let Some(name) = work.pop() {
                if !seen.insert(name.clone()) {
                    continue;
                }
                if let Some(&a) = act_names.get(name.as_str()) {
                    deps.insert(a);
                    continue;
                }
                let mut refs = Refs::default();
                if let Some(f) = functions.get(name.as_str()) {
                    refs.func(f);
                } else if let Some(c) = classes.get(name.as_str()) {
                    c.fields.iter().for_each(|p| refs.ty(&p.ty));
                    c.methods.iter().for_each(|m| refs.func(m));
                }
                work.extend(refs.0);
            }
            deps
        })
        .collect()
}

/// Collects called names and named types mentioned by a piece of syntax.
#[derive(Default)]
struct Refs(BTreeSet<String>);

impl Refs {
    fn func(&mut self, f: &FuncDecl) {
        f.params.iter().for_each(|p| self.ty(&p.ty));
        if let Some(t) = &f.ret {
            self.ty(t);
        }
        self.stmts(&f.body);
    }

    fn ty(&mut self, t: &TypeExpr) {
        match &t.kind {
            TypeKind::Named(n) => {
                self.0.insert(n.clone());
            }
            TypeKind::Array { elem, .. } => self.ty(elem),
            _ => {}
        }
    }

    fn stmts(&mut self, body: &[Stmt]) {
        for s in body {
            match &s.kind {
                StmtKind::Let { ty, init, .. } | StmtKind::Frm { ty, init, .. } => {
                    if let Some(t) = ty {
                        self.ty(t);
                    }
                    if let Some(e) = init {
                        self.expr(e);
                    }
                }
                StmtKind::Assign { target, value } => {
                    self.expr(target);
                    self.expr(value);
                }
                StmtKind::If {
                    cond,
                    then_body,
                    else_body,
                } => {
                    self.expr(cond);
                    self.stmts(then_body);
                    self.stmts(else_body);
                }
                StmtKind::While { cond, body } => {
                    self.expr(cond);
                    self.stmts(body);
                }
                StmtKind::Return(e) => {
                    if let Some(e) = e {
                        self.expr(e);
                    }
                }
                StmtKind::Action(a) => {
                    a.params.iter().for_each(|p| self.ty(&p.ty));
                    a.preconditions.iter().for_each(|e| self.expr(e));
                }
                StmtKind::Expr(e) => self.expr(e),
            }
        }
    }

    fn expr(&mut self, e: &Expr) {
        match &e.kind {
            ExprKind::Int(_) | ExprKind::Float(_) | ExprKind::Bool(_) | ExprKind::Ident(_) => {}
            ExprKind::Field { base, .. } => self.expr(base),
            ExprKind::Index { base, index } => {
                self.expr(base);
                self.expr(index);
            }
            ExprKind::Call { callee, args } => {
                self.0.insert(callee.name.clone());
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::MethodCall { receiver, args, .. } => {
                self.expr(receiver);
                args.iter().for_each(|a| self.expr(a));
            }
            ExprKind::Unary { operand, .. } => self.expr(operand),
            ExprKind::Binary { lhs, rhs, .. } => {
                self.expr(lhs);
                self.expr(rhs);
            }
        }
    }
}
