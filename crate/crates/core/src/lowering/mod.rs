//! Lowering of typed acts into explicit state machines.
//!
//! Each act becomes a set of basic blocks holding straight-line statements
//! and ending in a terminator. Control reaches a block either from the
//! prologue (construction) or from the resume edge of a suspension point.

mod afg;

pub use afg::{build_afg, export_dot, ActionFlowGraph, AfgNode};

use crate::frontend::ast::Pos;
use crate::typecheck::{PointParam, TExpr, TExprKind, TStmt, TStmtKind, TypedModule};
use crate::types::{ActId, ClassId, Ty, Value};

pub type BlockId = usize;

#[derive(Debug, Clone)]
pub enum Terminator {
    Jump(BlockId),
    Branch {
        cond: TExpr,
        then_block: BlockId,
        else_block: BlockId,
    },
    /// Store the point index in `resume_idx` and return to the caller.
    Suspend(usize),
    /// Store -1 in `resume_idx`.
    Finish,
}

impl Terminator {
    pub fn successors(&self) -> Vec<BlockId> {
        match self {
            Terminator::Jump(b) => vec![*b],
            Terminator::Branch {
                then_block,
                else_block,
                ..
            } => vec![*then_block, *else_block],
            Terminator::Suspend(_) | Terminator::Finish => Vec::new(),
        }
    }
}

/// Straight-line code: only `let`, `frm`, assignment and expression
/// statements appear here.
#[derive(Debug, Clone)]
pub struct Block {
    pub stmts: Vec<TStmt>,
    pub term: Terminator,
}

#[derive(Debug, Clone)]
pub struct SuspensionPoint {
    pub index: usize,
    pub action_name: String,
    /// Index of the action signature in the act.
    pub action: usize,
    pub params: Vec<PointParam>,
    /// Conjunction checked by `can_*` and again before resuming.
    pub preconditions: Vec<TExpr>,
    pub resume_block: BlockId,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayoutEntry {
    pub name: String,
    pub ty: Ty,
    pub offset: usize,
}

#[derive(Debug, Clone)]
pub struct ActionMachine {
    pub act: ActId,
    pub name: String,
    pub class: ClassId,
    pub points: Vec<SuspensionPoint>,
    pub prologue: BlockId,
    pub blocks: Vec<Block>,
    pub frame_layout: Vec<LayoutEntry>,
    /// Packed size of the frame in bytes, `resume_idx` included.
    pub frame_size: usize,
    /// Local slots needed by any block.
    pub n_slots: usize,
    /// Points that no execution can reach.
    pub dead_points: Vec<usize>,
}

/// Packed size in bytes of a value of type `ty` in the binary format.
pub fn byte_size(m: &TypedModule, ty: &Ty) -> usize {
    match ty {
        Ty::Void => 0,
        Ty::Bool => 1,
        Ty::Int | Ty::Float | Ty::Bounded { .. } => 8,
        Ty::Array(elem, len) => byte_size(m, elem) * len,
        Ty::Class(id) => m.classes[*id].fields.iter().map(|f| byte_size(m, &f.ty)).sum(),
    }
}

/// Top-level fields of a class with their packed byte offsets.
pub fn class_layout(m: &TypedModule, class: ClassId) -> Vec<LayoutEntry> {
    let mut offset = 0;
    m.classes[class]
        .fields
        .iter()
        .map(|f| {
            let e = LayoutEntry {
                name: f.name.clone(),
                ty: f.ty.clone(),
                offset,
            };
            offset += byte_size(m, &f.ty);
            e
        })
        .collect()
}

pub fn lower_action(m: &TypedModule, act: ActId) -> ActionMachine {
    let info = &m.acts[act];
    let mut b = Builder {
        blocks: vec![Block {
            stmts: Vec::new(),
            term: Terminator::Finish,
        }],
        current: 0,
        resume: vec![None; info.points.len()],
    };
    b.stmts(&info.body);
    b.terminate(Terminator::Finish);

    let n_points = info.points.len();
    let resume: Vec<BlockId> = b
        .resume
        .iter()
        .map(|r| r.expect("every action statement was lowered"))
        .collect();
    let (blocks, remap) = prune(b.blocks, 0, &resume);
    let resume: Vec<BlockId> = resume.iter().map(|r| remap[*r].unwrap()).collect();

    // A point is live when its suspend terminator can execute.
    let mut live = vec![false; n_points];
    let mut seen = vec![false; blocks.len()];
    let mut stack = vec![0];
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        if let Terminator::Suspend(p) = blocks[id].term {
            live[p] = true;
            stack.push(resume[p]);
        }
        stack.extend(blocks[id].term.successors());
    }

    let points = info
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| SuspensionPoint {
            index: i,
            action_name: p.name.clone(),
            action: p.action,
            params: p.params.clone(),
            preconditions: p.preconditions.clone(),
            resume_block: resume[i],
            pos: p.pos,
        })
        .collect();
    ActionMachine {
        act,
        name: info.name.clone(),
        class: info.class,
        points,
        prologue: 0,
        blocks,
        frame_layout: class_layout(m, info.class),
        frame_size: byte_size(m, &Ty::Class(info.class)),
        n_slots: info.n_slots,
        dead_points: (0..n_points).filter(|&i| !live[i]).collect(),
    }
}

struct Builder {
    blocks: Vec<Block>,
    current: BlockId,
    resume: Vec<Option<BlockId>>,
}

impl Builder {
    fn new_block(&mut self) -> BlockId {
        self.blocks.push(Block {
            stmts: Vec::new(),
            term: Terminator::Finish,
        });
        self.blocks.len() - 1
    }

    /// Ends the current block and continues in a fresh one, which stays
    /// unreachable unless something jumps to it.
    fn terminate(&mut self, term: Terminator) {
        self.blocks[self.current].term = term;
        self.current = self.new_block();
    }

    fn stmts(&mut self, body: &[TStmt]) {
        for s in body {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &TStmt) {
        match &s.kind {
            TStmtKind::Let { .. }
            | TStmtKind::FrameInit { .. }
            | TStmtKind::Assign { .. }
            | TStmtKind::Expr(_) => self.blocks[self.current].stmts.push(s.clone()),
            TStmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let then_block = self.new_block();
                let else_block = self.new_block();
                let join = self.new_block();
                self.branch(cond, then_block, else_block);
                self.current = then_block;
                self.stmts(then_body);
                self.blocks[self.current].term = Terminator::Jump(join);
                self.current = else_block;
                self.stmts(else_body);
                self.blocks[self.current].term = Terminator::Jump(join);
                self.current = join;
            }
            TStmtKind::While { cond, body } => {
                let header = self.new_block();
                let body_block = self.new_block();
                let exit = self.new_block();
                self.blocks[self.current].term = Terminator::Jump(header);
                self.current = header;
                self.branch(cond, body_block, exit);
                self.current = body_block;
                self.stmts(body);
                self.blocks[self.current].term = Terminator::Jump(header);
                self.current = exit;
            }
            TStmtKind::Return(_) => self.terminate(Terminator::Finish),
            TStmtKind::Action(p) => {
                self.blocks[self.current].term = Terminator::Suspend(*p);
                self.current = self.new_block();
                self.resume[*p] = Some(self.current);
            }
        }
    }

    /// Literal conditions become plain jumps so the untaken side does not
    /// show up in the flow graph.
    fn branch(&mut self, cond: &TExpr, then_block: BlockId, else_block: BlockId) {
        self.blocks[self.current].term = match cond.kind {
            TExprKind::Lit(Value::Bool(true)) => Terminator::Jump(then_block),
            TExprKind::Lit(Value::Bool(false)) => Terminator::Jump(else_block),
            _ => Terminator::Branch {
                cond: cond.clone(),
                then_block,
                else_block,
            },
        };
    }
}

/// Drops blocks unreachable from the prologue and every resume block,
/// renumbering the rest in their original order.
fn prune(blocks: Vec<Block>, prologue: BlockId, resume: &[BlockId]) -> (Vec<Block>, Vec<Option<BlockId>>) {
    let mut seen = vec![false; blocks.len()];
    let mut stack: Vec<BlockId> = std::iter::once(prologue).chain(resume.iter().copied()).collect();
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        stack.extend(blocks[id].term.successors());
    }
    let mut remap = vec![None; blocks.len()];
    let mut next = 0;
    for (i, s) in seen.iter().enumerate() {
        if *s {
            remap[i] = Some(next);
            next += 1;
        }
    }
    let fix = |b: BlockId| remap[b].expect("successor of a reachable block");
    let kept = blocks
        .into_iter()
        .zip(&seen)
        .filter(|(_, s)| **s)
        .map(|(mut b, _)| {
            b.term = match b.term {
                Terminator::Jump(t) => Terminator::Jump(fix(t)),
                Terminator::Branch {
                    cond,
                    then_block,
                    else_block,
                } => Terminator::Branch {
                    cond,
                    then_block: fix(then_block),
                    else_block: fix(else_block),
                },
                t => t,
            };
            b
        })
        .collect();
    (kept, remap)
}
