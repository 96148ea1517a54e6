//! Action flow graphs: which action may directly follow which.

use std::collections::BTreeSet;
use std::fmt::Write;

use super::{ActionMachine, BlockId, Terminator};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AfgNode {
    pub point: usize,
    pub action: String,
}

impl AfgNode {
    /// DOT identifier, e.g. `mark_0`.
    pub fn id(&self) -> String {
        format!("{}_{}", self.action, self.point)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ActionFlowGraph {
    pub nodes: Vec<AfgNode>,
    /// Pairs of suspension indices.
    pub edges: BTreeSet<(usize, usize)>,
    pub entry: BTreeSet<usize>,
    pub exit: BTreeSet<usize>,
}

impl ActionFlowGraph {
    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    pub fn successors(&self, from: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((from, 0)..=(from, usize::MAX))
            .map(|&(_, to)| to)
    }
}

/// Suspension points and finish terminators reachable from `start` without
/// crossing another suspension. Both sides of every branch are followed.
fn frontier(m: &ActionMachine, start: BlockId) -> (BTreeSet<usize>, bool) {
    let mut seen = vec![false; m.blocks.len()];
    let mut stack = vec![start];
    let mut points = BTreeSet::new();
    let mut finishes = false;
    while let Some(id) = stack.pop() {
        if std::mem::replace(&mut seen[id], true) {
            continue;
        }
        match &m.blocks[id].term {
            Terminator::Suspend(p) => {
                points.insert(*p);
            }
            Terminator::Finish => finishes = true,
            t => stack.extend(t.successors()),
        }
    }
    (points, finishes)
}

pub fn build_afg(m: &ActionMachine) -> ActionFlowGraph {
    let mut g = ActionFlowGraph {
        nodes: m
            .points
            .iter()
            .map(|p| AfgNode {
                point: p.index,
                action: p.action_name.clone(),
            })
            .collect(),
        ..Default::default()
    };
    let (entry, _) = frontier(m, m.prologue);
    g.entry = entry;
    for p in &m.points {
        let (next, finishes) = frontier(m, p.resume_block);
        g.edges.extend(next.into_iter().map(|q| (p.index, q)));
        if finishes {
            g.exit.insert(p.index);
        }
    }
    g
}

/// Renders the graph in GraphViz syntax. Nodes are listed by suspension
/// index; exit nodes get a double border and entry nodes an arrow from an
/// unlabeled start point.
pub fn export_dot(name: &str, g: &ActionFlowGraph) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "digraph {name} {{");
    if !g.entry.is_empty() {
        out.push_str("  start [shape=point];\n");
    }
    for n in &g.nodes {
        let _ = write!(out, "  {} [label=\"{}\"", n.id(), n.action);
        if g.exit.contains(&n.point) {
            out.push_str(", peripheries=2");
        }
        out.push_str("];\n");
    }
    let id = |p: usize| {
        g.nodes
            .iter()
            .find(|n| n.point == p)
            .map(AfgNode::id)
            .unwrap_or_else(|| format!("point_{p}"))
    };
    for &p in &g.entry {
        let _ = writeln!(out, "  start -> {};", id(p));
    }
    for &(a, b) in &g.edges {
        let _ = writeln!(out, "  {} -> {};", id(a), id(b));
    }
    out.push_str("}\n");
    out
}
