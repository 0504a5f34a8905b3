//! Labeled control-flow graph over the lowered IR: extremal labels, edge
//! classification, back-edge detection and natural-loop membership.

use std::collections::{BTreeMap, BTreeSet};

use crate::ir::{FunctionIr, Label};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    Seq,
    BranchTrue,
    BranchFalse,
    LoopBody,
    LoopExit,
    Back,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::Seq => "seq",
            EdgeKind::BranchTrue => "true",
            EdgeKind::BranchFalse => "false",
            EdgeKind::LoopBody => "loop-body",
            EdgeKind::LoopExit => "loop-exit",
            EdgeKind::Back => "back",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CfgError {
    #[error("function has no statements")]
    EmptyFunction,
    #[error("control-flow graph has no entry node")]
    NoEntry,
}

#[derive(Debug, Clone)]
pub struct Cfg {
    labels: Vec<Label>,
    edges: Vec<(Label, Label, EdgeKind)>,
    succs: BTreeMap<Label, Vec<(Label, EdgeKind)>>,
    preds: BTreeMap<Label, Vec<(Label, EdgeKind)>>,
    ext: Vec<Label>,
}

impl Cfg {
    pub fn build(ir: &FunctionIr) -> Result<Cfg, CfgError> {
        Self::from_parts(ir.labels().collect(), ir.edges.clone())
    }

    pub fn from_parts(
        labels: Vec<Label>,
        edges: Vec<(Label, Label, EdgeKind)>,
    ) -> Result<Cfg, CfgError> {
        if labels.is_empty() {
            return Err(CfgError::EmptyFunction);
        }
        let mut succs: BTreeMap<Label, Vec<(Label, EdgeKind)>> = BTreeMap::new();
        let mut preds: BTreeMap<Label, Vec<(Label, EdgeKind)>> = BTreeMap::new();
        for l in &labels {
            succs.entry(*l).or_default();
            preds.entry(*l).or_default();
        }
        for (a, b, k) in &edges {
            succs.get_mut(a).ok_or(CfgError::NoEntry)?.push((*b, *k));
            preds.get_mut(b).ok_or(CfgError::NoEntry)?.push((*a, *k));
        }
        let mut ext: Vec<Label> = labels
            .iter()
            .copied()
            .filter(|l| preds[l].is_empty())
            .collect();
        if ext.is_empty() {
            // A function whose first statement heads a loop keeps its entry
            // label inside a cycle; the lowered entry is always label 1.
            if labels.contains(&1) {
                ext.push(1);
            } else {
                return Err(CfgError::NoEntry);
            }
        }
        Ok(Cfg {
            labels,
            edges,
            succs,
            preds,
            ext,
        })
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn edges(&self) -> &[(Label, Label, EdgeKind)] {
        &self.edges
    }

    /// Nodes where forward analysis starts.
    pub fn extremal_labels(&self) -> &[Label] {
        &self.ext
    }

    pub fn successors(&self, l: Label) -> &[(Label, EdgeKind)] {
        &self.succs[&l]
    }

    pub fn predecessors(&self, l: Label) -> &[(Label, EdgeKind)] {
        &self.preds[&l]
    }

    /// Edges classified as back edges during lowering.
    pub fn marked_back_edges(&self) -> BTreeSet<(Label, Label)> {
        self.edges
            .iter()
            .filter(|(_, _, k)| *k == EdgeKind::Back)
            .map(|(a, b, _)| (*a, *b))
            .collect()
    }

    /// Back edges found by depth-first search from the extremal labels: an
    /// edge whose target is an ancestor on the current DFS stack.
    pub fn dfs_back_edges(&self) -> BTreeSet<(Label, Label)> {
        #[derive(Clone, Copy, PartialEq)]
        enum Color {
            White,
            Gray,
            Black,
        }
        let mut color: BTreeMap<Label, Color> =
            self.labels.iter().map(|l| (*l, Color::White)).collect();
        let mut out = BTreeSet::new();

        for &root in &self.ext {
            if color[&root] != Color::White {
                continue;
            }
            // explicit stack: (node, next successor index)
            let mut stack: Vec<(Label, usize)> = vec![(root, 0)];
            color.insert(root, Color::Gray);
            while let Some((node, idx)) = stack.pop() {
                if idx < self.succs[&node].len() {
                    stack.push((node, idx + 1));
                    let (next, _) = self.succs[&node][idx];
                    match color[&next] {
                        Color::Gray => {
                            out.insert((node, next));
                        }
                        Color::White => {
                            color.insert(next, Color::Gray);
                            stack.push((next, 0));
                        }
                        Color::Black => {}
                    }
                } else {
                    color.insert(node, Color::Black);
                }
            }
        }
        out
    }

    pub fn is_loop_head(&self, l: Label) -> bool {
        self.preds[&l].iter().any(|(_, k)| *k == EdgeKind::Back)
    }

    /// Natural loop of a back edge (tail, head): the head plus every node
    /// that reaches the tail without passing through the head.
    pub fn loop_members(&self, tail: Label, head: Label) -> BTreeSet<Label> {
        let mut members = BTreeSet::from([head, tail]);
        let mut work = vec![tail];
        while let Some(n) = work.pop() {
            if n == head {
                continue;
            }
            for (p, _) in &self.preds[&n] {
                if members.insert(*p) {
                    work.push(*p);
                }
            }
        }
        members
    }

    /// Union of the natural loops whose back edges enter `head`.
    pub fn loops_of_head(&self, head: Label) -> BTreeSet<Label> {
        let mut members = BTreeSet::new();
        for (tail, h) in self.marked_back_edges() {
            if h == head {
                members.extend(self.loop_members(tail, h));
            }
        }
        members
    }

    pub fn to_dot(&self, ir: &FunctionIr) -> String {
        let mut out = String::from("digraph cfg {\n");
        out.push_str("    node [shape=box];\n");
        for n in &ir.nodes {
            let text = n.text.replace('"', "\\\"");
            out.push_str(&format!(
                "    n{} [label=\"{}: {} {}\"];\n",
                n.label,
                n.label,
                n.kind.as_str(),
                text
            ));
        }
        for (a, b, k) in &self.edges {
            out.push_str(&format!("    n{a} -> n{b} [label=\"{}\"];\n", k.as_str()));
        }
        out.push_str("}\n");
        out
    }
}
