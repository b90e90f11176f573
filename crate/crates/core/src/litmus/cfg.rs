//! Per-thread control-flow graphs.
//!
//! Node ids are stable across edits: deletion, weakening and insertion only
//! touch the linear layout, and edges are recomputed from it (fall-through
//! plus branch-to-label).

use std::collections::{BTreeMap, BTreeSet};

use super::{FenceKind, Instr, Program};

pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cfg {
    nodes: Vec<Instr>,
    order: Vec<NodeId>,
    succ: BTreeMap<NodeId, Vec<NodeId>>,
}

impl Cfg {
    /// One vertex per instruction; node id = instruction index.
    pub fn build(p: &Program, tid: usize) -> Cfg {
        Cfg::from_instrs(p.threads[tid].body.clone())
    }

    pub fn from_instrs(body: Vec<Instr>) -> Cfg {
        let order = (0..body.len()).collect();
        let mut g = Cfg { nodes: body, order, succ: BTreeMap::new() };
        g.rebuild_edges();
        g
    }

    fn rebuild_edges(&mut self) {
        let label_pos: BTreeMap<&str, NodeId> = self
            .order
            .iter()
            .filter_map(|&n| match &self.nodes[n] {
                Instr::Label(l) => Some((l.as_str(), n)),
                _ => None,
            })
            .collect();
        let mut succ = BTreeMap::new();
        for (k, &n) in self.order.iter().enumerate() {
            let mut out = Vec::new();
            if let Some(&next) = self.order.get(k + 1) {
                out.push(next);
            }
            if let Instr::Branch { target, .. } = &self.nodes[n] {
                if let Some(&t) = label_pos.get(target.as_str()) {
                    if !out.contains(&t) {
                        out.push(t);
                    }
                }
            }
            succ.insert(n, out);
        }
        self.succ = succ;
    }

    pub fn entry(&self) -> Option<NodeId> {
        self.order.first().copied()
    }
    pub fn vertices(&self) -> &[NodeId] {
        &self.order
    }
    pub fn contains(&self, n: NodeId) -> bool {
        self.succ.contains_key(&n)
    }
    pub fn instr(&self, n: NodeId) -> &Instr {
        &self.nodes[n]
    }
    pub fn succs(&self, n: NodeId) -> &[NodeId] {
        self.succ.get(&n).map(|v| v.as_slice()).unwrap_or(&[])
    }
    pub fn edges(&self) -> BTreeSet<(NodeId, NodeId)> {
        self.succ.iter().flat_map(|(&a, bs)| bs.iter().map(move |&b| (a, b))).collect()
    }
    /// Position of a node in the linear layout.
    pub fn position(&self, n: NodeId) -> Option<usize> {
        self.order.iter().position(|&m| m == n)
    }

    /// Instructions in layout order.
    pub fn to_instrs(&self) -> Vec<Instr> {
        self.order.iter().map(|&n| self.nodes[n].clone()).collect()
    }

    /// `i` reaches `j` by a non-empty path avoiding `avoid`.
    pub fn reach_avoiding(&self, i: NodeId, j: NodeId, avoid: &BTreeSet<NodeId>) -> bool {
        if avoid.contains(&i) || avoid.contains(&j) {
            return false;
        }
        let mut seen = BTreeSet::new();
        let mut stack: Vec<NodeId> = self.succs(i).to_vec();
        while let Some(v) = stack.pop() {
            if avoid.contains(&v) || !seen.insert(v) {
                continue;
            }
            if v == j {
                return true;
            }
            stack.extend_from_slice(self.succs(v));
        }
        false
    }

    pub fn reach(&self, i: NodeId, j: NodeId) -> bool {
        self.reach_avoiding(i, j, &BTreeSet::new())
    }

    pub fn is_acyclic(&self) -> bool {
        self.order.iter().all(|&n| !self.reach(n, n))
    }

    /// Removes nodes from the layout; neighbours are spliced together.
    pub fn delete(&mut self, set: &BTreeSet<NodeId>) {
        self.order.retain(|n| !set.contains(n));
        self.rebuild_edges();
    }

    /// Replaces each node in `set` by a `dmbld` then `dmbst` pair; returns the new node ids.
    pub fn weaken(&mut self, set: &BTreeSet<NodeId>) -> Vec<(NodeId, NodeId, NodeId)> {
        let mut made = Vec::new();
        let mut order = Vec::with_capacity(self.order.len() + set.len());
        for &n in &self.order.clone() {
            if set.contains(&n) {
                let ld = self.push_node(Instr::Fence(FenceKind::DmbLd));
                let st = self.push_node(Instr::Fence(FenceKind::DmbSt));
                order.push(ld);
                order.push(st);
                made.push((n, ld, st));
            } else {
                order.push(n);
            }
        }
        self.order = order;
        self.rebuild_edges();
        made
    }

    fn push_node(&mut self, i: Instr) -> NodeId {
        self.nodes.push(i);
        self.nodes.len() - 1
    }

    /// Inserts `instr` immediately before `at` in the layout.
    pub fn insert_before(&mut self, at: NodeId, instr: Instr) -> NodeId {
        let pos = self.position(at).expect("node in cfg");
        let n = self.push_node(instr);
        self.order.insert(pos, n);
        self.rebuild_edges();
        n
    }

    /// Inserts `instr` immediately after `at` in the layout.
    pub fn insert_after(&mut self, at: NodeId, instr: Instr) -> NodeId {
        let pos = self.position(at).expect("node in cfg");
        let n = self.push_node(instr);
        self.order.insert(pos + 1, n);
        self.rebuild_edges();
        n
    }
}
