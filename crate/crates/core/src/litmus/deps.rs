//! Register-dataflow dependencies between instruction nodes.
//!
//! [`DepState`] steps through one instruction at a time; the enumerator runs
//! it along a single control path, [`derive_deps`] runs it to a fixpoint over
//! the CFG with union at joins.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Cfg, FenceKind, Instr, NodeId, Program, RmwOp};

pub type Pairs = BTreeSet<(NodeId, NodeId)>;

/// Dependencies of one thread, as (source load node, target node) pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ThreadDeps {
    pub addr: Pairs,
    pub data: Pairs,
    pub ctrl: Pairs,
    pub ctrl_isb: Pairs,
    /// `addr;po;[isb];po`: source fed an address before an isb preceding the target.
    pub addr_isb: Pairs,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DepInfo {
    pub threads: Vec<ThreadDeps>,
}

/// Taint state flowing along a path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DepState {
    taint: BTreeMap<String, BTreeSet<NodeId>>,
    ctrl: BTreeSet<NodeId>,
    isb: BTreeSet<NodeId>,
    addr_seen: BTreeSet<NodeId>,
    addr_isb: BTreeSet<NodeId>,
}

impl DepState {
    fn taint_of(&self, regs: &[String]) -> BTreeSet<NodeId> {
        regs.iter().filter_map(|r| self.taint.get(r)).flatten().copied().collect()
    }

    fn expr_taint(&self, e: &super::Expr) -> BTreeSet<NodeId> {
        let mut regs = Vec::new();
        e.regs(&mut regs);
        self.taint_of(&regs)
    }

    /// Records the dependencies into `n` and advances past it.
    pub fn step(&mut self, n: NodeId, instr: &Instr, out: &mut ThreadDeps) {
        if !matches!(instr, Instr::Label(_)) {
            for &s in &self.ctrl {
                out.ctrl.insert((s, n));
            }
            for &s in &self.isb {
                out.ctrl_isb.insert((s, n));
            }
            for &s in &self.addr_isb {
                out.addr_isb.insert((s, n));
            }
        }
        let addr_sources = |st: &mut DepState, loc: &super::LocExpr, out: &mut ThreadDeps| {
            let mut regs = Vec::new();
            loc.regs(&mut regs);
            for s in st.taint_of(&regs) {
                out.addr.insert((s, n));
                st.addr_seen.insert(s);
            }
        };
        match instr {
            Instr::Load { reg, loc, .. } => {
                addr_sources(self, loc, out);
                self.taint.insert(reg.clone(), [n].into_iter().collect());
            }
            Instr::Store { loc, val, .. } => {
                addr_sources(self, loc, out);
                for s in self.expr_taint(val) {
                    out.data.insert((s, n));
                }
            }
            Instr::Rmw { reg, loc, op, .. } => {
                addr_sources(self, loc, out);
                let src = match op {
                    RmwOp::Cas { expected, new } => {
                        let mut t = self.expr_taint(expected);
                        t.extend(self.expr_taint(new));
                        t
                    }
                    RmwOp::FetchAdd(e) => self.expr_taint(e),
                };
                for s in src {
                    out.data.insert((s, n));
                }
                self.taint.insert(reg.clone(), [n].into_iter().collect());
            }
            Instr::RegOp { reg, expr } => {
                let t = self.expr_taint(expr);
                self.taint.insert(reg.clone(), t);
            }
            Instr::Branch { cond, .. } => {
                let t = self.expr_taint(cond);
                self.ctrl.extend(t);
            }
            Instr::Fence(FenceKind::Isb) => {
                let c = self.ctrl.clone();
                self.isb.extend(c);
                let a = self.addr_seen.clone();
                self.addr_isb.extend(a);
            }
            Instr::Fence(_) | Instr::Label(_) => {}
        }
    }

    fn join(&mut self, o: &DepState) -> bool {
        let before = self.clone();
        for (r, t) in &o.taint {
            self.taint.entry(r.clone()).or_default().extend(t.iter().copied());
        }
        self.ctrl.extend(o.ctrl.iter().copied());
        self.isb.extend(o.isb.iter().copied());
        self.addr_seen.extend(o.addr_seen.iter().copied());
        self.addr_isb.extend(o.addr_isb.iter().copied());
        *self != before
    }
}

/// Static dependencies of every thread. At joins the analysis unions its
/// facts, so a pair holds if it holds along some path.
pub fn derive_deps(p: &Program) -> DepInfo {
    let threads = (0..p.threads.len()).map(|t| thread_deps(&Cfg::build(p, t))).collect();
    DepInfo { threads }
}

pub fn thread_deps(g: &Cfg) -> ThreadDeps {
    let mut out = ThreadDeps::default();
    let Some(entry) = g.entry() else { return out };
    let mut state_in: BTreeMap<NodeId, DepState> = BTreeMap::new();
    state_in.insert(entry, DepState::default());
    let mut work: BTreeSet<NodeId> = [entry].into_iter().collect();
    while let Some(n) = work.pop_first() {
        let mut st = state_in[&n].clone();
        st.step(n, g.instr(n), &mut out);
        for &s in g.succs(n) {
            let changed = match state_in.get_mut(&s) {
                Some(old) => old.join(&st),
                None => {
                    state_in.insert(s, st.clone());
                    true
                }
            };
            if changed {
                work.insert(s);
            }
        }
    }
    out
}
