//! Static robustness of programs against weaker models, fence insertion to
//! enforce it, and an execution-level oracle.
//!
//! A program is robust for `(strong, weak)` when every `weak`-consistent
//! execution is also `strong`-consistent. The static check looks at every
//! pair of accesses `i` before `j` in one thread that could sit on a conflict
//! cycle, and asks whether the weak model already orders them.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::enumerate::{self, EnumConfig, EnumError};
use crate::fenceopt::reachwo;
use crate::litmus::{Arch, Cfg, FenceKind, Flavor, Instr, NodeId, Program};
use crate::models::{self, ModelId};

/// Supported `(strong, weak)` model pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Row {
    ScX86A,
    ScArmv8,
    X86AArmv8,
    ScArmv7,
    X86AArmv7,
    Armv8Armv7,
    Armv7McaArmv7,
}

impl Row {
    pub const ALL: [Row; 7] =
        [Row::ScX86A, Row::ScArmv8, Row::X86AArmv8, Row::ScArmv7, Row::X86AArmv7, Row::Armv8Armv7, Row::Armv7McaArmv7];

    pub fn new(strong: ModelId, weak: ModelId) -> Option<Row> {
        use ModelId::*;
        Some(match (strong, weak) {
            (Sc, X86 | X86A) => Row::ScX86A,
            (Sc, Armv8) => Row::ScArmv8,
            (X86 | X86A, Armv8) => Row::X86AArmv8,
            (Sc, Armv7) => Row::ScArmv7,
            (X86 | X86A, Armv7) => Row::X86AArmv7,
            (Armv8, Armv7) => Row::Armv8Armv7,
            (Armv7Mca, Armv7) => Row::Armv7McaArmv7,
            _ => return None,
        })
    }

    pub fn models(self) -> (ModelId, ModelId) {
        use ModelId::*;
        match self {
            Row::ScX86A => (Sc, X86A),
            Row::ScArmv8 => (Sc, Armv8),
            Row::X86AArmv8 => (X86A, Armv8),
            Row::ScArmv7 => (Sc, Armv7),
            Row::X86AArmv7 => (X86A, Armv7),
            Row::Armv8Armv7 => (Armv8, Armv7),
            Row::Armv7McaArmv7 => (Armv7Mca, Armv7),
        }
    }

    fn accepts(self, a: Arch) -> bool {
        match self {
            Row::ScX86A => a == Arch::X86,
            Row::ScArmv8 | Row::X86AArmv8 => a == Arch::Armv8,
            _ => a.is_armv7(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RobustError {
    #[error("no robustness check of {strong} against {weak}")]
    UnsupportedPair { strong: ModelId, weak: ModelId },
    #[error("{weak} robustness needs a matching program, got {arch}")]
    ArchMismatch { weak: ModelId, arch: Arch },
    #[error("fence insertion did not converge")]
    NoProgress,
}

/// An unordered pair that may lie on a cycle.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Offending {
    pub tid: usize,
    pub i: NodeId,
    pub j: NodeId,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Inserted {
    pub tid: usize,
    /// Position in the final thread body.
    pub at: usize,
    pub fence: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RobustReport {
    pub robust: bool,
    pub offending: Vec<Offending>,
    pub inserted: Vec<Inserted>,
}

impl fmt::Display for RobustReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", if self.robust { "robust" } else { "not robust" })?;
        for o in &self.offending {
            writeln!(f, "  thread {} nodes {} -> {}: {}", o.tid, o.i, o.j, o.reason)?;
        }
        for i in &self.inserted {
            writeln!(f, "  inserted {} in thread {} at {}", i.fence, i.tid, i.at)?;
        }
        Ok(())
    }
}

/// A candidate pair of accesses in one thread.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Pair {
    tid: usize,
    i: NodeId,
    j: NodeId,
}

/// One memory effect of an instruction; an update has a read and a write.
#[derive(Debug, Clone, Copy)]
struct Kind {
    read: bool,
    acq: bool,
    rel: bool,
    excl: bool,
}

fn kinds(i: &Instr) -> Vec<Kind> {
    match i {
        Instr::Load { flavor, .. } => vec![Kind { read: true, acq: *flavor == Flavor::Acq, rel: false, excl: false }],
        Instr::Store { flavor, .. } => vec![Kind { read: false, acq: false, rel: *flavor == Flavor::Rel, excl: false }],
        Instr::Rmw { .. } => vec![
            Kind { read: true, acq: false, rel: false, excl: true },
            Kind { read: false, acq: false, rel: false, excl: true },
        ],
        _ => vec![],
    }
}

fn nodes(g: &Cfg, pred: impl Fn(&Instr) -> bool) -> BTreeSet<NodeId> {
    g.vertices().iter().copied().filter(|&n| pred(g.instr(n))).collect()
}

fn fence_nodes(g: &Cfg, k: FenceKind) -> BTreeSet<NodeId> {
    nodes(g, |i| matches!(i, Instr::Fence(f) if *f == k))
}

struct Ctx<'a> {
    g: &'a Cfg,
    row: Row,
    fences: BTreeSet<NodeId>,
    ff: BTreeSet<NodeId>,
    fl: BTreeSet<NodeId>,
    fs: BTreeSet<NodeId>,
    rels: BTreeSet<NodeId>,
    acqs: BTreeSet<NodeId>,
}

impl<'a> Ctx<'a> {
    fn new(g: &'a Cfg, row: Row) -> Self {
        let fences = nodes(g, |i| matches!(i, Instr::Fence(k) if *k != FenceKind::Isb));
        Ctx {
            g,
            row,
            ff: fence_nodes(g, FenceKind::DmbFull),
            fl: fence_nodes(g, FenceKind::DmbLd),
            fs: fence_nodes(g, FenceKind::DmbSt),
            rels: nodes(g, |i| matches!(i, Instr::Store { flavor: Flavor::Rel, .. })),
            acqs: nodes(g, |i| matches!(i, Instr::Load { flavor: Flavor::Acq, .. })),
            fences,
        }
    }

    fn blocked(&self, i: NodeId, j: NodeId, avoid: &BTreeSet<NodeId>) -> bool {
        !reachwo(self.g, i, j, avoid)
    }

    /// ARMv8 ordering of one read/write effect of `i` before one of `j`.
    fn ordered_v8(&self, i: NodeId, ki: Kind, j: NodeId, kj: Kind) -> bool {
        if kj.rel || ki.acq || (ki.rel && kj.acq) {
            return true;
        }
        // acquires every path to which passes a release
        let ra = self.acqs.iter().copied().filter(|&a| reachwo(self.g, i, a, &BTreeSet::new()) && self.blocked(i, a, &self.rels));
        let b: BTreeSet<NodeId> = self.ff.iter().copied().chain(ra).collect();
        let srels = || self.rels.iter().copied().filter(|&l| same_loc(self.g.instr(l), self.g.instr(j)));
        match (ki.read, kj.read) {
            (false, true) => self.blocked(i, j, &b),
            (true, true) => self.blocked(i, j, &b.union(&self.fl).copied().collect()),
            (true, false) => self.blocked(i, j, &b.iter().chain(&self.fl).copied().chain(srels()).collect()),
            (false, false) => self.blocked(i, j, &b.iter().chain(&self.fs).copied().chain(srels()).collect()),
        }
    }

    /// `i` before `j` is a write-to-read pair the weaker x86A order leaves out.
    fn x86a_exempt(ki: Kind, kj: Kind) -> bool {
        !ki.read && !ki.excl && kj.read && !kj.excl && !(ki.rel && kj.acq)
    }

    fn ordered(&self, i: NodeId, j: NodeId) -> Result<(), String> {
        let (a, b) = (self.g.instr(i), self.g.instr(j));
        if same_loc(a, b) {
            return Ok(());
        }
        let all = |f: &dyn Fn(Kind, Kind) -> bool| kinds(a).iter().all(|&ki| kinds(b).iter().all(|&kj| f(ki, kj)));
        let fenced = self.blocked(i, j, &self.fences);
        let ok = match self.row {
            Row::ScX86A => {
                let upd = nodes(self.g, |x| matches!(x, Instr::Rmw { .. }));
                a.reads() || b.writes() || self.blocked(i, j, &self.fences.union(&upd).copied().collect())
            }
            Row::ScArmv8 => all(&|ki, kj| self.ordered_v8(i, ki, j, kj)),
            Row::X86AArmv8 => all(&|ki, kj| Self::x86a_exempt(ki, kj) || self.ordered_v8(i, ki, j, kj)),
            Row::ScArmv7 | Row::Armv7McaArmv7 => fenced,
            Row::X86AArmv7 => fenced || all(&|ki, kj| Self::x86a_exempt(ki, kj)),
            Row::Armv8Armv7 => fenced || all(&|ki, _| !ki.read),
        };
        if ok {
            Ok(())
        } else {
            Err(format!("`{a}` before `{b}` is unordered"))
        }
    }
}

fn same_loc(a: &Instr, b: &Instr) -> bool {
    matches!((a.loc(), b.loc()), (Some(x), Some(y)) if x.must_alias(y))
}

fn may_alias(a: &Instr, b: &Instr) -> bool {
    matches!((a.loc(), b.loc()), (Some(x), Some(y)) if x.may_alias(y))
}

fn candidate_pairs(cfgs: &[Cfg], row: Row) -> Vec<Pair> {
    let mut out = Vec::new();
    for (tid, g) in cfgs.iter().enumerate() {
        for &i in g.vertices() {
            for &j in g.vertices() {
                let (a, b) = (g.instr(i), g.instr(j));
                if i == j || !a.is_access() || !b.is_access() || !g.reach(i, j) {
                    continue;
                }
                if row == Row::Armv7McaArmv7 && !(a.reads() && b.reads()) {
                    continue;
                }
                out.push(Pair { tid, i, j });
            }
        }
    }
    out
}

/// Pairs `(a, b)` for which other pairs `(p, q)` and `(r, s)` exist with
/// `b ~ p` and `s ~ a`, so the pair can close a conflict cycle.
fn on_cycle(cfgs: &[Cfg], pairs: &[Pair]) -> Vec<Pair> {
    let ins = |x: &Pair, n: NodeId| cfgs[x.tid].instr(n);
    pairs
        .iter()
        .copied()
        .filter(|ab| {
            let (a, b) = (ins(ab, ab.i), ins(ab, ab.j));
            let from_b = pairs.iter().any(|pq| pq != ab && may_alias(b, ins(pq, pq.i)));
            let to_a = pairs.iter().any(|rs| rs != ab && may_alias(a, ins(rs, rs.j)));
            from_b && to_a
        })
        .collect()
}

fn row_for(p: &Program, strong: ModelId, weak: ModelId) -> Result<Row, RobustError> {
    let row = Row::new(strong, weak).ok_or(RobustError::UnsupportedPair { strong, weak })?;
    if !row.accepts(p.arch) {
        return Err(RobustError::ArchMismatch { weak, arch: p.arch });
    }
    Ok(row)
}

fn offending(cfgs: &[Cfg], row: Row) -> Vec<Offending> {
    let pairs = candidate_pairs(cfgs, row);
    let mut out = Vec::new();
    for pr in on_cycle(cfgs, &pairs) {
        let ctx = Ctx::new(&cfgs[pr.tid], row);
        if let Err(reason) = ctx.ordered(pr.i, pr.j) {
            out.push(Offending { tid: pr.tid, i: pr.i, j: pr.j, reason });
        }
    }
    out
}

/// Static check: no offending pair means robust.
pub fn check_robust(p: &Program, strong: ModelId, weak: ModelId) -> Result<RobustReport, RobustError> {
    let row = row_for(p, strong, weak)?;
    let cfgs: Vec<Cfg> = (0..p.threads.len()).map(|t| Cfg::build(p, t)).collect();
    let off = offending(&cfgs, row);
    Ok(RobustReport { robust: off.is_empty(), offending: off, inserted: Vec::new() })
}

fn fence_for(row: Row, i: &Instr) -> FenceKind {
    match row {
        Row::ScX86A => FenceKind::MFence,
        Row::ScArmv8 | Row::X86AArmv8 => match i {
            Instr::Load { .. } => FenceKind::DmbLd,
            _ => FenceKind::DmbFull,
        },
        _ => FenceKind::Dmb,
    }
}

/// Inserts fences until the static check passes: `mfence` before each
/// offending later access on x86, a barrier after each offending earlier
/// access on ARM. `expect` lines are dropped once anything is inserted.
pub fn enforce_robust(p: &Program, strong: ModelId, weak: ModelId) -> Result<(Program, RobustReport), RobustError> {
    let row = row_for(p, strong, weak)?;
    let mut cfgs: Vec<Cfg> = (0..p.threads.len()).map(|t| Cfg::build(p, t)).collect();
    let first = offending(&cfgs, row);
    let mut added: Vec<(usize, NodeId)> = Vec::new();
    let mut off = first.clone();
    let mut rounds = 0;
    while !off.is_empty() {
        rounds += 1;
        if rounds > 64 {
            return Err(RobustError::NoProgress);
        }
        let mut done = BTreeSet::new();
        for o in &off {
            let g = &mut cfgs[o.tid];
            let anchor = if row == Row::ScX86A { o.j } else { o.i };
            if !done.insert((o.tid, anchor)) {
                continue;
            }
            let k = fence_for(row, g.instr(o.i));
            let n = if row == Row::ScX86A { g.insert_before(anchor, Instr::Fence(k)) } else { g.insert_after(anchor, Instr::Fence(k)) };
            added.push((o.tid, n));
        }
        off = offending(&cfgs, row);
    }
    let mut q = p.clone();
    for (t, g) in cfgs.iter().enumerate() {
        q.threads[t].body = g.to_instrs();
    }
    if !added.is_empty() {
        q.expect.clear();
    }
    let inserted = added
        .iter()
        .map(|&(tid, n)| {
            let g = &cfgs[tid];
            let fence = match g.instr(n) {
                Instr::Fence(k) => k.name(),
                _ => "?",
            };
            Inserted { tid, at: g.position(n).unwrap_or(0), fence }
        })
        .collect();
    Ok((q, RobustReport { robust: first.is_empty(), offending: first, inserted }))
}

/// Execution-level check: every `weak`-consistent execution is
/// `strong`-consistent.
pub fn semantic_robust(p: &Program, strong: ModelId, weak: ModelId) -> Result<bool, EnumError> {
    semantic_robust_with(p, strong, weak, &EnumConfig::default())
}

pub fn semantic_robust_with(p: &Program, strong: ModelId, weak: ModelId, cfg: &EnumConfig) -> Result<bool, EnumError> {
    let strong = if strong == ModelId::X86 { ModelId::X86A } else { strong };
    let mut ok = true;
    enumerate::for_each_execution(p, weak, cfg, &mut |x| {
        if ok && !models::is_consistent(x, strong) {
            ok = false;
        }
    })?;
    Ok(ok)
}
