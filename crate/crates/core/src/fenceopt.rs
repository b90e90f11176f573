//! Fence elimination over per-thread control-flow graphs.
//!
//! A fence is kept when some access pair it orders has a path through it
//! that avoids every fence kept so far. Candidates are visited in node-id
//! order, so the result is deterministic.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::litmus::{Arch, Cfg, FenceKind, Flavor, Instr, NodeId, Program};

/// Origin of an ARMv8 program, which decides what happens to full fences.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Provenance {
    /// Compiled from x86: surplus full fences are deleted.
    FromX86,
    /// Anything else: surplus full fences are weakened to `dmbld; dmbst`.
    Native,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Kept,
    Deleted,
    Weakened,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FenceDecision {
    pub tid: usize,
    pub node: NodeId,
    pub fence: &'static str,
    pub action: Action,
    /// Access pair that made a kept fence necessary.
    pub cover: Option<(NodeId, NodeId)>,
}

impl fmt::Display for FenceDecision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = match self.action {
            Action::Kept => "kept",
            Action::Deleted => "deleted",
            Action::Weakened => "weakened",
        };
        write!(f, "thread {} node {} {} {}", self.tid, self.node, self.fence, a)?;
        if let Some((i, j)) = self.cover {
            write!(f, " for {i} -> {j}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FenceError {
    #[error("no fence elimination for {0} programs")]
    UnsupportedArch(Arch),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FenceElim {
    pub program: Program,
    pub decisions: Vec<FenceDecision>,
}

impl FenceElim {
    pub fn count(&self, a: Action) -> usize {
        self.decisions.iter().filter(|d| d.action == a).count()
    }
}

pub fn is_w(i: &Instr) -> bool {
    matches!(i, Instr::Store { .. } | Instr::Rmw { .. })
}

pub fn is_r(i: &Instr) -> bool {
    matches!(i, Instr::Load { .. } | Instr::Rmw { .. })
}

pub fn is_access(i: &Instr) -> bool {
    i.is_access()
}

/// `i` reaches `j` through `f`, all avoiding `avoid`.
pub fn opath(g: &Cfg, i: NodeId, f: NodeId, j: NodeId, avoid: &BTreeSet<NodeId>) -> bool {
    g.reach_avoiding(i, f, avoid) && g.reach_avoiding(f, j, avoid)
}

/// `i` reaches `j` without passing any node of `avoid`.
pub fn reachwo(g: &Cfg, i: NodeId, j: NodeId, avoid: &BTreeSet<NodeId>) -> bool {
    g.reach_avoiding(i, j, avoid)
}

/// Ordered pairs `(i, j)` with `i` reaching `j`; `diffloc` drops pairs that
/// surely share a location.
pub fn mpairs(g: &Cfg, first: fn(&Instr) -> bool, second: fn(&Instr) -> bool, diffloc: bool) -> Vec<(NodeId, NodeId)> {
    let mut out = Vec::new();
    for &i in g.vertices() {
        if !first(g.instr(i)) {
            continue;
        }
        for &j in g.vertices() {
            if !second(g.instr(j)) || !g.reach(i, j) {
                continue;
            }
            if diffloc {
                if let (Some(a), Some(b)) = (g.instr(i).loc(), g.instr(j).loc()) {
                    if a.must_alias(b) {
                        continue;
                    }
                }
            }
            out.push((i, j));
        }
    }
    out
}

/// Grows `keep` with every candidate fence that still orders some pair.
pub fn get_nfs(g: &Cfg, pairs: &[(NodeId, NodeId)], fences: &[NodeId], keep: BTreeSet<NodeId>) -> BTreeSet<NodeId> {
    necessary(g, pairs, fences, keep).0
}

type Covers = BTreeMap<NodeId, (NodeId, NodeId)>;

fn necessary(g: &Cfg, pairs: &[(NodeId, NodeId)], fences: &[NodeId], mut keep: BTreeSet<NodeId>) -> (BTreeSet<NodeId>, Covers) {
    let mut covers = Covers::new();
    for &f in fences {
        if keep.contains(&f) {
            continue;
        }
        if let Some(&pr) = pairs.iter().find(|&&(i, j)| opath(g, i, f, j, &keep)) {
            keep.insert(f);
            covers.insert(f, pr);
        }
    }
    (keep, covers)
}

fn fences_of(g: &Cfg, pred: impl Fn(FenceKind) -> bool) -> Vec<NodeId> {
    let mut v: Vec<NodeId> = g.vertices().iter().copied().filter(|&n| matches!(g.instr(n), Instr::Fence(k) if pred(*k))).collect();
    v.sort();
    v
}

fn record(out: &mut Vec<FenceDecision>, tid: usize, g: &Cfg, nodes: &[NodeId], keep: &BTreeSet<NodeId>, covers: &Covers, drop: Action) {
    for &n in nodes {
        let fence = match g.instr(n) {
            Instr::Fence(k) => k.name(),
            _ => "?",
        };
        let action = if keep.contains(&n) { Action::Kept } else { drop };
        out.push(FenceDecision { tid, node: n, fence, action, cover: covers.get(&n).copied() });
    }
}

/// Fences next to a release store or acquire load in the layout.
fn beside_flavored(g: &Cfg, fences: &[NodeId]) -> BTreeSet<NodeId> {
    let order = g.vertices();
    let flavored = |k: usize| order.get(k).is_some_and(|&n| g.instr(n).flavor() != Flavor::Plain && !matches!(g.instr(n), Instr::Rmw { .. }));
    fences
        .iter()
        .copied()
        .filter(|&f| {
            let k = g.position(f).unwrap();
            (k > 0 && flavored(k - 1)) || flavored(k + 1)
        })
        .collect()
}

/// x86: an `mfence` survives only between a store and a later load of a
/// different location; atomic updates already act as barriers.
pub fn x86_felim(g: &mut Cfg, tid: usize) -> Vec<FenceDecision> {
    let pairs = mpairs(g, is_w, is_r, true);
    let fences = fences_of(g, |k| k == FenceKind::MFence);
    let rmws: BTreeSet<NodeId> = g.vertices().iter().copied().filter(|&n| matches!(g.instr(n), Instr::Rmw { .. })).collect();
    let (keep, covers) = necessary(g, &pairs, &fences, rmws);
    let mut out = Vec::new();
    record(&mut out, tid, g, &fences, &keep, &covers, Action::Deleted);
    g.delete(&fences.iter().copied().filter(|f| !keep.contains(f)).collect());
    out
}

/// ARMv8: full fences, then store fences, then load fences. Fences beside
/// a release or acquire access are kept as they are.
pub fn armv8_felim(g: &mut Cfg, tid: usize, prov: Provenance) -> Vec<FenceDecision> {
    let mut out = Vec::new();
    let full = fences_of(g, |k| k == FenceKind::DmbFull);
    let (nelim, covers) = necessary(g, &mpairs(g, is_w, is_r, true), &full, beside_flavored(g, &full));
    let surplus: BTreeSet<NodeId> = full.iter().copied().filter(|f| !nelim.contains(f)).collect();
    match prov {
        Provenance::FromX86 => {
            record(&mut out, tid, g, &full, &nelim, &covers, Action::Deleted);
            g.delete(&surplus);
        }
        Provenance::Native => {
            record(&mut out, tid, g, &full, &nelim, &covers, Action::Weakened);
            g.weaken(&surplus);
        }
    }
    let st = fences_of(g, |k| k == FenceKind::DmbSt);
    let seed: BTreeSet<NodeId> = nelim.union(&beside_flavored(g, &st)).copied().collect();
    let (keep, covers) = necessary(g, &mpairs(g, is_w, is_w, true), &st, seed);
    record(&mut out, tid, g, &st, &keep, &covers, Action::Deleted);
    g.delete(&st.iter().copied().filter(|f| !keep.contains(f)).collect());

    let ld = fences_of(g, |k| k == FenceKind::DmbLd);
    let mut pairs = mpairs(g, is_r, is_r, true);
    pairs.extend(mpairs(g, is_r, is_w, true));
    let seed: BTreeSet<NodeId> = nelim.union(&beside_flavored(g, &ld)).copied().collect();
    let (keep, covers) = necessary(g, &pairs, &ld, seed);
    record(&mut out, tid, g, &ld, &keep, &covers, Action::Deleted);
    g.delete(&ld.iter().copied().filter(|f| !keep.contains(f)).collect());
    out
}

/// ARMv7: every access pair, whatever the locations.
pub fn armv7_felim(g: &mut Cfg, tid: usize) -> Vec<FenceDecision> {
    let pairs = mpairs(g, is_access, is_access, false);
    let fences = fences_of(g, |k| k == FenceKind::Dmb);
    let (keep, covers) = necessary(g, &pairs, &fences, BTreeSet::new());
    let mut out = Vec::new();
    record(&mut out, tid, g, &fences, &keep, &covers, Action::Deleted);
    g.delete(&fences.iter().copied().filter(|f| !keep.contains(f)).collect());
    out
}

/// Runs the pass matching `p.arch` on every thread.
pub fn eliminate_fences(p: &Program, prov: Provenance) -> Result<FenceElim, FenceError> {
    let mut q = p.clone();
    let mut decisions = Vec::new();
    for tid in 0..p.threads.len() {
        let mut g = Cfg::build(p, tid);
        let d = match p.arch {
            Arch::X86 => x86_felim(&mut g, tid),
            Arch::Armv8 => armv8_felim(&mut g, tid, prov),
            Arch::Armv7 | Arch::Armv7Mca => armv7_felim(&mut g, tid),
            Arch::ScRef => return Err(FenceError::UnsupportedArch(p.arch)),
        };
        decisions.extend(d);
        q.threads[tid].body = g.to_instrs();
    }
    Ok(FenceElim { program: q, decisions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::enumerate::behaviors;
    use crate::gen::{random_program, GenConfig};
    use crate::litmus::parse;
    use crate::mapping::{map_program, scheme};
    use crate::models::ModelId;

    fn body(p: &Program, tid: usize) -> Vec<String> {
        p.threads[tid].body.iter().map(|i| i.to_string()).collect()
    }

    #[test]
    fn x86_keeps_only_store_load_fences() {
        let p = parse("arch x86\nthread P0 { X = 1; mfence; Y = 2; mfence; a = Z; mfence; b = X; }").unwrap();
        let r = eliminate_fences(&p, Provenance::FromX86).unwrap();
        assert_eq!(body(&r.program, 0), ["X = 1", "mfence", "Y = 2", "mfence", "a = Z", "b = X"]);
        assert_eq!(r.count(Action::Deleted), 1);
        let p = parse("arch x86\nthread P0 { X = 1; mfence; Y = 2; }").unwrap();
        assert_eq!(eliminate_fences(&p, Provenance::FromX86).unwrap().count(Action::Deleted), 1);
    }

    #[test]
    fn x86_rmw_is_a_barrier() {
        let p = parse("arch x86\nthread P0 { X = 1; c = rmw(V, 0, 1); mfence; a = Z; }").unwrap();
        let r = eliminate_fences(&p, Provenance::FromX86).unwrap();
        assert_eq!(r.count(Action::Kept), 0);
    }

    #[test]
    fn mapped_load_fence_store_chain() {
        let p = parse("arch x86\nthread P0 { a = X; mfence; Y = 1; }").unwrap();
        let m = map_program(&p, &scheme("x86-armv8").unwrap()).unwrap();
        let r = eliminate_fences(&m, Provenance::FromX86).unwrap();
        assert_eq!(body(&r.program, 0), ["a = X", "dmbld", "Y = 1"]);
    }

    #[test]
    fn native_full_fence_is_weakened() {
        let p = parse("arch armv8\nthread P0 { a = X; dmbfull; Y = 1; }").unwrap();
        let r = eliminate_fences(&p, Provenance::Native).unwrap();
        assert_eq!(body(&r.program, 0), ["a = X", "dmbld", "Y = 1"]);
        assert_eq!(r.count(Action::Weakened), 1);
    }

    #[test]
    fn armv7_chain_drops_one_dmb() {
        let p = parse("arch armv8\nthread P0 { a = X; Y = 1 @rel; Z = 1; }").unwrap();
        let m = map_program(&p, &scheme("armv8-armv7").unwrap()).unwrap();
        let dmbs = |q: &Program| q.threads[0].body.iter().filter(|i| i.is_fence()).count();
        assert_eq!(dmbs(&m), 3);
        let r = eliminate_fences(&m, Provenance::Native).unwrap();
        assert_eq!(dmbs(&r.program), 2);
    }

    #[test]
    fn fences_beside_flavored_accesses_stay() {
        let p = parse("arch armv8\nthread P0 { a = X @acq; dmbld; b = Y; }").unwrap();
        let r = eliminate_fences(&p, Provenance::Native).unwrap();
        assert_eq!(r.count(Action::Kept), 1);
        let p = parse("arch armv8\nthread P0 { a = X; dmbld; b = Y; }").unwrap();
        let r = eliminate_fences(&p, Provenance::Native).unwrap();
        assert_eq!(r.decisions[0].cover, Some((0, 2)));
        assert_eq!(r.decisions[0].to_string(), "thread 0 node 1 dmbld kept for 0 -> 2");
    }

    #[test]
    fn get_nfs_is_monotone_in_pairs() {
        let p = parse("arch x86\nthread P0 { X = 1; mfence; a = Y; mfence; Z = 1; mfence; b = V; }").unwrap();
        let g = Cfg::build(&p, 0);
        let all = mpairs(&g, is_w, is_r, true);
        let fences = fences_of(&g, |_| true);
        let big = get_nfs(&g, &all, &fences, BTreeSet::new());
        let small = get_nfs(&g, &all[..1], &fences, BTreeSet::new());
        assert!(small.is_subset(&big));
    }

    #[test]
    fn branches_keep_fences_on_some_path() {
        let p = parse("arch x86\nthread P0 { X = 1; a = Y; if a == 0 goto L; mfence; L: b = Z; }").unwrap();
        let r = eliminate_fences(&p, Provenance::FromX86).unwrap();
        assert_eq!(r.count(Action::Kept), 1);
    }

    #[test]
    fn behaviors_unchanged_on_random_programs() {
        for seed in 0..40 {
            let p = random_program(&GenConfig::x86(), seed);
            let r = eliminate_fences(&p, Provenance::FromX86).unwrap();
            assert_eq!(behaviors(&p, ModelId::X86A).unwrap(), behaviors(&r.program, ModelId::X86A).unwrap(), "seed {seed}");
            let m = map_program(&p, &scheme("x86-armv8").unwrap()).unwrap();
            let r = eliminate_fences(&m, Provenance::FromX86).unwrap();
            assert_eq!(behaviors(&m, ModelId::Armv8).unwrap(), behaviors(&r.program, ModelId::Armv8).unwrap(), "seed {seed}");
            let p = random_program(&GenConfig::armv8(), seed);
            let r = eliminate_fences(&p, Provenance::Native).unwrap();
            assert_eq!(behaviors(&p, ModelId::Armv8).unwrap(), behaviors(&r.program, ModelId::Armv8).unwrap(), "seed {seed}");
            let m = map_program(&p, &scheme("armv8-armv7").unwrap()).unwrap();
            let r = eliminate_fences(&m, Provenance::Native).unwrap();
            assert_eq!(behaviors(&m, ModelId::Armv7).unwrap(), behaviors(&r.program, ModelId::Armv7).unwrap(), "seed {seed}");
        }
    }
}
