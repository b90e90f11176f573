//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet, VecDeque};

use weakmem::enumerate::Behavior;
use weakmem::exec::Execution;
use weakmem::litmus::{self, Instr, Location, Program, RmwOp};
use weakmem::relalg::Relation;

/// Registers per thread (all of them, default 0) and final memory over the
/// init locations.
pub type Outcome = (Vec<BTreeMap<String, i64>>, BTreeMap<Location, i64>);

pub fn project(p: &Program, b: &Behavior) -> Outcome {
    let regs = p
        .threads
        .iter()
        .enumerate()
        .map(|(t, th)| th.registers().into_iter().map(|r| (r.clone(), b.reg(t, &r).unwrap_or(0))).collect())
        .collect();
    let mem = p.init.iter().map(|(l, v)| (l.clone(), b.mem.get(l).copied().unwrap_or(*v))).collect();
    (regs, mem)
}

pub fn project_all(p: &Program, bs: &weakmem::enumerate::BehaviorSet) -> BTreeSet<Outcome> {
    bs.items.iter().map(|b| project(p, b)).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
struct State {
    pc: Vec<usize>,
    regs: Vec<BTreeMap<String, i64>>,
    mem: BTreeMap<Location, i64>,
    /// Per-thread FIFO of pending stores; always empty under SC.
    buf: Vec<VecDeque<(Location, i64)>>,
}

fn target(body: &[Instr], label: &str) -> usize {
    body.iter().position(|i| matches!(i, Instr::Label(l) if l == label)).expect("label exists")
}

fn initial(p: &Program) -> State {
    let n = p.threads.len();
    State {
        pc: vec![0; n],
        regs: p.threads.iter().map(|t| t.registers().into_iter().map(|r| (r, 0)).collect()).collect(),
        mem: p.init.clone(),
        buf: vec![VecDeque::new(); n],
    }
}

fn read(s: &State, t: usize, l: &Location) -> i64 {
    if let Some((_, v)) = s.buf[t].iter().rev().find(|(m, _)| m == l) {
        return *v;
    }
    s.mem.get(l).copied().unwrap_or(0)
}

/// One instruction step of thread `t`; `None` when blocked.
fn step(p: &Program, s: &State, t: usize, tso: bool) -> Option<State> {
    let body = &p.threads[t].body;
    let instr = body.get(s.pc[t])?;
    let mut n = s.clone();
    n.pc[t] += 1;
    let regs = s.regs[t].clone();
    let ev = |e: &litmus::Expr| e.eval(&|r: &str| regs.get(r).copied().unwrap_or(0));
    let loc = |l: &litmus::LocExpr| l.resolve(&|r: &str| regs.get(r).copied().unwrap_or(0));
    match instr {
        Instr::Load { reg, loc: l, .. } => {
            let v = read(s, t, &loc(l));
            n.regs[t].insert(reg.clone(), v);
        }
        Instr::Store { loc: l, val, .. } => {
            if tso {
                n.buf[t].push_back((loc(l), ev(val)));
            } else {
                n.mem.insert(loc(l), ev(val));
            }
        }
        Instr::Rmw { reg, loc: l, op, .. } => {
            let l = loc(l);
            let seen = read(s, t, &l);
            // a failed CAS is a plain load and does not drain the buffer
            if let RmwOp::Cas { expected, .. } = op {
                if seen != ev(expected) {
                    n.regs[t].insert(reg.clone(), seen);
                    return Some(n);
                }
            }
            if !s.buf[t].is_empty() {
                return None;
            }
            let old = s.mem.get(&l).copied().unwrap_or(0);
            n.regs[t].insert(reg.clone(), old);
            let new = match op {
                RmwOp::Cas { new, .. } => ev(new),
                RmwOp::FetchAdd(d) => old + ev(d),
            };
            n.mem.insert(l, new);
        }
        Instr::Fence(_) => {
            if !s.buf[t].is_empty() {
                return None;
            }
        }
        Instr::Branch { cond, target: l } => {
            if ev(cond) != 0 {
                n.pc[t] = target(body, l);
            }
        }
        Instr::Label(_) => {}
        Instr::RegOp { reg, expr } => {
            let v = ev(expr);
            n.regs[t].insert(reg.clone(), v);
        }
    }
    Some(n)
}

fn explore(p: &Program, tso: bool) -> BTreeSet<Outcome> {
    let mut seen = HashSet::new();
    let mut stack = vec![initial(p)];
    let mut out = BTreeSet::new();
    while let Some(s) = stack.pop() {
        if !seen.insert(s.clone()) {
            continue;
        }
        let mut moved = false;
        for t in 0..p.threads.len() {
            if let Some(n) = step(p, &s, t, tso) {
                stack.push(n);
                moved = true;
            }
            if let Some((l, v)) = s.buf[t].front() {
                let mut n = s.clone();
                n.mem.insert(l.clone(), *v);
                n.buf[t].pop_front();
                stack.push(n);
                moved = true;
            }
        }
        if !moved {
            let done = (0..p.threads.len()).all(|t| s.pc[t] >= p.threads[t].body.len());
            assert!(done, "simulator deadlock");
            let mem = p.init.keys().map(|l| (l.clone(), s.mem.get(l).copied().unwrap_or(0))).collect();
            out.insert((s.regs.clone(), mem));
        }
    }
    out
}

/// All interleavings, memory updated in place.
pub fn sc_outcomes(p: &Program) -> BTreeSet<Outcome> {
    explore(p, false)
}

/// Per-thread FIFO store buffers with nondeterministic flushes; fences and
/// successful rmws wait for an empty buffer.
pub fn tso_outcomes(p: &Program) -> BTreeSet<Outcome> {
    explore(p, true)
}

// store X, store Y, load X, load Y, mfence, cas X, cas Y
const OPS: u8 = 7;

fn swap_loc(op: u8) -> u8 {
    match op {
        0 => 1,
        1 => 0,
        2 => 3,
        3 => 2,
        5 => 6,
        6 => 5,
        o => o,
    }
}

fn sequences() -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::new();
    let mut layer: Vec<Vec<u8>> = vec![vec![]];
    for _ in 0..3 {
        let mut next = Vec::new();
        for s in &layer {
            for o in 0..OPS {
                let mut t = s.clone();
                t.push(o);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

fn thread_text(name: &str, tid: usize, ops: &[u8]) -> String {
    let mut body = Vec::new();
    for (k, &o) in ops.iter().enumerate() {
        let v = 10 * (tid as i64 + 1) + k as i64 + 1;
        let r = format!("r{k}");
        body.push(match o {
            0 => format!("X = {v}"),
            1 => format!("Y = {v}"),
            2 => format!("{r} = X"),
            3 => format!("{r} = Y"),
            4 => "mfence".to_string(),
            5 => format!("{r} = rmw(X, 0, {v})"),
            _ => format!("{r} = rmw(Y, 0, {v})"),
        });
    }
    format!("thread {name} {{ {} }}\n", body.join("; "))
}

/// Every two-thread x86 program with one to three instructions per thread
/// drawn from store, load, mfence and CAS over X and Y, up to thread swap
/// and location renaming.
pub fn small_x86_corpus() -> Vec<Program> {
    let seqs = sequences();
    let index: BTreeMap<Vec<u8>, usize> = seqs.iter().cloned().enumerate().map(|(i, s)| (s, i)).collect();
    let swapped: Vec<usize> = seqs.iter().map(|s| index[&s.iter().map(|&o| swap_loc(o)).collect::<Vec<_>>()]).collect();
    let mut out = Vec::new();
    for a in 0..seqs.len() {
        for b in a..seqs.len() {
            let (sa, sb) = (swapped[a], swapped[b]);
            if (sa.min(sb), sa.max(sb)) < (a, b) {
                continue;
            }
            let text = format!(
                "arch x86\ninit X=0 Y=0\n{}{}",
                thread_text("P0", 0, &seqs[a]),
                thread_text("P1", 1, &seqs[b])
            );
            out.push(litmus::parse(&text).expect("generated program parses"));
        }
    }
    out
}

type Pairs = BTreeSet<(usize, usize)>;

fn pairs(r: &Relation) -> Pairs {
    r.pairs().collect()
}

fn compose(a: &Pairs, b: &Pairs) -> Pairs {
    let mut out = Pairs::new();
    for &(x, y) in a {
        for &(y2, z) in b {
            if y == y2 {
                out.insert((x, z));
            }
        }
    }
    out
}

/// Preserved program order by naive rule saturation from seeds recomputed
/// directly from events, rf and co.
pub fn ppo_oracle(x: &Execution) -> Pairs {
    let ev = x.events();
    let same_thread = |a: usize, b: usize| ev[a].tid.is_some() && ev[a].tid == ev[b].tid;
    let po = pairs(x.po());
    let rf = pairs(&x.rf);
    let co = pairs(&x.co);
    let fr: Pairs = compose(&rf.iter().map(|&(w, r)| (r, w)).collect(), &co);
    let ext = |s: &Pairs| s.iter().copied().filter(|&(a, b)| !same_thread(a, b)).collect::<Pairs>();
    let poloc: Pairs = po.iter().copied().filter(|&(a, b)| ev[a].loc.is_some() && ev[a].loc == ev[b].loc).collect();
    let rfe = ext(&rf);
    let rfi: Pairs = rf.difference(&rfe).copied().collect();
    let rdw: Pairs = compose(&ext(&fr), &rfe).intersection(&poloc).copied().collect();
    let detour: Pairs = compose(&ext(&co), &rfe).intersection(&poloc).copied().collect();
    let d = &x.base.deps;
    let (addr, data, ctrl, ctrl_isb) = (pairs(&d.addr), pairs(&d.data), pairs(&d.ctrl), pairs(&d.ctrl_isb));

    let ii0: Pairs = addr.iter().chain(&data).chain(&rdw).chain(&rfi).copied().collect();
    let ci0: Pairs = ctrl_isb.union(&detour).copied().collect();
    let mut cc0: Pairs = data.union(&ctrl).copied().collect();
    cc0.extend(&addr);
    cc0.extend(compose(&addr, &po));

    let mut ii = ii0.clone();
    let mut ic = Pairs::new();
    let mut ci = ci0.clone();
    let mut cc = cc0.clone();
    loop {
        let before = (ii.len(), ic.len(), ci.len(), cc.len());
        ii.extend(ci.clone());
        ii.extend(compose(&ic, &ci));
        ii.extend(compose(&ii, &ii));
        ic.extend(ii.clone());
        ic.extend(cc.clone());
        ic.extend(compose(&ic, &cc));
        ic.extend(compose(&ii, &ic));
        ci.extend(compose(&ci, &ii));
        ci.extend(compose(&ci, &ci));
        ci.extend(compose(&cc, &ci));
        cc.extend(ci.clone());
        cc.extend(compose(&ci, &ic));
        cc.extend(compose(&cc, &cc));
        if before == (ii.len(), ic.len(), ci.len(), cc.len()) {
            break;
        }
    }
    let r = |e: usize| ev[e].is_read();
    let w = |e: usize| ev[e].is_write();
    let mut ppo: Pairs = ii.into_iter().filter(|&(a, b)| r(a) && r(b)).collect();
    ppo.extend(ic.into_iter().filter(|&(a, b)| r(a) && w(b)));
    ppo
}
