//! Seeded random programs and executions for property tests.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::exec::{Base, Event, EventDeps, Execution, Op};
use crate::litmus::{Arch, BinOp, Expr, FenceKind, Flavor, Instr, LocExpr, Location, Program, RmwOp, Thread, C11};
use crate::relalg::Relation;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GenConfig {
    pub arch: Arch,
    pub threads: (usize, usize),
    pub instrs: (usize, usize),
    pub locations: Vec<String>,
    /// Stored constants range over `1..=max_value`.
    pub max_value: i64,
    /// Cap on memory and fence events over the whole program.
    pub max_events: usize,
    pub fences: Vec<FenceKind>,
    pub rmw: bool,
    /// Registers flow into addresses and stored values (as `r*0` terms).
    pub deps: bool,
    pub branches: bool,
    pub isb: bool,
    pub flavors: bool,
    pub c11: bool,
}

impl GenConfig {
    pub fn for_arch(arch: Arch) -> Self {
        let fences = match arch {
            Arch::X86 => vec![FenceKind::MFence],
            Arch::Armv7 | Arch::Armv7Mca => vec![FenceKind::Dmb],
            Arch::Armv8 => vec![FenceKind::DmbFull, FenceKind::DmbLd, FenceKind::DmbSt],
            Arch::ScRef => vec![],
        };
        GenConfig {
            arch,
            threads: (2, 3),
            instrs: (1, 3),
            locations: vec!["X".into(), "Y".into()],
            max_value: 2,
            max_events: 8,
            fences,
            rmw: true,
            deps: arch != Arch::X86,
            branches: false,
            isb: false,
            flavors: arch == Arch::Armv8,
            c11: false,
        }
    }
    pub fn x86() -> Self {
        Self::for_arch(Arch::X86)
    }
    pub fn armv8() -> Self {
        Self::for_arch(Arch::Armv8)
    }
    pub fn armv7() -> Self {
        Self::for_arch(Arch::Armv7)
    }
    pub fn armv7_with_branches() -> Self {
        GenConfig { branches: true, isb: true, instrs: (2, 5), ..Self::armv7() }
    }
    /// Every access carries a C11 annotation.
    pub fn with_c11(mut self) -> Self {
        self.c11 = true;
        self
    }
}

struct G<'a> {
    cfg: &'a GenConfig,
    rng: ChaCha8Rng,
    events: usize,
}

impl<'a> G<'a> {
    fn loc(&mut self, regs: &[String]) -> LocExpr {
        let base = self.cfg.locations.choose(&mut self.rng).unwrap().clone();
        if !self.cfg.deps {
            return LocExpr::named(&base);
        }
        match regs.choose(&mut self.rng) {
            Some(r) if self.rng.gen_bool(0.4) => {
                LocExpr::indexed(&base, Expr::bin(BinOp::Mul, Expr::reg(r), Expr::Const(0)))
            }
            _ => LocExpr::indexed(&base, Expr::Const(0)),
        }
    }

    fn value(&mut self, regs: &[String]) -> Expr {
        let c = Expr::Const(self.rng.gen_range(1..=self.cfg.max_value));
        match regs.choose(&mut self.rng) {
            Some(r) if self.cfg.deps && self.rng.gen_bool(0.4) => {
                Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::reg(r), Expr::Const(0)), c)
            }
            _ => c,
        }
    }

    fn c11(&mut self, choices: &[C11]) -> Option<C11> {
        self.cfg.c11.then(|| *choices.choose(&mut self.rng).unwrap())
    }

    fn flavor(&mut self, f: Flavor) -> Flavor {
        if self.cfg.flavors && self.rng.gen_bool(0.3) {
            f
        } else {
            Flavor::Plain
        }
    }

    /// Location and annotation of a plain access. Non-atomic accesses only
    /// touch the thread's private location.
    fn access(&mut self, regs: &[String], tid: usize, atomic: &[C11]) -> (LocExpr, Option<C11>) {
        if self.cfg.c11 && self.rng.gen_bool(0.3) {
            let base = private_location(tid);
            let loc = if self.cfg.deps { LocExpr::indexed(&base, Expr::Const(0)) } else { LocExpr::named(&base) };
            return (loc, Some(C11::Na));
        }
        (self.loc(regs), self.c11(atomic))
    }

    fn thread(&mut self, tid: usize, budget: usize) -> Thread {
        let name = format!("P{tid}");
        let n = self.rng.gen_range(self.cfg.instrs.0..=self.cfg.instrs.1);
        let mut body = Vec::new();
        let mut regs: Vec<String> = Vec::new();
        let mut pending: Vec<(String, usize)> = Vec::new();
        let mut labels = 0;
        let mut used = 0;
        for _ in 0..n {
            let cost_left = budget.saturating_sub(used);
            if cost_left == 0 {
                break;
            }
            let roll = self.rng.gen_range(0..100);
            let instr = if roll < 35 {
                let reg = format!("r{}", regs.len());
                let (loc, c11) = self.access(&regs, tid, &[C11::Rlx, C11::Acq, C11::Sc]);
                let flavor = self.flavor(Flavor::Acq);
                regs.push(reg.clone());
                used += 1;
                Instr::Load { reg, loc, flavor, c11 }
            } else if roll < 70 {
                let (loc, c11) = self.access(&regs, tid, &[C11::Rlx, C11::Rel, C11::Sc]);
                let val = self.value(&regs);
                let flavor = self.flavor(Flavor::Rel);
                used += 1;
                Instr::Store { loc, val, flavor, c11 }
            } else if roll < 82 && self.cfg.rmw && cost_left >= self.rmw_cost() {
                let reg = format!("r{}", regs.len());
                let loc = self.loc(&regs);
                let op = if self.rng.gen_bool(0.6) {
                    RmwOp::Cas {
                        expected: Expr::Const(self.rng.gen_range(0..=self.cfg.max_value)),
                        new: Expr::Const(self.rng.gen_range(1..=self.cfg.max_value)),
                    }
                } else {
                    RmwOp::FetchAdd(Expr::Const(1))
                };
                let flavor = if self.cfg.flavors { *[Flavor::Plain, Flavor::Acq, Flavor::Rel].choose(&mut self.rng).unwrap() } else { Flavor::Plain };
                let c11 = self.c11(&[C11::Rlx, C11::Acq, C11::Rel, C11::Sc]);
                regs.push(reg.clone());
                used += self.rmw_cost();
                Instr::Rmw { reg, loc, op, flavor, c11 }
            } else if roll < 92 && !self.cfg.fences.is_empty() {
                used += 1;
                Instr::Fence(*self.cfg.fences.choose(&mut self.rng).unwrap())
            } else if self.cfg.branches && !regs.is_empty() {
                let r = regs.choose(&mut self.rng).unwrap().clone();
                let label = format!("L{labels}");
                labels += 1;
                pending.push((label.clone(), self.rng.gen_range(1..=2)));
                body.push(Instr::Branch {
                    cond: Expr::bin(BinOp::Eq, Expr::reg(&r), Expr::Const(self.rng.gen_range(0..=1))),
                    target: label,
                });
                if self.cfg.isb && self.rng.gen_bool(0.5) {
                    Instr::Fence(FenceKind::Isb)
                } else {
                    continue;
                }
            } else {
                continue;
            };
            body.push(instr);
            // place labels whose distance ran out
            let mut k = 0;
            while k < pending.len() {
                pending[k].1 -= 1;
                if pending[k].1 == 0 {
                    body.push(Instr::Label(pending.remove(k).0));
                } else {
                    k += 1;
                }
            }
        }
        for (l, _) in pending {
            body.push(Instr::Label(l));
        }
        self.events += used;
        Thread { name, body }
    }

    fn rmw_cost(&self) -> usize {
        if self.cfg.flavors {
            4
        } else {
            2
        }
    }
}

fn private_location(tid: usize) -> String {
    format!("N{tid}")
}

/// Loop-free random program within `cfg`.
pub fn random_program(cfg: &GenConfig, seed: u64) -> Program {
    let mut g = G { cfg, rng: ChaCha8Rng::seed_from_u64(seed), events: 0 };
    let nthreads = g.rng.gen_range(cfg.threads.0..=cfg.threads.1);
    let mut p = Program::new(cfg.arch);
    for t in 0..nthreads {
        let left = cfg.max_events.saturating_sub(g.events);
        let share = (left / (nthreads - t)).max(1);
        let th = g.thread(t, share);
        p.threads.push(th);
    }
    let private = if cfg.c11 { (0..nthreads).map(private_location).collect() } else { Vec::new() };
    for l in cfg.locations.iter().chain(&private) {
        let loc = if cfg.deps { Location::indexed(l, 0) } else { Location::named(l) };
        p.init.insert(loc, 0);
    }
    p.fill_init_defaults();
    p
}

/// Random well-formed execution with `threads` threads and at most
/// `max_events` non-init events over two locations.
pub fn random_execution(seed: u64, max_events: usize) -> Execution {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nlocs = 2usize;
    let nthreads = rng.gen_range(1..=3usize);
    let k = rng.gen_range(2..=max_events.max(2));
    let mut events: Vec<Event> = (0..nlocs)
        .map(|l| Event {
            id: l,
            tid: None,
            op: Op::W,
            loc: Some(l as u32),
            rval: None,
            wval: Some(0),
            flavor: Flavor::Plain,
            exclusive: false,
            c11: None,
            node: None,
        })
        .collect();
    let mut tids = Vec::new();
    for i in 0..k {
        let tid = if i < nthreads { i } else { rng.gen_range(0..nthreads) };
        tids.push(tid);
    }
    tids.sort();
    let mut counter = 1;
    for (i, &tid) in tids.iter().enumerate() {
        let roll = rng.gen_range(0..10);
        let id = nlocs + i;
        let (op, loc, wval) = if roll < 4 {
            (Op::R, Some(rng.gen_range(0..nlocs) as u32), None)
        } else if roll < 8 {
            counter += 1;
            (Op::W, Some(rng.gen_range(0..nlocs) as u32), Some(counter))
        } else {
            (Op::F(FenceKind::Dmb), None, None)
        };
        events.push(Event { id, tid: Some(tid), op, loc, rval: None, wval, flavor: Flavor::Plain, exclusive: false, c11: None, node: None });
    }
    let n = events.len();
    let mut po = Relation::empty(n);
    for a in nlocs..n {
        for b in a + 1..n {
            if events[a].tid == events[b].tid {
                po.insert(a, b);
            }
        }
    }
    let reads: Vec<usize> = (0..n).filter(|&i| events[i].op == Op::R).collect();
    let mut deps = EventDeps::empty(n);
    for &r in &reads {
        for b in po.row(r).iter() {
            let e = &events[b];
            if e.loc.is_some() && rng.gen_bool(0.2) {
                deps.addr.insert(r, b);
            }
            if e.op == Op::W && rng.gen_bool(0.2) {
                deps.data.insert(r, b);
            }
        }
        // control dependencies are suffix closed
        let later: Vec<usize> = po.row(r).iter().collect();
        if !later.is_empty() && rng.gen_bool(0.3) {
            let from = rng.gen_range(0..later.len());
            let isb = rng.gen_bool(0.5);
            let isb_from = rng.gen_range(from..later.len());
            for (k, &b) in later.iter().enumerate().skip(from) {
                deps.ctrl.insert(r, b);
                if isb && k >= isb_from {
                    deps.ctrl_isb.insert(r, b);
                }
            }
        }
    }
    let locs = (0..nlocs).map(|l| Location::named(["X", "Y"][l])).collect();
    let names = (0..nthreads).map(|t| format!("P{t}")).collect();
    // rf and co
    let mut rf = Relation::empty(n);
    let mut co = Relation::empty(n);
    for l in 0..nlocs as u32 {
        let mut ws: Vec<usize> = (nlocs..n).filter(|&i| events[i].op == Op::W && events[i].loc == Some(l)).collect();
        ws.shuffle(&mut rng);
        let mut chain = vec![l as usize];
        chain.extend(ws);
        for a in 0..chain.len() {
            for b in a + 1..chain.len() {
                co.insert(chain[a], chain[b]);
            }
        }
        let rs: Vec<usize> = reads.iter().copied().filter(|&r| events[r].loc == Some(l)).collect();
        for r in rs {
            let w = *chain.choose(&mut rng).unwrap();
            rf.insert(w, r);
            events[r].rval = events[w].wval;
        }
    }
    let base = Base::new(events, locs, names, po, Relation::empty(n), deps);
    Execution { base: Arc::new(base), rf, co, mo: None }
}
