//! Exhaustive execution enumeration and behavior sets.
//!
//! Each thread is run symbolically with every read guessing a value from a
//! per-location domain; the domain is the fixpoint of written values after
//! as many rounds as the program has writes (value chains through reads and
//! writes are acyclic in every model here). Per-thread traces are combined,
//! reads are matched to same-valued writes, and co/mo orders are generated
//! as linear extensions of the coherence constraints before the model check.

mod behavior;
mod trace;

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use thiserror::Error;

use crate::exec::{Base, Event, EventDeps, Execution, Op};
use crate::litmus::{Cfg, Instr, Location, NodeId, Program};
use crate::models::{self, ModelError, ModelId};
use crate::relalg::{Relation, MAX_EVENTS};

pub use behavior::{included, Behavior, BehaviorSet};
use trace::{Domain, Trace};

/// Default cap on rf/co/mo candidates examined.
pub const DEFAULT_MAX_CANDIDATES: u64 = 10_000_000;
/// Default cap on traces per thread.
pub const DEFAULT_PATHS_LIMIT: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("thread {0} contains a loop")]
    LoopDetected(usize),
    #[error("candidate budget of {0} exceeded")]
    BudgetExceeded(u64),
    #[error("execution needs {0} events; at most {MAX_EVENTS} supported")]
    TooManyEvents(usize),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnumConfig {
    pub max_candidates: u64,
    pub paths_limit: usize,
    /// Behaviors also record the full co order per location.
    pub strict: bool,
}

impl Default for EnumConfig {
    fn default() -> Self {
        EnumConfig { max_candidates: DEFAULT_MAX_CANDIDATES, paths_limit: DEFAULT_PATHS_LIMIT, strict: false }
    }
}

/// A straight-line path through one thread, with the branch decisions taken.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ControlPath {
    pub nodes: Vec<NodeId>,
    /// (branch node, taken).
    pub constraints: Vec<(NodeId, bool)>,
}

/// All entry-to-exit paths of every thread, ignoring branch feasibility.
pub fn control_paths(p: &Program) -> Result<Vec<Vec<ControlPath>>, EnumError> {
    check_loop_free(p)?;
    let mut out = Vec::new();
    for t in &p.threads {
        let body = &t.body;
        let label = |l: &str| body.iter().position(|i| matches!(i, Instr::Label(x) if x == l));
        let mut paths = Vec::new();
        let mut stack = vec![(0usize, ControlPath { nodes: vec![], constraints: vec![] })];
        while let Some((pc, mut path)) = stack.pop() {
            if pc >= body.len() {
                paths.push(path);
                continue;
            }
            path.nodes.push(pc);
            if let Instr::Branch { target, .. } = &body[pc] {
                let tgt = label(target).expect("validated label");
                let mut taken = path.clone();
                taken.constraints.push((pc, true));
                path.constraints.push((pc, false));
                stack.push((tgt, taken));
            }
            stack.push((pc + 1, path));
        }
        paths.reverse();
        out.push(paths);
    }
    Ok(out)
}

pub fn check_loop_free(p: &Program) -> Result<(), EnumError> {
    for t in 0..p.threads.len() {
        if !Cfg::build(p, t).is_acyclic() {
            return Err(EnumError::LoopDetected(t));
        }
    }
    Ok(())
}

/// Every `m`-consistent execution, in deterministic order.
pub fn enumerate_executions(p: &Program, m: ModelId) -> Result<Vec<Execution>, EnumError> {
    enumerate_executions_with(p, m, &EnumConfig::default())
}

pub fn enumerate_executions_with(p: &Program, m: ModelId, cfg: &EnumConfig) -> Result<Vec<Execution>, EnumError> {
    let mut out = Vec::new();
    search(p, m, cfg, false, &mut |x, _| out.push(x.clone()))?;
    Ok(out)
}

/// Calls `f` on every consistent execution.
pub fn for_each_execution(
    p: &Program,
    m: ModelId,
    cfg: &EnumConfig,
    f: &mut dyn FnMut(&Execution),
) -> Result<(), EnumError> {
    search(p, m, cfg, false, &mut |x, _| f(x))
}

pub fn behaviors(p: &Program, m: ModelId) -> Result<BehaviorSet, EnumError> {
    behaviors_with(p, m, &EnumConfig::default())
}

pub fn behaviors_with(p: &Program, m: ModelId, cfg: &EnumConfig) -> Result<BehaviorSet, EnumError> {
    let mut set = BehaviorSet::new(p.threads.iter().map(|t| t.name.clone()).collect());
    search(p, m, cfg, true, &mut |_, b| {
        set.items.insert(b.clone());
    })?;
    Ok(set)
}

/// Some `m`-consistent execution satisfies the `exists` clause.
pub fn outcome_allowed(p: &Program, m: ModelId) -> Result<bool, EnumError> {
    let b = behaviors(p, m)?;
    Ok(b.items.iter().any(|x| x.satisfies(p)))
}

// ---------------------------------------------------------------------------

struct Search<'a> {
    p: &'a Program,
    m: ModelId,
    cfg: &'a EnumConfig,
    dedupe: bool,
    seen: BTreeSet<Behavior>,
    candidates: u64,
    regs_per_thread: Vec<Vec<String>>,
}

fn search(
    p: &Program,
    m: ModelId,
    cfg: &EnumConfig,
    dedupe: bool,
    f: &mut dyn FnMut(&Execution, &Behavior),
) -> Result<(), EnumError> {
    check_loop_free(p)?;
    let updates = m.uses_update_events();
    let dom = trace::value_domain(p, updates, cfg.paths_limit)?;
    let traces: Vec<Vec<Trace>> = p
        .threads
        .iter()
        .map(|t| trace::thread_traces(t, &dom, &p.init, updates, cfg.paths_limit))
        .collect::<Result<_, _>>()?;
    let mut s = Search {
        p,
        m,
        cfg,
        dedupe,
        seen: BTreeSet::new(),
        candidates: 0,
        regs_per_thread: p.threads.iter().map(|t| t.registers()).collect(),
    };
    let mut pick = vec![0usize; traces.len()];
    if traces.iter().any(|t| t.is_empty()) {
        return Ok(());
    }
    loop {
        let combo: Vec<&Trace> = pick.iter().enumerate().map(|(t, &k)| &traces[t][k]).collect();
        s.combination(&combo, &dom, f)?;
        // odometer
        let mut k = 0;
        loop {
            if k == pick.len() {
                return Ok(());
            }
            pick[k] += 1;
            if pick[k] < traces[k].len() {
                break;
            }
            pick[k] = 0;
            k += 1;
        }
    }
}

impl<'a> Search<'a> {
    fn bump(&mut self) -> Result<(), EnumError> {
        self.candidates += 1;
        if self.candidates > self.cfg.max_candidates {
            Err(EnumError::BudgetExceeded(self.cfg.max_candidates))
        } else {
            Ok(())
        }
    }

    fn combination(
        &mut self,
        combo: &[&Trace],
        _dom: &Domain,
        f: &mut dyn FnMut(&Execution, &Behavior),
    ) -> Result<(), EnumError> {
        // cheap value-feasibility filter
        let mut written: BTreeSet<(&Location, i64)> = BTreeSet::new();
        for t in combo {
            for e in &t.evs {
                if let (Some(l), Some(v)) = (&e.loc, e.wval) {
                    written.insert((l, v));
                }
            }
        }
        for t in combo {
            for e in &t.evs {
                if let (Some(l), Some(v)) = (&e.loc, e.rval) {
                    let init = self.p.init.get(l).copied().unwrap_or(0);
                    if v != init && !written.contains(&(l, v)) {
                        return Ok(());
                    }
                }
            }
        }
        let Some(base) = self.build_base(combo)? else { return Ok(()) };
        let base = Arc::new(base);
        let n = base.n();

        // rf candidates per read
        let reads: Vec<usize> = base.cls.reads.iter().collect();
        let mut cands: Vec<Vec<usize>> = Vec::with_capacity(reads.len());
        for &r in &reads {
            let er = &base.events[r];
            let mut c = Vec::new();
            for w in base.cls.writes.iter() {
                let ew = &base.events[w];
                if w == r || ew.loc != er.loc || ew.wval != er.rval {
                    continue;
                }
                if base.po.contains(r, w) {
                    continue;
                }
                // a later same-thread write to the location hides w
                if base.poloc.contains(w, r)
                    && base.cls.writes.iter().any(|w2| w2 != w && base.poloc.contains(w, w2) && base.poloc.contains(w2, r))
                {
                    continue;
                }
                c.push(w);
            }
            if c.is_empty() {
                return Ok(());
            }
            cands.push(c);
        }

        let regs = self.behavior_regs(combo);
        let mut pick = vec![0usize; reads.len()];
        loop {
            let mut rf = Relation::empty(n);
            for (k, &r) in reads.iter().enumerate() {
                rf.insert(cands[k][pick[k]], r);
            }
            self.with_rf(&base, rf, &regs, f)?;
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return Ok(());
                }
                pick[k] += 1;
                if pick[k] < cands[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    fn behavior_regs(&self, combo: &[&Trace]) -> BTreeMap<(usize, String), i64> {
        let mut out = BTreeMap::new();
        for (t, tr) in combo.iter().enumerate() {
            for r in &self.regs_per_thread[t] {
                out.insert((t, r.clone()), tr.regs.get(r).copied().unwrap_or(0));
            }
        }
        out
    }

    fn build_base(&self, combo: &[&Trace]) -> Result<Option<Base>, EnumError> {
        let mut locs: BTreeSet<Location> = self.p.init.keys().cloned().collect();
        for t in combo {
            for e in &t.evs {
                if let Some(l) = &e.loc {
                    locs.insert(l.clone());
                }
            }
        }
        let locs: Vec<Location> = locs.into_iter().collect();
        let loc_ix: BTreeMap<&Location, u32> = locs.iter().enumerate().map(|(i, l)| (l, i as u32)).collect();
        let total = locs.len() + combo.iter().map(|t| t.evs.len()).sum::<usize>();
        if total > MAX_EVENTS {
            return Err(EnumError::TooManyEvents(total));
        }
        let mut events = Vec::with_capacity(total);
        for (i, l) in locs.iter().enumerate() {
            events.push(Event {
                id: i,
                tid: None,
                op: Op::W,
                loc: Some(i as u32),
                rval: None,
                wval: Some(self.p.init.get(l).copied().unwrap_or(0)),
                flavor: Default::default(),
                exclusive: false,
                c11: None,
                node: None,
            });
        }
        let n = total;
        let mut po = Relation::empty(n);
        let mut rmw = Relation::empty(n);
        let mut deps = EventDeps::empty(n);
        for (tid, t) in combo.iter().enumerate() {
            let off = events.len();
            for (k, e) in t.evs.iter().enumerate() {
                events.push(Event {
                    id: off + k,
                    tid: Some(tid),
                    op: e.op,
                    loc: e.loc.as_ref().map(|l| loc_ix[l]),
                    rval: e.rval,
                    wval: e.wval,
                    flavor: e.flavor,
                    exclusive: e.exclusive,
                    c11: e.c11,
                    node: Some(e.node),
                });
                for j in 0..k {
                    po.insert(off + j, off + k);
                }
            }
            for &(a, b) in &t.rmw {
                rmw.insert(off + a, off + b);
            }
            lift_deps(t, off, &mut deps);
        }
        let names = self.p.threads.iter().map(|t| t.name.clone()).collect();
        Ok(Some(Base::new(events, locs, names, po, rmw, deps)))
    }

    fn with_rf(
        &mut self,
        base: &Arc<Base>,
        rf: Relation,
        regs: &BTreeMap<(usize, String), i64>,
        f: &mut dyn FnMut(&Execution, &Behavior),
    ) -> Result<(), EnumError> {
        let n = base.n();
        // per-location co constraints among non-init writes
        let nlocs = base.locs.len();
        let mut per_loc: Vec<Vec<usize>> = vec![Vec::new(); nlocs];
        for w in base.cls.writes.iter() {
            if !base.events[w].is_init() {
                per_loc[base.events[w].loc.unwrap() as usize].push(w);
            }
        }
        let mut must = Relation::empty(n);
        must.union_with(&base.poloc.restrict(base.cls.writes, base.cls.writes));
        let rf_inv = rf.inverse();
        let id = Relation::identity(n, base.cls.all);
        // CoWR: w' poloc r, rf(w, r), w' ≠ w ⇒ co(w', w)
        must.union_with(&base.poloc.restrict(base.cls.writes, base.cls.reads).seq(&rf_inv).minus(&id));
        // CoRW: rf(w, r), r poloc w' ⇒ co(w, w')
        must.union_with(&rf.seq(&base.poloc.restrict(base.cls.reads, base.cls.writes)));
        // CoRR, unless both reads share a source
        must.union_with(&rf.seq(&base.poloc.restrict(base.cls.reads, base.cls.reads)).seq(&rf_inv).minus(&id));
        // an exclusive write follows its read's source
        must.union_with(&rf.seq(&base.rmw));
        // a successful update follows its own source
        for u in base.cls.updates.iter() {
            for w in rf_inv.row(u).iter() {
                must.insert(w, u);
            }
        }
        // nothing may precede init
        if !must.is_irreflexive() || !must.codomain().inter(base.cls.init).is_empty() {
            return Ok(());
        }

        let mut loc_orders: Vec<Vec<Vec<usize>>> = Vec::with_capacity(nlocs);
        for ws in &per_loc {
            let orders = linear_extensions(ws, &must);
            if orders.is_empty() {
                return Ok(());
            }
            loc_orders.push(orders);
        }
        let mut pick = vec![0usize; nlocs];
        loop {
            self.bump()?;
            let mut co = Relation::empty(n);
            let mut co_seq: BTreeMap<Location, Vec<i64>> = BTreeMap::new();
            let mut mem = BTreeMap::new();
            for (l, orders) in loc_orders.iter().enumerate() {
                let order = &orders[pick[l]];
                let init = l; // init writes occupy ids 0..nlocs
                let mut chain = vec![init];
                chain.extend_from_slice(order);
                for a in 0..chain.len() {
                    for b in a + 1..chain.len() {
                        co.insert(chain[a], chain[b]);
                    }
                }
                let last = *chain.last().unwrap();
                let v = base.events[last].wval.unwrap_or(0);
                let loc = &base.locs[l];
                if self.p.init.contains_key(loc) || v != 0 {
                    mem.insert(loc.clone(), v);
                }
                if self.cfg.strict && !order.is_empty() {
                    co_seq.insert(loc.clone(), order.iter().map(|&w| base.events[w].wval.unwrap_or(0)).collect());
                }
            }
            let b = Behavior { regs: regs.clone(), mem, co: if self.cfg.strict { Some(co_seq) } else { None } };
            if !(self.dedupe && self.seen.contains(&b)) {
                let x = Execution { base: base.clone(), rf: rf.clone(), co, mo: None };
                if self.m == ModelId::X86 {
                    self.with_mo(x, &b, f)?;
                } else if models::is_consistent(&x, self.m) {
                    if self.dedupe {
                        self.seen.insert(b.clone());
                    }
                    f(&x, &b);
                }
            }
            let mut k = 0;
            loop {
                if k == pick.len() {
                    return Ok(());
                }
                pick[k] += 1;
                if pick[k] < loc_orders[k].len() {
                    break;
                }
                pick[k] = 0;
                k += 1;
            }
        }
    }

    fn with_mo(&mut self, x: Execution, b: &Behavior, f: &mut dyn FnMut(&Execution, &Behavior)) -> Result<(), EnumError> {
        let base = &x.base;
        let n = x.n();
        let cls = &base.cls;
        let o = cls.writes.union(cls.fences);
        let xhb = base.po.union(&x.rf).tclosure();
        if !xhb.is_irreflexive() {
            return Ok(());
        }
        let fr = crate::exec::derive_fr(&x);
        let mut must = x.co.union(&xhb.restrict(o, o)).union(&fr.restrict(o, o));
        for i in cls.init.iter() {
            for j in o.minus(cls.init).iter() {
                must.insert(i, j);
            }
        }
        let nodes: Vec<usize> = o.iter().collect();
        for order in linear_extensions(&nodes, &must) {
            self.bump()?;
            let mut mo = Relation::empty(n);
            for a in 0..order.len() {
                for c in a + 1..order.len() {
                    mo.insert(order[a], order[c]);
                }
            }
            let y = Execution { mo: Some(mo), ..x.clone() };
            if models::is_consistent(&y, ModelId::X86) {
                f(&y, b);
                if self.dedupe {
                    self.seen.insert(b.clone());
                    return Ok(());
                }
            }
        }
        Ok(())
    }
}

fn lift_deps(t: &Trace, off: usize, deps: &mut EventDeps) {
    let src = |node: NodeId| -> Option<usize> {
        t.node_evs.get(&node)?.iter().copied().find(|&k| t.evs[k].rval.is_some()).map(|k| off + k)
    };
    let targets = |node: NodeId, pred: &dyn Fn(&trace::TEv) -> bool| -> Vec<usize> {
        t.node_evs
            .get(&node)
            .map(|v| v.iter().copied().filter(|&k| pred(&t.evs[k])).map(|k| off + k).collect())
            .unwrap_or_default()
    };
    let mem = |e: &trace::TEv| e.loc.is_some();
    let wr = |e: &trace::TEv| e.wval.is_some();
    let any = |_: &trace::TEv| true;
    let lift = |pairs: &BTreeSet<(NodeId, NodeId)>, rel: &mut Relation, pred: &dyn Fn(&trace::TEv) -> bool| {
        for &(s, d) in pairs {
            if let Some(s) = src(s) {
                for d in targets(d, pred) {
                    if s != d {
                        rel.insert(s, d);
                    }
                }
            }
        }
    };
    lift(&t.deps.addr, &mut deps.addr, &mem);
    lift(&t.deps.data, &mut deps.data, &wr);
    lift(&t.deps.ctrl, &mut deps.ctrl, &any);
    lift(&t.deps.ctrl_isb, &mut deps.ctrl_isb, &any);
    lift(&t.deps.addr_isb, &mut deps.addr_isb, &any);
}

/// All orderings of `nodes` consistent with `must` (restricted to `nodes`).
pub(crate) fn linear_extensions(nodes: &[usize], must: &Relation) -> Vec<Vec<usize>> {
    let k = nodes.len();
    // local predecessor masks
    let mut preds = vec![0u64; k];
    for (a, &x) in nodes.iter().enumerate() {
        for (b, &y) in nodes.iter().enumerate() {
            if a != b && must.contains(y, x) {
                preds[a] |= 1 << b;
            }
        }
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(preds: &[u64], nodes: &[usize], placed: u64, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == nodes.len() {
            out.push(cur.clone());
            return;
        }
        for i in 0..nodes.len() {
            if placed >> i & 1 == 0 && preds[i] & !placed == 0 {
                cur.push(nodes[i]);
                go(preds, nodes, placed | 1 << i, cur, out);
                cur.pop();
            }
        }
    }
    go(&preds, nodes, 0, &mut cur, &mut out);
    out
}

#[cfg(test)]
mod tests;
