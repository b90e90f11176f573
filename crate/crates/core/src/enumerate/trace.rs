//! Per-thread symbolic runs with guessed read values.

use std::collections::{BTreeMap, BTreeSet};

use super::EnumError;
use crate::exec::Op;
use crate::litmus::{DepState, FenceKind, Flavor, Instr, Location, NodeId, Program, RmwOp, Thread, ThreadDeps, C11};

/// Values each location may hold.
pub(crate) type Domain = BTreeMap<Location, BTreeSet<i64>>;

const MAX_DOMAIN: usize = 256;

#[derive(Debug, Clone)]
pub(crate) struct TEv {
    pub op: Op,
    pub loc: Option<Location>,
    pub rval: Option<i64>,
    pub wval: Option<i64>,
    pub flavor: Flavor,
    pub exclusive: bool,
    pub c11: Option<C11>,
    pub node: NodeId,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Trace {
    pub evs: Vec<TEv>,
    pub regs: BTreeMap<String, i64>,
    pub deps: ThreadDeps,
    pub node_evs: BTreeMap<NodeId, Vec<usize>>,
    /// Local (read, write) exclusive pairs.
    pub rmw: Vec<(usize, usize)>,
}

struct Walker<'a> {
    body: &'a [Instr],
    dom: &'a Domain,
    init: &'a BTreeMap<Location, i64>,
    updates: bool,
    limit: usize,
    out: Vec<Trace>,
}

#[derive(Clone, Default)]
struct State {
    tr: Trace,
    deps: DepState,
}

impl State {
    fn reg(&self, r: &str) -> i64 {
        self.tr.regs.get(r).copied().unwrap_or(0)
    }
    fn push(&mut self, node: NodeId, e: TEv) -> usize {
        let k = self.tr.evs.len();
        self.tr.evs.push(e);
        self.tr.node_evs.entry(node).or_default().push(k);
        k
    }
    fn fence(&mut self, node: NodeId, k: FenceKind) {
        self.push(
            node,
            TEv { op: Op::F(k), loc: None, rval: None, wval: None, flavor: Flavor::Plain, exclusive: false, c11: None, node },
        );
    }
}

impl<'a> Walker<'a> {
    fn values(&self, l: &Location) -> Vec<i64> {
        match self.dom.get(l) {
            Some(s) => s.iter().copied().collect(),
            None => vec![self.init.get(l).copied().unwrap_or(0)],
        }
    }

    fn label(&self, l: &str) -> usize {
        self.body.iter().position(|i| matches!(i, Instr::Label(x) if x == l)).expect("validated label")
    }

    fn walk(&mut self, mut pc: usize, mut st: State) -> Result<(), EnumError> {
        while pc < self.body.len() {
            let instr = &self.body[pc];
            st.deps.step(pc, instr, &mut st.tr.deps);
            match instr {
                Instr::Label(_) => {}
                Instr::RegOp { reg, expr } => {
                    let v = expr.eval(&|r| st.reg(r));
                    st.tr.regs.insert(reg.clone(), v);
                }
                Instr::Branch { cond, target } => {
                    if cond.eval(&|r| st.reg(r)) != 0 {
                        pc = self.label(target);
                        continue;
                    }
                }
                Instr::Fence(FenceKind::Isb) => {}
                Instr::Fence(k) => st.fence(pc, *k),
                Instr::Store { loc, val, flavor, c11 } => {
                    let l = loc.resolve(&|r| st.reg(r));
                    let v = val.eval(&|r| st.reg(r));
                    st.push(
                        pc,
                        TEv { op: Op::W, loc: Some(l), rval: None, wval: Some(v), flavor: *flavor, exclusive: false, c11: *c11, node: pc },
                    );
                }
                Instr::Load { reg, loc, flavor, c11 } => {
                    let l = loc.resolve(&|r| st.reg(r));
                    for v in self.values(&l) {
                        let mut s2 = st.clone();
                        s2.push(
                            pc,
                            TEv { op: Op::R, loc: Some(l.clone()), rval: Some(v), wval: None, flavor: *flavor, exclusive: false, c11: *c11, node: pc },
                        );
                        s2.tr.regs.insert(reg.clone(), v);
                        self.walk(pc + 1, s2)?;
                    }
                    return Ok(());
                }
                Instr::Rmw { reg, loc, op, flavor, c11 } => {
                    let l = loc.resolve(&|r| st.reg(r));
                    for v in self.values(&l) {
                        let mut s2 = st.clone();
                        let new = match op {
                            RmwOp::Cas { expected, new } => {
                                if expected.eval(&|r| st.reg(r)) == v {
                                    Some(new.eval(&|r| st.reg(r)))
                                } else {
                                    None
                                }
                            }
                            RmwOp::FetchAdd(e) => Some(v.wrapping_add(e.eval(&|r| st.reg(r)))),
                        };
                        self.rmw_events(&mut s2, pc, &l, v, new, *flavor, *c11);
                        s2.tr.regs.insert(reg.clone(), v);
                        self.walk(pc + 1, s2)?;
                    }
                    return Ok(());
                }
            }
            pc += 1;
        }
        if self.out.len() >= self.limit {
            return Err(EnumError::BudgetExceeded(self.limit as u64));
        }
        self.out.push(st.tr);
        Ok(())
    }

    #[allow(clippy::too_many_arguments)]
    fn rmw_events(&self, st: &mut State, pc: usize, l: &Location, v: i64, new: Option<i64>, flavor: Flavor, c11: Option<C11>) {
        let ev = |op, rval, wval, exclusive| TEv {
            op,
            loc: Some(l.clone()),
            rval,
            wval,
            flavor: Flavor::Plain,
            exclusive,
            c11,
            node: pc,
        };
        if flavor == Flavor::Rel {
            st.fence(pc, FenceKind::DmbFull);
        }
        match new {
            None => {
                st.push(pc, ev(Op::R, Some(v), None, !self.updates));
            }
            Some(w) if self.updates => {
                st.push(pc, ev(Op::U, Some(v), Some(w), false));
            }
            Some(w) => {
                let r = st.push(pc, ev(Op::R, Some(v), None, true));
                let wk = st.push(pc, ev(Op::W, None, Some(w), true));
                st.tr.rmw.push((r, wk));
            }
        }
        match flavor {
            Flavor::Acq => st.fence(pc, FenceKind::DmbLd),
            Flavor::Rel => st.fence(pc, FenceKind::DmbFull),
            Flavor::Plain => {}
        }
    }
}

pub(crate) fn thread_traces(
    t: &Thread,
    dom: &Domain,
    init: &BTreeMap<Location, i64>,
    updates: bool,
    limit: usize,
) -> Result<Vec<Trace>, EnumError> {
    let mut w = Walker { body: &t.body, dom, init, updates, limit, out: Vec::new() };
    w.walk(0, State::default())?;
    Ok(w.out)
}

/// Written-value fixpoint, one round per write instruction.
pub(crate) fn value_domain(p: &Program, updates: bool, limit: usize) -> Result<Domain, EnumError> {
    let mut dom: Domain = p.init.iter().map(|(l, v)| (l.clone(), [*v].into_iter().collect())).collect();
    let writes = p.threads.iter().flat_map(|t| &t.body).filter(|i| i.writes()).count();
    for _ in 0..writes {
        let mut next = dom.clone();
        for t in &p.threads {
            for tr in thread_traces(t, &dom, &p.init, updates, limit)? {
                for e in &tr.evs {
                    if let Some(l) = &e.loc {
                        let s = next.entry(l.clone()).or_insert_with(|| [p.init.get(l).copied().unwrap_or(0)].into_iter().collect());
                        if let Some(v) = e.wval {
                            s.insert(v);
                        }
                        if s.len() > MAX_DOMAIN {
                            return Err(EnumError::BudgetExceeded(MAX_DOMAIN as u64));
                        }
                    }
                }
            }
        }
        if next == dom {
            break;
        }
        dom = next;
    }
    Ok(dom)
}
