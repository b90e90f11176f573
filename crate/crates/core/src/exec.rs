//! Execution graphs: events, po/rf/co/mo, and model-independent derived relations.

use std::fmt::Write;
use std::sync::Arc;

use crate::litmus::{FenceKind, Flavor, Location, NodeId, C11};
use crate::relalg::{EventSet, Relation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    R,
    W,
    /// Atomic update: a successful x86 CAS as one event.
    U,
    F(FenceKind),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    pub id: usize,
    /// `None` for init writes.
    pub tid: Option<usize>,
    pub op: Op,
    pub loc: Option<u32>,
    pub rval: Option<i64>,
    pub wval: Option<i64>,
    pub flavor: Flavor,
    /// Half of an exclusive read/write pair.
    pub exclusive: bool,
    pub c11: Option<C11>,
    /// Instruction node that produced the event.
    pub node: Option<NodeId>,
}

impl Event {
    pub fn is_read(&self) -> bool {
        matches!(self.op, Op::R | Op::U)
    }
    pub fn is_write(&self) -> bool {
        matches!(self.op, Op::W | Op::U)
    }
    pub fn is_init(&self) -> bool {
        self.tid.is_none()
    }
}

/// Dependencies lifted to events.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EventDeps {
    pub addr: Relation,
    pub data: Relation,
    pub ctrl: Relation,
    pub ctrl_isb: Relation,
    pub addr_isb: Relation,
}

impl EventDeps {
    pub fn empty(n: usize) -> Self {
        EventDeps {
            addr: Relation::empty(n),
            data: Relation::empty(n),
            ctrl: Relation::empty(n),
            ctrl_isb: Relation::empty(n),
            addr_isb: Relation::empty(n),
        }
    }
}

/// Event classes precomputed once per event list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Classes {
    pub all: EventSet,
    pub init: EventSet,
    /// R and U.
    pub reads: EventSet,
    /// W and U.
    pub writes: EventSet,
    pub updates: EventSet,
    pub fences: EventSet,
    /// mfence, dmb, dmbfull.
    pub full_fences: EventSet,
    pub dmbld: EventSet,
    pub dmbst: EventSet,
    pub acq: EventSet,
    pub rel: EventSet,
    pub mem: EventSet,
}

/// The parts of an execution shared by every rf/co choice over one event set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Base {
    pub events: Vec<Event>,
    pub locs: Vec<Location>,
    pub thread_names: Vec<String>,
    pub po: Relation,
    pub rmw: Relation,
    pub deps: EventDeps,
    pub cls: Classes,
    pub loc_of: Vec<Option<u32>>,
    /// Memory-event pairs on the same location.
    pub same_loc: Relation,
    /// Pairs within one real thread.
    pub same_thread: Relation,
    pub poloc: Relation,
}

impl Base {
    pub fn new(
        events: Vec<Event>,
        locs: Vec<Location>,
        thread_names: Vec<String>,
        po: Relation,
        rmw: Relation,
        deps: EventDeps,
    ) -> Base {
        let n = events.len();
        let mut c = Classes {
            all: EventSet::full(n),
            init: EventSet::EMPTY,
            reads: EventSet::EMPTY,
            writes: EventSet::EMPTY,
            updates: EventSet::EMPTY,
            fences: EventSet::EMPTY,
            full_fences: EventSet::EMPTY,
            dmbld: EventSet::EMPTY,
            dmbst: EventSet::EMPTY,
            acq: EventSet::EMPTY,
            rel: EventSet::EMPTY,
            mem: EventSet::EMPTY,
        };
        for e in &events {
            let i = e.id;
            if e.is_init() {
                c.init.insert(i);
            }
            match e.op {
                Op::R => c.reads.insert(i),
                Op::W => c.writes.insert(i),
                Op::U => {
                    c.reads.insert(i);
                    c.writes.insert(i);
                    c.updates.insert(i);
                }
                Op::F(k) => {
                    c.fences.insert(i);
                    if k.is_full() {
                        c.full_fences.insert(i);
                    }
                    if k == FenceKind::DmbLd {
                        c.dmbld.insert(i);
                    }
                    if k == FenceKind::DmbSt {
                        c.dmbst.insert(i);
                    }
                }
            }
            if !matches!(e.op, Op::F(_)) {
                c.mem.insert(i);
            }
            match e.flavor {
                Flavor::Acq => c.acq.insert(i),
                Flavor::Rel => c.rel.insert(i),
                Flavor::Plain => {}
            }
        }
        let loc_of: Vec<Option<u32>> = events.iter().map(|e| e.loc).collect();
        let mut same_loc = Relation::empty(n);
        let mut same_thread = Relation::empty(n);
        for a in &events {
            for b in &events {
                if a.loc.is_some() && a.loc == b.loc {
                    same_loc.insert(a.id, b.id);
                }
                if a.tid.is_some() && a.tid == b.tid {
                    same_thread.insert(a.id, b.id);
                }
            }
        }
        let poloc = po.inter(&same_loc);
        Base { events, locs, thread_names, po, rmw, deps, cls: c, loc_of, same_loc, same_thread, poloc }
    }

    pub fn n(&self) -> usize {
        self.events.len()
    }

    pub fn thread_name(&self, tid: Option<usize>) -> &str {
        match tid {
            None => "init",
            Some(t) => &self.thread_names[t],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Execution {
    pub base: Arc<Base>,
    pub rf: Relation,
    pub co: Relation,
    /// x86 only: total over W ∪ U ∪ F.
    pub mo: Option<Relation>,
}

impl Execution {
    pub fn n(&self) -> usize {
        self.base.n()
    }
    pub fn events(&self) -> &[Event] {
        &self.base.events
    }
    pub fn po(&self) -> &Relation {
        &self.base.po
    }
    pub fn cls(&self) -> &Classes {
        &self.base.cls
    }

    /// Internal part: both ends in the same real thread.
    pub fn internal(&self, r: &Relation) -> Relation {
        r.inter(&self.base.same_thread)
    }
    /// External part; init edges count as external.
    pub fn external(&self, r: &Relation) -> Relation {
        r.minus(&self.base.same_thread)
    }

    /// Final value per location: wval of the co-maximal write.
    pub fn final_memory(&self) -> Vec<(u32, i64)> {
        let mut out = Vec::new();
        for l in 0..self.base.locs.len() as u32 {
            let ws: Vec<&Event> = self.events().iter().filter(|e| e.is_write() && e.loc == Some(l)).collect();
            if let Some(last) = ws.iter().find(|w| self.co.row(w.id).is_empty()) {
                out.push((l, last.wval.unwrap_or(0)));
            }
        }
        out
    }

    /// Golden text form: `event`, `po`, `rf`, `co`, `mo`, `rmw` lines.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for e in self.events() {
            let op = match e.op {
                Op::R => "R".to_string(),
                Op::W => "W".to_string(),
                Op::U => "U".to_string(),
                Op::F(k) => format!("F.{}", k.name()),
            };
            let loc = e.loc.map(|l| self.base.locs[l as usize].to_string()).unwrap_or_else(|| "-".into());
            let v = |x: Option<i64>| x.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
            write!(s, "event {} {} {} {} {} {}", e.id, self.base.thread_name(e.tid), op, loc, v(e.rval), v(e.wval)).unwrap();
            match e.flavor {
                Flavor::Acq => s.push_str(" acq"),
                Flavor::Rel => s.push_str(" rel"),
                Flavor::Plain => {}
            }
            if e.exclusive {
                s.push_str(" excl");
            }
            s.push('\n');
        }
        let mut rel = |name: &str, r: &Relation| {
            for (a, b) in r.pairs() {
                writeln!(s, "{name} {a} {b}").unwrap();
            }
        };
        rel("po", &self.base.po);
        rel("rf", &self.rf);
        rel("co", &self.co);
        if let Some(mo) = &self.mo {
            rel("mo", mo);
        }
        rel("rmw", &self.base.rmw);
        s
    }
}

/// `fr = rf⁻¹;co ∖ id`.
pub fn derive_fr(x: &Execution) -> Relation {
    let mut fr = x.rf.inverse().seq(&x.co);
    for i in 0..x.n() {
        fr.remove(i, i);
    }
    fr
}

/// `eco = (rf ∪ co ∪ fr)⁺`, same-location.
pub fn derive_eco(x: &Execution) -> Relation {
    x.rf.union(&x.co).union(&derive_fr(x)).tclosure().inter(&x.base.same_loc)
}

/// `(internal, external)`; init edges are external.
pub fn split_internal_external(r: &Relation, x: &Execution) -> (Relation, Relation) {
    (x.internal(r), x.external(r))
}
