//! ARMv8 (multicopy-atomic, other-multicopy-atomic ordered-before).

use super::{atomicity, AxiomKind::*, Checker, Com};
use crate::exec::Execution;
use crate::relalg::Relation;

pub(crate) fn ob_from(x: &Execution, c: &Com) -> Relation {
    let n = x.n();
    let cls = x.cls();
    let d = &x.base.deps;
    let po = x.po();
    let rmw = &x.base.rmw;
    let id = |s| Relation::identity(n, s);

    let obs = c.rfe.union(&c.fre).union(&c.coe);

    let dob = d
        .addr
        .union(&d.data)
        .union(&d.ctrl.restrict_cod(cls.writes))
        .union(&d.ctrl_isb.union(&d.addr_isb).restrict_cod(cls.reads))
        .union(&d.addr.seq(po).restrict_cod(cls.writes))
        .union(&d.ctrl.union(&d.data).seq(&c.coi))
        .union(&d.addr.union(&d.data).seq(&c.rfi));

    let aob = rmw.union(&id(rmw.codomain()).seq(&c.rfi).restrict_cod(cls.acq));

    let through = |f| po.restrict_cod(f).seq(po);
    let bob = through(cls.full_fences)
        .union(&po.restrict(cls.rel, cls.acq))
        .union(&through(cls.dmbld).restrict_dom(cls.reads))
        .union(&po.restrict_dom(cls.acq))
        .union(&through(cls.dmbst).restrict(cls.writes, cls.writes))
        .union(&po.restrict_cod(cls.rel))
        .union(&po.restrict_cod(cls.rel).seq(&c.coi));

    obs.union(&dob).union(&aob).union(&bob).tclosure()
}

/// `ob = (obs ∪ dob ∪ aob ∪ bob)⁺`.
pub fn armv8_ob(x: &Execution) -> Relation {
    ob_from(x, &Com::new(x))
}

pub(crate) fn armv8(x: &Execution, ck: &mut Checker) {
    let c = Com::new(x);
    let internal = x.base.poloc.union(&c.fr).union(&x.co).union(&x.rf);
    if !ck.add("internal", Acyclic, internal) {
        return;
    }
    if !ck.add("atomic", Irreflexive, atomicity(x, &c)) {
        return;
    }
    ck.add("external", Irreflexive, ob_from(x, &c));
}
