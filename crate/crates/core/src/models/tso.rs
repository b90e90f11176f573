//! SC, x86 with mo, and x86A.

use super::{atomicity, sc_per_loc, AxiomKind::*, Checker, Com, ModelError};
use crate::exec::Execution;
use crate::relalg::{EventSet, Relation};

pub(crate) fn sc(x: &Execution, ck: &mut Checker) {
    let c = Com::new(x);
    let hb = x.po().union(&x.rf).union(&c.fr).union(&x.co);
    if !ck.add("sc", Acyclic, hb) {
        return;
    }
    ck.add("atomicity", Irreflexive, atomicity(x, &c));
}

pub(crate) fn x86(x: &Execution, ck: &mut Checker) -> Result<(), ModelError> {
    let mo = x.mo.as_ref().ok_or(ModelError::MissingMo)?;
    let c = Com::new(x);
    let po = x.po();
    let xhb = po.union(&x.rf).tclosure();
    let cls = x.cls();
    let uf = Relation::identity(x.n(), cls.updates.union(cls.full_fences));
    let steps: [(&'static str, Relation); 6] = [
        ("irrHB", xhb.clone()),
        ("irrMOHB", mo.seq(&xhb)),
        ("irrFRHB", c.fr.seq(&xhb)),
        ("irrFRMO", c.fr.seq(mo)),
        ("irrFMRP", c.fr.seq(mo).seq(&c.rfe).seq(po)),
        ("irrUF", c.fr.seq(mo).seq(&uf).seq(po)),
    ];
    for (name, r) in steps {
        if !ck.add(name, Irreflexive, r) {
            break;
        }
    }
    Ok(())
}

/// `[W ∖ codom(rmw)];po;[R ∖ dom(rmw)]`, minus release-to-acquire pairs.
pub(crate) fn awr(x: &Execution) -> Relation {
    let cls = x.cls();
    let rmw = &x.base.rmw;
    let w = cls.writes.minus(rmw.codomain());
    let r = cls.reads.minus(rmw.domain());
    x.po().restrict(w, r).minus(&x.po().restrict(cls.rel, cls.acq))
}

/// `po;[dom(rmw) ∪ codom(rmw) ∪ Ffull];po`.
pub(crate) fn x86_fence(x: &Execution) -> Relation {
    let rmw = &x.base.rmw;
    let mid: EventSet = rmw.domain().union(rmw.codomain()).union(x.cls().full_fences);
    x.po().restrict_cod(mid).seq(x.po())
}

pub(crate) fn x86a(x: &Execution, ck: &mut Checker) {
    let c = Com::new(x);
    if !ck.add("sc-per-loc", Acyclic, sc_per_loc(x, &c)) {
        return;
    }
    if !ck.add("atomicity", Irreflexive, atomicity(x, &c)) {
        return;
    }
    let ghb = x
        .po()
        .minus(&awr(x))
        .union(&x86_fence(x))
        .union(&c.rfe)
        .union(&x.co)
        .union(&c.fr);
    ck.add("ghb", Acyclic, ghb);
}
