//! ARMv7 and ARMv7-mca.

use super::{atomicity, sc_per_loc, AxiomKind::*, Checker, Com, ModelOpts};
use crate::exec::Execution;
use crate::relalg::{EventSet, Relation};

/// ii/ic/ci/cc seeds and the preserved program order built from them.
pub(crate) struct PpoParts {
    pub ii0: Relation,
    pub ci0: Relation,
    pub cc0: Relation,
}

pub(crate) fn seeds(x: &Execution, c: &Com) -> PpoParts {
    let d = &x.base.deps;
    let poloc = &x.base.poloc;
    let rdw = c.fre.seq(&c.rfe).inter(poloc);
    let detour = c.coe.seq(&c.rfe).inter(poloc);
    PpoParts {
        ii0: d.addr.union(&d.data).union(&rdw).union(&c.rfi),
        ci0: d.ctrl_isb.union(&detour),
        cc0: d.data.union(&d.ctrl).union(&d.addr.seq(&x.po().refl())),
    }
}

/// Least fixpoint of the four mutually inductive relations.
pub(crate) fn fixpoint(p: &PpoParts, n: usize) -> (Relation, Relation) {
    let mut ii = p.ii0.clone();
    let mut ic = Relation::empty(n);
    let mut ci = p.ci0.clone();
    let mut cc = p.cc0.clone();
    loop {
        let ii2 = p.ii0.union(&ci).union(&ic.seq(&ci)).union(&ii.seq(&ii));
        let ic2 = ii.union(&cc).union(&ic.seq(&cc)).union(&ii.seq(&ic));
        let ci2 = p.ci0.union(&ci.seq(&ii)).union(&ci.seq(&ci)).union(&cc.seq(&ci));
        let cc2 = p.cc0.union(&ci).union(&ci.seq(&ic)).union(&cc.seq(&cc));
        let done = ii2 == ii && ic2 == ic && ci2 == ci && cc2 == cc;
        ii = ii2;
        ic = ic2;
        ci = ci2;
        cc = cc2;
        if done {
            return (ii, ic);
        }
    }
}

pub(crate) fn ppo_from(x: &Execution, c: &Com) -> Relation {
    let (ii, ic) = fixpoint(&seeds(x, c), x.n());
    let cls = x.cls();
    ii.restrict(cls.reads, cls.reads).union(&ic.restrict(cls.reads, cls.writes))
}

/// `[R];ii;[R] ∪ [R];ic;[W]`.
pub fn armv7_ppo(x: &Execution) -> Relation {
    ppo_from(x, &Com::new(x))
}

/// ppo over explicitly supplied seeds `(ii0, ci0, cc0)`.
pub fn armv7_ppo_with(x: &Execution, ii0: Relation, ci0: Relation, cc0: Relation) -> Relation {
    let (ii, ic) = fixpoint(&PpoParts { ii0, ci0, cc0 }, x.n());
    let cls = x.cls();
    ii.restrict(cls.reads, cls.reads).union(&ic.restrict(cls.reads, cls.writes))
}

/// `[R∪W];po;[dmb];po;[R∪W]`; every fence event counts as a dmb.
pub(crate) fn dmb_fence(x: &Execution) -> Relation {
    let cls = x.cls();
    let mem: EventSet = cls.mem;
    x.po().restrict(mem, cls.fences).seq(&x.po().restrict(cls.fences, mem))
}

pub(crate) fn armv7(x: &Execution, ck: &mut Checker, mca: bool, opts: ModelOpts) {
    let c = Com::new(x);
    if !ck.add("sc-per-loc", Acyclic, sc_per_loc(x, &c)) {
        return;
    }
    if !ck.add("atomicity", Irreflexive, atomicity(x, &c)) {
        return;
    }
    let ppo = ppo_from(x, &c);
    let fence = dmb_fence(x);
    let ahb = ppo.union(&fence).union(&c.rfe);
    if !ck.add("no-thin-air", Acyclic, ahb.clone()) {
        return;
    }
    let n = x.n();
    let cls = x.cls();
    let ahb_star = ahb.rtclosure();
    let fence_ahb = fence.seq(&ahb_star);
    let rfe_q = c.rfe.refl();
    let prop1 = Relation::identity(n, cls.writes).seq(&rfe_q).seq(&fence_ahb).restrict_cod(cls.writes);
    let prop2 = c.coe.union(&c.fre).refl().seq(&rfe_q).seq(&fence_ahb.refl()).seq(&fence_ahb);
    let prop = prop1.union(&prop2);
    if !ck.add("observation", Irreflexive, c.fre.seq(&prop).seq(&ahb_star)) {
        return;
    }
    if !ck.add("propagation", Acyclic, x.co.union(&prop)) {
        return;
    }
    if mca {
        let wo = if opts.alt_wo {
            let mut w = c.rfe.seq(&ppo).seq(&c.rfe.inverse());
            for i in 0..n {
                w.remove(i, i);
            }
            w.seq(&x.co)
        } else {
            c.rfe.seq(&ppo).seq(&c.fre)
        };
        ck.add("mca", Acyclic, wo);
    }
}
