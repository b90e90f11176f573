//! Consistency predicates: SC, x86 (direct, with mo), x86A, ARMv7, ARMv7-mca, ARMv8.

mod armv7;
mod armv8;
mod tso;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exec::{derive_fr, Execution};
use crate::litmus::Arch;
use crate::relalg::Relation;

pub use armv7::{armv7_ppo, armv7_ppo_with};
pub use armv8::armv8_ob;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelId {
    Sc,
    X86,
    X86A,
    Armv8,
    Armv7Mca,
    Armv7,
}

impl ModelId {
    pub const ALL: [ModelId; 6] =
        [ModelId::Sc, ModelId::X86, ModelId::X86A, ModelId::Armv8, ModelId::Armv7Mca, ModelId::Armv7];

    pub fn name(self) -> &'static str {
        match self {
            ModelId::Sc => "sc",
            ModelId::X86 => "x86",
            ModelId::X86A => "x86a",
            ModelId::Armv8 => "armv8",
            ModelId::Armv7Mca => "armv7mca",
            ModelId::Armv7 => "armv7",
        }
    }

    pub fn from_name(s: &str) -> Option<ModelId> {
        Some(match s.to_ascii_lowercase().as_str() {
            "sc" => ModelId::Sc,
            "x86" | "tso" => ModelId::X86,
            "x86a" => ModelId::X86A,
            "armv8" => ModelId::Armv8,
            "armv7mca" | "armv7-mca" => ModelId::Armv7Mca,
            "armv7" => ModelId::Armv7,
            _ => return None,
        })
    }

    /// Position in the strength order; x86 and x86A share a rank.
    pub fn rank(self) -> u8 {
        match self {
            ModelId::Sc => 0,
            ModelId::X86 | ModelId::X86A => 1,
            ModelId::Armv8 => 2,
            ModelId::Armv7Mca => 3,
            ModelId::Armv7 => 4,
        }
    }

    /// Strictly stronger (admits fewer behaviors).
    pub fn stronger_than(self, o: ModelId) -> bool {
        self.rank() < o.rank()
    }

    /// Default checking model for a program's arch.
    pub fn for_arch(a: Arch) -> ModelId {
        match a {
            Arch::X86 => ModelId::X86A,
            Arch::Armv7 => ModelId::Armv7,
            Arch::Armv7Mca => ModelId::Armv7Mca,
            Arch::Armv8 => ModelId::Armv8,
            Arch::ScRef => ModelId::Sc,
        }
    }

    /// x86 proper builds single update events and needs mo.
    pub fn uses_update_events(self) -> bool {
        self == ModelId::X86
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("x86 check needs an mo relation")]
    MissingMo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum AxiomKind {
    Acyclic,
    Irreflexive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub consistent: bool,
    pub violated_axiom: Option<&'static str>,
    pub witness_cycle: Option<Vec<usize>>,
}

impl Verdict {
    pub fn ok() -> Self {
        Verdict { consistent: true, violated_axiom: None, witness_cycle: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ModelOpts {
    /// ARMv7-mca: use `((rfe;ppo;rfe⁻¹) ∖ id);co` for wo.
    pub alt_wo: bool,
}

/// One named axiom and the relation it constrains.
#[derive(Debug, Clone)]
pub struct Axiom {
    pub name: &'static str,
    pub kind: AxiomKind,
    pub rel: Relation,
}

impl Axiom {
    pub fn holds(&self) -> bool {
        match self.kind {
            AxiomKind::Acyclic => self.rel.is_acyclic(),
            AxiomKind::Irreflexive => self.rel.is_irreflexive(),
        }
    }

    pub fn witness(&self) -> Option<Vec<usize>> {
        match self.kind {
            AxiomKind::Acyclic => self.rel.find_cycle(),
            AxiomKind::Irreflexive => (0..self.rel.universe()).find(|&i| self.rel.contains(i, i)).map(|i| vec![i]),
        }
    }

    /// `w` is a cycle of this axiom's relation.
    pub fn validates(&self, w: &[usize]) -> bool {
        match self.kind {
            AxiomKind::Irreflexive => w.len() == 1 && self.rel.contains(w[0], w[0]),
            AxiomKind::Acyclic => !w.is_empty() && (0..w.len()).all(|k| self.rel.contains(w[k], w[(k + 1) % w.len()])),
        }
    }
}

/// Collects axioms, stopping at the first violation when asked to.
pub(crate) struct Checker {
    stop_early: bool,
    pub axioms: Vec<Axiom>,
    pub failed: Option<usize>,
}

impl Checker {
    fn new(stop_early: bool) -> Self {
        Checker { stop_early, axioms: Vec::new(), failed: None }
    }

    /// Records an axiom; returns false when checking should stop.
    pub fn add(&mut self, name: &'static str, kind: AxiomKind, rel: Relation) -> bool {
        let ax = Axiom { name, kind, rel };
        if self.failed.is_none() && !ax.holds() {
            self.failed = Some(self.axioms.len());
        }
        self.axioms.push(ax);
        !(self.stop_early && self.failed.is_some())
    }

    fn verdict(&self) -> Verdict {
        match self.failed {
            None => Verdict::ok(),
            Some(k) => {
                let ax = &self.axioms[k];
                Verdict { consistent: false, violated_axiom: Some(ax.name), witness_cycle: ax.witness() }
            }
        }
    }
}

/// Communication relations shared by every model.
pub(crate) struct Com {
    pub fr: Relation,
    pub rfe: Relation,
    pub rfi: Relation,
    pub coe: Relation,
    pub coi: Relation,
    pub fre: Relation,
}

impl Com {
    pub fn new(x: &Execution) -> Com {
        let fr = derive_fr(x);
        Com {
            rfe: x.external(&x.rf),
            rfi: x.internal(&x.rf),
            coe: x.external(&x.co),
            coi: x.internal(&x.co),
            fre: x.external(&fr),
            fr,
        }
    }
}

pub(crate) fn sc_per_loc(x: &Execution, c: &Com) -> Relation {
    x.base.poloc.union(&x.rf).union(&c.fr).union(&x.co)
}

/// `rmw;(fre;coe)⁻¹`: reflexive at a read whose rmw partner is preceded by
/// an external write that itself follows the read's source.
pub(crate) fn atomicity(x: &Execution, c: &Com) -> Relation {
    x.base.rmw.seq(&c.fre.seq(&c.coe).inverse())
}

fn run(x: &Execution, m: ModelId, opts: ModelOpts, ck: &mut Checker) -> Result<(), ModelError> {
    match m {
        ModelId::Sc => tso::sc(x, ck),
        ModelId::X86 => tso::x86(x, ck)?,
        ModelId::X86A => tso::x86a(x, ck),
        ModelId::Armv7 => armv7::armv7(x, ck, false, opts),
        ModelId::Armv7Mca => armv7::armv7(x, ck, true, opts),
        ModelId::Armv8 => armv8::armv8(x, ck),
    }
    Ok(())
}

pub fn check_with(x: &Execution, m: ModelId, opts: ModelOpts) -> Result<Verdict, ModelError> {
    let mut ck = Checker::new(true);
    run(x, m, opts, &mut ck)?;
    Ok(ck.verdict())
}

pub fn check(x: &Execution, m: ModelId) -> Result<Verdict, ModelError> {
    check_with(x, m, ModelOpts::default())
}

/// Fast path for the enumerator.
pub fn is_consistent(x: &Execution, m: ModelId) -> bool {
    check(x, m).map(|v| v.consistent).unwrap_or(false)
}

/// Every axiom of `m` evaluated on `x`, for witness re-validation.
pub fn axioms(x: &Execution, m: ModelId) -> Result<Vec<Axiom>, ModelError> {
    let mut ck = Checker::new(false);
    run(x, m, ModelOpts::default(), &mut ck)?;
    Ok(ck.axioms)
}

pub fn check_sc(x: &Execution) -> Verdict {
    check(x, ModelId::Sc).expect("sc check has no errors")
}
pub fn check_x86(x: &Execution) -> Result<Verdict, ModelError> {
    check(x, ModelId::X86)
}
pub fn check_x86a(x: &Execution) -> Verdict {
    check(x, ModelId::X86A).expect("x86a check has no errors")
}
pub fn check_armv7(x: &Execution) -> Verdict {
    check(x, ModelId::Armv7).expect("armv7 check has no errors")
}
pub fn check_armv7mca(x: &Execution) -> Verdict {
    check(x, ModelId::Armv7Mca).expect("armv7mca check has no errors")
}
pub fn check_armv8(x: &Execution) -> Verdict {
    check(x, ModelId::Armv8).expect("armv8 check has no errors")
}
