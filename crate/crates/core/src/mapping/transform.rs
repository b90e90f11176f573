//! Peephole transformations on a single thread.

use std::fmt;

use thiserror::Error;

use super::table::reorder_safe;
use crate::litmus::{Expr, FenceKind, Flavor, Instr, Program};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TransformKind {
    /// Swap the instruction at `at` with its successor.
    Reorder,
    /// Read after read of the same location.
    ElimRAR,
    /// Plain read after acquire read.
    ElimRAA,
    /// Acquire read after acquire read.
    ElimAAA,
    StrengthenRtoA,
    StrengthenWtoL,
    /// `dmbld` or `dmbst` to `dmbfull`.
    StrengthenFence,
    /// Drop the first of two writes to one location. Unsafe.
    ElimOW,
    /// Forward a stored value to the next read of it. Unsafe.
    ElimRAW,
}

impl TransformKind {
    pub fn name(self) -> &'static str {
        match self {
            TransformKind::Reorder => "reorder",
            TransformKind::ElimRAR => "rar",
            TransformKind::ElimRAA => "raa",
            TransformKind::ElimAAA => "aaa",
            TransformKind::StrengthenRtoA => "r2a",
            TransformKind::StrengthenWtoL => "w2l",
            TransformKind::StrengthenFence => "fence",
            TransformKind::ElimOW => "ow",
            TransformKind::ElimRAW => "raw",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        use TransformKind::*;
        [Reorder, ElimRAR, ElimRAA, ElimAAA, StrengthenRtoA, StrengthenWtoL, StrengthenFence, ElimOW, ElimRAW]
            .into_iter()
            .find(|k| k.name() == s)
    }

    pub fn is_safe(self) -> bool {
        !matches!(self, TransformKind::ElimOW | TransformKind::ElimRAW)
    }
}

/// A transformation applied at body index `at` of thread `tid`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Transform {
    pub kind: TransformKind,
    pub tid: usize,
    pub at: usize,
}

impl fmt::Display for Transform {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} P{}@{}", self.kind.name(), self.tid, self.at)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TransformError {
    #[error("pattern mismatch: {0}")]
    PatternMismatch(String),
}

fn mismatch<T>(m: impl Into<String>) -> Result<T, TransformError> {
    Err(TransformError::PatternMismatch(m.into()))
}

fn independent(a: &Instr, b: &Instr) -> bool {
    let (da, db) = (a.def(), b.def());
    if da.is_some() && da == db {
        return false;
    }
    !da.is_some_and(|r| b.uses().iter().any(|u| u == r)) && !db.is_some_and(|r| a.uses().iter().any(|u| u == r))
}

fn copy_reg(dst: &str, src: &str) -> Instr {
    Instr::RegOp { reg: dst.to_string(), expr: Expr::reg(src) }
}

fn load_parts(i: &Instr) -> Option<(&str, &crate::litmus::LocExpr, Flavor)> {
    match i {
        Instr::Load { reg, loc, flavor, .. } => Some((reg, loc, *flavor)),
        _ => None,
    }
}

/// Applies `t`. Reorderings must be allowed by the ARMv8 table; the unsafe
/// eliminations are applied as asked.
pub fn apply_transform(p: &Program, t: &Transform) -> Result<Program, TransformError> {
    apply(p, t, true)
}

/// As [`apply_transform`] but a reordering only needs distinct locations and
/// independent registers.
pub fn apply_transform_unchecked(p: &Program, t: &Transform) -> Result<Program, TransformError> {
    apply(p, t, false)
}

fn apply(p: &Program, t: &Transform, table: bool) -> Result<Program, TransformError> {
    let Some(th) = p.threads.get(t.tid) else { return mismatch(format!("no thread {}", t.tid)) };
    let body = &th.body;
    let Some(a) = body.get(t.at) else { return mismatch(format!("no instruction {}", t.at)) };
    let b = body.get(t.at + 1);
    let mut out = body.clone();
    use TransformKind::*;
    match t.kind {
        Reorder => {
            let Some(b) = b else { return mismatch("reorder needs two instructions") };
            if reorder_safe(a.class(), b.class()).is_none() || (table && reorder_safe(a.class(), b.class()) != Some(true)) {
                return mismatch(format!("`{a}` then `{b}` may not be reordered"));
            }
            if let (Some(la), Some(lb)) = (a.loc(), b.loc()) {
                if la.may_alias(lb) {
                    return mismatch("accesses may alias");
                }
            }
            if !independent(a, b) {
                return mismatch("register dependency");
            }
            out.swap(t.at, t.at + 1);
        }
        ElimRAR | ElimRAA | ElimAAA => {
            let (fa, fb) = match t.kind {
                ElimRAR => (Flavor::Plain, Flavor::Plain),
                ElimRAA => (Flavor::Acq, Flavor::Plain),
                _ => (Flavor::Acq, Flavor::Acq),
            };
            let (Some((ra, la, xa)), Some((rb, lb, xb))) = (load_parts(a), b.and_then(load_parts)) else {
                return mismatch("expected two loads");
            };
            if xa != fa || xb != fb || !la.must_alias(lb) {
                return mismatch("loads differ in location or flavor");
            }
            out[t.at + 1] = copy_reg(rb, ra);
        }
        StrengthenRtoA => match a {
            Instr::Load { reg, loc, flavor: Flavor::Plain, c11 } => {
                out[t.at] = Instr::Load { reg: reg.clone(), loc: loc.clone(), flavor: Flavor::Acq, c11: *c11 }
            }
            _ => return mismatch("expected a plain load"),
        },
        StrengthenWtoL => match a {
            Instr::Store { loc, val, flavor: Flavor::Plain, c11 } => {
                out[t.at] = Instr::Store { loc: loc.clone(), val: val.clone(), flavor: Flavor::Rel, c11: *c11 }
            }
            _ => return mismatch("expected a plain store"),
        },
        StrengthenFence => match a {
            Instr::Fence(FenceKind::DmbLd | FenceKind::DmbSt) => out[t.at] = Instr::Fence(FenceKind::DmbFull),
            _ => return mismatch("expected dmbld or dmbst"),
        },
        ElimOW => match (a, b) {
            (Instr::Store { loc: la, .. }, Some(Instr::Store { loc: lb, .. })) if la.must_alias(lb) => {
                out.remove(t.at);
            }
            _ => return mismatch("expected two stores to one location"),
        },
        ElimRAW => match (a, b) {
            (Instr::Store { loc: la, val, .. }, Some(Instr::Load { reg, loc: lb, .. })) if la.must_alias(lb) => {
                out[t.at + 1] = Instr::RegOp { reg: reg.clone(), expr: val.clone() };
            }
            _ => return mismatch("expected a store then a load of one location"),
        },
    }
    let mut q = p.clone();
    q.threads[t.tid].body = out;
    Ok(q)
}
