//! Litmus programs: syntax tree, parser, printer, per-thread CFGs and
//! register-dataflow dependencies.

mod cfg;
mod deps;
mod emit;
mod parse;

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use cfg::{Cfg, NodeId};
pub use deps::{derive_deps, DepInfo, DepState, ThreadDeps};
pub use emit::emit;
pub use parse::parse;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LitmusError {
    #[error("syntax error at {line}:{col}: {message}")]
    SyntaxError { line: usize, col: usize, message: String },
    #[error("instruction `{instr}` is not legal under arch {arch}")]
    ArchMismatch { instr: String, arch: Arch },
    #[error("unresolved label `{0}`")]
    UnresolvedLabel(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Arch {
    X86,
    Armv7,
    Armv7Mca,
    Armv8,
    ScRef,
}

impl Arch {
    pub fn name(self) -> &'static str {
        match self {
            Arch::X86 => "x86",
            Arch::Armv7 => "armv7",
            Arch::Armv7Mca => "armv7mca",
            Arch::Armv8 => "armv8",
            Arch::ScRef => "sc",
        }
    }

    pub fn from_name(s: &str) -> Option<Arch> {
        Some(match s.to_ascii_lowercase().as_str() {
            "x86" | "tso" => Arch::X86,
            "armv7" => Arch::Armv7,
            "armv7mca" | "armv7-mca" => Arch::Armv7Mca,
            "armv8" | "aarch64" => Arch::Armv8,
            "sc" | "scref" => Arch::ScRef,
            _ => return None,
        })
    }

    pub fn is_armv7(self) -> bool {
        matches!(self, Arch::Armv7 | Arch::Armv7Mca)
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
        }
    }
    fn prec(self) -> u8 {
        match self {
            BinOp::Mul => 3,
            BinOp::Add | BinOp::Sub => 2,
            _ => 1,
        }
    }
    pub fn apply(self, a: i64, b: i64) -> i64 {
        match self {
            BinOp::Add => a.wrapping_add(b),
            BinOp::Sub => a.wrapping_sub(b),
            BinOp::Mul => a.wrapping_mul(b),
            BinOp::Eq => (a == b) as i64,
            BinOp::Ne => (a != b) as i64,
            BinOp::Lt => (a < b) as i64,
            BinOp::Le => (a <= b) as i64,
            BinOp::Gt => (a > b) as i64,
            BinOp::Ge => (a >= b) as i64,
        }
    }
}

/// Expression over registers and constants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Expr {
    Const(i64),
    Reg(String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn reg(r: &str) -> Expr {
        Expr::Reg(r.to_string())
    }
    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Expr {
        Expr::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn eval(&self, regs: &impl Fn(&str) -> i64) -> i64 {
        match self {
            Expr::Const(v) => *v,
            Expr::Reg(r) => regs(r),
            Expr::Bin(op, a, b) => op.apply(a.eval(regs), b.eval(regs)),
        }
    }

    pub fn regs(&self, out: &mut Vec<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Reg(r) => {
                if !out.contains(r) {
                    out.push(r.clone())
                }
            }
            Expr::Bin(_, a, b) => {
                a.regs(out);
                b.regs(out);
            }
        }
    }

    pub fn mentions(&self, reg: &str) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Reg(r) => r == reg,
            Expr::Bin(_, a, b) => a.mentions(reg) || b.mentions(reg),
        }
    }

    pub fn substitute(&self, from: &str, to: &Expr) -> Expr {
        match self {
            Expr::Reg(r) if r == from => to.clone(),
            Expr::Bin(op, a, b) => Expr::bin(*op, a.substitute(from, to), b.substitute(from, to)),
            e => e.clone(),
        }
    }

    /// Constant folding, including `e*0 = 0`, `e+0 = e`, `e*1 = e`.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.fold(), b.fold());
                match (op, &a, &b) {
                    (_, Expr::Const(x), Expr::Const(y)) => Expr::Const(op.apply(*x, *y)),
                    (BinOp::Mul, Expr::Const(0), _) | (BinOp::Mul, _, Expr::Const(0)) => Expr::Const(0),
                    (BinOp::Mul, Expr::Const(1), e) | (BinOp::Mul, e, Expr::Const(1)) => e.clone(),
                    (BinOp::Add, Expr::Const(0), e) | (BinOp::Add, e, Expr::Const(0)) => e.clone(),
                    (BinOp::Sub, e, Expr::Const(0)) => e.clone(),
                    _ => Expr::bin(*op, a, b),
                }
            }
            e => e.clone(),
        }
    }

    pub fn as_const(&self) -> Option<i64> {
        match self.fold() {
            Expr::Const(v) => Some(v),
            _ => None,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        match self {
            Expr::Const(v) => write!(f, "{v}"),
            Expr::Reg(r) => f.write_str(r),
            Expr::Bin(op, a, b) => {
                let p = op.prec();
                if p < min {
                    f.write_str("(")?;
                }
                a.fmt_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.fmt_prec(f, p + 1)?;
                if p < min {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

/// Location expression: `X` or `X[e]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LocExpr {
    pub base: String,
    pub index: Option<Expr>,
}

impl LocExpr {
    pub fn named(base: &str) -> Self {
        LocExpr { base: base.to_string(), index: None }
    }
    pub fn indexed(base: &str, e: Expr) -> Self {
        LocExpr { base: base.to_string(), index: Some(e) }
    }

    /// Concrete location once registers are known.
    pub fn resolve(&self, regs: &impl Fn(&str) -> i64) -> Location {
        Location { base: self.base.clone(), index: self.index.as_ref().map(|e| e.eval(regs)) }
    }

    /// Location without register state, if the index folds to a constant.
    pub fn static_location(&self) -> Option<Location> {
        match &self.index {
            None => Some(Location { base: self.base.clone(), index: None }),
            Some(e) => e.as_const().map(|v| Location { base: self.base.clone(), index: Some(v) }),
        }
    }

    fn folded(&self) -> LocExpr {
        LocExpr { base: self.base.clone(), index: self.index.as_ref().map(|e| e.fold()) }
    }

    /// Identical after constant folding and free of registers.
    pub fn must_alias(&self, o: &LocExpr) -> bool {
        let (a, b) = (self.folded(), o.folded());
        let mut regs = Vec::new();
        if let Some(e) = &a.index {
            e.regs(&mut regs);
        }
        a == b && regs.is_empty()
    }

    /// Same base name.
    pub fn may_alias(&self, o: &LocExpr) -> bool {
        if self.base != o.base {
            return false;
        }
        match (self.static_location(), o.static_location()) {
            (Some(a), Some(b)) if self.index.is_some() && o.index.is_some() => a == b,
            _ => true,
        }
    }

    pub fn regs(&self, out: &mut Vec<String>) {
        if let Some(e) = &self.index {
            e.regs(out);
        }
    }
}

impl fmt::Display for LocExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.index {
            None => f.write_str(&self.base),
            Some(e) => write!(f, "{}[{}]", self.base, e),
        }
    }
}

/// Concrete memory cell.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Location {
    pub base: String,
    pub index: Option<i64>,
}

impl Location {
    pub fn named(base: &str) -> Self {
        Location { base: base.to_string(), index: None }
    }
    pub fn indexed(base: &str, i: i64) -> Self {
        Location { base: base.to_string(), index: Some(i) }
    }
}

impl fmt::Display for Location {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.index {
            None => f.write_str(&self.base),
            Some(i) => write!(f, "{}[{}]", self.base, i),
        }
    }
}

/// Access flavor beyond plain: ARMv8 acquire loads / release stores.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub enum Flavor {
    #[default]
    Plain,
    Acq,
    Rel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum C11 {
    Na,
    Rlx,
    Acq,
    Rel,
    Sc,
}

impl C11 {
    pub fn name(self) -> &'static str {
        match self {
            C11::Na => "na",
            C11::Rlx => "rlx",
            C11::Acq => "acq",
            C11::Rel => "rel",
            C11::Sc => "sc",
        }
    }
    pub fn is_atomic(self) -> bool {
        self != C11::Na
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FenceKind {
    MFence,
    Dmb,
    DmbFull,
    DmbLd,
    DmbSt,
    Isb,
}

impl FenceKind {
    pub fn name(self) -> &'static str {
        match self {
            FenceKind::MFence => "mfence",
            FenceKind::Dmb => "dmb",
            FenceKind::DmbFull => "dmbfull",
            FenceKind::DmbLd => "dmbld",
            FenceKind::DmbSt => "dmbst",
            FenceKind::Isb => "isb",
        }
    }
    pub fn from_name(s: &str) -> Option<Self> {
        Some(match s.to_ascii_lowercase().as_str() {
            "mfence" => FenceKind::MFence,
            "dmb" => FenceKind::Dmb,
            "dmbfull" => FenceKind::DmbFull,
            "dmbld" => FenceKind::DmbLd,
            "dmbst" => FenceKind::DmbSt,
            "isb" => FenceKind::Isb,
            _ => return None,
        })
    }
    /// Orders every access pair it separates.
    pub fn is_full(self) -> bool {
        matches!(self, FenceKind::MFence | FenceKind::Dmb | FenceKind::DmbFull)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RmwOp {
    Cas { expected: Expr, new: Expr },
    FetchAdd(Expr),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Instr {
    Load { reg: String, loc: LocExpr, flavor: Flavor, c11: Option<C11> },
    Store { loc: LocExpr, val: Expr, flavor: Flavor, c11: Option<C11> },
    Rmw { reg: String, loc: LocExpr, op: RmwOp, flavor: Flavor, c11: Option<C11> },
    Fence(FenceKind),
    Branch { cond: Expr, target: String },
    Label(String),
    RegOp { reg: String, expr: Expr },
}

/// Coarse class of an instruction, as used by the peephole table and the
/// fence and robustness passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AccessClass {
    W,
    R,
    L,
    A,
    Rmw,
    Fence(FenceKind),
    Other,
}

impl Instr {
    pub fn load(reg: &str, loc: LocExpr) -> Instr {
        Instr::Load { reg: reg.to_string(), loc, flavor: Flavor::Plain, c11: None }
    }
    pub fn store(loc: LocExpr, val: Expr) -> Instr {
        Instr::Store { loc, val, flavor: Flavor::Plain, c11: None }
    }

    pub fn class(&self) -> AccessClass {
        match self {
            Instr::Load { flavor: Flavor::Acq, .. } => AccessClass::A,
            Instr::Load { .. } => AccessClass::R,
            Instr::Store { flavor: Flavor::Rel, .. } => AccessClass::L,
            Instr::Store { .. } => AccessClass::W,
            Instr::Rmw { .. } => AccessClass::Rmw,
            Instr::Fence(k) => AccessClass::Fence(*k),
            _ => AccessClass::Other,
        }
    }

    pub fn is_access(&self) -> bool {
        matches!(self, Instr::Load { .. } | Instr::Store { .. } | Instr::Rmw { .. })
    }
    pub fn is_fence(&self) -> bool {
        matches!(self, Instr::Fence(k) if *k != FenceKind::Isb)
    }
    /// Reads memory (loads and rmws).
    pub fn reads(&self) -> bool {
        matches!(self, Instr::Load { .. } | Instr::Rmw { .. })
    }
    /// Writes memory (stores and rmws).
    pub fn writes(&self) -> bool {
        matches!(self, Instr::Store { .. } | Instr::Rmw { .. })
    }

    pub fn loc(&self) -> Option<&LocExpr> {
        match self {
            Instr::Load { loc, .. } | Instr::Store { loc, .. } | Instr::Rmw { loc, .. } => Some(loc),
            _ => None,
        }
    }
    pub fn c11(&self) -> Option<C11> {
        match self {
            Instr::Load { c11, .. } | Instr::Store { c11, .. } | Instr::Rmw { c11, .. } => *c11,
            _ => None,
        }
    }
    pub fn flavor(&self) -> Flavor {
        match self {
            Instr::Load { flavor, .. } | Instr::Store { flavor, .. } | Instr::Rmw { flavor, .. } => *flavor,
            _ => Flavor::Plain,
        }
    }

    /// Register written by this instruction.
    pub fn def(&self) -> Option<&str> {
        match self {
            Instr::Load { reg, .. } | Instr::Rmw { reg, .. } | Instr::RegOp { reg, .. } => Some(reg),
            _ => None,
        }
    }

    /// Registers read by this instruction.
    pub fn uses(&self) -> Vec<String> {
        let mut out = Vec::new();
        match self {
            Instr::Load { loc, .. } => loc.regs(&mut out),
            Instr::Store { loc, val, .. } => {
                loc.regs(&mut out);
                val.regs(&mut out);
            }
            Instr::Rmw { loc, op, .. } => {
                loc.regs(&mut out);
                match op {
                    RmwOp::Cas { expected, new } => {
                        expected.regs(&mut out);
                        new.regs(&mut out);
                    }
                    RmwOp::FetchAdd(e) => e.regs(&mut out),
                }
            }
            Instr::Branch { cond, .. } => cond.regs(&mut out),
            Instr::RegOp { expr, .. } => expr.regs(&mut out),
            _ => {}
        }
        out
    }

    /// Legal under `arch`, ignoring C11 annotations.
    pub fn legal_for(&self, arch: Arch) -> bool {
        let flavor_ok = |f: Flavor| f == Flavor::Plain || arch == Arch::Armv8;
        match self {
            Instr::Load { flavor, .. } => *flavor != Flavor::Rel && flavor_ok(*flavor),
            Instr::Store { flavor, .. } => *flavor != Flavor::Acq && flavor_ok(*flavor),
            Instr::Rmw { flavor, .. } => flavor_ok(*flavor),
            Instr::Fence(k) => match arch {
                Arch::X86 => *k == FenceKind::MFence,
                Arch::Armv7 | Arch::Armv7Mca => matches!(k, FenceKind::Dmb | FenceKind::Isb),
                Arch::Armv8 => matches!(k, FenceKind::DmbFull | FenceKind::DmbLd | FenceKind::DmbSt | FenceKind::Isb),
                Arch::ScRef => false,
            },
            _ => true,
        }
    }
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let suffix = |f: &mut fmt::Formatter<'_>, fl: Flavor, c: Option<C11>| -> fmt::Result {
            match fl {
                Flavor::Plain => {}
                Flavor::Acq => f.write_str(" @acq")?,
                Flavor::Rel => f.write_str(" @rel")?,
            }
            if let Some(c) = c {
                write!(f, " @@{}", c.name())?;
            }
            Ok(())
        };
        match self {
            Instr::Load { reg, loc, flavor, c11 } => {
                write!(f, "{reg} = {loc}")?;
                suffix(f, *flavor, *c11)
            }
            Instr::Store { loc, val, flavor, c11 } => {
                write!(f, "{loc} = {val}")?;
                suffix(f, *flavor, *c11)
            }
            Instr::Rmw { reg, loc, op, flavor, c11 } => {
                match op {
                    RmwOp::Cas { expected, new } => write!(f, "{reg} = rmw({loc}, {expected}, {new})")?,
                    RmwOp::FetchAdd(e) => write!(f, "{reg} = rmw({loc}, {e})")?,
                }
                suffix(f, *flavor, *c11)
            }
            Instr::Fence(k) => f.write_str(k.name()),
            Instr::Branch { cond, target } => write!(f, "if {cond} goto {target}"),
            Instr::Label(l) => write!(f, "{l}:"),
            Instr::RegOp { reg, expr } => write!(f, "{reg} = {expr}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thread {
    pub name: String,
    pub body: Vec<Instr>,
}

impl Thread {
    /// Registers mentioned anywhere in the thread, sorted.
    pub fn registers(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for i in &self.body {
            if let Some(r) = i.def() {
                out.push(r.to_string());
            }
            out.extend(i.uses());
        }
        out.sort();
        out.dedup();
        out
    }
}

/// Outcome predicate over final registers and memory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pred {
    Reg { thread: String, reg: String, val: i64 },
    Mem { loc: Location, val: i64 },
    Not(Box<Pred>),
    And(Vec<Pred>),
    Or(Vec<Pred>),
}

impl Pred {
    pub fn eval(&self, reg: &impl Fn(&str, &str) -> i64, mem: &impl Fn(&Location) -> i64) -> bool {
        match self {
            Pred::Reg { thread, reg: r, val } => reg(thread, r) == *val,
            Pred::Mem { loc, val } => mem(loc) == *val,
            Pred::Not(p) => !p.eval(reg, mem),
            Pred::And(ps) => ps.iter().all(|p| p.eval(reg, mem)),
            Pred::Or(ps) => ps.iter().any(|p| p.eval(reg, mem)),
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, nested: bool) -> fmt::Result {
        match self {
            Pred::Reg { thread, reg, val } => write!(f, "{thread}:{reg}={val}"),
            Pred::Mem { loc, val } => write!(f, "{loc}={val}"),
            Pred::Not(p) => {
                f.write_str("~")?;
                p.fmt_prec(f, true)
            }
            Pred::And(ps) | Pred::Or(ps) => {
                let sep = if matches!(self, Pred::And(_)) { " /\\ " } else { " \\/ " };
                if nested {
                    f.write_str("(")?;
                }
                for (k, p) in ps.iter().enumerate() {
                    if k > 0 {
                        f.write_str(sep)?;
                    }
                    p.fmt_prec(f, true)?;
                }
                if nested {
                    f.write_str(")")?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Pred {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, false)
    }
}

/// Expected verdict attached to a corpus file: `expect armv8 forbidden`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Expectation {
    pub model: String,
    pub allowed: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Program {
    pub arch: Arch,
    pub init: BTreeMap<Location, i64>,
    pub threads: Vec<Thread>,
    pub outcome: Option<Pred>,
    pub expect: Vec<Expectation>,
}

impl Program {
    pub fn new(arch: Arch) -> Self {
        Program { arch, init: BTreeMap::new(), threads: Vec::new(), outcome: None, expect: Vec::new() }
    }

    /// Adds a default 0 for every statically known location not yet in init.
    pub fn fill_init_defaults(&mut self) {
        for t in &self.threads {
            for i in &t.body {
                if let Some(l) = i.loc().and_then(|l| l.static_location()) {
                    self.init.entry(l).or_insert(0);
                }
            }
        }
        if let Some(p) = &self.outcome {
            let mut locs = Vec::new();
            collect_pred_locs(p, &mut locs);
            for l in locs {
                self.init.entry(l).or_insert(0);
            }
        }
    }

    pub fn thread_index(&self, name: &str) -> Option<usize> {
        self.threads.iter().position(|t| t.name == name)
    }

    /// Checks arch legality and branch targets.
    pub fn validate(&self) -> Result<(), LitmusError> {
        for t in &self.threads {
            for i in &t.body {
                if !i.legal_for(self.arch) {
                    return Err(LitmusError::ArchMismatch { instr: i.to_string(), arch: self.arch });
                }
                if let Instr::Branch { target, .. } = i {
                    if !t.body.iter().any(|j| matches!(j, Instr::Label(l) if l == target)) {
                        return Err(LitmusError::UnresolvedLabel(target.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn event_count_hint(&self) -> usize {
        self.threads
            .iter()
            .flat_map(|t| &t.body)
            .map(|i| match i {
                Instr::Rmw { .. } => 2,
                Instr::Load { .. } | Instr::Store { .. } => 1,
                Instr::Fence(k) if *k != FenceKind::Isb => 1,
                _ => 0,
            })
            .sum()
    }
}

fn collect_pred_locs(p: &Pred, out: &mut Vec<Location>) {
    match p {
        Pred::Mem { loc, .. } => out.push(loc.clone()),
        Pred::Not(q) => collect_pred_locs(q, out),
        Pred::And(ps) | Pred::Or(ps) => ps.iter().for_each(|q| collect_pred_locs(q, out)),
        Pred::Reg { .. } => {}
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fold_and_alias() {
        let a0 = Expr::bin(BinOp::Mul, Expr::reg("a"), Expr::Const(0));
        assert_eq!(a0.fold(), Expr::Const(0));
        let y_a0 = LocExpr::indexed("Y", a0);
        let y_0 = LocExpr::indexed("Y", Expr::Const(0));
        assert!(y_a0.must_alias(&y_0));
        let xa = LocExpr::indexed("X", Expr::reg("a"));
        let xb = LocExpr::indexed("X", Expr::reg("b"));
        assert!(!xa.must_alias(&xb));
        assert!(xa.may_alias(&xb));
        assert!(!xa.must_alias(&xa), "register indices never must-alias");
        assert!(!LocExpr::named("X").may_alias(&LocExpr::named("Y")));
        assert!(!LocExpr::indexed("X", Expr::Const(1)).may_alias(&LocExpr::indexed("X", Expr::Const(2))));
    }

    #[test]
    fn expr_printing_keeps_structure() {
        let e = Expr::bin(BinOp::Mul, Expr::bin(BinOp::Add, Expr::reg("a"), Expr::Const(1)), Expr::Const(2));
        assert_eq!(e.to_string(), "(a + 1) * 2");
        let e = Expr::bin(BinOp::Sub, Expr::reg("a"), Expr::bin(BinOp::Sub, Expr::Const(1), Expr::Const(2)));
        assert_eq!(e.to_string(), "a - (1 - 2)");
    }
}
