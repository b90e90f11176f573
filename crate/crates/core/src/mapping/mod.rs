//! Architecture-to-architecture mapping schemes and the ARMv8 peephole table.
//!
//! Schemes are plain-text rewrite tables, one rule per line:
//!
//! ```text
//! scheme x86-armv8
//! from x86
//! to armv8
//! ld      -> ld ; dmbld
//! st      -> dmbst ; st
//! rmw     -> dmbfull ; rmw ; dmbfull
//! mfence  -> dmbfull
//! ```
//!
//! A source pattern is an access form (`ld`, `ld.acq`, `st`, `st.rel`,
//! `rmw`, `rmw.acq`, `rmw.rel`) or a fence name, optionally qualified by a
//! C11 class (`ld@na`, `st@at`). Targets are the same access forms, fence
//! names, `cbisb` (compare, branch, isb on the preceding load's register)
//! or `skip`. The first matching rule wins.

mod table;
mod transform;

use std::fmt;

use thiserror::Error;

use crate::enumerate::{self, Behavior, EnumConfig, EnumError};
use crate::litmus::{Arch, BinOp, Expr, FenceKind, Flavor, Instr, Program, Thread, C11};
use crate::models::ModelId;

pub use table::{
    cell_program, class_name, grows, parse_witness, reorder_safe, search_reorder_witness, table_classes, validate_transform_table,
    CellReport, TableReport, WITNESSES,
};
pub use transform::{apply_transform, apply_transform_unchecked, Transform, TransformError, TransformKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("scheme maps from {expected} but program is {found}")]
    ArchMismatch { expected: Arch, found: Arch },
    #[error("access `{0}` has no C11 annotation")]
    MissingC11Annotation(String),
    #[error("no rule for `{0}`")]
    UnmappableInstruction(String),
    #[error("scheme table line {line}: {message}")]
    BadTable { line: usize, message: String },
}

/// C11 class a rule may be restricted to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum C11Class {
    Na,
    At,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Ld(Flavor),
    St(Flavor),
    Rmw(Flavor),
    Fence(FenceKind),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    Access(Form),
    CbIsb,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub form: Form,
    pub c11: Option<C11Class>,
    pub emit: Vec<Target>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MappingScheme {
    pub name: String,
    pub from: Arch,
    pub to: Arch,
    pub c11_aware: bool,
    pub rules: Vec<Rule>,
}

fn parse_form(tok: &str) -> Option<Form> {
    let (base, fl) = match tok.split_once('.') {
        Some((b, "acq")) => (b, Flavor::Acq),
        Some((b, "rel")) => (b, Flavor::Rel),
        Some(_) => return None,
        None => (tok, Flavor::Plain),
    };
    Some(match base {
        "ld" => Form::Ld(fl),
        "st" => Form::St(fl),
        "rmw" => Form::Rmw(fl),
        f if fl == Flavor::Plain => Form::Fence(FenceKind::from_name(f)?),
        _ => return None,
    })
}

fn form_name(f: Form) -> String {
    let fl = |x: Flavor| match x {
        Flavor::Plain => "",
        Flavor::Acq => ".acq",
        Flavor::Rel => ".rel",
    };
    match f {
        Form::Ld(x) => format!("ld{}", fl(x)),
        Form::St(x) => format!("st{}", fl(x)),
        Form::Rmw(x) => format!("rmw{}", fl(x)),
        Form::Fence(k) => k.name().to_string(),
    }
}

fn form_of(i: &Instr) -> Option<Form> {
    Some(match i {
        Instr::Load { flavor, .. } => Form::Ld(*flavor),
        Instr::Store { flavor, .. } => Form::St(*flavor),
        Instr::Rmw { flavor, .. } => Form::Rmw(*flavor),
        Instr::Fence(k) => Form::Fence(*k),
        _ => return None,
    })
}

/// Source forms legal under `arch`.
fn legal_forms(arch: Arch) -> Vec<Form> {
    use Flavor::*;
    let mut v = vec![Form::Ld(Plain), Form::St(Plain), Form::Rmw(Plain)];
    match arch {
        Arch::X86 => v.push(Form::Fence(FenceKind::MFence)),
        Arch::Armv7 | Arch::Armv7Mca => v.extend([Form::Fence(FenceKind::Dmb), Form::Fence(FenceKind::Isb)]),
        Arch::Armv8 => v.extend([
            Form::Ld(Acq),
            Form::St(Rel),
            Form::Rmw(Acq),
            Form::Rmw(Rel),
            Form::Fence(FenceKind::DmbFull),
            Form::Fence(FenceKind::DmbLd),
            Form::Fence(FenceKind::DmbSt),
            Form::Fence(FenceKind::Isb),
        ]),
        Arch::ScRef => {}
    }
    v
}

fn form_legal(f: Form, arch: Arch) -> bool {
    let probe = match f {
        Form::Ld(flavor) => Instr::Load { reg: "r".into(), loc: crate::litmus::LocExpr::named("X"), flavor, c11: None },
        Form::St(flavor) => Instr::Store { loc: crate::litmus::LocExpr::named("X"), val: Expr::Const(1), flavor, c11: None },
        Form::Rmw(flavor) => Instr::Rmw {
            reg: "r".into(),
            loc: crate::litmus::LocExpr::named("X"),
            op: crate::litmus::RmwOp::FetchAdd(Expr::Const(1)),
            flavor,
            c11: None,
        },
        Form::Fence(k) => Instr::Fence(k),
    };
    probe.legal_for(arch)
}

fn same_family(a: Arch, b: Arch) -> bool {
    a == b || (a.is_armv7() && b.is_armv7())
}

impl MappingScheme {
    /// Parses the declarative table format.
    pub fn parse(text: &str) -> Result<MappingScheme, MapError> {
        let bad = |line: usize, m: &str| MapError::BadTable { line, message: m.to_string() };
        let mut name = None;
        let mut from = None;
        let mut to = None;
        let mut rules = Vec::new();
        let mut c11_aware = false;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let l = raw.split('#').next().unwrap().trim();
            if l.is_empty() {
                continue;
            }
            if let Some(rest) = l.strip_prefix("scheme ") {
                name = Some(rest.trim().to_string());
                continue;
            }
            if let Some(rest) = l.strip_prefix("from ") {
                from = Some(Arch::from_name(rest.trim()).ok_or_else(|| bad(line, "unknown arch"))?);
                continue;
            }
            if let Some(rest) = l.strip_prefix("to ") {
                to = Some(Arch::from_name(rest.trim()).ok_or_else(|| bad(line, "unknown arch"))?);
                continue;
            }
            let (lhs, rhs) = l.split_once("->").ok_or_else(|| bad(line, "expected `pattern -> targets`"))?;
            let lhs = lhs.trim();
            let (ftok, c11) = match lhs.split_once('@') {
                Some((f, "na")) => (f, Some(C11Class::Na)),
                Some((f, "at")) => (f, Some(C11Class::At)),
                Some(_) => return Err(bad(line, "C11 class must be `na` or `at`")),
                None => (lhs, None),
            };
            c11_aware |= c11.is_some();
            let form = parse_form(ftok).ok_or_else(|| bad(line, "unknown source form"))?;
            let mut emit = Vec::new();
            for t in rhs.split(';').map(str::trim) {
                match t {
                    "skip" => {}
                    "cbisb" => emit.push(Target::CbIsb),
                    t => emit.push(Target::Access(parse_form(t).ok_or_else(|| bad(line, "unknown target form"))?)),
                }
            }
            rules.push(Rule { form, c11, emit });
        }
        let s = MappingScheme {
            name: name.ok_or_else(|| bad(0, "missing `scheme`"))?,
            from: from.ok_or_else(|| bad(0, "missing `from`"))?,
            to: to.ok_or_else(|| bad(0, "missing `to`"))?,
            c11_aware,
            rules,
        };
        s.check()?;
        Ok(s)
    }

    /// Every legal source form is covered and every emitted form is legal.
    fn check(&self) -> Result<(), MapError> {
        let classes: &[Option<C11Class>] = if self.c11_aware { &[Some(C11Class::Na), Some(C11Class::At)] } else { &[None] };
        for f in legal_forms(self.from) {
            let access = !matches!(f, Form::Fence(_));
            for &c in classes {
                let c = if access { c } else { None };
                if self.rule_for(f, c).is_none() {
                    return Err(MapError::BadTable { line: 0, message: format!("no rule for `{}`", form_name(f)) });
                }
            }
        }
        for r in &self.rules {
            for t in &r.emit {
                let ok = match t {
                    Target::Access(f) => form_legal(*f, self.to),
                    Target::CbIsb => form_legal(Form::Fence(FenceKind::Isb), self.to),
                };
                if !ok {
                    return Err(MapError::BadTable { line: 0, message: format!("{t:?} is not legal under {}", self.to) });
                }
            }
        }
        Ok(())
    }

    fn rule_for(&self, f: Form, c: Option<C11Class>) -> Option<&Rule> {
        self.rules.iter().find(|r| r.form == f && (r.c11.is_none() || r.c11 == c))
    }

    /// Same rules emitting programs for a sibling target (`armv7` vs `armv7mca`).
    pub fn retarget(mut self, arch: Arch) -> Self {
        if same_family(self.to, arch) {
            self.to = arch;
        }
        self
    }

    pub fn to_table(&self) -> String {
        let mut s = format!("scheme {}\nfrom {}\nto {}\n", self.name, self.from, self.to);
        for r in &self.rules {
            let mut lhs = form_name(r.form);
            match r.c11 {
                Some(C11Class::Na) => lhs.push_str("@na"),
                Some(C11Class::At) => lhs.push_str("@at"),
                None => {}
            }
            let rhs: Vec<String> = r
                .emit
                .iter()
                .map(|t| match t {
                    Target::Access(f) => form_name(*f),
                    Target::CbIsb => "cbisb".to_string(),
                })
                .collect();
            let rhs = if rhs.is_empty() { "skip".to_string() } else { rhs.join(" ; ") };
            s.push_str(&format!("{lhs:<10} -> {rhs}\n"));
        }
        s
    }
}

impl fmt::Display for MappingScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_table())
    }
}

const X86_ARMV8: &str = "scheme x86-armv8\nfrom x86\nto armv8
ld -> ld ; dmbld
st -> dmbst ; st
rmw -> dmbfull ; rmw ; dmbfull
mfence -> dmbfull";

const C11_X86_ARMV8: &str = "scheme c11-x86-armv8\nfrom x86\nto armv8
ld@na -> ld
st@na -> st
ld@at -> ld ; dmbld
st@at -> dmbfull ; st
rmw -> dmbfull ; rmw ; dmbfull
mfence -> dmbfull";

const ARMV8_X86: &str = "scheme armv8-x86\nfrom armv8\nto x86
ld -> ld
ld.acq -> ld
st -> st
st.rel -> st ; mfence
rmw -> rmw
rmw.acq -> rmw
rmw.rel -> rmw
dmbfull -> mfence
dmbld -> skip
dmbst -> skip
isb -> skip";

const ARMV7_ARMV8: &str = "scheme armv7-armv8\nfrom armv7\nto armv8
ld -> ld
st -> st
rmw -> rmw
dmb -> dmbfull
isb -> isb";

const ARMV8_ARMV7: &str = "scheme armv8-armv7\nfrom armv8\nto armv7
ld -> ld ; dmb
st -> st
ld.acq -> ld ; dmb
st.rel -> dmb ; st ; dmb
rmw -> rmw ; dmb
rmw.acq -> rmw ; dmb
rmw.rel -> dmb ; rmw ; dmb
dmbfull -> dmb
dmbld -> dmb
dmbst -> dmb
isb -> isb";

const C11_ARMV8_ARMV7: &str = "scheme c11-armv8-armv7\nfrom armv8\nto armv7
ld@na -> ld
ld@at -> ld ; dmb
st -> st
ld.acq -> ld ; dmb
st.rel -> dmb ; st ; dmb
rmw -> rmw ; dmb
rmw.acq -> rmw ; dmb
rmw.rel -> dmb ; rmw ; dmb
dmbfull -> dmb
dmbld -> dmb
dmbst -> dmb
isb -> isb";

/// Names of the correct schemes.
pub const SCHEMES: [&str; 6] = ["x86-armv8", "c11-x86-armv8", "armv8-x86", "armv7-armv8", "armv8-armv7", "c11-armv8-armv7"];

/// Names of the deliberately broken variants.
pub const BROKEN: [&str; 5] = ["broken-rmw-no-leading", "broken-rmw-no-trailing", "broken-ldr", "broken-ldr-cbisb", "broken-stlr"];

fn with_rule(base: &str, name: &str, pat: &str, rhs: &str) -> String {
    let mut out = Vec::new();
    for l in base.lines() {
        if l.starts_with("scheme ") {
            out.push(format!("scheme {name}"));
        } else if l.split("->").next().map(str::trim) == Some(pat) {
            out.push(format!("{pat} -> {rhs}"));
        } else {
            out.push(l.to_string());
        }
    }
    out.join("\n")
}

/// Scheme table text by name.
pub fn scheme_text(name: &str) -> Option<String> {
    Some(match name {
        "x86-armv8" => X86_ARMV8.to_string(),
        "c11-x86-armv8" => C11_X86_ARMV8.to_string(),
        "armv8-x86" => ARMV8_X86.to_string(),
        "armv7-armv8" => ARMV7_ARMV8.to_string(),
        "armv8-armv7" => ARMV8_ARMV7.to_string(),
        "c11-armv8-armv7" => C11_ARMV8_ARMV7.to_string(),
        "broken-rmw-no-leading" => with_rule(X86_ARMV8, name, "rmw", "rmw ; dmbfull"),
        "broken-rmw-no-trailing" => with_rule(X86_ARMV8, name, "rmw", "dmbfull ; rmw"),
        "broken-ldr" => with_rule(ARMV8_ARMV7, name, "ld", "ld"),
        "broken-ldr-cbisb" => with_rule(ARMV8_ARMV7, name, "ld", "ld ; cbisb"),
        "broken-stlr" => with_rule(ARMV8_X86, name, "st.rel", "st"),
        _ => return None,
    })
}

pub fn scheme(name: &str) -> Option<MappingScheme> {
    scheme_text(name).map(|t| MappingScheme::parse(&t).expect("bundled scheme tables are well formed"))
}

/// The shipped scheme for a source/target pair.
pub fn scheme_for(from: Arch, to: Arch, c11: bool) -> Option<MappingScheme> {
    let name = match (from, to) {
        (Arch::X86, Arch::Armv8) if c11 => "c11-x86-armv8",
        (Arch::X86, Arch::Armv8) => "x86-armv8",
        (Arch::Armv8, Arch::X86) => "armv8-x86",
        (f, Arch::Armv8) if f.is_armv7() => "armv7-armv8",
        (Arch::Armv8, t) if t.is_armv7() && c11 => "c11-armv8-armv7",
        (Arch::Armv8, t) if t.is_armv7() => "armv8-armv7",
        _ => return None,
    };
    scheme(name).map(|s| s.retarget(to))
}

fn c11_class(c: C11) -> C11Class {
    if c.is_atomic() {
        C11Class::At
    } else {
        C11Class::Na
    }
}

fn fresh_label(body: &[Instr], taken: &mut Vec<String>) -> String {
    let mut k = 0;
    loop {
        let l = format!("Lcb{k}");
        if !taken.contains(&l) && !body.iter().any(|i| matches!(i, Instr::Label(x) if *x == l)) {
            taken.push(l.clone());
            return l;
        }
        k += 1;
    }
}

fn rebuild(src: &Instr, f: Form) -> Instr {
    match (src, f) {
        (Instr::Load { reg, loc, c11, .. }, Form::Ld(flavor)) => Instr::Load { reg: reg.clone(), loc: loc.clone(), flavor, c11: *c11 },
        (Instr::Store { loc, val, c11, .. }, Form::St(flavor)) => Instr::Store { loc: loc.clone(), val: val.clone(), flavor, c11: *c11 },
        (Instr::Rmw { reg, loc, op, c11, .. }, Form::Rmw(flavor)) => {
            Instr::Rmw { reg: reg.clone(), loc: loc.clone(), op: op.clone(), flavor, c11: *c11 }
        }
        (_, Form::Fence(k)) => Instr::Fence(k),
        (s, f) => panic!("rule emits {} for {s}", form_name(f)),
    }
}

/// Rewrites every thread rule by rule; labels, branches and register
/// operations are copied unchanged.
pub fn map_program(p: &Program, s: &MappingScheme) -> Result<Program, MapError> {
    if !same_family(p.arch, s.from) {
        return Err(MapError::ArchMismatch { expected: s.from, found: p.arch });
    }
    let mut out = Program { arch: s.to, init: p.init.clone(), threads: Vec::new(), outcome: p.outcome.clone(), expect: Vec::new() };
    for t in &p.threads {
        let mut body = Vec::new();
        let mut taken = Vec::new();
        for i in &t.body {
            let Some(f) = form_of(i) else {
                body.push(i.clone());
                continue;
            };
            let c = if s.c11_aware && i.is_access() {
                Some(c11_class(i.c11().ok_or_else(|| MapError::MissingC11Annotation(i.to_string()))?))
            } else {
                None
            };
            let rule = s.rule_for(f, c).ok_or_else(|| MapError::UnmappableInstruction(i.to_string()))?;
            for tgt in &rule.emit {
                match tgt {
                    Target::Access(f) => body.push(rebuild(i, *f)),
                    Target::CbIsb => {
                        let l = fresh_label(&t.body, &mut taken);
                        let cond = match i.def() {
                            Some(r) => Expr::bin(BinOp::Eq, Expr::reg(r), Expr::reg(r)),
                            None => Expr::bin(BinOp::Eq, Expr::Const(0), Expr::Const(0)),
                        };
                        body.push(Instr::Branch { cond, target: l.clone() });
                        body.push(Instr::Label(l));
                        body.push(Instr::Fence(FenceKind::Isb));
                    }
                }
            }
        }
        out.threads.push(Thread { name: t.name.clone(), body });
    }
    Ok(out)
}

/// Outcome of a mapping check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MappingVerdict {
    Sound,
    /// A target behavior the source cannot produce.
    Unsound(Behavior),
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error(transparent)]
    Map(#[from] MapError),
    #[error(transparent)]
    Enum(#[from] EnumError),
}

/// `behaviors(target) ⊆ behaviors(source)` under each program's own model.
pub fn verify_mapping(p: &Program, s: &MappingScheme) -> Result<MappingVerdict, VerifyError> {
    verify_mapping_with(p, s, &EnumConfig::default())
}

pub fn verify_mapping_with(p: &Program, s: &MappingScheme, cfg: &EnumConfig) -> Result<MappingVerdict, VerifyError> {
    let t = map_program(p, s)?;
    let src = enumerate::behaviors_with(p, ModelId::for_arch(p.arch), cfg)?;
    let tgt = enumerate::behaviors_with(&t, ModelId::for_arch(t.arch), cfg)?;
    Ok(match enumerate::included(&tgt, &src) {
        Ok(()) => MappingVerdict::Sound,
        Err(b) => MappingVerdict::Unsound(b),
    })
}

#[cfg(test)]
mod tests;
