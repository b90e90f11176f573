//! The ARMv8 reordering table and its validation over random contexts.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::transform::{apply_transform, apply_transform_unchecked, Transform, TransformKind};
use crate::enumerate::{self, EnumError};
use crate::gen::{random_program, GenConfig};
use crate::litmus::{self, AccessClass, Expr, FenceKind, Flavor, Instr, LocExpr, Program};
use crate::models::ModelId;

/// Row and column order of the table.
pub fn table_classes() -> [AccessClass; 7] {
    use AccessClass::*;
    [W, R, L, A, Fence(FenceKind::DmbFull), Fence(FenceKind::DmbLd), Fence(FenceKind::DmbSt)]
}

const TABLE: [[u8; 7]; 7] = [
    // W  R  L  A  F  FL FS
    [0, 1, 0, 1, 0, 1, 0], // W
    [0, 1, 0, 1, 0, 0, 1], // R
    [0, 1, 0, 0, 0, 1, 0], // L
    [0, 0, 0, 0, 1, 1, 1], // A
    [0, 0, 1, 0, 2, 1, 1], // DMBFULL
    [0, 0, 1, 0, 1, 2, 1], // DMBLD
    [0, 1, 1, 1, 1, 1, 2], // DMBST
];

fn index(c: AccessClass) -> Option<usize> {
    table_classes().iter().position(|x| *x == c)
}

/// Whether `a; b` may become `b; a` on different locations. `None` off the
/// table or for a fence against itself.
pub fn reorder_safe(a: AccessClass, b: AccessClass) -> Option<bool> {
    match TABLE[index(a)?][index(b)?] {
        0 => Some(false),
        1 => Some(true),
        _ => None,
    }
}

pub fn class_name(c: AccessClass) -> &'static str {
    match c {
        AccessClass::W => "w",
        AccessClass::R => "r",
        AccessClass::L => "l",
        AccessClass::A => "a",
        AccessClass::Fence(FenceKind::DmbFull) => "dmbfull",
        AccessClass::Fence(FenceKind::DmbLd) => "dmbld",
        AccessClass::Fence(FenceKind::DmbSt) => "dmbst",
        _ => "?",
    }
}

fn instance(c: AccessClass, loc: &str, reg: &str, val: i64) -> Instr {
    let loc = LocExpr::indexed(loc, Expr::Const(0));
    match c {
        AccessClass::W | AccessClass::L => Instr::Store {
            loc,
            val: Expr::Const(val),
            flavor: if c == AccessClass::L { Flavor::Rel } else { Flavor::Plain },
            c11: None,
        },
        AccessClass::R | AccessClass::A => Instr::Load {
            reg: reg.to_string(),
            loc,
            flavor: if c == AccessClass::A { Flavor::Acq } else { Flavor::Plain },
            c11: None,
        },
        AccessClass::Fence(k) => Instr::Fence(k),
        _ => panic!("no instance for {c:?}"),
    }
}

const LOCS: [&str; 3] = ["X", "Y", "Z"];

fn context_config() -> GenConfig {
    GenConfig {
        threads: (2, 3),
        instrs: (1, 3),
        locations: LOCS.iter().map(|s| s.to_string()).collect(),
        max_events: 6,
        ..GenConfig::armv8()
    }
}

/// Random ARMv8 context with `a; b` spliced into thread 0. With `same_loc`
/// both accesses share a location, otherwise they differ.
pub fn cell_program(a: AccessClass, b: AccessClass, same_loc: bool, seed: u64) -> (Program, Transform) {
    let mut p = random_program(&context_config(), seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let la = *LOCS.choose(&mut rng).unwrap();
    let lb = if same_loc { la } else { *LOCS.iter().filter(|l| **l != la).collect::<Vec<_>>().choose(&mut rng).unwrap() };
    let body = &mut p.threads[0].body;
    let at = rng.gen_range(0..=body.len());
    body.insert(at, instance(b, lb, "rb", rng.gen_range(1..=2)));
    body.insert(at, instance(a, la, "ra", rng.gen_range(1..=2)));
    (p, Transform { kind: TransformKind::Reorder, tid: 0, at })
}

/// Stored witnesses for every forbidden reordering: `(file, text)`. Each
/// file names its cell and transformation in leading comments.
pub const WITNESSES: &[(&str, &str)] = &[
    ("reorder_a_a.lit", include_str!("../../witnesses/reorder_a_a.lit")),
    ("reorder_a_l.lit", include_str!("../../witnesses/reorder_a_l.lit")),
    ("reorder_a_r.lit", include_str!("../../witnesses/reorder_a_r.lit")),
    ("reorder_a_w.lit", include_str!("../../witnesses/reorder_a_w.lit")),
    ("reorder_dmbfull_a.lit", include_str!("../../witnesses/reorder_dmbfull_a.lit")),
    ("reorder_dmbfull_r.lit", include_str!("../../witnesses/reorder_dmbfull_r.lit")),
    ("reorder_dmbfull_w.lit", include_str!("../../witnesses/reorder_dmbfull_w.lit")),
    ("reorder_dmbld_a.lit", include_str!("../../witnesses/reorder_dmbld_a.lit")),
    ("reorder_dmbld_r.lit", include_str!("../../witnesses/reorder_dmbld_r.lit")),
    ("reorder_dmbld_w.lit", include_str!("../../witnesses/reorder_dmbld_w.lit")),
    ("reorder_dmbst_w.lit", include_str!("../../witnesses/reorder_dmbst_w.lit")),
    ("reorder_l_a.lit", include_str!("../../witnesses/reorder_l_a.lit")),
    ("reorder_l_dmbfull.lit", include_str!("../../witnesses/reorder_l_dmbfull.lit")),
    ("reorder_l_dmbst.lit", include_str!("../../witnesses/reorder_l_dmbst.lit")),
    ("reorder_l_l.lit", include_str!("../../witnesses/reorder_l_l.lit")),
    ("reorder_l_w.lit", include_str!("../../witnesses/reorder_l_w.lit")),
    ("reorder_r_dmbfull.lit", include_str!("../../witnesses/reorder_r_dmbfull.lit")),
    ("reorder_r_dmbld.lit", include_str!("../../witnesses/reorder_r_dmbld.lit")),
    ("reorder_r_l.lit", include_str!("../../witnesses/reorder_r_l.lit")),
    ("reorder_r_w.lit", include_str!("../../witnesses/reorder_r_w.lit")),
    ("reorder_w_dmbfull.lit", include_str!("../../witnesses/reorder_w_dmbfull.lit")),
    ("reorder_w_dmbst.lit", include_str!("../../witnesses/reorder_w_dmbst.lit")),
    ("reorder_w_l.lit", include_str!("../../witnesses/reorder_w_l.lit")),
    ("reorder_w_w.lit", include_str!("../../witnesses/reorder_w_w.lit")),
];

/// Reads `# cell a b` and `# transform kind tid at` headers.
pub fn parse_witness(text: &str) -> Option<(AccessClass, AccessClass, Transform, Program)> {
    let mut cell = None;
    let mut tr = None;
    for l in text.lines() {
        let w: Vec<&str> = l.trim_start_matches('#').split_whitespace().collect();
        match w.as_slice() {
            ["cell", a, b] => {
                let f = |n: &str| table_classes().into_iter().find(|c| class_name(*c) == n);
                cell = Some((f(a)?, f(b)?));
            }
            ["transform", k, t, at] => {
                tr = Some(Transform {
                    kind: TransformKind::from_name(k)?,
                    tid: t.trim_start_matches('P').parse().ok()?,
                    at: at.parse().ok()?,
                })
            }
            _ => {}
        }
    }
    let (a, b) = cell?;
    Some((a, b, tr?, litmus::parse(text).ok()?))
}

/// Transformed program gains a behavior under ARMv8.
pub fn grows(before: &Program, after: &Program) -> Result<bool, EnumError> {
    let b = enumerate::behaviors(before, ModelId::Armv8)?;
    let a = enumerate::behaviors(after, ModelId::Armv8)?;
    Ok(enumerate::included(&a, &b).is_err())
}

/// Seeded search for a context exposing a forbidden reordering.
pub fn search_reorder_witness(a: AccessClass, b: AccessClass, tries: u64) -> Option<(Program, Transform)> {
    for seed in 0..tries {
        let (p, t) = cell_program(a, b, false, seed);
        let Ok(q) = apply_transform_unchecked(&p, &t) else { continue };
        if grows(&p, &q).unwrap_or(false) {
            return Some((p, t));
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellReport {
    /// `reorder w r`, `rar`, ...
    pub name: String,
    pub allowed: bool,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableReport {
    pub cells: Vec<CellReport>,
}

impl TableReport {
    pub fn all_ok(&self) -> bool {
        self.cells.iter().all(|c| c.ok)
    }
}

fn check_no_growth(
    name: String,
    contexts: u64,
    seed: u64,
    make: impl Fn(u64) -> (Program, Transform),
) -> Result<CellReport, EnumError> {
    for k in 0..contexts {
        let (p, t) = make(seed.wrapping_add(k));
        let q = apply_transform(&p, &t).expect("table-allowed transformation applies");
        if grows(&p, &q)? {
            return Ok(CellReport {
                name,
                allowed: true,
                ok: false,
                detail: format!("growth in context {k}:\n{}", litmus::emit(&p)),
            });
        }
    }
    Ok(CellReport { name, allowed: true, ok: true, detail: format!("{contexts} contexts, no growth") })
}

/// Every allowed cell and safe rewrite shows no growth over `contexts`
/// random contexts; every forbidden cell's witness shows growth.
pub fn validate_transform_table(contexts: u64, seed: u64) -> Result<TableReport, EnumError> {
    let mut rep = TableReport::default();
    for a in table_classes() {
        for b in table_classes() {
            let name = format!("reorder {} {}", class_name(a), class_name(b));
            match reorder_safe(a, b) {
                None => {}
                Some(true) => rep.cells.push(check_no_growth(name, contexts, seed, |s| cell_program(a, b, false, s))?),
                Some(false) => {
                    let w = WITNESSES.iter().filter_map(|(_, t)| parse_witness(t)).find(|(x, y, _, _)| (*x, *y) == (a, b));
                    let cell = match w {
                        None => CellReport { name, allowed: false, ok: false, detail: "no stored witness".into() },
                        Some((_, _, t, p)) => {
                            let q = apply_transform_unchecked(&p, &t).expect("witness transformation applies");
                            let ok = grows(&p, &q)?;
                            CellReport { name, allowed: false, ok, detail: if ok { "witness grows" } else { "witness shows no growth" }.into() }
                        }
                    };
                    rep.cells.push(cell);
                }
            }
        }
    }
    use AccessClass::*;
    for (kind, a, b) in [(TransformKind::ElimRAR, R, R), (TransformKind::ElimRAA, A, R), (TransformKind::ElimAAA, A, A)] {
        rep.cells.push(check_no_growth(kind.name().into(), contexts, seed, |s| {
            let (p, t) = cell_program(a, b, true, s);
            (p, Transform { kind, ..t })
        })?);
    }
    for (kind, a) in [
        (TransformKind::StrengthenRtoA, R),
        (TransformKind::StrengthenWtoL, W),
        (TransformKind::StrengthenFence, Fence(FenceKind::DmbLd)),
        (TransformKind::StrengthenFence, Fence(FenceKind::DmbSt)),
    ] {
        let name = format!("{} {}", kind.name(), class_name(a));
        rep.cells.push(check_no_growth(name, contexts, seed, |s| {
            let (p, t) = cell_program(a, R, false, s);
            (p, Transform { kind, ..t })
        })?);
    }
    Ok(rep)
}
