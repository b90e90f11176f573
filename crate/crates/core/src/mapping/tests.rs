use super::*;
use crate::litmus::{parse, AccessClass};

const SB: &str = "arch x86\nthread P0 { X = 1; r1 = Y; } thread P1 { Y = 1; r2 = X; }";

#[test]
fn bundled_tables_parse_and_round_trip() {
    for n in SCHEMES.iter().chain(BROKEN.iter()) {
        let s = scheme(n).unwrap();
        assert_eq!(MappingScheme::parse(&s.to_table()).unwrap(), s, "{n}");
    }
    assert!(scheme("nope").is_none());
}

#[test]
fn table_errors() {
    let e = MappingScheme::parse("scheme s\nfrom x86\nto armv8\nld -> ld\nst -> st\nrmw -> rmw").unwrap_err();
    assert!(matches!(e, MapError::BadTable { .. }), "{e}");
    let e = MappingScheme::parse("scheme s\nfrom x86\nto armv8\nld -> mfence").unwrap_err();
    assert!(matches!(e, MapError::BadTable { .. }));
    assert!(MappingScheme::parse("from x86\nto armv8\nld = ld").is_err());
}

#[test]
fn x86_to_armv8_shapes() {
    let p = parse(SB).unwrap();
    let t = map_program(&p, &scheme("x86-armv8").unwrap()).unwrap();
    assert_eq!(t.arch, Arch::Armv8);
    let body: Vec<String> = t.threads[0].body.iter().map(|i| i.to_string()).collect();
    assert_eq!(body, ["dmbst", "X = 1", "r1 = Y", "dmbld"]);
}

#[test]
fn arch_and_annotation_errors() {
    let p = parse(SB).unwrap();
    assert!(matches!(map_program(&p, &scheme("armv8-x86").unwrap()), Err(MapError::ArchMismatch { .. })));
    assert!(matches!(map_program(&p, &scheme("c11-x86-armv8").unwrap()), Err(MapError::MissingC11Annotation(_))));
    let q = parse("arch x86\nthread P0 { X = 1 @@na; r1 = Y @@sc; }").unwrap();
    let t = map_program(&q, &scheme("c11-x86-armv8").unwrap()).unwrap();
    let body: Vec<String> = t.threads[0].body.iter().map(|i| i.to_string()).collect();
    assert_eq!(body, ["X = 1 @@na", "r1 = Y @@sc", "dmbld"]);
}

#[test]
fn cbisb_is_branch_label_isb() {
    let p = parse("arch armv8\nthread P0 { a = X; L: b = Y; }").unwrap();
    let t = map_program(&p, &scheme("broken-ldr-cbisb").unwrap().retarget(Arch::Armv7Mca)).unwrap();
    assert_eq!(t.arch, Arch::Armv7Mca);
    let body: Vec<String> = t.threads[0].body.iter().map(|i| i.to_string()).collect();
    assert_eq!(body, ["a = X", "if a == a goto Lcb0", "Lcb0:", "isb", "L:", "b = Y", "if b == b goto Lcb1", "Lcb1:", "isb"]);
    t.validate().unwrap();
}

#[test]
fn sb_mapping_is_sound_and_broken_rmw_is_not() {
    let p = parse(SB).unwrap();
    assert_eq!(verify_mapping(&p, &scheme("x86-armv8").unwrap()).unwrap(), MappingVerdict::Sound);
    let w = parse("arch x86\nthread P0 { X = 1; a = rmw(Y, 0, 1); } thread P1 { Y = 1; b = rmw(X, 0, 1); }").unwrap();
    assert_eq!(verify_mapping(&w, &scheme("x86-armv8").unwrap()).unwrap(), MappingVerdict::Sound);
    match verify_mapping(&w, &scheme("broken-rmw-no-leading").unwrap()).unwrap() {
        MappingVerdict::Unsound(b) => assert_eq!((b.reg(0, "a"), b.reg(1, "b")), (Some(0), Some(0))),
        v => panic!("{v:?}"),
    }
}

#[test]
fn reorder_table_shape() {
    let cls = table_classes();
    let mut no = 0;
    for a in cls {
        for b in cls {
            if reorder_safe(a, b) == Some(false) {
                no += 1;
            }
        }
    }
    assert_eq!(no, 24);
    assert_eq!(reorder_safe(AccessClass::R, AccessClass::W), Some(false));
    assert_eq!(reorder_safe(AccessClass::W, AccessClass::R), Some(true));
    assert_eq!(reorder_safe(AccessClass::Rmw, AccessClass::R), None);
}

#[test]
fn transforms_apply_or_mismatch() {
    let p = parse("arch armv8\nthread P0 { a = X; b = X; Y = 1; Y = 2; c = Y; }").unwrap();
    let t = |kind, at| Transform { kind, tid: 0, at };
    let q = apply_transform(&p, &t(TransformKind::ElimRAR, 0)).unwrap();
    assert_eq!(q.threads[0].body[1].to_string(), "b = a");
    assert!(apply_transform(&p, &t(TransformKind::ElimRAA, 0)).is_err());
    let q = apply_transform(&p, &t(TransformKind::ElimOW, 2)).unwrap();
    assert_eq!(q.threads[0].body.len(), 4);
    let q = apply_transform(&p, &t(TransformKind::ElimRAW, 3)).unwrap();
    assert_eq!(q.threads[0].body[4].to_string(), "c = 2");
    // R then W is forbidden by the table
    assert!(apply_transform(&p, &t(TransformKind::Reorder, 1)).is_err());
    assert!(apply_transform_unchecked(&p, &t(TransformKind::Reorder, 1)).is_ok());
    // same location never reorders
    assert!(apply_transform_unchecked(&p, &t(TransformKind::Reorder, 2)).is_err());
    let q = apply_transform(&p, &t(TransformKind::StrengthenRtoA, 0)).unwrap();
    assert_eq!(q.threads[0].body[0].class(), AccessClass::A);
}

#[test]
fn load_store_reordering_grows() {
    let p = parse(
        "arch armv8
thread P0 { a = X; c = Y[a]; Z = 1; }
thread P1 { b = Z; V[b] = 1; X = 1; }
exists (P0:a=1 /\\ P1:b=1)",
    )
    .unwrap();
    assert!(!enumerate::outcome_allowed(&p, ModelId::Armv8).unwrap());
    let q = apply_transform_unchecked(&p, &Transform { kind: TransformKind::Reorder, tid: 0, at: 1 }).unwrap();
    assert!(enumerate::outcome_allowed(&q, ModelId::Armv8).unwrap());
    assert!(grows(&p, &q).unwrap());
}

#[test]
fn cell_programs_are_well_formed() {
    for s in 0..20 {
        let (p, t) = cell_program(AccessClass::W, AccessClass::R, false, s);
        p.validate().unwrap();
        apply_transform(&p, &t).unwrap();
    }
}

#[test]
fn every_forbidden_cell_has_a_growing_witness() {
    let mut seen = Vec::new();
    for (f, text) in WITNESSES {
        let (a, b, t, p) = parse_witness(text).unwrap_or_else(|| panic!("{f}"));
        assert_eq!(reorder_safe(a, b), Some(false), "{f}");
        let q = apply_transform_unchecked(&p, &t).unwrap();
        assert!(grows(&p, &q).unwrap(), "{f}");
        seen.push((a, b));
    }
    seen.sort();
    seen.dedup();
    assert_eq!(seen.len(), 24);
}
