use super::*;
use crate::litmus::parse;

const SB: &str = "arch x86\nthread P0 { X = 1; r1 = Y; } thread P1 { Y = 1; r2 = X; }";

fn pairs(b: &BehaviorSet) -> BTreeSet<(i64, i64)> {
    b.items.iter().map(|x| (x.reg(0, "r1").unwrap(), x.reg(1, "r2").unwrap())).collect()
}

#[test]
fn sb_sc_has_three_outcomes() {
    let p = parse(SB).unwrap();
    let b = behaviors(&p, ModelId::Sc).unwrap();
    assert_eq!(pairs(&b), [(0, 1), (1, 0), (1, 1)].into_iter().collect());
}

#[test]
fn sb_tso_adds_zero_zero() {
    let p = parse(SB).unwrap();
    for m in [ModelId::X86, ModelId::X86A, ModelId::Armv8, ModelId::Armv7] {
        let b = behaviors(&p, m).unwrap();
        assert_eq!(pairs(&b).len(), 4, "{m:?}");
    }
}

#[test]
fn reads_may_share_a_source() {
    let p = parse("arch x86\nthread P0 { X = 11; } thread P1 { X = 21; r1 = X; }").unwrap();
    for m in [ModelId::Sc, ModelId::X86, ModelId::Armv8, ModelId::Armv7] {
        let got: BTreeSet<(i64, i64)> = behaviors(&p, m)
            .unwrap()
            .items
            .iter()
            .map(|b| (b.reg(1, "r1").unwrap(), b.mem[&crate::litmus::Location::named("X")]))
            .collect();
        assert_eq!(got, [(11, 11), (21, 11), (21, 21)].into_iter().collect(), "{m:?}");
    }
    let p = parse("arch armv8\nthread P0 { a = Y; b = Y; }").unwrap();
    assert_eq!(behaviors(&p, ModelId::Armv8).unwrap().len(), 1);
}

#[test]
fn wait_loop_rejected() {
    let p = parse("arch x86\nthread P0 {\nL:\n r = X;\n if r == 0 goto L;\n}").unwrap();
    assert_eq!(behaviors(&p, ModelId::Sc).unwrap_err(), EnumError::LoopDetected(0));
    assert_eq!(control_paths(&p).unwrap_err(), EnumError::LoopDetected(0));
}

#[test]
fn control_path_counts() {
    let p = parse("arch armv7\nthread P0 { r = X; if r == 1 goto L; Y = 1; L: Z = 1; } thread P1 { X = 1; }").unwrap();
    let cp = control_paths(&p).unwrap();
    assert_eq!(cp[0].len(), 2);
    assert_eq!(cp[1].len(), 1);
}

#[test]
fn empty_program_single_behavior() {
    let p = parse("arch armv8\ninit X=3").unwrap();
    let b = behaviors(&p, ModelId::Armv8).unwrap();
    assert_eq!(b.lines(), vec!["| X=3"]);
}

#[test]
fn cas_failure_branch_explored() {
    let p = parse("arch x86\nthread P0 { r = rmw(X, 1, 2); } thread P1 { X = 1; }").unwrap();
    for m in [ModelId::X86, ModelId::X86A, ModelId::Sc] {
        let b = behaviors(&p, m).unwrap();
        assert_eq!(b.lines(), vec!["P0:r=0 | X=1", "P0:r=1 | X=2"], "{m:?}");
    }
}

#[test]
fn budget_is_a_hard_error() {
    let p = parse(SB).unwrap();
    let cfg = EnumConfig { max_candidates: 2, ..Default::default() };
    assert_eq!(behaviors_with(&p, ModelId::Sc, &cfg).unwrap_err(), EnumError::BudgetExceeded(2));
}

#[test]
fn deterministic_stream() {
    let p = parse(SB).unwrap();
    let a: Vec<String> = enumerate_executions(&p, ModelId::X86).unwrap().iter().map(|x| x.to_text()).collect();
    let b: Vec<String> = enumerate_executions(&p, ModelId::X86).unwrap().iter().map(|x| x.to_text()).collect();
    assert_eq!(a, b);
    assert!(!a.is_empty());
}

#[test]
fn monotone_in_model_strength() {
    let cfg = crate::gen::GenConfig::armv7();
    for seed in 0..30 {
        let p = crate::gen::random_program(&cfg, seed);
        let mut prev: Option<BehaviorSet> = None;
        for m in [ModelId::Sc, ModelId::X86A, ModelId::Armv8, ModelId::Armv7Mca, ModelId::Armv7] {
            let b = behaviors(&p, m).unwrap();
            if let Some(a) = &prev {
                assert!(included(a, &b).is_ok(), "seed {seed} {m:?}");
            }
            prev = Some(b);
        }
    }
}
