//! One PASS/FAIL line per acceptance criterion. Run with
//! `cargo test --release --test acceptance`.

mod common;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use weakmem::enumerate::{behaviors, included, outcome_allowed};
use weakmem::fenceopt::{eliminate_fences, Provenance};
use weakmem::gen::{random_execution, random_program, GenConfig};
use weakmem::litmus::{self, Arch, Instr, Program};
use weakmem::mapping::{
    apply_transform_unchecked, map_program, scheme, validate_transform_table, verify_mapping, MappingVerdict, Transform,
    TransformKind, SCHEMES,
};
use weakmem::models::{armv7_ppo, ModelId};
use weakmem::robust::{check_robust, enforce_robust, semantic_robust, Row};

type Check = Result<String, String>;

const LITMUS_LIMIT: Duration = Duration::from_secs(10);
const X86_EQUIV_LIMIT: Duration = Duration::from_secs(5 * 60);
const SIMULATOR_LIMIT: Duration = Duration::from_secs(5 * 60);
const MAPPING_LIMIT: Duration = Duration::from_secs(10 * 60);
const FENCE_LIMIT: Duration = Duration::from_secs(5 * 60);
const ROBUST_LIMIT: Duration = Duration::from_secs(5 * 60);
const TABLE_LIMIT: Duration = Duration::from_secs(15 * 60);
const PPO_LIMIT: Duration = Duration::from_secs(60);

const RANDOM_MAPPING_PROGRAMS: u64 = 200;
const TABLE_CONTEXTS: u64 = 100;
const PPO_EXECUTIONS: u64 = 500;
const MAX_EVENTS: usize = 8;

fn corpus_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn load(name: &str) -> Program {
    let text = std::fs::read_to_string(corpus_dir().join(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    litmus::parse(&text).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn corpus() -> Vec<(String, Program)> {
    let mut files: Vec<_> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lit"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|f| {
            let name = f.file_name().unwrap().to_string_lossy().into_owned();
            let p = load(&name);
            (name, p)
        })
        .collect()
}

fn allowed(p: &Program, m: ModelId) -> Result<bool, String> {
    outcome_allowed(p, m).map_err(|e| e.to_string())
}

fn expect(what: &str, p: &Program, m: ModelId, want: bool) -> Result<(), String> {
    let got = allowed(p, m)?;
    if got == want {
        Ok(())
    } else {
        Err(format!("{what} under {}: expected {}, got {}", m.name(), verdict(want), verdict(got)))
    }
}

fn verdict(b: bool) -> &'static str {
    if b {
        "present"
    } else {
        "absent"
    }
}

fn mapped(p: &Program, name: &str, to: Option<Arch>) -> Result<Program, String> {
    let mut s = scheme(name).ok_or(format!("no scheme {name}"))?;
    if let Some(a) = to {
        s = s.retarget(a);
    }
    map_program(p, &s).map_err(|e| e.to_string())
}

fn transformed(p: &Program, kind: TransformKind, tid: usize, at: usize) -> Result<Program, String> {
    apply_transform_unchecked(p, &Transform { kind, tid, at }).map_err(|e| e.to_string())
}

fn litmus_verdicts() -> Check {
    let iriw = load("iriw_addr.lit");
    expect("IRIW-addr", &iriw, ModelId::Armv8, false)?;
    let iriw7 = mapped(&iriw, "broken-ldr-cbisb", Some(Arch::Armv7))?;
    expect("IRIW-addr with ctrl_isb reads", &iriw7, ModelId::Armv7, true)?;
    expect("IRIW-addr with ctrl_isb reads (written out)", &load("iriw_addr_isb.lit"), ModelId::Armv7, true)?;

    let dc = load("data_coi.lit");
    expect("data;coi", &dc, ModelId::Armv8, false)?;
    expect("data;coi mapped", &mapped(&dc, "broken-ldr", Some(Arch::Armv7Mca))?, ModelId::Armv7Mca, true)?;

    let chain = load("chain5.lit");
    expect("5-thread chain", &chain, ModelId::Armv8, false)?;
    expect("5-thread chain mapped", &mapped(&chain, "broken-ldr-cbisb", Some(Arch::Armv7Mca))?, ModelId::Armv7Mca, true)?;

    let re = load("reorder.lit");
    expect("load-store reordering", &re, ModelId::Armv8, false)?;
    expect("load-store reordering after swap", &transformed(&re, TransformKind::Reorder, 0, 1)?, ModelId::Armv8, true)?;

    let ow = load("ow.lit");
    expect("OW before", &ow, ModelId::Armv8, false)?;
    expect("OW after", &transformed(&ow, TransformKind::ElimOW, 0, 1)?, ModelId::Armv8, true)?;
    let raw = load("raw.lit");
    expect("RAW before", &raw, ModelId::Armv8, false)?;
    expect("RAW after", &transformed(&raw, TransformKind::ElimRAW, 0, 1)?, ModelId::Armv8, true)?;
    Ok("IRIW-addr, data;coi, 5-thread chain, reordering, OW, RAW".into())
}

fn x86_equivalence(progs: &[Program]) -> Check {
    for p in progs {
        let a = behaviors(p, ModelId::X86).map_err(|e| e.to_string())?;
        let b = behaviors(p, ModelId::X86A).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("x86 and x86A differ on\n{}", litmus::emit(p)));
        }
    }
    Ok(format!("{} programs", progs.len()))
}

fn simulators(progs: &[Program]) -> Check {
    for p in progs {
        let sc = common::project_all(p, &behaviors(p, ModelId::Sc).map_err(|e| e.to_string())?);
        if sc != common::sc_outcomes(p) {
            return Err(format!("SC differs from interleaving on\n{}", litmus::emit(p)));
        }
        let tso = common::project_all(p, &behaviors(p, ModelId::X86).map_err(|e| e.to_string())?);
        if tso != common::tso_outcomes(p) {
            return Err(format!("x86 differs from store buffers on\n{}", litmus::emit(p)));
        }
    }
    Ok(format!("{} programs", progs.len()))
}

fn all_annotated(p: &Program) -> bool {
    p.threads.iter().flat_map(|t| &t.body).all(|i| match i {
        Instr::Load { c11, .. } | Instr::Store { c11, .. } | Instr::Rmw { c11, .. } => c11.is_some(),
        _ => true,
    })
}

/// Two threads of two to four instructions within the event cap.
fn random_sources(arch: Arch, c11: bool) -> Vec<Program> {
    let mut cfg = GenConfig { max_events: MAX_EVENTS, threads: (2, 2), instrs: (2, 4), ..GenConfig::for_arch(arch) };
    if c11 {
        cfg = cfg.with_c11();
    }
    (0..RANDOM_MAPPING_PROGRAMS).map(|k| random_program(&cfg, k)).collect()
}

fn mapping_soundness(corpus: &[(String, Program)]) -> Check {
    let mut fixed = 0;
    let mut random = 0;
    for name in SCHEMES {
        let s = scheme(name).unwrap();
        let mut progs: Vec<Program> = corpus
            .iter()
            .filter(|(_, p)| p.arch == s.from && (!s.c11_aware || all_annotated(p)))
            .map(|(_, p)| p.clone())
            .collect();
        fixed += progs.len();
        progs.extend(random_sources(s.from, s.c11_aware));
        random += RANDOM_MAPPING_PROGRAMS;
        for p in &progs {
            match verify_mapping(p, &s).map_err(|e| format!("{name}: {e}"))? {
                MappingVerdict::Sound => {}
                MappingVerdict::Unsound(b) => {
                    return Err(format!("{name} adds {b:?} on\n{}", litmus::emit(p)));
                }
            }
        }
    }
    let broken = [
        ("broken-rmw-no-leading", "rmw_leading.lit", None),
        ("broken-rmw-no-trailing", "rmw_trailing.lit", None),
        ("broken-ldr", "data_coi.lit", Some(Arch::Armv7Mca)),
        ("broken-ldr-cbisb", "chain5.lit", Some(Arch::Armv7Mca)),
        ("broken-stlr", "stlr_ldar.lit", None),
    ];
    let mut flagged = 0;
    for (name, file, to) in broken {
        let mut s = scheme(name).unwrap();
        if let Some(a) = to {
            s = s.retarget(a);
        }
        for p in random_sources(s.from, false) {
            if let Ok(MappingVerdict::Unsound(_)) = verify_mapping(&p, &s) {
                flagged += 1;
            }
        }
        let p = load(file);
        let q = mapped(&p, name, to)?;
        let src = behaviors(&p, ModelId::for_arch(p.arch)).map_err(|e| e.to_string())?;
        let tgt = behaviors(&q, ModelId::for_arch(q.arch)).map_err(|e| e.to_string())?;
        if included(&src, &tgt).is_err() || included(&tgt, &src).is_ok() {
            return Err(format!("{name} on {file}: target is not a strict superset"));
        }
    }
    Ok(format!(
        "{} schemes on {fixed} corpus programs and {random} random programs; 5 broken variants grow on their witnesses; \
         random programs flag broken variants {flagged} times",
        SCHEMES.len()
    ))
}

fn fence_count(p: &Program) -> usize {
    p.threads.iter().flat_map(|t| &t.body).filter(|i| i.is_fence()).count()
}

fn same_behaviors(before: &Program, after: &Program, m: ModelId) -> Result<(), String> {
    let a = behaviors(before, m).map_err(|e| e.to_string())?;
    let b = behaviors(after, m).map_err(|e| e.to_string())?;
    if a == b {
        Ok(())
    } else {
        Err(format!("fence elimination changed behaviors under {} on\n{}", m.name(), litmus::emit(before)))
    }
}

fn body(p: &Program, tid: usize) -> Vec<String> {
    p.threads[tid].body.iter().map(|i| i.to_string()).collect()
}

fn fence_elimination(corpus: &[(String, Program)]) -> Check {
    let mut runs = 0;
    for (_, p) in corpus {
        let mut jobs: Vec<(Program, Provenance)> = Vec::new();
        match p.arch {
            Arch::X86 => {
                jobs.push((p.clone(), Provenance::Native));
                if let Ok(q) = mapped(p, "x86-armv8", None) {
                    jobs.push((q, Provenance::FromX86));
                }
            }
            Arch::Armv8 => {
                jobs.push((p.clone(), Provenance::Native));
                if let Ok(q) = mapped(p, "armv8-armv7", None) {
                    jobs.push((q, Provenance::Native));
                }
            }
            _ => jobs.push((p.clone(), Provenance::Native)),
        }
        for (q, prov) in jobs {
            let out = eliminate_fences(&q, prov).map_err(|e| e.to_string())?;
            same_behaviors(&q, &out.program, ModelId::for_arch(q.arch))?;
            runs += 1;
        }
    }

    let src = litmus::parse("arch x86\nthread P0 { a = X; mfence; Y = 1; }").unwrap();
    let arm = mapped(&src, "x86-armv8", None)?;
    let out = eliminate_fences(&arm, Provenance::FromX86).map_err(|e| e.to_string())?;
    let got = body(&out.program, 0);
    if got != ["a = X", "dmbld", "Y = 1"] {
        return Err(format!("x86 chain gave {got:?}"));
    }

    let src = litmus::parse("arch armv8\nthread P0 { a = X; Y = 1 @rel; Z = 1; }").unwrap();
    let v7 = mapped(&src, "armv8-armv7", None)?;
    let out = eliminate_fences(&v7, Provenance::Native).map_err(|e| e.to_string())?;
    let (before, after) = (fence_count(&v7), fence_count(&out.program));
    if (before, after) != (3, 2) {
        return Err(format!("ARMv7 chain went from {before} to {after} dmbs"));
    }
    same_behaviors(&v7, &out.program, ModelId::Armv7)?;
    Ok(format!("{runs} pass runs unchanged; movld;mfence;movst -> ldr;dmbld;str; ARMv7 dmbs 3 -> 2"))
}

fn robustness(corpus: &[(String, Program)]) -> Check {
    let err = |e: weakmem::robust::RobustError| e.to_string();
    if !check_robust(&load("sb_functions.lit"), ModelId::Sc, ModelId::X86A).map_err(err)?.robust {
        return Err("SB with mfence reported not robust".into());
    }
    let sb = load("sb.lit");
    if check_robust(&sb, ModelId::Sc, ModelId::X86A).map_err(err)?.robust {
        return Err("bare SB reported robust".into());
    }
    let (fixed, _) = enforce_robust(&sb, ModelId::Sc, ModelId::X86A).map_err(err)?;
    let weak = behaviors(&fixed, ModelId::X86A).map_err(|e| e.to_string())?;
    let strong = behaviors(&fixed, ModelId::Sc).map_err(|e| e.to_string())?;
    if weak != strong {
        return Err("enforced SB still differs between x86A and SC".into());
    }
    if check_robust(&load("pponrobust.lit"), ModelId::Sc, ModelId::Armv7).map_err(err)?.robust {
        return Err("pponrobust reported robust".into());
    }
    let mut checked = 0;
    for (name, p) in corpus {
        for row in Row::ALL {
            let (s, w) = row.models();
            let Ok(rep) = check_robust(p, s, w) else { continue };
            if rep.robust {
                checked += 1;
                if !semantic_robust(p, s, w).map_err(|e| e.to_string())? {
                    return Err(format!("{name}: static robust but not semantically under {}/{}", s.name(), w.name()));
                }
            }
        }
    }
    Ok(format!("SB cases hold; {checked} static-robust corpus verdicts confirmed"))
}

fn transform_table() -> Check {
    let rep = validate_transform_table(TABLE_CONTEXTS, 1).map_err(|e| e.to_string())?;
    match rep.cells.iter().find(|c| !c.ok) {
        Some(c) => Err(format!("{}: {}", c.name, c.detail)),
        None => Ok(format!("{} cells, {TABLE_CONTEXTS} contexts each", rep.cells.len())),
    }
}

fn ppo_oracle() -> Check {
    for seed in 0..PPO_EXECUTIONS {
        let x = random_execution(seed, MAX_EVENTS);
        let got: std::collections::BTreeSet<_> = armv7_ppo(&x).pairs().collect();
        if got != common::ppo_oracle(&x) {
            return Err(format!("seed {seed} differs\n{}", x.to_text()));
        }
    }
    Ok(format!("{PPO_EXECUTIONS} executions"))
}

fn main() -> ExitCode {
    let corpus = corpus();
    let small = common::small_x86_corpus();
    let criteria: Vec<(u8, &str, Duration, Box<dyn Fn() -> Check + '_>)> = vec![
        (1, "litmus verdicts", LITMUS_LIMIT, Box::new(litmus_verdicts)),
        (2, "x86 equals x86A on small programs", X86_EQUIV_LIMIT, Box::new(|| x86_equivalence(&small))),
        (3, "SC and x86 match operational simulators", SIMULATOR_LIMIT, Box::new(|| simulators(&small))),
        (4, "mapping soundness", MAPPING_LIMIT, Box::new(|| mapping_soundness(&corpus))),
        (5, "fence elimination", FENCE_LIMIT, Box::new(|| fence_elimination(&corpus))),
        (6, "robustness", ROBUST_LIMIT, Box::new(|| robustness(&corpus))),
        (7, "transform table", TABLE_LIMIT, Box::new(transform_table)),
        (8, "ARMv7 ppo fixpoint", PPO_LIMIT, Box::new(ppo_oracle)),
    ];
    let mut failed = 0;
    for (id, name, limit, run) in criteria {
        let t = Instant::now();
        let res = run();
        let dt = t.elapsed();
        let ok = res.is_ok() && dt <= limit;
        if !ok {
            failed += 1;
        }
        let detail = match &res {
            Ok(s) => s.clone(),
            Err(e) => e.clone(),
        };
        println!(
            "criterion {id} {} {name} ({:.1}s, limit {}s): {detail}",
            if ok { "PASS" } else { "FAIL" },
            dt.as_secs_f64(),
            limit.as_secs()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
