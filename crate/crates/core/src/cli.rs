//! The `weakmem` command line.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::enumerate::{self, EnumConfig, DEFAULT_MAX_CANDIDATES, DEFAULT_PATHS_LIMIT};
use crate::fenceopt::{self, Provenance};
use crate::litmus::{self, Arch, Program};
use crate::mapping::{self, MappingScheme, MappingVerdict};
use crate::models::ModelId;
use crate::robust;

/// Usage errors.
pub const EXIT_USAGE: i32 = 64;
/// Analysis finding: unsound mapping, non-robust program, failed corpus.
pub const EXIT_FINDING: i32 = 2;
/// Program was made robust by fence insertion.
pub const EXIT_ENFORCED: i32 = 3;
/// Input or analysis error.
pub const EXIT_ERROR: i32 = 1;

/// Corpus root used when `corpus run` gets no directory.
pub const CORPUS_ENV: &str = "WEAKMEM_CORPUS";

#[derive(Debug, Parser)]
#[command(name = "weakmem", about = "Axiomatic weak memory models: litmus checks, mappings, fences, robustness")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Debug, Args, Clone)]
struct Common {
    /// Emit a JSON document instead of text.
    #[arg(long)]
    json: bool,
    #[arg(long, default_value_t = DEFAULT_MAX_CANDIDATES)]
    max_candidates: u64,
    #[arg(long, default_value_t = DEFAULT_PATHS_LIMIT)]
    paths_limit: usize,
    /// Behaviors also record per-location coherence order.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn enum_config(&self) -> EnumConfig {
        EnumConfig { max_candidates: self.max_candidates, paths_limit: self.paths_limit, strict: self.strict }
    }
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Print every behavior of a program under a model.
    Behaviors {
        #[arg(long)]
        model: Option<String>,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Decide the `exists` clause and compare with `expect` lines.
    Check {
        #[arg(long)]
        model: Option<String>,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Rewrite a program with a mapping scheme.
    Map {
        #[command(flatten)]
        sel: SchemeSel,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Check that a mapping adds no behaviors. Exit 0 sound, 2 unsound.
    VerifyMapping {
        #[command(flatten)]
        sel: SchemeSel,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Remove redundant fences and print the decisions.
    FenceElim {
        /// Defaults to the program's own arch.
        #[arg(long)]
        arch: Option<String>,
        /// `x86` for programs compiled from x86, else `native` (`armv7` is accepted).
        #[arg(long, default_value = "native")]
        provenance: String,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Static robustness of the program's threads. Exit 0 robust, 2 not, 3 enforced.
    Robust {
        /// Stronger model.
        #[arg(long = "m", default_value = "sc")]
        strong: String,
        /// Weaker model; defaults to the program's arch.
        #[arg(long = "k")]
        weak: Option<String>,
        #[arg(long)]
        enforce: bool,
        /// Also run the execution-level oracle.
        #[arg(long)]
        semantic: bool,
        file: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Batch-check `expect` lines of every `.lit` file.
    Corpus {
        #[command(subcommand)]
        action: CorpusCmd,
    },
}

#[derive(Debug, Subcommand)]
enum CorpusCmd {
    Run {
        /// Defaults to $WEAKMEM_CORPUS.
        dir: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Args, Clone)]
struct SchemeSel {
    /// Bundled scheme name.
    #[arg(long)]
    scheme: Option<String>,
    /// Scheme table file.
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long)]
    from: Option<String>,
    #[arg(long)]
    to: Option<String>,
    /// Use the C11-aware scheme.
    #[arg(long)]
    c11: bool,
}

struct Fail(i32, String);

type Out<'a> = &'a mut dyn Write;

fn usage(m: impl Into<String>) -> Fail {
    Fail(EXIT_USAGE, m.into())
}

fn err(e: impl std::fmt::Display) -> Fail {
    Fail(EXIT_ERROR, e.to_string())
}

fn load(path: &Path) -> Result<Program, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", path.display())))?;
    litmus::parse(&text).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", path.display())))
}

fn model(name: Option<&str>, p: &Program) -> Result<ModelId, Fail> {
    match name {
        None => Ok(ModelId::for_arch(p.arch)),
        Some(n) => ModelId::from_name(n).ok_or_else(|| usage(format!("unknown model `{n}`"))),
    }
}

fn arch(name: &str) -> Result<Arch, Fail> {
    Arch::from_name(name).ok_or_else(|| usage(format!("unknown arch `{name}`")))
}

fn select(sel: &SchemeSel, p: &Program) -> Result<MappingScheme, Fail> {
    let s = if let Some(path) = &sel.table {
        let t = std::fs::read_to_string(path).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", path.display())))?;
        MappingScheme::parse(&t).map_err(err)?
    } else if let Some(n) = &sel.scheme {
        mapping::scheme(n).ok_or_else(|| usage(format!("unknown scheme `{n}`")))?
    } else {
        let from = match &sel.from {
            Some(f) => arch(f)?,
            None => p.arch,
        };
        let to = arch(sel.to.as_deref().ok_or_else(|| usage("need --scheme, --table or --to"))?)?;
        mapping::scheme_for(from, to, sel.c11).ok_or_else(|| usage(format!("no scheme from {from} to {to}")))?
    };
    Ok(match &sel.to {
        Some(t) => s.retarget(arch(t)?),
        None => s,
    })
}

fn emit_json(out: Out, v: &Value) -> Result<(), Fail> {
    writeln!(out, "{}", serde_json::to_string_pretty(v).unwrap()).map_err(err)
}

fn write(out: Out, s: &str) -> Result<(), Fail> {
    out.write_all(s.as_bytes()).map_err(err)
}

fn behaviors(out: Out, m: Option<&str>, file: &Path, c: &Common) -> Result<i32, Fail> {
    let p = load(file)?;
    let m = model(m, &p)?;
    let b = enumerate::behaviors_with(&p, m, &c.enum_config()).map_err(err)?;
    let matching = p.outcome.as_ref().map(|_| b.matching(&p).count());
    if c.json {
        let mut v = b.to_json();
        v["model"] = json!(m.name());
        if let Some(n) = matching {
            v["outcome_allowed"] = json!(n > 0);
        }
        emit_json(out, &v)?;
    } else {
        write(out, &b.to_string())?;
        if let Some(n) = matching {
            write(out, &format!("outcome {} under {m}\n", if n > 0 { "allowed" } else { "forbidden" }))?;
        }
    }
    Ok(0)
}

fn check(out: Out, m: Option<&str>, file: &Path, c: &Common) -> Result<i32, Fail> {
    let p = load(file)?;
    let m = model(m, &p)?;
    let b = enumerate::behaviors_with(&p, m, &c.enum_config()).map_err(err)?;
    let allowed = b.matching(&p).next().is_some();
    let mut mismatches = Vec::new();
    for e in &p.expect {
        let em = ModelId::from_name(&e.model).ok_or_else(|| err(format!("unknown model `{}` in expect", e.model)))?;
        let got = if em == m { allowed } else { enumerate::outcome_allowed(&p, em).map_err(err)? };
        if got != e.allowed {
            mismatches.push(em.name());
        }
    }
    if c.json {
        emit_json(out, &json!({ "model": m.name(), "allowed": allowed, "expect_mismatches": mismatches }))?;
    } else {
        write(out, &format!("{} under {m}\n", if allowed { "allowed" } else { "forbidden" }))?;
        for mm in &mismatches {
            write(out, &format!("expectation for {mm} does not hold\n"))?;
        }
    }
    Ok(if mismatches.is_empty() { 0 } else { EXIT_FINDING })
}

fn map(out: Out, sel: &SchemeSel, file: &Path, c: &Common) -> Result<i32, Fail> {
    let p = load(file)?;
    let s = select(sel, &p)?;
    let t = mapping::map_program(&p, &s).map_err(err)?;
    let text = litmus::emit(&t);
    if c.json {
        emit_json(out, &json!({ "scheme": s.name, "program": text }))?;
    } else {
        write(out, &text)?;
    }
    Ok(0)
}

fn verify(out: Out, sel: &SchemeSel, file: &Path, c: &Common) -> Result<i32, Fail> {
    let p = load(file)?;
    let s = select(sel, &p)?;
    let v = mapping::verify_mapping_with(&p, &s, &c.enum_config()).map_err(err)?;
    let names: Vec<String> = p.threads.iter().map(|t| t.name.clone()).collect();
    let (code, witness) = match &v {
        MappingVerdict::Sound => (0, None),
        MappingVerdict::Unsound(b) => (EXIT_FINDING, Some(b)),
    };
    if c.json {
        emit_json(out, &json!({ "scheme": s.name, "sound": code == 0, "witness": witness.map(|b| b.to_json(&names)) }))?;
    } else {
        match witness {
            None => write(out, &format!("{}: sound\n", s.name))?,
            Some(b) => write(out, &format!("{}: unsound, new behavior {}\n", s.name, b.render(&names)))?,
        }
    }
    Ok(code)
}

fn fence_elim(out: Out, a: Option<&str>, prov: &str, file: &Path, c: &Common) -> Result<i32, Fail> {
    let mut p = load(file)?;
    if let Some(a) = a {
        p.arch = arch(a)?;
    }
    let prov = match prov {
        "x86" => Provenance::FromX86,
        "native" | "armv7" | "armv8" => Provenance::Native,
        o => return Err(usage(format!("unknown provenance `{o}`"))),
    };
    let r = fenceopt::eliminate_fences(&p, prov).map_err(err)?;
    let text = litmus::emit(&r.program);
    if c.json {
        emit_json(out, &json!({ "program": text, "decisions": r.decisions }))?;
    } else {
        write(out, &text)?;
        for d in &r.decisions {
            write(out, &format!("# {d}\n"))?;
        }
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn robust_cmd(out: Out, strong: &str, weak: Option<&str>, enforce: bool, semantic: bool, file: &Path, c: &Common) -> Result<i32, Fail> {
    let p = load(file)?;
    let strong = model(Some(strong), &p)?;
    let weak = model(weak, &p)?;
    let (prog, rep) = if enforce {
        let (q, r) = robust::enforce_robust(&p, strong, weak).map_err(err)?;
        (Some(q), r)
    } else {
        (None, robust::check_robust(&p, strong, weak).map_err(err)?)
    };
    let sem = if semantic {
        let target = prog.as_ref().unwrap_or(&p);
        Some(robust::semantic_robust_with(target, strong, weak, &c.enum_config()).map_err(err)?)
    } else {
        None
    };
    let code = match (rep.robust, enforce) {
        (true, _) => 0,
        (false, false) => EXIT_FINDING,
        (false, true) => EXIT_ENFORCED,
    };
    if c.json {
        let mut v = serde_json::to_value(&rep).unwrap();
        v["strong"] = json!(strong.name());
        v["weak"] = json!(weak.name());
        if let Some(q) = &prog {
            v["program"] = json!(litmus::emit(q));
        }
        if let Some(s) = sem {
            v["semantic_robust"] = json!(s);
        }
        emit_json(out, &v)?;
    } else {
        write(out, &format!("{strong} against {weak}: {rep}"))?;
        if let Some(s) = sem {
            write(out, &format!("semantic: {}\n", if s { "robust" } else { "not robust" }))?;
        }
        if let Some(q) = &prog {
            if !rep.robust {
                write(out, &litmus::emit(q))?;
            }
        }
    }
    Ok(code)
}

/// One `expect` line of one corpus file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusRow {
    pub file: String,
    pub model: String,
    pub expected: bool,
    pub got: Result<bool, String>,
}

impl CorpusRow {
    pub fn ok(&self) -> bool {
        self.got == Ok(self.expected)
    }
}

/// Checks every `expect` line of the `.lit` files under `dir`, files in parallel.
pub fn run_corpus(dir: &Path, cfg: &EnumConfig) -> std::io::Result<Vec<CorpusRow>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "lit"))
        .collect();
    files.sort();
    let workers = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(files.len().max(1));
    let chunks: Vec<Vec<PathBuf>> = (0..workers).map(|w| files.iter().skip(w).step_by(workers).cloned().collect()).collect();
    let mut rows: Vec<CorpusRow> = std::thread::scope(|s| {
        let hs: Vec<_> = chunks.iter().map(|c| s.spawn(move || c.iter().flat_map(|f| corpus_file(dir, f, cfg)).collect::<Vec<_>>())).collect();
        hs.into_iter().flat_map(|h| h.join().expect("corpus worker")).collect()
    });
    rows.sort_by(|a, b| (&a.file, &a.model).cmp(&(&b.file, &b.model)));
    Ok(rows)
}

fn corpus_file(dir: &Path, f: &Path, cfg: &EnumConfig) -> Vec<CorpusRow> {
    let name = f.strip_prefix(dir).unwrap_or(f).display().to_string();
    let p = match std::fs::read_to_string(f).map_err(|e| e.to_string()).and_then(|t| litmus::parse(&t).map_err(|e| e.to_string())) {
        Ok(p) => p,
        Err(e) => return vec![CorpusRow { file: name, model: "-".into(), expected: true, got: Err(e) }],
    };
    p.expect
        .iter()
        .map(|e| {
            let got = match ModelId::from_name(&e.model) {
                None => Err(format!("unknown model `{}`", e.model)),
                Some(m) => enumerate::behaviors_with(&p, m, cfg).map(|b| b.matching(&p).next().is_some()).map_err(|x| x.to_string()),
            };
            CorpusRow { file: name.clone(), model: e.model.clone(), expected: e.allowed, got }
        })
        .collect()
}

fn corpus(out: Out, dir: Option<&Path>, c: &Common) -> Result<i32, Fail> {
    let dir = match dir {
        Some(d) => d.to_path_buf(),
        None => std::env::var_os(CORPUS_ENV).map(PathBuf::from).ok_or_else(|| usage(format!("no directory and ${CORPUS_ENV} unset")))?,
    };
    let rows = run_corpus(&dir, &c.enum_config()).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", dir.display())))?;
    let verdict = |b: bool| if b { "allowed" } else { "forbidden" };
    let failed = rows.iter().filter(|r| !r.ok()).count();
    if c.json {
        let v: Vec<Value> = rows
            .iter()
            .map(|r| {
                json!({
                    "file": r.file, "model": r.model, "expected": verdict(r.expected),
                    "got": match &r.got { Ok(b) => json!(verdict(*b)), Err(e) => json!({ "error": e }) },
                    "ok": r.ok(),
                })
            })
            .collect();
        emit_json(out, &json!({ "rows": v, "failed": failed }))?;
    } else {
        let w = rows.iter().map(|r| r.file.len()).max().unwrap_or(4).max(4);
        write(out, &format!("{:<w$}  {:<9} {:<9} {:<9} ok\n", "file", "model", "expected", "got"))?;
        for r in &rows {
            let got = match &r.got {
                Ok(b) => verdict(*b).to_string(),
                Err(e) => format!("error: {e}"),
            };
            write(out, &format!("{:<w$}  {:<9} {:<9} {:<9} {}\n", r.file, r.model, verdict(r.expected), got, if r.ok() { "yes" } else { "NO" }))?;
        }
        write(out, &format!("{} checks, {} failed\n", rows.len(), failed))?;
    }
    Ok(if failed == 0 { 0 } else { EXIT_FINDING })
}

/// Runs the command line `args` (program name first); returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, errout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = if code == 0 { write!(out, "{e}") } else { write!(errout, "{e}") };
            return code;
        }
    };
    let res = match &cli.cmd {
        Cmd::Behaviors { model, file, common } => behaviors(out, model.as_deref(), file, common),
        Cmd::Check { model, file, common } => check(out, model.as_deref(), file, common),
        Cmd::Map { sel, file, common } => map(out, sel, file, common),
        Cmd::VerifyMapping { sel, file, common } => verify(out, sel, file, common),
        Cmd::FenceElim { arch, provenance, file, common } => fence_elim(out, arch.as_deref(), provenance, file, common),
        Cmd::Robust { strong, weak, enforce, semantic, file, common } => {
            robust_cmd(out, strong, weak.as_deref(), *enforce, *semantic, file, common)
        }
        Cmd::Corpus { action: CorpusCmd::Run { dir, common } } => corpus(out, dir.as_deref(), common),
    };
    match res {
        Ok(c) => c,
        Err(Fail(code, m)) => {
            let _ = writeln!(errout, "weakmem: {m}");
            code
        }
    }
}
