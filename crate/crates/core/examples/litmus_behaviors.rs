//! Store buffering under every model, then one consistency check on a
//! hand-picked execution.
//!
//! `cargo run --example litmus_behaviors`

use weakmem::enumerate::{behaviors, for_each_execution, EnumConfig};
use weakmem::litmus::parse;
use weakmem::models::{check, ModelId};

const SB: &str = "
arch x86
thread P0 { X = 1; a = Y; }
thread P1 { Y = 1; b = X; }
exists (P0:a=0 /\\ P1:b=0)
";

fn main() {
    let p = parse(SB).unwrap();
    for m in [ModelId::Sc, ModelId::X86, ModelId::X86A, ModelId::Armv8, ModelId::Armv7] {
        let b = behaviors(&p, m).unwrap();
        let hit = b.matching(&p).count() > 0;
        println!("{:<8} {} behaviors, a=b=0 {}", m.name(), b.len(), if hit { "allowed" } else { "forbidden" });
    }

    // first execution where both loads read init, checked axiom by axiom
    let mut shown = false;
    for_each_execution(&p, ModelId::X86A, &EnumConfig::default(), &mut |x| {
        if shown || x.events().iter().any(|e| e.rval == Some(1)) {
            return;
        }
        shown = true;
        println!("\n{}", x.to_text());
        for m in [ModelId::Sc, ModelId::X86A] {
            let v = check(x, m).unwrap();
            println!("{}: {v:?}", m.name());
        }
    })
    .unwrap();
}
