//! Static robustness of store buffering against x86A, fence insertion, and
//! the execution-level confirmation.
//!
//! `cargo run --example robustness`

use weakmem::litmus::{emit, parse};
use weakmem::models::ModelId;
use weakmem::robust::{check_robust, enforce_robust, semantic_robust};

fn main() {
    let sb = parse("arch x86\nthread P0 { X = 1; a = Y; }\nthread P1 { Y = 1; b = X; }").unwrap();
    let rep = check_robust(&sb, ModelId::Sc, ModelId::X86A).unwrap();
    println!("{rep}");
    let (fixed, rep) = enforce_robust(&sb, ModelId::Sc, ModelId::X86A).unwrap();
    println!("{rep}\n{}", emit(&fixed));
    println!("robust after insertion: {}", semantic_robust(&fixed, ModelId::Sc, ModelId::X86A).unwrap());

    let chain = parse(
        "arch armv7
thread P0 { a = A; X = a + 1; }
thread P1 { X = 1; }
thread P2 { d = X; Y = d; }
thread P3 { f = Y; dmb; Z = 1; }
thread P4 { Z = 2; }
thread P5 { i = Z; A = i - 1; }",
    )
    .unwrap();
    let rep = check_robust(&chain, ModelId::Sc, ModelId::Armv7).unwrap();
    println!("\ndependency-only chain against ARMv7: {}", if rep.robust { "robust" } else { "not robust" });
}
