//! x86 program mapped to ARMv8 and cleaned of redundant barriers.
//!
//! `cargo run --example fence_elimination`

use weakmem::enumerate::behaviors;
use weakmem::fenceopt::{eliminate_fences, Provenance};
use weakmem::litmus::{emit, parse};
use weakmem::mapping::{map_program, scheme};
use weakmem::models::ModelId;

fn main() {
    let src = parse("arch x86\nthread P0 { a = X; mfence; Y = 1; }\nthread P1 { b = Y; mfence; X = 1; }").unwrap();
    let arm = map_program(&src, &scheme("x86-armv8").unwrap()).unwrap();
    println!("mapped:\n{}", emit(&arm));
    let out = eliminate_fences(&arm, Provenance::FromX86).unwrap();
    for d in &out.decisions {
        println!("{d}");
    }
    println!("\nafter:\n{}", emit(&out.program));
    let same = behaviors(&arm, ModelId::Armv8).unwrap() == behaviors(&out.program, ModelId::Armv8).unwrap();
    println!("behaviors unchanged: {same}");
}
