//! Validates the ARMv8 reordering table over random contexts and prints one
//! line per cell.
//!
//! `cargo run --release --example transform_table -- [contexts] [seed]`

use weakmem::mapping::validate_transform_table;

fn main() {
    let mut args = std::env::args().skip(1);
    let contexts = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let rep = validate_transform_table(contexts, seed).unwrap();
    for c in &rep.cells {
        let kind = if c.allowed { "yes" } else { "no " };
        let first = c.detail.lines().next().unwrap_or("");
        println!("{:<22} {kind} {} {first}", c.name, if c.ok { "ok  " } else { "FAIL" });
    }
    println!("{} cells, all ok: {}", rep.cells.len(), rep.all_ok());
}
