//! Searches random contexts for programs where a forbidden reordering adds
//! behaviors, and prints each as a witness file.
//!
//! `cargo run --example witness_search -- [tries] [outdir]`

use weakmem::litmus::emit;
use weakmem::mapping::{class_name, reorder_safe, search_reorder_witness, table_classes};

fn main() {
    let mut args = std::env::args().skip(1);
    let tries: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(2000);
    let outdir = args.next();
    for a in table_classes() {
        for b in table_classes() {
            if reorder_safe(a, b) != Some(false) {
                continue;
            }
            let (an, bn) = (class_name(a), class_name(b));
            match search_reorder_witness(a, b, tries) {
                None => println!("{an} {bn}: none in {tries} contexts"),
                Some((p, t)) => {
                    let text = format!("# cell {an} {bn}\n# transform reorder P{} {}\n{}", t.tid, t.at, emit(&p));
                    match &outdir {
                        Some(d) => {
                            std::fs::write(format!("{d}/reorder_{an}_{bn}.lit"), &text).unwrap();
                            println!("{an} {bn}: found");
                        }
                        None => println!("{text}"),
                    }
                }
            }
        }
    }
}
