//! ARMv7 preserved program order and ARMv8 ordered-before on a random
//! execution.
//!
//! `cargo run --example ppo -- [seed]`

use weakmem::gen::random_execution;
use weakmem::models::{armv7_ppo, armv8_ob, check_armv7, check_armv8};

fn main() {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(7);
    let x = random_execution(seed, 8);
    println!("{}", x.to_text());
    println!("ppo: {:?}", armv7_ppo(&x).pairs().collect::<Vec<_>>());
    println!("ob:  {:?}", armv8_ob(&x).pairs().collect::<Vec<_>>());
    println!("ARMv7 {:?}\nARMv8 {:?}", check_armv7(&x), check_armv8(&x));
}
