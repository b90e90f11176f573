//! Maps the rmw litmus test with the bundled x86 to ARMv8 scheme and with a
//! variant missing the leading barrier, and compares behaviors.
//!
//! `cargo run --example mapping_verification`

use weakmem::litmus::{emit, parse};
use weakmem::mapping::{map_program, scheme, verify_mapping, MappingVerdict};

const RMW: &str = "
arch x86
thread P0 { X = 1; a = rmw(Y, 0, 1); }
thread P1 { Y = 1; b = rmw(X, 0, 1); }
exists (P0:a=0 /\\ P1:b=0)
";

fn main() {
    let p = parse(RMW).unwrap();
    for name in ["x86-armv8", "broken-rmw-no-leading"] {
        let s = scheme(name).unwrap();
        println!("{s}");
        println!("{}", emit(&map_program(&p, &s).unwrap()));
        match verify_mapping(&p, &s).unwrap() {
            MappingVerdict::Sound => println!("=> sound\n"),
            MappingVerdict::Unsound(b) => println!("=> unsound, new behavior {}\n", b.render(&["P0".into(), "P1".into()])),
        }
    }
}
