//! Pretty-printer; `parse(emit(p)) == p`.

use std::fmt::Write;

use super::*;

pub fn emit(p: &Program) -> String {
    let mut s = String::new();
    writeln!(s, "arch {}", p.arch).unwrap();
    if !p.init.is_empty() {
        s.push_str("init");
        for (l, v) in &p.init {
            write!(s, " {l}={v}").unwrap();
        }
        s.push('\n');
    }
    for t in &p.threads {
        if t.body.is_empty() {
            writeln!(s, "thread {} {{ }}", t.name).unwrap();
            continue;
        }
        writeln!(s, "thread {} {{", t.name).unwrap();
        for i in &t.body {
            match i {
                Instr::Label(_) => writeln!(s, "{i}").unwrap(),
                _ => writeln!(s, "  {i}").unwrap(),
            }
        }
        s.push_str("}\n");
    }
    if let Some(o) = &p.outcome {
        writeln!(s, "exists ({o})").unwrap();
    }
    for e in &p.expect {
        writeln!(s, "expect {} {}", e.model, if e.allowed { "allowed" } else { "forbidden" }).unwrap();
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_sb() {
        let p = parse("arch x86\nthread P0 {X=1; r1=Y;}\nthread P1 {Y=1; r2=X;}\nexists (P0:r1=0 /\\ P1:r2=0)").unwrap();
        assert_eq!(parse(&emit(&p)).unwrap(), p);
    }

    #[test]
    fn roundtrip_empty_thread() {
        let p = parse("arch armv8\nthread P0 { }").unwrap();
        assert!(p.threads[0].body.is_empty());
        assert_eq!(parse(&emit(&p)).unwrap(), p);
    }

    #[test]
    fn roundtrip_rich() {
        let src = "arch armv8
init X=1 Y[2]=3
thread P0 {
  a = X @acq @@acq
  Y[a * 2 - (1 - a)] = a + 1 @rel
  b = rmw(Z, 0, -1)
L:
  if b != 0 goto L
  dmbld
}
exists (P0:a=1 /\\ (Y[2]=3 \\/ ~X=1))
expect armv8 allowed";
        let p = parse(src).unwrap();
        let again = parse(&emit(&p)).unwrap();
        assert_eq!(again, p);
        assert_eq!(emit(&again), emit(&p));
    }
}
