//! Line-oriented litmus parser.

use super::*;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Sym(&'static str),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS: &[&str] = &[
    "/\\", "\\/", "@@", "==", "!=", "<=", ">=", "=", "<", ">", "+", "-", "*", "(", ")", "[", "]", "{", "}", ";", ":",
    ",", "@", "~",
];

fn lex(text: &str) -> Result<Vec<Token>, LitmusError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line_no = ln + 1;
        let code = line.split('#').next().unwrap_or("");
        let chars: Vec<char> = code.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            let col = i + 1;
            if c.is_whitespace() {
                i += 1;
            } else if c.is_ascii_alphabetic() || c == '_' {
                let s = i;
                while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_' || chars[i] == '.') {
                    i += 1;
                }
                out.push(Token { tok: Tok::Ident(chars[s..i].iter().collect()), line: line_no, col });
            } else if c.is_ascii_digit() {
                let s = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[s..i].iter().collect();
                let v = text.parse::<i64>().map_err(|_| LitmusError::SyntaxError {
                    line: line_no,
                    col,
                    message: format!("integer `{text}` out of range"),
                })?;
                out.push(Token { tok: Tok::Int(v), line: line_no, col });
            } else {
                let rest: String = chars[i..].iter().take(2).collect();
                match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                    Some(s) => {
                        out.push(Token { tok: Tok::Sym(s), line: line_no, col });
                        i += s.chars().count();
                    }
                    None => {
                        return Err(LitmusError::SyntaxError {
                            line: line_no,
                            col,
                            message: format!("unexpected character `{c}`"),
                        })
                    }
                }
            }
        }
        out.push(Token { tok: Tok::Newline, line: line_no, col: chars.len() + 1 });
    }
    let last = out.last().map(|t| t.line).unwrap_or(1);
    out.push(Token { tok: Tok::Eof, line: last, col: 1 });
    Ok(out)
}

fn is_location_name(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

type PResult<T> = Result<T, LitmusError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }
    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }
    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let t = &self.toks[self.pos];
        Err(LitmusError::SyntaxError { line: t.line, col: t.col, message: message.into() })
    }
    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.next();
        }
    }
    fn skip_separators(&mut self) {
        while matches!(self.peek(), Tok::Newline | Tok::Sym(";")) {
            self.next();
        }
    }
    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }
    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.next();
            true
        } else {
            false
        }
    }
    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }
    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.next();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", describe(&t))),
        }
    }
    fn int(&mut self) -> PResult<i64> {
        let neg = self.eat_sym("-");
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(if neg { -v } else { v })
            }
            t => self.err(format!("expected integer, found {}", describe(&t))),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        self.skip_newlines();
        let mut arch = None;
        let mut prog = Program::new(Arch::ScRef);
        loop {
            self.skip_newlines();
            match self.peek().clone() {
                Tok::Eof => break,
                Tok::Ident(k) if k == "arch" => {
                    self.next();
                    let name = self.ident()?;
                    match Arch::from_name(&name) {
                        Some(a) => arch = Some(a),
                        None => return self.err(format!("unknown arch `{name}`")),
                    }
                }
                Tok::Ident(k) if k == "init" => {
                    self.next();
                    while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        if self.eat_sym(";") || self.eat_sym(",") {
                            continue;
                        }
                        let loc = self.concrete_location()?;
                        self.expect_sym("=")?;
                        let v = self.int()?;
                        prog.init.insert(loc, v);
                    }
                }
                Tok::Ident(k) if k == "thread" => {
                    self.next();
                    let name = self.ident()?;
                    if prog.threads.iter().any(|t| t.name == name) {
                        return self.err(format!("duplicate thread `{name}`"));
                    }
                    self.skip_newlines();
                    self.expect_sym("{")?;
                    let body = self.thread_body()?;
                    prog.threads.push(Thread { name, body });
                    continue;
                }
                Tok::Ident(k) if k == "exists" => {
                    self.next();
                    prog.outcome = Some(self.pred_or()?);
                }
                Tok::Ident(k) if k == "expect" => {
                    self.next();
                    let model = self.ident()?.to_ascii_lowercase();
                    let verdict = self.ident()?;
                    let allowed = match verdict.as_str() {
                        "allowed" => true,
                        "forbidden" => false,
                        _ => return self.err("expected `allowed` or `forbidden`"),
                    };
                    prog.expect.push(Expectation { model, allowed });
                }
                t => return self.err(format!("unexpected {}", describe(&t))),
            }
            if !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                return self.err(format!("trailing {}", describe(self.peek())));
            }
        }
        match arch {
            Some(a) => prog.arch = a,
            None => return self.err("missing `arch` declaration"),
        }
        Ok(prog)
    }

    fn concrete_location(&mut self) -> PResult<Location> {
        let base = self.ident()?;
        if !is_location_name(&base) {
            return self.err(format!("`{base}` is not a location (locations start uppercase)"));
        }
        if self.eat_sym("[") {
            let i = self.int()?;
            self.expect_sym("]")?;
            Ok(Location::indexed(&base, i))
        } else {
            Ok(Location::named(&base))
        }
    }

    fn thread_body(&mut self) -> PResult<Vec<Instr>> {
        let mut body = Vec::new();
        loop {
            self.skip_separators();
            if self.eat_sym("}") {
                return Ok(body);
            }
            if *self.peek() == Tok::Eof {
                return self.err("unterminated thread body");
            }
            // label
            if let (Tok::Ident(l), Tok::Sym(":")) = (self.peek().clone(), self.peek_at(1).clone()) {
                self.next();
                self.next();
                body.push(Instr::Label(l));
                continue;
            }
            body.push(self.statement()?);
            if !(self.is_sym(";") || self.is_sym("}") || *self.peek() == Tok::Newline) {
                return self.err(format!("expected `;` or newline, found {}", describe(self.peek())));
            }
        }
    }

    fn statement(&mut self) -> PResult<Instr> {
        let head = self.ident()?;
        if let Some(k) = FenceKind::from_name(&head) {
            return Ok(Instr::Fence(k));
        }
        if head == "if" {
            let cond = self.expr()?;
            match self.ident()?.as_str() {
                "goto" => {}
                _ => return self.err("expected `goto`"),
            }
            let target = self.ident()?;
            return Ok(Instr::Branch { cond, target });
        }
        if is_location_name(&head) {
            let loc = self.loc_tail(head)?;
            self.expect_sym("=")?;
            let val = self.expr()?;
            let (flavor, c11) = self.suffixes()?;
            if flavor == Flavor::Acq {
                return self.err("`@acq` is not a store flavor");
            }
            return Ok(Instr::Store { loc, val, flavor, c11 });
        }
        let reg = head;
        self.expect_sym("=")?;
        match self.peek().clone() {
            Tok::Ident(k) if k == "rmw" && matches!(self.peek_at(1), Tok::Sym("(")) => {
                self.next();
                self.next();
                let base = self.ident()?;
                if !is_location_name(&base) {
                    return self.err("rmw needs a location");
                }
                let loc = self.loc_tail(base)?;
                self.expect_sym(",")?;
                let a = self.expr()?;
                let op = if self.eat_sym(",") {
                    RmwOp::Cas { expected: a, new: self.expr()? }
                } else {
                    RmwOp::FetchAdd(a)
                };
                self.expect_sym(")")?;
                let (flavor, c11) = self.suffixes()?;
                Ok(Instr::Rmw { reg, loc, op, flavor, c11 })
            }
            Tok::Ident(k) if is_location_name(&k) => {
                self.next();
                let loc = self.loc_tail(k)?;
                let (flavor, c11) = self.suffixes()?;
                if flavor == Flavor::Rel {
                    return self.err("`@rel` is not a load flavor");
                }
                Ok(Instr::Load { reg, loc, flavor, c11 })
            }
            _ => {
                let expr = self.expr()?;
                Ok(Instr::RegOp { reg, expr })
            }
        }
    }

    fn loc_tail(&mut self, base: String) -> PResult<LocExpr> {
        if self.eat_sym("[") {
            let e = self.expr()?;
            self.expect_sym("]")?;
            Ok(LocExpr { base, index: Some(e) })
        } else {
            Ok(LocExpr { base, index: None })
        }
    }

    fn suffixes(&mut self) -> PResult<(Flavor, Option<C11>)> {
        let mut flavor = Flavor::Plain;
        let mut c11 = None;
        loop {
            if self.eat_sym("@@") {
                let n = self.ident()?;
                c11 = Some(match n.as_str() {
                    "na" => C11::Na,
                    "rlx" => C11::Rlx,
                    "acq" => C11::Acq,
                    "rel" => C11::Rel,
                    "sc" => C11::Sc,
                    _ => return self.err(format!("unknown C11 annotation `{n}`")),
                });
            } else if self.eat_sym("@") {
                let n = self.ident()?;
                flavor = match n.as_str() {
                    "acq" => Flavor::Acq,
                    "rel" => Flavor::Rel,
                    _ => return self.err(format!("unknown flavor `{n}`")),
                };
            } else {
                return Ok((flavor, c11));
            }
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let lhs = self.additive()?;
        let op = match self.peek() {
            Tok::Sym("==") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.additive()?;
        Ok(Expr::bin(op, lhs, rhs))
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut e = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(e),
            };
            self.next();
            e = Expr::bin(op, e, self.term()?);
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        while self.eat_sym("*") {
            e = Expr::bin(BinOp::Mul, e, self.atom()?);
        }
        Ok(e)
    }

    fn atom(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(Expr::Const(v))
            }
            Tok::Sym("-") => {
                self.next();
                match self.peek().clone() {
                    Tok::Int(v) => {
                        self.next();
                        Ok(Expr::Const(-v))
                    }
                    _ => {
                        let e = self.atom()?;
                        Ok(Expr::bin(BinOp::Sub, Expr::Const(0), e))
                    }
                }
            }
            Tok::Sym("(") => {
                self.next();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Ident(r) if !is_location_name(&r) => {
                self.next();
                Ok(Expr::Reg(r))
            }
            Tok::Ident(r) => self.err(format!("location `{r}` cannot appear inside an expression")),
            t => self.err(format!("expected expression, found {}", describe(&t))),
        }
    }

    fn pred_or(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.pred_and()?];
        while self.eat_sym("\\/") {
            ps.push(self.pred_and()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::Or(ps) })
    }

    fn pred_and(&mut self) -> PResult<Pred> {
        let mut ps = vec![self.pred_atom()?];
        while self.eat_sym("/\\") {
            ps.push(self.pred_atom()?);
        }
        Ok(if ps.len() == 1 { ps.pop().unwrap() } else { Pred::And(ps) })
    }

    fn pred_atom(&mut self) -> PResult<Pred> {
        if self.eat_sym("~") {
            return Ok(Pred::Not(Box::new(self.pred_atom()?)));
        }
        if self.eat_sym("(") {
            let p = self.pred_or()?;
            self.expect_sym(")")?;
            return Ok(p);
        }
        let name = self.ident()?;
        if self.eat_sym(":") {
            let reg = self.ident()?;
            self.expect_sym("=")?;
            let val = self.int()?;
            return Ok(Pred::Reg { thread: name, reg, val });
        }
        if !is_location_name(&name) {
            return self.err(format!("`{name}` is neither `Thread:reg` nor a location"));
        }
        let loc = if self.eat_sym("[") {
            let i = self.int()?;
            self.expect_sym("]")?;
            Location::indexed(&name, i)
        } else {
            Location::named(&name)
        };
        self.expect_sym("=")?;
        let val = self.int()?;
        Ok(Pred::Mem { loc, val })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(v) => format!("`{v}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Newline => "end of line".into(),
        Tok::Eof => "end of input".into(),
    }
}

/// Parses litmus text into a validated [`Program`] with init defaults filled in.
pub fn parse(text: &str) -> Result<Program, LitmusError> {
    let toks = lex(text)?;
    let mut p = Parser { toks, pos: 0 }.program()?;
    // labels unique per thread
    for t in &p.threads {
        let mut seen = std::collections::BTreeSet::new();
        for i in &t.body {
            if let Instr::Label(l) = i {
                if !seen.insert(l.clone()) {
                    return Err(LitmusError::SyntaxError {
                        line: 0,
                        col: 0,
                        message: format!("duplicate label `{l}` in thread {}", t.name),
                    });
                }
            }
        }
    }
    p.validate()?;
    if let Some(o) = &p.outcome {
        check_pred_threads(o, &p)?;
    }
    p.fill_init_defaults();
    Ok(p)
}

fn check_pred_threads(o: &Pred, p: &Program) -> Result<(), LitmusError> {
    match o {
        Pred::Reg { thread, .. } if p.thread_index(thread).is_none() => Err(LitmusError::SyntaxError {
            line: 0,
            col: 0,
            message: format!("outcome names unknown thread `{thread}`"),
        }),
        Pred::Not(q) => check_pred_threads(q, p),
        Pred::And(qs) | Pred::Or(qs) => qs.iter().try_for_each(|q| check_pred_threads(q, p)),
        _ => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sb_parses_with_defaults() {
        let p = parse("arch x86\nthread P0 {X=1; r1=Y;} thread P1 {Y=1; r2=X;}").unwrap();
        assert_eq!(p.threads.len(), 2);
        let p = parse("arch x86\nthread P0 {X=1; r1=Y;}\nthread P1 {Y=1; r2=X;}\nexists (P0:r1=0 /\\ P1:r2=0)").unwrap();
        assert_eq!(p.threads.len(), 2);
        assert_eq!(p.init.get(&Location::named("X")), Some(&0));
        assert_eq!(p.init.get(&Location::named("Y")), Some(&0));
        assert_eq!(p.threads[0].body[1], Instr::load("r1", LocExpr::named("Y")));
    }

    #[test]
    fn iriw_addr_parses() {
        let src = "arch armv8
init X[1]=0 Y[1]=0
thread P0 { X[1] = 1 }
thread P1 { a = X[1]; b = Y[a] }
thread P2 { c = Y[1]; d = X[c] }
thread P3 { Y[1] = 1 }
exists (P1:a=1 /\\ P1:b=0 /\\ P2:c=1 /\\ P2:d=0)";
        let p = parse(src).unwrap();
        assert_eq!(p.threads.len(), 4);
        let deps = derive_deps(&p);
        assert!(deps.threads[1].addr.contains(&(0, 1)));
        assert!(deps.threads[2].addr.contains(&(0, 1)));
    }

    #[test]
    fn arch_mismatch() {
        let e = parse("arch armv7\nthread P0 { DMBLD }").unwrap_err();
        assert!(matches!(e, LitmusError::ArchMismatch { .. }), "{e:?}");
        let e = parse("arch x86\nthread P0 { r = X @acq }").unwrap_err();
        assert!(matches!(e, LitmusError::ArchMismatch { .. }));
    }

    #[test]
    fn errors_have_positions() {
        match parse("arch armv8\nthread P0 {\n  r = ?\n}") {
            Err(LitmusError::SyntaxError { line, col, .. }) => assert_eq!((line, col), (3, 7)),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            parse("arch armv8\nthread P0 { if r == 0 goto L }").unwrap_err(),
            LitmusError::UnresolvedLabel("L".into())
        );
    }

    #[test]
    fn statement_forms() {
        let p = parse(
            "arch armv8
thread P0 {
  a = X @acq
  Y = a + 1 @rel @@sc
  b = rmw(Z, 0, 1) @acq
  c = rmw(Z, 2)
  d = a * 0
  L:
  if d == 0 goto L
  dmbld; dmbst; dmbfull; isb
}",
        )
        .unwrap();
        let b = &p.threads[0].body;
        assert_eq!(b[0].class(), AccessClass::A);
        assert_eq!(b[1].class(), AccessClass::L);
        assert_eq!(b[1].c11(), Some(C11::Sc));
        assert!(matches!(&b[2], Instr::Rmw { op: RmwOp::Cas { .. }, flavor: Flavor::Acq, .. }));
        assert!(matches!(&b[3], Instr::Rmw { op: RmwOp::FetchAdd(_), .. }));
        assert!(matches!(&b[4], Instr::RegOp { .. }));
        assert_eq!(b[5], Instr::Label("L".into()));
        assert_eq!(b.len(), 11);
    }
}
