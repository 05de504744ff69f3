use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::lexer::{tokenize, Tok, Token};
use super::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseError {
    pub pos: Pos,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl std::error::Error for ParseError {}

const RESERVED: &[&str] = &[
    "if", "else", "while", "skip", "havoc", "assume", "assert", "write", "read", "alloc", "null",
    "defObj", "is", "Int", "Addr", "Obj", "prog",
];

/// Parses and name-resolves a UPLang program. Types are checked separately by
/// [`typecheck`](super::typecheck).
pub fn parse_program(src: &str) -> Result<Program, ParseError> {
    let toks = tokenize(src).map_err(|(pos, message)| ParseError { pos, message })?;
    let mut p = Parser::new(toks);
    let prog = p.program()?;
    Ok(assign_locations(prog))
}

/// Parses a standalone expression whose free variables are `scope`, resolving
/// constructors against `prog`'s ADTs.
pub fn parse_expr_in(prog: &Program, scope: &[&str], src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src).map_err(|(pos, message)| ParseError { pos, message })?;
    let mut p = Parser::new(toks);
    p.load_decls(prog);
    p.vars = scope.iter().map(|s| s.to_string()).collect();
    let e = p.expr()?;
    p.expect_eof()?;
    Ok(e)
}

/// One predicate definition of an interpretation file:
/// `R(in: Int, c: Int, n: Node) { disjunct; ... }`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FormulaDef {
    pub pred: String,
    pub params: Vec<(String, Type)>,
    pub disjuncts: Vec<Expr>,
}

/// Parses an interpretation file against the declarations of `prog`.
pub fn parse_formula_defs(prog: &Program, src: &str) -> Result<Vec<FormulaDef>, ParseError> {
    let toks = tokenize(src).map_err(|(pos, message)| ParseError { pos, message })?;
    let mut p = Parser::new(toks);
    p.load_decls(prog);
    let mut defs = Vec::new();
    while p.peek() != &Tok::Eof {
        let (pred, pos) = p.ident()?;
        if !p.preds.contains(&pred) {
            return Err(ParseError { pos, message: format!("unknown identifier '{pred}'") });
        }
        p.expect("(")?;
        let mut params = Vec::new();
        if !p.eat(")") {
            loop {
                let (name, _) = p.ident()?;
                p.expect(":")?;
                let ty = p.ty()?;
                let ty = p.resolve_type(ty, pos)?;
                params.push((name, ty));
                if p.eat(")") {
                    break;
                }
                p.expect(",")?;
            }
        }
        p.vars = params.iter().map(|(n, _)| n.clone()).collect();
        p.expect("{")?;
        let mut disjuncts = Vec::new();
        while !p.eat("}") {
            disjuncts.push(p.expr()?);
            p.expect(";")?;
        }
        defs.push(FormulaDef { pred, params, disjuncts });
    }
    Ok(defs)
}

struct Parser {
    toks: Vec<Token>,
    i: usize,
    vars: BTreeSet<String>,
    ctors: BTreeSet<String>,
    preds: BTreeSet<String>,
    adts: BTreeSet<String>,
    heap_type: Option<String>,
}

fn err<T>(pos: Pos, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { pos, message: message.into() })
}

impl Parser {
    fn new(toks: Vec<Token>) -> Parser {
        Parser {
            toks,
            i: 0,
            vars: BTreeSet::new(),
            ctors: BTreeSet::new(),
            preds: BTreeSet::new(),
            adts: BTreeSet::new(),
            heap_type: None,
        }
    }

    fn load_decls(&mut self, prog: &Program) {
        self.vars = prog.all_vars().into_iter().map(|v| v.name).collect();
        for a in &prog.adts {
            self.adts.insert(a.name.clone());
            self.ctors.extend(a.ctors.iter().map(|c| c.name.clone()));
        }
        self.preds = prog.preds.iter().map(|p| p.name.clone()).collect();
        self.heap_type = prog.heap_adt().map(|a| a.name.clone());
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.i].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.i + k).min(self.toks.len() - 1)].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.i].pos
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.i].clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    fn eat(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, k: &str) -> bool {
        if self.is_kw(k) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Ident(s) => format!("'{s}'"),
            Tok::Int(v) => format!("'{v}'"),
            Tok::Sym(s) => format!("'{s}'"),
            Tok::Eof => "end of input".into(),
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), ParseError> {
        if self.eat(s) {
            Ok(())
        } else {
            err(self.pos(), format!("expected '{s}', found {}", Self::describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, k: &str) -> Result<(), ParseError> {
        if self.eat_kw(k) {
            Ok(())
        } else {
            err(self.pos(), format!("expected '{k}', found {}", Self::describe(self.peek())))
        }
    }

    fn expect_eof(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Eof => Ok(()),
            t => err(self.pos(), format!("unexpected {}", Self::describe(t))),
        }
    }

    fn ident(&mut self) -> Result<(String, Pos), ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) if !RESERVED.contains(&s.as_str()) => {
                self.bump();
                Ok((s, pos))
            }
            t => err(pos, format!("expected identifier, found {}", Self::describe(&t))),
        }
    }

    fn var_ref(&mut self) -> Result<String, ParseError> {
        let (name, pos) = self.ident()?;
        if !self.vars.contains(&name) {
            return err(pos, format!("unknown identifier '{name}'"));
        }
        Ok(name)
    }

    fn ty(&mut self) -> Result<Type, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(match s.as_str() {
                    "Int" => Type::Int,
                    "Addr" => Type::Addr,
                    _ => Type::Obj(s),
                })
            }
            t => err(pos, format!("expected type, found {}", Self::describe(&t))),
        }
    }

    fn resolve_type(&self, ty: Type, pos: Pos) -> Result<Type, ParseError> {
        match ty {
            Type::Obj(n) if !self.adts.contains(&n) => {
                if n == "Obj" {
                    match &self.heap_type {
                        Some(h) => Ok(Type::Obj(h.clone())),
                        None => err(pos, "'Obj' used without a heap type"),
                    }
                } else {
                    err(pos, format!("unknown identifier '{n}'"))
                }
            }
            t => Ok(t),
        }
    }

    fn is_decl_start(&self) -> bool {
        let kw = match self.peek() {
            Tok::Ident(k) => k.as_str(),
            _ => return false,
        };
        matches!(kw, "adt" | "heaptype" | "pred" | "input" | "seed" | "prophecy" | "budget" | "var")
            && matches!(self.peek_at(1), Tok::Ident(_))
    }

    fn program(&mut self) -> Result<Program, ParseError> {
        self.expect_kw("prog")?;
        self.expect("{")?;

        let mut adts: Vec<(AdtDecl, Pos)> = Vec::new();
        let mut heap_type = None;
        let mut preds: Vec<(PredDecl, Pos)> = Vec::new();
        let mut designated: BTreeMap<&'static str, String> = BTreeMap::new();
        let mut vars: Vec<(VarDecl, Pos)> = Vec::new();
        let mut names: BTreeSet<String> = BTreeSet::new();
        let mut type_names: BTreeSet<String> = BTreeSet::new();
        let declare = |names: &mut BTreeSet<String>, n: &str, pos: Pos| {
            if names.insert(n.to_string()) {
                Ok(())
            } else {
                err(pos, format!("duplicate declaration '{n}'"))
            }
        };

        while self.is_decl_start() {
            let kw = match self.bump().tok {
                Tok::Ident(k) => k,
                _ => unreachable!(),
            };
            match kw.as_str() {
                "adt" => {
                    let (name, pos) = self.ident()?;
                    // type names live in their own namespace
                    declare(&mut type_names, &name, pos)?;
                    self.expect("{")?;
                    let mut ctors = Vec::new();
                    let mut default = None;
                    while !self.eat("}") {
                        let dpos = self.pos();
                        if self.is_kw("default") && matches!(self.peek_at(1), Tok::Ident(_)) {
                            self.bump();
                            if default.is_some() {
                                return err(dpos, format!("multiple default constructors in '{name}'"));
                            }
                            default = Some(ctors.len());
                        }
                        let (cname, cpos) = self.ident()?;
                        declare(&mut names, &cname, cpos)?;
                        self.expect("(")?;
                        let mut fields = Vec::new();
                        if !self.eat(")") {
                            loop {
                                let (fname, _) = self.ident()?;
                                self.expect(":")?;
                                let ty = self.ty()?;
                                fields.push(Field { name: fname, ty });
                                if self.eat(")") {
                                    break;
                                }
                                self.expect(",")?;
                            }
                        }
                        self.expect(";")?;
                        ctors.push(Ctor { name: cname, fields });
                    }
                    if ctors.is_empty() {
                        return err(pos, format!("'{name}' has no constructors"));
                    }
                    self.adts.insert(name.clone());
                    self.ctors.extend(ctors.iter().map(|c| c.name.clone()));
                    adts.push((AdtDecl { name, ctors, default_ctor: default.unwrap_or(0) }, pos));
                }
                "heaptype" => {
                    let (name, pos) = self.ident()?;
                    if heap_type.is_some() {
                        return err(pos, "duplicate declaration 'heaptype'");
                    }
                    heap_type = Some((name, pos));
                    self.expect(";")?;
                }
                "pred" => {
                    let (name, pos) = self.ident()?;
                    if name == FAIL_PRED {
                        return err(pos, format!("'{FAIL_PRED}' is reserved"));
                    }
                    declare(&mut names, &name, pos)?;
                    self.expect("(")?;
                    let mut params = Vec::new();
                    if !self.eat(")") {
                        loop {
                            params.push(self.ty()?);
                            if self.eat(")") {
                                break;
                            }
                            self.expect(",")?;
                        }
                    }
                    self.expect(";")?;
                    self.preds.insert(name.clone());
                    preds.push((PredDecl { name, params }, pos));
                }
                "input" | "seed" | "prophecy" | "budget" => {
                    let (name, pos) = self.ident()?;
                    let role: &'static str = match kw.as_str() {
                        "input" => "input",
                        "seed" => "seed",
                        "prophecy" => "prophecy",
                        _ => "budget",
                    };
                    if designated.contains_key(role) {
                        return err(pos, format!("duplicate declaration '{role}'"));
                    }
                    declare(&mut names, &name, pos)?;
                    designated.insert(role, name);
                    self.expect(";")?;
                }
                "var" => {
                    let (name, pos) = self.ident()?;
                    declare(&mut names, &name, pos)?;
                    self.expect(":")?;
                    let ty = self.ty()?;
                    self.expect(";")?;
                    vars.push((VarDecl { name, ty }, pos));
                }
                _ => unreachable!(),
            }
        }

        let start = self.pos();
        for (role, default) in [("input", "in"), ("seed", "seed")] {
            if !designated.contains_key(role) {
                declare(&mut names, default, start)?;
                designated.insert(role, default.to_string());
            }
        }

        if let Some((h, pos)) = &heap_type {
            if !self.adts.contains(h) {
                return err(*pos, format!("unknown identifier '{h}'"));
            }
            self.heap_type = Some(h.clone());
        } else if adts.len() == 1 {
            self.heap_type = Some(adts[0].0.name.clone());
        }

        let mut prog = Program::new(Vec::new());
        for (mut a, pos) in adts {
            for c in &mut a.ctors {
                for f in &mut c.fields {
                    f.ty = self.resolve_type(f.ty.clone(), pos)?;
                }
            }
            prog.adts.push(a);
        }
        for (mut pd, pos) in preds {
            for t in &mut pd.params {
                *t = self.resolve_type(t.clone(), pos)?;
            }
            prog.preds.push(pd);
        }
        for (mut v, pos) in vars {
            v.ty = self.resolve_type(v.ty.clone(), pos)?;
            prog.vars.push(v);
        }
        prog.heap_type = heap_type.map(|(h, _)| h);
        prog.input = designated["input"].clone();
        prog.seed = designated["seed"].clone();
        prog.prophecy = designated.get("prophecy").cloned();
        prog.budget = designated.get("budget").cloned();
        self.vars = prog.all_vars().into_iter().map(|v| v.name).collect();

        let mut body = Vec::new();
        while !self.is_sym("}") {
            if self.is_decl_start() {
                return err(self.pos(), "declarations must precede statements");
            }
            body.push(self.stmt()?);
        }
        self.expect("}")?;
        self.expect_eof()?;
        prog.body = body;
        Ok(prog)
    }

    fn block(&mut self) -> Result<Block, ParseError> {
        self.expect("{")?;
        let mut out = Vec::new();
        while !self.eat("}") {
            out.push(self.stmt()?);
        }
        Ok(out)
    }

    fn stmt(&mut self) -> Result<Stmt, ParseError> {
        let pos = self.pos();
        let kind = if self.eat_kw("skip") {
            self.expect(";")?;
            StmtKind::Skip
        } else if self.eat_kw("havoc") {
            let x = self.var_ref()?;
            self.expect(";")?;
            StmtKind::Havoc(x)
        } else if self.eat_kw("if") {
            let c = self.expr()?;
            let t = self.block()?;
            let e = if self.eat_kw("else") {
                if self.is_kw("if") {
                    vec![self.stmt()?]
                } else {
                    self.block()?
                }
            } else {
                Vec::new()
            };
            StmtKind::If(c, t, e)
        } else if self.eat_kw("while") {
            let c = self.expr()?;
            StmtKind::While(c, self.block()?)
        } else if self.is_kw("assume") || self.is_kw("assert") {
            let is_assume = self.is_kw("assume");
            self.bump();
            self.expect("(")?;
            let c = self.cond()?;
            self.expect(")")?;
            self.expect(";")?;
            if is_assume {
                StmtKind::Assume(c)
            } else {
                StmtKind::Assert(c)
            }
        } else if self.eat_kw("write") {
            self.expect("(")?;
            let p = self.var_ref()?;
            self.expect(",")?;
            let e = self.expr()?;
            self.expect(")")?;
            self.expect(";")?;
            StmtKind::Write(p, e)
        } else {
            let x = self.var_ref()?;
            self.expect(":=")?;
            let kind = if self.is_kw("alloc") && matches!(self.peek_at(1), Tok::Sym("(")) {
                self.bump();
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                StmtKind::Alloc(x, e)
            } else if self.is_kw("read") && matches!(self.peek_at(1), Tok::Sym("(")) {
                self.bump();
                self.bump();
                let p = self.var_ref()?;
                self.expect(")")?;
                StmtKind::Read(x, p)
            } else {
                StmtKind::Assign(x, self.expr()?)
            };
            self.expect(";")?;
            kind
        };
        Ok(Stmt { loc: 0, pos, kind })
    }

    fn cond(&mut self) -> Result<Cond, ParseError> {
        if let Tok::Ident(name) = self.peek().clone() {
            if self.preds.contains(&name) && matches!(self.peek_at(1), Tok::Sym("(")) {
                self.bump();
                self.bump();
                let args = self.args()?;
                return Ok(Cond::Pred(name, args));
            }
        }
        Ok(Cond::Expr(self.expr()?))
    }

    /// Comma-separated expressions up to and including the closing parenthesis.
    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        let mut args = Vec::new();
        if self.eat(")") {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(")") {
                return Ok(args);
            }
            self.expect(",")?;
        }
    }

    pub(super) fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.and_expr()?;
        while self.eat("||") {
            let r = self.and_expr()?;
            l = Expr::bin(BinOp::Or, l, r);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.cmp_expr()?;
        while self.eat("&&") {
            let r = self.cmp_expr()?;
            l = Expr::bin(BinOp::And, l, r);
        }
        Ok(l)
    }

    fn cmp_expr(&mut self) -> Result<Expr, ParseError> {
        let l = self.add_expr()?;
        if self.eat_kw("is") {
            let (c, pos) = self.ident()?;
            if !self.ctors.contains(&c) {
                return err(pos, format!("unknown identifier '{c}'"));
            }
            return Ok(Expr::Is(Box::new(l), c));
        }
        let op = match self.peek() {
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            _ => return Ok(l),
        };
        self.bump();
        let r = self.add_expr()?;
        Ok(Expr::bin(op, l, r))
    }

    fn add_expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.mul_expr()?;
            l = Expr::bin(op, l, r);
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, ParseError> {
        let mut l = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("%") => BinOp::Mod,
                _ => return Ok(l),
            };
            self.bump();
            let r = self.unary()?;
            l = Expr::bin(op, l, r);
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat("-") {
            if let Tok::Int(v) = self.peek().clone() {
                self.bump();
                return Ok(Expr::Int(v.neg()));
            }
            return Ok(Expr::Unary(UnOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat("!") {
            return Ok(Expr::Unary(UnOp::Not, Box::new(self.unary()?)));
        }
        self.postfix()
    }

    fn postfix(&mut self) -> Result<Expr, ParseError> {
        let mut e = self.atom()?;
        while self.eat(".") {
            let (f, _) = self.ident()?;
            e = Expr::Sel(Box::new(e), f);
        }
        Ok(e)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::Int(v) => {
                self.bump();
                Ok(Expr::Int(v))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect(")")?;
                Ok(e)
            }
            Tok::Ident(k) if k == "null" => {
                self.bump();
                Ok(Expr::Null)
            }
            Tok::Ident(k) if k == "defObj" => {
                self.bump();
                Ok(Expr::DefObj)
            }
            Tok::Ident(_) => {
                let (name, pos) = self.ident()?;
                if self.is_sym("(") {
                    if !self.ctors.contains(&name) {
                        return err(pos, format!("unknown identifier '{name}'"));
                    }
                    self.bump();
                    let args = self.args()?;
                    return Ok(Expr::Ctor(name, args));
                }
                if !self.vars.contains(&name) {
                    return err(pos, format!("unknown identifier '{name}'"));
                }
                Ok(Expr::Var(name))
            }
            t => err(pos, format!("expected expression, found {}", Self::describe(&t))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_program() {
        let p = parse_program("prog { var x: Int; x := 0; }").unwrap();
        assert_eq!(p.vars, vec![VarDecl { name: "x".into(), ty: Type::Int }]);
        assert_eq!(p.body.len(), 1);
        assert_eq!(p.body[0].kind, StmtKind::Assign("x".into(), Expr::int(0)));
        assert_eq!(p.body[0].loc, 1);
        assert_eq!(p.input, "in");
        assert_eq!(p.seed, "seed");
    }

    #[test]
    fn syntax_error_has_position() {
        let e = parse_program("prog {\n  var x: Int;\n  x := ;\n}").unwrap_err();
        assert_eq!(e.pos, Pos { line: 3, col: 8 });
    }

    #[test]
    fn duplicate_and_unknown_identifiers() {
        let e = parse_program("prog { var x: Int; var x: Int; }").unwrap_err();
        assert!(e.message.contains("duplicate declaration"), "{e}");
        let e = parse_program("prog { var x: Int; x := y; }").unwrap_err();
        assert!(e.message.contains("unknown identifier"), "{e}");
        let e = parse_program("prog { var in: Int; }").unwrap_err();
        assert!(e.message.contains("duplicate declaration"), "{e}");
    }

    #[test]
    fn predicates_and_constructors() {
        let src = "prog {
  adt Node { default Node(data: Int, next: Addr); Leaf(v: Int); }
  pred P(Int, Obj);
  var n: Node;
  n := Leaf(-3);
  assert(P(in, n));
  assume(n is Leaf && n.v = -3);
}";
        let p = parse_program(src).unwrap();
        assert_eq!(p.preds[0].params, vec![Type::Int, Type::Obj("Node".into())]);
        assert!(matches!(&p.body[1].kind, StmtKind::Assert(Cond::Pred(n, a)) if n == "P" && a.len() == 2));
        assert_eq!(p.body[0].kind, StmtKind::Assign("n".into(), Expr::Ctor("Leaf".into(), vec![Expr::int(-3)])));
    }

    #[test]
    fn precedence() {
        let p = parse_program("prog { var x: Int; x := 1 + 2 * 3 < 4 || 0 && 1; }").unwrap();
        let StmtKind::Assign(_, e) = &p.body[0].kind else { panic!() };
        let expected = Expr::bin(
            BinOp::Or,
            Expr::bin(
                BinOp::Lt,
                Expr::bin(BinOp::Add, Expr::int(1), Expr::bin(BinOp::Mul, Expr::int(2), Expr::int(3))),
                Expr::int(4),
            ),
            Expr::bin(BinOp::And, Expr::int(0), Expr::int(1)),
        );
        assert_eq!(e, &expected);
    }

    #[test]
    fn seed_is_usable_as_variable_name() {
        let p = parse_program("prog { seed seed; var x: Int; seed := seed / 2; x := seed; }").unwrap();
        assert_eq!(p.body.len(), 2);
    }

    #[test]
    fn interpretation_file() {
        let prog = parse_program("prog { adt N { default N(d: Int); } pred R(Int, Int, N); }").unwrap();
        let defs = parse_formula_defs(&prog, "R(a: Int, c: Int, n: Obj) { a < 0 && c = 1; n.d = 2; }").unwrap();
        assert_eq!(defs.len(), 1);
        assert_eq!(defs[0].params[2].1, Type::Obj("N".into()));
        assert_eq!(defs[0].disjuncts.len(), 2);
    }
}
