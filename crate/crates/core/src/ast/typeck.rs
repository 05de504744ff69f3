use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub pos: Pos,
    pub message: String,
}

impl Diagnostic {
    /// `file:line:col: message`
    pub fn render(&self, file: &str) -> String {
        format!("{file}:{}: {}", self.pos, self.message)
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.pos, self.message)
    }
}

impl From<ParseError> for Diagnostic {
    fn from(e: ParseError) -> Diagnostic {
        Diagnostic { pos: e.pos, message: e.message }
    }
}

/// Variable, ADT and predicate signatures of a checked program.
#[derive(Clone, Debug)]
pub struct TypeEnv {
    pub vars: BTreeMap<String, Type>,
    pub adts: BTreeMap<String, AdtDecl>,
    pub preds: BTreeMap<String, Vec<Type>>,
    pub heap_type: Option<String>,
}

impl TypeEnv {
    pub fn new(p: &Program) -> TypeEnv {
        TypeEnv {
            vars: p.all_vars().into_iter().map(|v| (v.name, v.ty)).collect(),
            adts: p.adts.iter().map(|a| (a.name.clone(), a.clone())).collect(),
            preds: p.preds.iter().map(|d| (d.name.clone(), d.params.clone())).collect(),
            heap_type: p.heap_adt().map(|a| a.name.clone()),
        }
    }

    /// Type of a well-typed expression; `None` if it does not typecheck.
    pub fn type_of(&self, e: &Expr) -> Option<Type> {
        let mut sink = Vec::new();
        let t = self.infer(e, Pos::default(), &mut sink);
        if sink.is_empty() {
            t
        } else {
            None
        }
    }

    fn infer(&self, e: &Expr, pos: Pos, diags: &mut Vec<Diagnostic>) -> Option<Type> {
        fn fail(diags: &mut Vec<Diagnostic>, pos: Pos, m: String) -> Option<Type> {
            diags.push(Diagnostic { pos, message: m });
            None
        }
        match e {
            Expr::Int(_) => Some(Type::Int),
            Expr::Null => Some(Type::Addr),
            Expr::DefObj => match &self.heap_type {
                Some(h) => Some(Type::Obj(h.clone())),
                None => fail(diags, pos, "defObj used without a heap type".into()),
            },
            Expr::Var(x) => match self.vars.get(x) {
                Some(t) => Some(t.clone()),
                None => fail(diags, pos, format!("unknown identifier '{x}'")),
            },
            Expr::Unary(op, b) => {
                let t = self.infer(b, pos, diags)?;
                match (op, t) {
                    (_, Type::Int) => Some(Type::Int),
                    (UnOp::Neg, Type::Addr) => {
                        diags.push(Diagnostic { pos, message: "arithmetic on Addr".into() });
                        None
                    }
                    (_, t) => {
                        diags.push(Diagnostic { pos, message: format!("type mismatch: expected Int, found {t}") });
                        None
                    }
                }
            }
            Expr::Binary(op, l, r) => {
                let lt = self.infer(l, pos, diags);
                let rt = self.infer(r, pos, diags);
                let (lt, rt) = (lt?, rt?);
                let mut report = |m: String| {
                    diags.push(Diagnostic { pos, message: m });
                    None
                };
                if op.is_arith()
                    && (lt == Type::Addr || rt == Type::Addr) {
                        return report("arithmetic on Addr".into());
                    }
                match op {
                    BinOp::Eq | BinOp::Ne => {
                        if lt == rt {
                            Some(Type::Int)
                        } else {
                            report(format!("type mismatch: {lt} compared with {rt}"))
                        }
                    }
                    _ => {
                        if lt == Type::Int && rt == Type::Int {
                            Some(Type::Int)
                        } else {
                            let bad = if lt != Type::Int { lt } else { rt };
                            report(format!("type mismatch: expected Int, found {bad}"))
                        }
                    }
                }
            }
            Expr::Ctor(c, args) => {
                let found = self
                    .adts
                    .values()
                    .find_map(|a| a.ctor(c).map(|(_, ct)| (a.name.clone(), ct.clone())));
                let Some((adt, ctor)) = found else {
                    return fail(diags, pos, format!("unknown identifier '{c}'"));
                };
                let arg_types: Vec<Option<Type>> = args.iter().map(|a| self.infer(a, pos, diags)).collect();
                if args.len() != ctor.fields.len() {
                    diags.push(Diagnostic {
                        pos,
                        message: format!("arity mismatch: '{c}' takes {} arguments, given {}", ctor.fields.len(), args.len()),
                    });
                    return None;
                }
                let mut ok = true;
                for (f, t) in ctor.fields.iter().zip(arg_types) {
                    match t {
                        Some(t) if t == f.ty => {}
                        Some(t) => {
                            ok = false;
                            diags.push(Diagnostic {
                                pos,
                                message: format!("type mismatch: field '{}' of '{c}' expects {}, found {t}", f.name, f.ty),
                            });
                        }
                        None => ok = false,
                    }
                }
                ok.then_some(Type::Obj(adt))
            }
            Expr::Sel(b, f) => match self.infer(b, pos, diags)? {
                Type::Obj(a) => match self.adts.get(&a).and_then(|d| d.selector(f)) {
                    Some((_, _, field)) => Some(field.ty.clone()),
                    None => fail(diags, pos, format!("unknown selector '{f}' on {a}")),
                },
                t => fail(diags, pos, format!("type mismatch: selector '{f}' applied to {t}")),
            },
            Expr::Is(b, c) => match self.infer(b, pos, diags)? {
                Type::Obj(a) => match self.adts.get(&a).and_then(|d| d.ctor(c)) {
                    Some(_) => Some(Type::Int),
                    None => fail(diags, pos, format!("'{c}' is not a constructor of {a}")),
                },
                t => fail(diags, pos, format!("type mismatch: tester '{c}' applied to {t}")),
            },
        }
    }
}

/// A program that passed [`typecheck`]. Expression types are recomputed on
/// demand through [`TypeEnv::type_of`].
#[derive(Clone, Debug)]
pub struct TypedProgram {
    pub program: Program,
    pub env: TypeEnv,
}

impl TypedProgram {
    pub fn type_of(&self, e: &Expr) -> Type {
        self.env.type_of(e).expect("expression of a checked program")
    }
}

/// Checks every declaration and statement, collecting one diagnostic per
/// violation rather than stopping at the first.
pub fn typecheck(p: &Program) -> Result<TypedProgram, Vec<Diagnostic>> {
    let env = TypeEnv::new(p);
    let mut diags = Vec::new();
    check_adts(p, &mut diags);
    let mut c = Checker { env: &env, diags: &mut diags };
    c.block(&p.body);
    if diags.is_empty() {
        Ok(TypedProgram { program: p.clone(), env })
    } else {
        Err(diags)
    }
}

fn check_adts(p: &Program, diags: &mut Vec<Diagnostic>) {
    let pos = Pos::default();
    let mut ctor_names = BTreeSet::new();
    for a in &p.adts {
        if a.default_ctor >= a.ctors.len() {
            diags.push(Diagnostic { pos, message: format!("'{}' has no default constructor", a.name) });
        }
        let mut sels = BTreeSet::new();
        for c in &a.ctors {
            if !ctor_names.insert(c.name.as_str()) {
                diags.push(Diagnostic { pos, message: format!("duplicate declaration '{}'", c.name) });
            }
            for f in &c.fields {
                if !sels.insert(f.name.as_str()) {
                    diags.push(Diagnostic { pos, message: format!("duplicate selector '{}' in '{}'", f.name, a.name) });
                }
                if let Type::Obj(n) = &f.ty {
                    if p.adt(n).is_none() {
                        diags.push(Diagnostic { pos, message: format!("unknown identifier '{n}'") });
                    }
                }
            }
        }
    }
    // non-recursive: depth-first search for a cycle through Obj-typed fields
    fn reaches(p: &Program, from: &str, target: &str, seen: &mut BTreeSet<String>) -> bool {
        let Some(a) = p.adt(from) else { return false };
        for c in &a.ctors {
            for f in &c.fields {
                if let Type::Obj(n) = &f.ty {
                    if n == target {
                        return true;
                    }
                    if seen.insert(n.clone()) && reaches(p, n, target, seen) {
                        return true;
                    }
                }
            }
        }
        false
    }
    for a in &p.adts {
        if reaches(p, &a.name, &a.name, &mut BTreeSet::new()) {
            diags.push(Diagnostic { pos, message: format!("recursive data type '{}'", a.name) });
        }
    }
    if let Some(h) = &p.heap_type {
        if p.adt(h).is_none() {
            diags.push(Diagnostic { pos, message: format!("unknown identifier '{h}'") });
        }
    }
    for v in [&p.input, &p.seed] {
        if p.vars.iter().any(|d| &d.name == v) {
            diags.push(Diagnostic { pos, message: format!("duplicate declaration '{v}'") });
        }
    }
}

struct Checker<'a> {
    env: &'a TypeEnv,
    diags: &'a mut Vec<Diagnostic>,
}

impl Checker<'_> {
    fn err(&mut self, pos: Pos, m: impl Into<String>) {
        self.diags.push(Diagnostic { pos, message: m.into() });
    }

    fn expr(&mut self, e: &Expr, pos: Pos) -> Option<Type> {
        self.env.infer(e, pos, self.diags)
    }

    fn var(&mut self, x: &str, pos: Pos) -> Option<Type> {
        match self.env.vars.get(x) {
            Some(t) => Some(t.clone()),
            None => {
                self.err(pos, format!("unknown identifier '{x}'"));
                None
            }
        }
    }

    fn expect(&mut self, what: &str, found: Option<Type>, want: &Type, pos: Pos) {
        if let Some(t) = found {
            if &t != want {
                self.err(pos, format!("type mismatch: {what} expects {want}, found {t}"));
            }
        }
    }

    fn heap(&mut self, pos: Pos) -> Option<Type> {
        match &self.env.heap_type {
            Some(h) => Some(Type::Obj(h.clone())),
            None => {
                self.err(pos, "heap operation without a heap type");
                None
            }
        }
    }

    fn cond(&mut self, c: &Cond, pos: Pos) {
        match c {
            Cond::Expr(e) => {
                let t = self.expr(e, pos);
                self.expect("condition", t, &Type::Int, pos);
            }
            Cond::Pred(name, args) => {
                let types: Vec<Option<Type>> = args.iter().map(|a| self.expr(a, pos)).collect();
                let Some(params) = self.env.preds.get(name).cloned() else {
                    self.err(pos, format!("unknown identifier '{name}'"));
                    return;
                };
                if params.len() != args.len() {
                    self.err(
                        pos,
                        format!("arity mismatch: '{name}' takes {} arguments, given {}", params.len(), args.len()),
                    );
                    return;
                }
                for (i, (want, got)) in params.iter().zip(types).enumerate() {
                    self.expect(&format!("argument {} of '{name}'", i + 1), got, want, pos);
                }
            }
        }
    }

    fn block(&mut self, b: &[Stmt]) {
        for s in b {
            self.stmt(s);
        }
    }

    fn stmt(&mut self, s: &Stmt) {
        let pos = s.pos;
        match &s.kind {
            StmtKind::Assign(x, e) => {
                let xt = self.var(x, pos);
                let et = self.expr(e, pos);
                if let (Some(xt), Some(et)) = (xt, et) {
                    if xt != et {
                        self.err(pos, format!("type mismatch: '{x}' has type {xt}, assigned {et}"));
                    }
                }
            }
            StmtKind::Alloc(p, e) => {
                let pt = self.var(p, pos);
                self.expect("alloc target", pt, &Type::Addr, pos);
                let et = self.expr(e, pos);
                if let Some(h) = self.heap(pos) {
                    self.expect("alloc", et, &h, pos);
                }
            }
            StmtKind::Read(x, p) => {
                let pt = self.var(p, pos);
                self.expect("read address", pt, &Type::Addr, pos);
                let xt = self.var(x, pos);
                if let Some(h) = self.heap(pos) {
                    self.expect("read target", xt, &h, pos);
                }
            }
            StmtKind::Write(p, e) => {
                let pt = self.var(p, pos);
                self.expect("write address", pt, &Type::Addr, pos);
                let et = self.expr(e, pos);
                if let Some(h) = self.heap(pos) {
                    self.expect("write", et, &h, pos);
                }
            }
            StmtKind::Skip => {}
            StmtKind::Havoc(x) => {
                if let Some(Type::Addr) = self.var(x, pos) {
                    self.err(pos, format!("havoc on Addr variable '{x}'"));
                }
            }
            StmtKind::If(c, t, e) => {
                let ct = self.expr(c, pos);
                self.expect("if condition", ct, &Type::Int, pos);
                self.block(t);
                self.block(e);
            }
            StmtKind::While(c, b) => {
                let ct = self.expr(c, pos);
                self.expect("while condition", ct, &Type::Int, pos);
                self.block(b);
            }
            StmtKind::Assume(c) | StmtKind::Assert(c) => self.cond(c, pos),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(src: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
        typecheck(&parse_program(src).unwrap())
    }

    fn messages(src: &str) -> Vec<String> {
        check(src).unwrap_err().into_iter().map(|d| d.message).collect()
    }

    #[test]
    fn addr_arithmetic_is_rejected() {
        let m = messages("prog { adt N { default N(d: Int); } var p: Addr; p := p + 1; }");
        assert!(m.iter().any(|m| m.contains("arithmetic on Addr")), "{m:?}");
    }

    #[test]
    fn assigning_obj_to_int_is_a_type_mismatch() {
        let m = messages("prog { adt N { default N(d: Int); } var x: Int; x := defObj; }");
        assert!(m.iter().any(|m| m.contains("type mismatch")), "{m:?}");
    }

    #[test]
    fn predicate_arity() {
        let m = messages("prog { pred P(Int, Int, Int); assert(P(1, 2)); }");
        assert!(m.iter().any(|m| m.contains("arity mismatch")), "{m:?}");
    }

    #[test]
    fn checking_continues_past_first_error() {
        let m = messages("prog { adt N { default N(d: Int); } var p: Addr; var x: Int; p := p + 1; x := defObj; }");
        assert_eq!(m.len(), 2, "{m:?}");
    }

    #[test]
    fn recursive_adts_are_rejected() {
        let m = messages("prog { adt A { default A(b: B); } adt B { default B(a: A); } }");
        assert!(m.iter().any(|m| m.contains("recursive")), "{m:?}");
    }

    #[test]
    fn selectors_are_unique_per_adt() {
        let m = messages("prog { adt A { default A(x: Int); C(x: Int); } }");
        assert!(m.iter().any(|m| m.contains("duplicate selector")), "{m:?}");
    }

    #[test]
    fn heap_statements_are_typed() {
        let ok = check(
            "prog { adt N { default N(d: Int, nx: Addr); } var p: Addr; var n: N;
               p := alloc(N(1, null)); write(p, n); n := read(p); assert(n.d = 1 && n.nx = null); }",
        );
        assert!(ok.is_ok(), "{:?}", ok.err());
        let m = messages("prog { adt N { default N(d: Int); } var p: Int; p := alloc(defObj); }");
        assert!(m.iter().any(|m| m.contains("type mismatch")), "{m:?}");
    }

    #[test]
    fn type_of_expressions() {
        let t = check("prog { adt N { default N(d: Int, nx: Addr); } var n: N; }").unwrap();
        let sel = Expr::Sel(Box::new(Expr::var("n")), "nx".into());
        assert_eq!(t.type_of(&sel), Type::Addr);
        assert_eq!(t.type_of(&Expr::bin(BinOp::Eq, sel, Expr::Null)), Type::Int);
    }
}
