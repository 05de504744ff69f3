//! The rewrite rules of the `R` and `RW` encoding families.

use std::collections::BTreeMap;

use crate::ast::{build, fresh_name, BinOp, Block, Cond, Expr, PredDecl, Program, Stmt, StmtKind, Type, VarDecl};

use super::{Base, EncodeError, EncodedProgram, EncodingConfig, Introduced, R_PRED, W_PRED};

/// Applies the base encoding of `cfg` (never `N`) with its tagging, caching
/// and scope-variable extensions. `p` must be free of `havoc` and carry
/// control locations.
pub fn rewrite(p: &Program, cfg: &EncodingConfig) -> Result<EncodedProgram, EncodeError> {
    assert!(cfg.base != Base::N, "Enc_n has no rewrite rules");
    for name in [R_PRED, W_PRED] {
        if p.pred(name).is_some() {
            return Err(EncodeError::PredicateClash(name.into()));
        }
    }
    if p.prophecy.is_some() {
        return Err(EncodeError::AlreadyEncoded("prophecy"));
    }
    let mut q = retype(p);
    for v in &cfg.scope_vars {
        match q.var_type(v) {
            None => return Err(EncodeError::UnknownVariable(v.clone())),
            Some(Type::Int) => {}
            Some(_) => return Err(EncodeError::NotInt(v.clone())),
        }
    }
    let heap_ty = q.heap_adt().map(|a| Type::Obj(a.name.clone()));
    let rw = cfg.base.is_rw();
    let mut used = q.identifiers();
    let mut fresh = |base: &str| {
        let n = fresh_name(base, &used);
        used.insert(n.clone());
        n
    };
    let mut enc = Rules {
        cfg,
        input: q.input.clone(),
        cnt_alloc: fresh("$cnt_alloc"),
        cnt: fresh("$cnt"),
        last_addr: fresh("$last_addr"),
        last: (!rw && heap_ty.is_some()).then(|| fresh("$last")),
        cnt_last: rw.then(|| fresh("$cnt_last")),
        t: rw.then(|| fresh("$t")),
        last_loc: cfg.tagging.then(|| fresh("$last_loc")),
        loc: cfg.tagging.then(|| fresh("$l")),
        cache: cfg.caching.then(|| (fresh("$lastc_addr"), fresh("$lastc_data"))),
        seed0: q.reads_var(&q.seed).then(|| fresh("$seed0")),
        temp: fresh("$wv"),
        temp_used: false,
    };

    let mut vars = vec![VarDecl { name: enc.cnt_alloc.clone(), ty: Type::Int }, VarDecl { name: enc.cnt.clone(), ty: Type::Int }];
    let mut init = vec![build::assign(&enc.cnt_alloc, Expr::int(0)), build::assign(&enc.cnt, Expr::int(0))];
    if let Some(s0) = &enc.seed0 {
        vars.push(VarDecl { name: s0.clone(), ty: Type::Int });
        init.insert(0, build::assign(s0, Expr::var(&q.seed)));
    }
    if let (Some(last), Some(ty)) = (&enc.last, &heap_ty) {
        vars.push(VarDecl { name: last.clone(), ty: ty.clone() });
        init.push(build::assign(last, Expr::DefObj));
    }
    for v in [&enc.cnt_last, &enc.t, &enc.last_loc, &enc.loc].into_iter().flatten() {
        vars.push(VarDecl { name: v.clone(), ty: Type::Int });
        init.push(build::assign(v, Expr::int(0)));
    }
    if let (Some((ca, cd)), Some(ty)) = (&enc.cache, &heap_ty) {
        vars.push(VarDecl { name: ca.clone(), ty: Type::Int });
        vars.push(VarDecl { name: cd.clone(), ty: ty.clone() });
        init.push(build::assign(ca, Expr::int(-1)));
        init.push(build::assign(cd, Expr::DefObj));
    }
    if cfg.base == Base::RW && heap_ty.is_some() {
        let wloc = cfg.tagging.then(|| Expr::int(0));
        init.push(build::assert_pred(W_PRED, enc.w_args(Expr::int(0), Expr::DefObj, wloc)));
    }

    let body = enc.block(&q.body);
    if enc.temp_used {
        vars.push(VarDecl { name: enc.temp.clone(), ty: heap_ty.clone().expect("heap operand without heap type") });
    }

    let mut predicates = Vec::new();
    let mut functional_keys = BTreeMap::new();
    if let Some(ty) = &heap_ty {
        let tail = |n_tags: usize, scope: bool| {
            let mut v = vec![Type::Int; n_tags];
            if enc.seed0.is_some() {
                v.push(Type::Int);
            }
            if scope {
                v.extend(cfg.scope_vars.iter().map(|_| Type::Int));
            }
            v
        };
        let tags = if cfg.tagging { 2 } else { 0 };
        let mut r = vec![Type::Int, Type::Int, if rw { Type::Int } else { ty.clone() }];
        r.extend(tail(tags, true));
        functional_keys.insert(R_PRED.to_string(), key_positions(r.len(), cfg.tagging));
        predicates.push(PredDecl { name: R_PRED.into(), params: r });
        if rw {
            let mut w = vec![Type::Int, Type::Int, ty.clone()];
            w.extend(tail(cfg.tagging as usize, false));
            functional_keys.insert(W_PRED.to_string(), key_positions(w.len(), cfg.tagging));
            predicates.push(PredDecl { name: W_PRED.into(), params: w });
        }
    }

    let introduced = Introduced {
        cnt_alloc: Some(enc.cnt_alloc.clone()),
        cnt: Some(enc.cnt.clone()),
        last: enc.last.clone(),
        cnt_last: enc.cnt_last.clone(),
        last_addr: Some(enc.last_addr.clone()),
        t: enc.t.clone(),
        last_loc: enc.last_loc.clone(),
        loc: enc.loc.clone(),
        cache_addr: enc.cache.as_ref().map(|c| c.0.clone()),
        cache_data: enc.cache.as_ref().map(|c| c.1.clone()),
        seed0: enc.seed0.clone(),
        temp: enc.temp_used.then(|| enc.temp.clone()),
        ..Introduced::default()
    };
    q.prophecy = Some(enc.last_addr.clone());
    q.vars.extend(vars);
    q.preds.extend(predicates.iter().cloned());
    init.extend(body);
    q.body = init;
    Ok(EncodedProgram {
        program: q,
        introduced,
        predicates,
        functional_keys,
        source: p.clone(),
        normalized: p.clone(),
        config: cfg.clone(),
    })
}

/// Positions other than the stored value (and, when tagged, its write location).
fn key_positions(arity: usize, tagged: bool) -> Vec<usize> {
    (0..arity).filter(|&i| i != 2 && !(tagged && i == 3)).collect()
}

struct Rules<'a> {
    cfg: &'a EncodingConfig,
    input: String,
    cnt_alloc: String,
    cnt: String,
    last_addr: String,
    last: Option<String>,
    cnt_last: Option<String>,
    t: Option<String>,
    last_loc: Option<String>,
    loc: Option<String>,
    cache: Option<(String, String)>,
    seed0: Option<String>,
    temp: String,
    temp_used: bool,
}

fn v(name: &str) -> Expr {
    Expr::var(name)
}

fn eq(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::Eq, a, b)
}

fn and(a: Expr, b: Expr) -> Expr {
    Expr::bin(BinOp::And, a, b)
}

fn incr(x: &str) -> Stmt {
    build::assign(x, Expr::bin(BinOp::Add, v(x), Expr::int(1)))
}

impl Rules<'_> {
    fn r_args(&self, val: Expr, tags: Option<(Expr, u32)>) -> Vec<Expr> {
        let mut a = vec![v(&self.input), v(&self.cnt), val];
        if let Some((wloc, rloc)) = tags {
            a.push(wloc);
            a.push(Expr::int(rloc as i64));
        }
        a.extend(self.seed0.iter().map(|s| v(s)));
        a.extend(self.cfg.scope_vars.iter().map(|s| v(s)));
        a
    }

    fn w_args(&self, time: Expr, val: Expr, wloc: Option<Expr>) -> Vec<Expr> {
        let mut a = vec![v(&self.input), time, val];
        a.extend(wloc);
        a.extend(self.seed0.iter().map(|s| v(s)));
        a
    }

    /// `0 < p && p <= $cnt_alloc`
    fn valid(&self, p: &str) -> Expr {
        and(Expr::bin(BinOp::Lt, Expr::int(0), v(p)), Expr::bin(BinOp::Le, v(p), v(&self.cnt_alloc)))
    }

    fn block(&mut self, b: &Block) -> Block {
        let mut out = Vec::new();
        for s in b {
            self.stmt(s, &mut out);
        }
        out
    }

    fn stmt(&mut self, s: &Stmt, out: &mut Block) {
        match &s.kind {
            StmtKind::If(c, t, e) => {
                let kind = StmtKind::If(c.clone(), self.block(t), self.block(e));
                out.push(Stmt { kind, ..s.clone() });
            }
            StmtKind::While(c, body) => {
                let kind = StmtKind::While(c.clone(), self.block(body));
                out.push(Stmt { kind, ..s.clone() });
            }
            StmtKind::Assert(Cond::Expr(_)) if self.cfg.strip_asserts => {}
            StmtKind::Alloc(p, e) => self.alloc(p, e, s.loc, out),
            StmtKind::Read(x, p) => self.read(x, p, s.loc, out),
            StmtKind::Write(p, e) => self.write(p, e, s.loc, out),
            _ => out.push(s.clone()),
        }
    }

    /// The object operand of a heap statement. The rules evaluate it
    /// conditionally or after `target` changed, so operands that could fail
    /// or that mention `target` are first evaluated into a temporary.
    fn operand(&mut self, e: &Expr, target: Option<&str>, out: &mut Block) -> Expr {
        if has_division(e) || target.is_some_and(|t| e.mentions(t)) {
            self.temp_used = true;
            out.push(build::assign(&self.temp, e.clone()));
            v(&self.temp)
        } else {
            e.clone()
        }
    }

    /// Update of the tracked cell: `$last` or `$cnt_last`, and `$last_loc`.
    fn track(&self, val: Expr, loc: u32) -> Block {
        let mut b = Vec::new();
        if let Some(last) = &self.last {
            b.push(build::assign(last, val));
        } else if let Some(cl) = &self.cnt_last {
            b.push(build::assign(cl, v(&self.cnt)));
        }
        if let Some(ll) = &self.last_loc {
            b.push(build::assign(ll, Expr::int(loc as i64)));
        }
        b
    }

    fn alloc(&mut self, p: &str, e: &Expr, loc: u32, out: &mut Block) {
        let e = self.operand(e, Some(p), out);
        out.push(incr(&self.cnt_alloc));
        out.push(build::assign(p, v(&self.cnt_alloc)));
        let records = matches!(self.cfg.base, Base::R | Base::RW) || self.cfg.fun_alloc_writes;
        if self.cfg.base.is_rw() && records {
            out.push(incr(&self.cnt));
            let wloc = self.cfg.tagging.then(|| Expr::int(loc as i64));
            out.push(build::assert_pred(W_PRED, self.w_args(v(&self.cnt), e.clone(), wloc)));
        }
        if records {
            out.push(build::if_(eq(v(&self.last_addr), v(p)), self.track(e.clone(), loc), Vec::new()));
        }
        if let Some((ca, cd)) = &self.cache {
            out.push(build::assign(ca, v(p)));
            out.push(build::assign(cd, e));
        }
    }

    fn read(&mut self, x: &str, p: &str, loc: u32, out: &mut Block) {
        let mut code = vec![incr(&self.cnt)];
        let tag_then = self.last_loc.as_ref().map(|ll| (v(ll), loc));
        let tag_else = self.loc.as_ref().map(|l| (v(l), loc));
        if let Some(last) = &self.last {
            let then = vec![build::assert_pred(R_PRED, self.r_args(v(last), tag_then)), build::assign(x, v(last))];
            let mut els = vec![build::havoc(x)];
            els.extend(self.loc.iter().map(|l| build::havoc(l)));
            els.push(build::assume_pred(R_PRED, self.r_args(v(x), tag_else)));
            code.push(build::if_(eq(v(&self.last_addr), v(p)), then, els));
        } else {
            let (t, cl) = (self.t.clone().unwrap(), self.cnt_last.clone().unwrap());
            if self.cfg.base == Base::RWmem {
                code.push(build::assert(self.valid(p)));
            }
            let mut then = vec![build::assert_pred(R_PRED, self.r_args(v(&cl), tag_then)), build::assign(&t, v(&cl))];
            if let (Some(l), Some(ll)) = (&self.loc, &self.last_loc) {
                then.push(build::assign(l, v(ll)));
            }
            let mut els = vec![build::havoc(&t)];
            els.extend(self.loc.iter().map(|l| build::havoc(l)));
            els.push(build::assume_pred(R_PRED, self.r_args(v(&t), tag_else)));
            code.push(build::if_(eq(v(&self.last_addr), v(p)), then, els));
            code.push(build::havoc(x));
            code.push(build::assume_pred(W_PRED, self.w_args(v(&t), v(x), self.loc.as_ref().map(|l| v(l)))));
        }
        match &self.cache {
            Some((ca, cd)) => {
                code.push(build::assign(ca, v(p)));
                code.push(build::assign(cd, v(x)));
                out.push(build::if_(eq(v(ca), v(p)), vec![build::assign(x, v(cd))], code));
            }
            None => out.extend(code),
        }
    }

    fn write(&mut self, p: &str, e: &Expr, loc: u32, out: &mut Block) {
        let e = self.operand(e, None, out);
        if self.cfg.base.is_rw() {
            out.push(incr(&self.cnt));
            let wloc = self.cfg.tagging.then(|| Expr::int(loc as i64));
            let then = vec![
                build::assert_pred(W_PRED, self.w_args(v(&self.cnt), e.clone(), wloc)),
                build::if_(eq(v(&self.last_addr), v(p)), self.track(e.clone(), loc), Vec::new()),
            ];
            let els = if self.cfg.base == Base::RWmem { vec![build::assert(Expr::int(0))] } else { Vec::new() };
            out.push(build::if_(self.valid(p), then, els));
        } else {
            let guard = and(eq(v(&self.last_addr), v(p)), self.valid(p));
            out.push(build::if_(guard, self.track(e.clone(), loc), Vec::new()));
        }
        if let Some((ca, cd)) = &self.cache {
            out.push(build::if_(self.valid(p), vec![build::assign(ca, v(p)), build::assign(cd, e)], Vec::new()));
        }
    }
}

fn has_division(e: &Expr) -> bool {
    match e {
        Expr::Binary(op, l, r) => matches!(op, BinOp::Div | BinOp::Mod) || has_division(l) || has_division(r),
        Expr::Unary(_, b) | Expr::Sel(b, _) | Expr::Is(b, _) => has_division(b),
        Expr::Ctor(_, args) => args.iter().any(has_division),
        _ => false,
    }
}

/// Step one of the encodings: Addr variables and fields become Int and
/// `null` becomes `0`.
pub(super) fn retype(p: &Program) -> Program {
    let mut q = p.clone();
    let fix = |t: &mut Type| {
        if *t == Type::Addr {
            *t = Type::Int;
        }
    };
    for a in &mut q.adts {
        for c in &mut a.ctors {
            c.fields.iter_mut().for_each(|f| fix(&mut f.ty));
        }
    }
    q.vars.iter_mut().for_each(|v| fix(&mut v.ty));
    map_exprs(&mut q.body, &mut null_to_zero);
    q
}

fn null_to_zero(e: &mut Expr) {
    match e {
        Expr::Null => *e = Expr::int(0),
        Expr::Unary(_, b) | Expr::Sel(b, _) | Expr::Is(b, _) => null_to_zero(b),
        Expr::Binary(_, l, r) => {
            null_to_zero(l);
            null_to_zero(r);
        }
        Expr::Ctor(_, args) => args.iter_mut().for_each(null_to_zero),
        Expr::Int(_) | Expr::Var(_) | Expr::DefObj => {}
    }
}

/// Applies `f` to every top-level expression of every statement.
pub(crate) fn map_exprs(b: &mut Block, f: &mut impl FnMut(&mut Expr)) {
    for s in b {
        match &mut s.kind {
            StmtKind::Assign(_, e) | StmtKind::Alloc(_, e) | StmtKind::Write(_, e) => f(e),
            StmtKind::If(c, t, e) => {
                f(c);
                map_exprs(t, f);
                map_exprs(e, f);
            }
            StmtKind::While(c, body) => {
                f(c);
                map_exprs(body, f);
            }
            StmtKind::Assume(c) | StmtKind::Assert(c) => match c {
                Cond::Expr(e) => f(e),
                Cond::Pred(_, args) => args.iter_mut().for_each(&mut *f),
            },
            StmtKind::Read(..) | StmtKind::Skip | StmtKind::Havoc(_) => {}
        }
    }
}
