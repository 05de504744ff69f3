//! Constrained Horn clauses for heap-free programs, SMT-LIB2 emission, and
//! an external Horn solver driver.
//!
//! Every statement location `l` gets a predicate `Inv@l` over all program
//! variables, holding of the states that reach `l`. Assignments, branches
//! and loops become transition clauses between location predicates;
//! expression assertions become clauses with head `false`; predicate
//! assertions put the predicate in the head and predicate assumptions put
//! it in the body. Transitions into the program exit are dropped: the exit
//! has no successors, so they constrain nothing.

mod smt;
mod solver;

use std::fmt;

use thiserror::Error;

use crate::ast::{assign_locations, typecheck, AdtDecl, BinOp, Block, Cond, Diagnostic, Expr, Pos, Program, StmtKind, Type, TypeEnv, UnOp};
use crate::int::Int;

pub use smt::emit_smtlib;
pub use solver::{solve, solver_available, solver_template, SolverVerdict, DEFAULT_SOLVER, SOLVER_ENV};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Sort {
    Int,
    Adt(String),
}

impl Sort {
    pub fn of(t: &Type) -> Sort {
        match t {
            Type::Int | Type::Addr => Sort::Int,
            Type::Obj(n) => Sort::Adt(n.clone()),
        }
    }
}

/// A term of the constraint language. `Op` carries SMT-LIB builtins,
/// `App` user constructors and selectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    Int(Int),
    Bool(bool),
    Var(String),
    Op(&'static str, Vec<Term>),
    App(String, Vec<Term>),
    /// Constructor tester `((_ is C) t)`.
    Tester(String, Box<Term>),
}

impl Term {
    fn op(name: &'static str, args: Vec<Term>) -> Term {
        Term::Op(name, args)
    }

    fn ite(c: Term, t: Term, e: Term) -> Term {
        Term::op("ite", vec![c, t, e])
    }

    fn zero() -> Term {
        Term::Int(Int::ZERO)
    }

    fn one() -> Term {
        Term::Int(Int::from(1))
    }

    fn not(t: Term) -> Term {
        match t {
            Term::Bool(b) => Term::Bool(!b),
            t => Term::op("not", vec![t]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Atom {
    pub pred: String,
    pub args: Vec<Term>,
}

/// `forall vars. body /\ constraint -> head`, with `head = None` for false.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Clause {
    pub vars: Vec<(String, Sort)>,
    pub body: Vec<Atom>,
    /// Conjunction of Boolean terms.
    pub constraint: Vec<Term>,
    pub head: Option<Atom>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredSig {
    pub name: String,
    pub sorts: Vec<Sort>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ClauseSet {
    pub datatypes: Vec<AdtDecl>,
    pub preds: Vec<PredSig>,
    pub clauses: Vec<Clause>,
}

impl ClauseSet {
    /// Clauses whose body has no predicate atom.
    pub fn entry_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.body.is_empty())
    }

    pub fn query_clauses(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.head.is_none())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ChcError {
    #[error("{pos}: heap statement at location {loc}; encode the program first")]
    HeapStatement { pos: Pos, loc: u32 },
    #[error("{}", .0.iter().map(|d| d.to_string()).collect::<Vec<_>>().join("\n"))]
    Type(Vec<Diagnostic>),
}

/// Name of the location predicate of statement location `loc`; location 0
/// names the program exit.
pub fn location_pred(loc: u32) -> String {
    format!("Inv@{loc}")
}

/// Name of the selector function for field `field` of data type `adt`.
pub fn selector_name(adt: &str, field: &str) -> String {
    format!("{adt}.{field}")
}

/// Name of the fresh variable standing for the value havoced into `var`.
pub fn fresh_name(var: &str) -> String {
    format!("{var}'")
}

/// Translates a heap-free program into Horn clauses.
pub fn to_chc(p: &Program) -> Result<ClauseSet, ChcError> {
    let p = assign_locations(p.clone());
    let mut heap = None;
    crate::ast::visit_stmts(&p.body, &mut |s| {
        if s.kind.is_heap_op() && heap.is_none() {
            heap = Some(ChcError::HeapStatement { pos: s.pos, loc: s.loc });
        }
    });
    if let Some(e) = heap {
        return Err(e);
    }
    let typed = typecheck(&p).map_err(ChcError::Type)?;
    let vars: Vec<(String, Sort)> = p.all_vars().into_iter().map(|v| (v.name, Sort::of(&v.ty))).collect();
    let mut t = Translator { p: &p, env: &typed.env, vars, clauses: Vec::new(), locs: Vec::new() };
    let designated = 2 + p.prophecy.is_some() as usize + p.budget.is_some() as usize;
    let first = p.body.first().map_or(0, |s| s.loc);
    let init: Vec<Term> = p
        .all_vars()
        .iter()
        .enumerate()
        .map(|(i, v)| if i < designated { Term::Var(v.name.clone()) } else { t.default(&v.ty) })
        .collect();
    t.clauses.push(Clause {
        vars: t.vars[..designated].to_vec(),
        body: Vec::new(),
        constraint: Vec::new(),
        head: Some(Atom { pred: location_pred(first), args: init }),
    });
    if first == 0 {
        t.locs.push(0);
    }
    t.block(&p.body, None);

    let sorts: Vec<Sort> = t.vars.iter().map(|(_, s)| s.clone()).collect();
    let mut preds: Vec<PredSig> = p
        .preds
        .iter()
        .map(|d| PredSig { name: d.name.clone(), sorts: d.params.iter().map(Sort::of).collect() })
        .collect();
    let mut locs = t.locs.clone();
    locs.sort_unstable();
    preds.extend(locs.into_iter().map(|l| PredSig { name: location_pred(l), sorts: sorts.clone() }));
    Ok(ClauseSet { datatypes: p.adts.clone(), preds, clauses: t.clauses })
}

struct Translator<'a> {
    p: &'a Program,
    env: &'a TypeEnv,
    vars: Vec<(String, Sort)>,
    clauses: Vec<Clause>,
    locs: Vec<u32>,
}

impl Translator<'_> {
    fn state(&self) -> Vec<Term> {
        self.vars.iter().map(|(n, _)| Term::Var(n.clone())).collect()
    }

    fn inv(&self, loc: u32, args: Vec<Term>) -> Atom {
        Atom { pred: location_pred(loc), args }
    }

    fn index(&self, x: &str) -> usize {
        self.vars.iter().position(|(n, _)| n == x).expect("typechecked variable")
    }

    fn clause(&mut self, from: u32, extra: Option<Atom>, constraint: Vec<Term>, head: Option<Atom>, fresh: Option<(String, Sort)>) {
        let mut vars = self.vars.clone();
        vars.extend(fresh);
        let mut body = vec![self.inv(from, self.state())];
        body.extend(extra);
        let constraint = constraint.into_iter().filter(|c| *c != Term::Bool(true)).collect();
        self.clauses.push(Clause { vars, body, constraint, head });
    }

    /// Transition from `from` to `to` (dropped when `to` is the exit).
    fn step(&mut self, from: u32, to: Option<u32>, extra: Option<Atom>, guard: Vec<Term>, update: Option<(usize, Term)>, fresh: Option<(String, Sort)>) {
        let Some(to) = to else { return };
        let mut args = self.state();
        if let Some((i, t)) = update {
            args[i] = t;
        }
        let head = self.inv(to, args);
        self.clause(from, extra, guard, Some(head), fresh);
    }

    fn block(&mut self, b: &Block, exit: Option<u32>) {
        for (i, s) in b.iter().enumerate() {
            let next = b.get(i + 1).map(|n| n.loc).or(exit);
            self.locs.push(s.loc);
            let from = s.loc;
            match &s.kind {
                StmtKind::Assign(x, e) => {
                    self.divisors(from, std::slice::from_ref(e));
                    let t = self.val(e);
                    let i = self.index(x);
                    self.step(from, next, None, Vec::new(), Some((i, t)), None);
                }
                StmtKind::Havoc(x) => {
                    let i = self.index(x);
                    let f = fresh_name(x);
                    let sort = self.vars[i].1.clone();
                    self.step(from, next, None, Vec::new(), Some((i, Term::Var(f.clone()))), Some((f, sort)));
                }
                StmtKind::Skip => self.step(from, next, None, Vec::new(), None, None),
                StmtKind::If(c, t, e) => {
                    self.divisors(from, std::slice::from_ref(c));
                    let g = self.cond(c);
                    let to_t = t.first().map(|s| s.loc).or(next);
                    let to_e = e.first().map(|s| s.loc).or(next);
                    self.step(from, to_t, None, vec![g.clone()], None, None);
                    self.step(from, to_e, None, vec![Term::not(g)], None, None);
                    self.block(t, next);
                    self.block(e, next);
                }
                StmtKind::While(c, body) => {
                    self.divisors(from, std::slice::from_ref(c));
                    let g = self.cond(c);
                    let to_b = body.first().map_or(from, |s| s.loc);
                    self.step(from, Some(to_b), None, vec![g.clone()], None, None);
                    self.step(from, next, None, vec![Term::not(g)], None, None);
                    self.block(body, Some(from));
                }
                StmtKind::Assume(Cond::Expr(e)) => {
                    self.divisors(from, std::slice::from_ref(e));
                    let g = self.cond(e);
                    self.step(from, next, None, vec![g], None, None);
                }
                StmtKind::Assume(Cond::Pred(q, args)) => {
                    self.divisors(from, args);
                    let a = Atom { pred: q.clone(), args: args.iter().map(|e| self.val(e)).collect() };
                    self.step(from, next, Some(a), Vec::new(), None, None);
                }
                StmtKind::Assert(Cond::Expr(e)) => {
                    self.divisors(from, std::slice::from_ref(e));
                    let g = self.cond(e);
                    self.clause(from, None, vec![Term::not(g.clone())], None, None);
                    self.step(from, next, None, vec![g], None, None);
                }
                StmtKind::Assert(Cond::Pred(q, args)) => {
                    self.divisors(from, args);
                    let a = Atom { pred: q.clone(), args: args.iter().map(|e| self.val(e)).collect() };
                    self.clause(from, None, Vec::new(), Some(a), None);
                    self.step(from, next, None, Vec::new(), None, None);
                }
                StmtKind::Alloc(..) | StmtKind::Read(..) | StmtKind::Write(..) => unreachable!("rejected above"),
            }
        }
    }

    /// One false-headed clause per divisor that may be zero.
    fn divisors(&mut self, from: u32, es: &[Expr]) {
        fn collect<'e>(e: &'e Expr, out: &mut Vec<&'e Expr>) {
            match e {
                Expr::Binary(op, l, r) => {
                    if matches!(op, BinOp::Div | BinOp::Mod) && !matches!(&**r, Expr::Int(v) if !v.is_zero()) {
                        out.push(r);
                    }
                    collect(l, out);
                    collect(r, out);
                }
                Expr::Unary(_, b) | Expr::Sel(b, _) | Expr::Is(b, _) => collect(b, out),
                Expr::Ctor(_, args) => args.iter().for_each(|a| collect(a, out)),
                Expr::Int(_) | Expr::Var(_) | Expr::Null | Expr::DefObj => {}
            }
        }
        let mut ds = Vec::new();
        es.iter().for_each(|e| collect(e, &mut ds));
        for d in ds {
            let z = Term::op("=", vec![self.val(d), Term::zero()]);
            self.clause(from, None, vec![z], None, None);
        }
    }

    fn ty(&self, e: &Expr) -> Type {
        self.env.type_of(e).expect("typechecked expression")
    }

    fn adt(&self, e: &Expr) -> &AdtDecl {
        match self.ty(e) {
            Type::Obj(n) => self.p.adt(&n).expect("declared data type"),
            t => panic!("expected an object, found {t}"),
        }
    }

    fn default(&self, ty: &Type) -> Term {
        match ty {
            Type::Int | Type::Addr => Term::zero(),
            Type::Obj(n) => {
                let a = self.p.adt(n).expect("declared data type");
                let c = &a.ctors[a.default_ctor];
                Term::App(c.name.clone(), c.fields.iter().map(|f| self.default(&f.ty)).collect())
            }
        }
    }

    /// Value of `e`: an `Int` term for Int and Addr expressions, a datatype
    /// term for objects.
    fn val(&self, e: &Expr) -> Term {
        match e {
            Expr::Int(v) => Term::Int(v.clone()),
            Expr::Var(x) => Term::Var(x.clone()),
            Expr::Null => Term::zero(),
            Expr::DefObj => self.default(&Type::Obj(self.p.heap_adt().expect("heap type").name.clone())),
            Expr::Unary(UnOp::Neg, b) => Term::op("-", vec![self.val(b)]),
            Expr::Unary(UnOp::Not, _) | Expr::Is(..) => Term::ite(self.cond(e), Term::one(), Term::zero()),
            Expr::Binary(op, l, r) => {
                let (a, b) = (self.val(l), self.val(r));
                match op {
                    BinOp::Add => Term::op("+", vec![a, b]),
                    BinOp::Sub => Term::op("-", vec![a, b]),
                    BinOp::Mul => Term::op("*", vec![a, b]),
                    // truncating division and remainder
                    BinOp::Div | BinOp::Mod => {
                        let f = if *op == BinOp::Div { "div" } else { "mod" };
                        let nonneg = Term::op(">=", vec![a.clone(), Term::zero()]);
                        let pos = Term::op(f, vec![a.clone(), b.clone()]);
                        let neg = Term::op("-", vec![Term::op(f, vec![Term::op("-", vec![a]), b])]);
                        Term::ite(nonneg, pos, neg)
                    }
                    _ => Term::ite(self.cond(e), Term::one(), Term::zero()),
                }
            }
            Expr::Ctor(c, args) => Term::App(c.clone(), args.iter().map(|a| self.val(a)).collect()),
            Expr::Sel(b, f) => {
                let adt = self.adt(b);
                let (ci, _, field) = adt.selector(f).expect("typechecked selector");
                let v = self.val(b);
                let sel = Term::App(selector_name(&adt.name, f), vec![v.clone()]);
                if adt.ctors.len() == 1 {
                    sel
                } else {
                    Term::ite(Term::Tester(adt.ctors[ci].name.clone(), Box::new(v)), sel, self.default(&field.ty))
                }
            }
        }
    }

    /// Truth of `e` as a Boolean term: nonzero for Int and Addr, always
    /// true for objects.
    fn cond(&self, e: &Expr) -> Term {
        match e {
            Expr::Int(v) => Term::Bool(!v.is_zero()),
            Expr::Unary(UnOp::Not, b) => Term::not(self.cond(b)),
            Expr::Is(b, c) => Term::Tester(c.clone(), Box::new(self.val(b))),
            Expr::Binary(op, l, r) if !op.is_arith() => match op {
                BinOp::And => Term::op("and", vec![self.cond(l), self.cond(r)]),
                BinOp::Or => Term::op("or", vec![self.cond(l), self.cond(r)]),
                BinOp::Eq => Term::op("=", vec![self.val(l), self.val(r)]),
                BinOp::Ne => Term::not(Term::op("=", vec![self.val(l), self.val(r)])),
                _ => Term::op(op.symbol(), vec![self.val(l), self.val(r)]),
            },
            _ => match self.ty(e) {
                Type::Obj(_) => Term::Bool(true),
                _ => Term::not(Term::op("=", vec![self.val(e), Term::zero()])),
            },
        }
    }
}

impl fmt::Display for ClauseSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&emit_smtlib(self))
    }
}

#[cfg(test)]
mod tests;
