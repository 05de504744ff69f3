//! Lowering of checked programs to an index-addressed form for evaluation.

use std::collections::HashMap;
use std::sync::Arc;

use crate::ast::{BinOp, Cond, Expr, Program, Stmt, StmtKind, Type, UnOp};
use crate::int::Int;

use super::value::{default_value, ObjVal, Value};

#[derive(Clone, Debug)]
pub enum CExpr {
    Const(Value),
    Var(usize),
    Neg(Box<CExpr>),
    Not(Box<CExpr>),
    Bin(BinOp, Box<CExpr>, Box<CExpr>),
    Ctor(Arc<str>, Vec<CExpr>),
    /// Selector; yields `default` when the object was built by another constructor.
    Sel { base: Box<CExpr>, ctor: Arc<str>, field: usize, default: Value },
    Is(Box<CExpr>, Arc<str>),
}

#[derive(Clone, Debug)]
pub enum CCond {
    Expr(CExpr),
    Pred(Arc<str>, Vec<CExpr>),
}

#[derive(Clone, Debug)]
pub enum CStmt {
    Assign(usize, CExpr),
    Alloc(usize, CExpr),
    Read(usize, usize),
    Write(usize, CExpr),
    Skip,
    Havoc(usize),
    If(CExpr, Vec<CStmt>, Vec<CStmt>),
    While(CExpr, Vec<CStmt>),
    /// The flag marks assumptions over the heap-operation budget, whose
    /// failure counts as fuel exhaustion.
    Assume(CCond, bool),
    Assert(CCond),
}

/// Why an expression could not be evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExprError {
    DivByZero,
    /// Read of a variable whose nondeterministic value is not yet resolved.
    Pending(usize),
}

/// A program lowered for evaluation, with its variables in stack order.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub vars: Vec<(String, Type)>,
    pub index: HashMap<String, usize>,
    pub body: Vec<CStmt>,
    pub def_obj: Value,
    pub defaults: Vec<Value>,
    pub input: usize,
    pub seed: usize,
    pub prophecy: Option<usize>,
    pub budget: Option<usize>,
}

/// Resolves names and selector layouts for expression lowering.
pub struct ExprCompiler<'a> {
    pub program: &'a Program,
    pub index: &'a HashMap<String, usize>,
}

impl ExprCompiler<'_> {
    pub fn expr(&self, e: &Expr) -> CExpr {
        match e {
            Expr::Int(v) => CExpr::Const(Value::Int(v.clone())),
            Expr::Var(x) => CExpr::Var(*self.index.get(x).unwrap_or_else(|| panic!("unknown variable {x}"))),
            Expr::Null => CExpr::Const(Value::Addr(0)),
            Expr::DefObj => CExpr::Const(heap_default(self.program)),
            Expr::Unary(UnOp::Neg, b) => CExpr::Neg(Box::new(self.expr(b))),
            Expr::Unary(UnOp::Not, b) => CExpr::Not(Box::new(self.expr(b))),
            Expr::Binary(op, l, r) => CExpr::Bin(*op, Box::new(self.expr(l)), Box::new(self.expr(r))),
            Expr::Ctor(c, args) => CExpr::Ctor(c.as_str().into(), args.iter().map(|a| self.expr(a)).collect()),
            Expr::Sel(b, f) => {
                let (adt, ci, fi, fty) = self
                    .program
                    .adts
                    .iter()
                    .find_map(|a| a.selector(f).map(|(ci, fi, fld)| (a, ci, fi, fld.ty.clone())))
                    .unwrap_or_else(|| panic!("unknown selector {f}"));
                CExpr::Sel {
                    base: Box::new(self.expr(b)),
                    ctor: adt.ctors[ci].name.as_str().into(),
                    field: fi,
                    default: default_value(self.program, &fty),
                }
            }
            Expr::Is(b, c) => CExpr::Is(Box::new(self.expr(b)), c.as_str().into()),
        }
    }

    pub fn cond(&self, c: &Cond) -> CCond {
        match c {
            Cond::Expr(e) => CCond::Expr(self.expr(e)),
            Cond::Pred(p, args) => CCond::Pred(p.as_str().into(), args.iter().map(|a| self.expr(a)).collect()),
        }
    }
}

fn heap_default(p: &Program) -> Value {
    match p.heap_adt() {
        Some(a) => default_value(p, &Type::Obj(a.name.clone())),
        // programs without a heap type never read the heap
        None => Value::Int(Int::ZERO),
    }
}

pub fn compile(p: &Program) -> Compiled {
    let vars: Vec<(String, Type)> = p.all_vars().into_iter().map(|v| (v.name, v.ty)).collect();
    let index: HashMap<String, usize> = vars.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
    let ec = ExprCompiler { program: p, index: &index };
    let budget = p.budget.clone();
    let body = compile_block(&ec, &p.body, budget.as_deref());
    Compiled {
        defaults: vars.iter().map(|(_, t)| default_value(p, t)).collect(),
        def_obj: heap_default(p),
        input: index[&p.input],
        seed: index[&p.seed],
        prophecy: p.prophecy.as_ref().map(|v| index[v]),
        budget: p.budget.as_ref().map(|v| index[v]),
        vars,
        body,
        index,
    }
}

fn compile_block(ec: &ExprCompiler, b: &[Stmt], budget: Option<&str>) -> Vec<CStmt> {
    b.iter().map(|s| compile_stmt(ec, s, budget)).collect()
}

fn compile_stmt(ec: &ExprCompiler, s: &Stmt, budget: Option<&str>) -> CStmt {
    let v = |x: &String| ec.index[x];
    match &s.kind {
        StmtKind::Assign(x, e) => CStmt::Assign(v(x), ec.expr(e)),
        StmtKind::Alloc(x, e) => CStmt::Alloc(v(x), ec.expr(e)),
        StmtKind::Read(x, p) => CStmt::Read(v(x), v(p)),
        StmtKind::Write(p, e) => CStmt::Write(v(p), ec.expr(e)),
        StmtKind::Skip => CStmt::Skip,
        StmtKind::Havoc(x) => CStmt::Havoc(v(x)),
        StmtKind::If(c, t, e) => CStmt::If(ec.expr(c), compile_block(ec, t, budget), compile_block(ec, e, budget)),
        StmtKind::While(c, b) => CStmt::While(ec.expr(c), compile_block(ec, b, budget)),
        StmtKind::Assume(c) => {
            let on_budget = matches!((c, budget), (Cond::Expr(e), Some(b)) if e.mentions(b));
            CStmt::Assume(ec.cond(c), on_budget)
        }
        StmtKind::Assert(c) => CStmt::Assert(ec.cond(c)),
    }
}

/// Evaluates an expression strictly: every operand is evaluated, so a zero
/// divisor anywhere is an error.
pub fn eval_expr(e: &CExpr, stack: &[Value], pending: &[u16]) -> Result<Value, ExprError> {
    Ok(match e {
        CExpr::Const(v) => v.clone(),
        CExpr::Var(i) => {
            if !pending.is_empty() && pending.contains(&(*i as u16)) {
                return Err(ExprError::Pending(*i));
            }
            stack[*i].clone()
        }
        CExpr::Neg(b) => Value::Int(int_of(&eval_expr(b, stack, pending)?).neg()),
        CExpr::Not(b) => Value::Int(Int::from_bool(!eval_expr(b, stack, pending)?.truthy())),
        CExpr::Bin(op, l, r) => {
            let l = eval_expr(l, stack, pending)?;
            let r = eval_expr(r, stack, pending)?;
            binary(*op, &l, &r)?
        }
        CExpr::Ctor(c, args) => {
            let fields = args.iter().map(|a| eval_expr(a, stack, pending)).collect::<Result<Vec<_>, _>>()?;
            Value::Obj(Arc::new(ObjVal { ctor: c.clone(), fields }))
        }
        CExpr::Sel { base, ctor, field, default } => match eval_expr(base, stack, pending)? {
            Value::Obj(o) if o.ctor == *ctor => o.fields[*field].clone(),
            _ => default.clone(),
        },
        CExpr::Is(b, c) => match eval_expr(b, stack, pending)? {
            Value::Obj(o) => Value::Int(Int::from_bool(o.ctor == *c)),
            _ => Value::Int(Int::ZERO),
        },
    })
}

fn int_of(v: &Value) -> Int {
    match v {
        Value::Int(i) => i.clone(),
        Value::Addr(a) => Int::from(*a),
        Value::Obj(_) => Int::ZERO,
    }
}

fn binary(op: BinOp, l: &Value, r: &Value) -> Result<Value, ExprError> {
    let b = |x: bool| Value::Int(Int::from_bool(x));
    Ok(match op {
        BinOp::Eq => b(l == r),
        BinOp::Ne => b(l != r),
        BinOp::And => b(l.truthy() && r.truthy()),
        BinOp::Or => b(l.truthy() || r.truthy()),
        _ => {
            let (x, y) = (int_of(l), int_of(r));
            match op {
                BinOp::Add => Value::Int(x.add(&y)),
                BinOp::Sub => Value::Int(x.sub(&y)),
                BinOp::Mul => Value::Int(x.mul(&y)),
                BinOp::Div => Value::Int(x.div_trunc(&y).ok_or(ExprError::DivByZero)?),
                BinOp::Mod => Value::Int(x.rem_trunc(&y).ok_or(ExprError::DivByZero)?),
                BinOp::Lt => b(x < y),
                BinOp::Le => b(x <= y),
                BinOp::Gt => b(x > y),
                BinOp::Ge => b(x >= y),
                _ => unreachable!(),
            }
        }
    })
}
