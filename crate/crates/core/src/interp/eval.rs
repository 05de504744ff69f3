//! Big-step evaluation with fuel.
//!
//! Programs are executed over sets of states so that native `havoc` can be
//! given an exact meaning: a havoced variable stays unresolved until the next
//! `assume(P(..))` that passes it as a bare argument, which branches over the
//! matching tuples of the interpretation. Reading an unresolved variable in any
//! other way ends that branch as undefined. Deterministic programs never
//! branch, and [`Machine::eval`] returns their unique execution.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;
use smallvec::SmallVec;

use crate::ast::{Program, FAIL_PRED};
use crate::int::Int;

use super::compile::{compile, eval_expr, CCond, CExpr, CStmt, Compiled, ExprError};
use super::heap::{Heap, HeapModel, TraceHeap};
use super::interpretation::Interpretation;
use super::value::Value;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum UndefReason {
    AssumeFailed,
    FuelExhausted,
    /// An unresolved nondeterministic value was used outside a predicate assumption.
    Unresolved,
    /// A single result was requested but evaluation branched.
    Ambiguous,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Outcome {
    Top,
    /// Failed assertion of predicate (or `F` for expressions) on the given tuple.
    Bot(Arc<str>, Vec<Value>),
    Undefined(UndefReason),
}

impl Outcome {
    pub fn is_bot(&self) -> bool {
        matches!(self, Outcome::Bot(..))
    }

    fn fail() -> Outcome {
        Outcome::Bot(FAIL_PRED.into(), Vec::new())
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Top => f.write_str("Top"),
            Outcome::Bot(p, args) => {
                write!(f, "Bot({p}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str("))")
            }
            Outcome::Undefined(r) => write!(f, "Undefined({r:?})"),
        }
    }
}

/// Remaining budgets. Loop fuel is spent per loop-body entry; heap fuel per
/// `alloc`, `read` or `write`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Fuel {
    pub loops: u64,
    pub heap_ops: u64,
}

impl Default for Fuel {
    fn default() -> Fuel {
        Fuel { loops: 64, heap_ops: 32 }
    }
}

/// A finished execution: its outcome and the stack and heap at that point.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Execution<H = Heap> {
    pub outcome: Outcome,
    pub stack: Vec<Value>,
    pub heap: H,
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
struct State<H> {
    stack: Vec<Value>,
    heap: H,
    pending: SmallVec<[u16; 2]>,
    loops: u64,
    heap_ops: u64,
}

type States<H> = SmallVec<[State<H>; 1]>;

/// Initial values of the enumerated inputs; all other variables start at
/// their type's default.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Inputs {
    #[serde(rename = "in")]
    pub input: Int,
    pub seed: Int,
    #[serde(rename = "lastAddr")]
    pub prophecy: Int,
    pub budget: Int,
}

impl fmt::Display for Inputs {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "in={} seed={} lastAddr={}", self.input, self.seed, self.prophecy)
    }
}

/// A compiled program ready for evaluation.
#[derive(Clone, Debug)]
pub struct Machine {
    pub compiled: Arc<Compiled>,
}

impl Machine {
    pub fn new(p: &Program) -> Machine {
        Machine { compiled: Arc::new(compile(p)) }
    }

    pub fn var_names(&self) -> impl Iterator<Item = &str> {
        self.compiled.vars.iter().map(|(n, _)| n.as_str())
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.compiled.index.get(name).copied()
    }

    pub fn def_obj(&self) -> &Value {
        &self.compiled.def_obj
    }

    pub fn initial_stack(&self, inputs: &Inputs) -> Vec<Value> {
        let c = &self.compiled;
        let mut s = c.defaults.clone();
        s[c.input] = Value::Int(inputs.input.clone());
        s[c.seed] = Value::Int(inputs.seed.clone());
        if let Some(i) = c.prophecy {
            s[i] = Value::Int(inputs.prophecy.clone());
        }
        if let Some(i) = c.budget {
            s[i] = Value::Int(inputs.budget.clone());
        }
        s
    }

    /// Every execution from `stack` and the empty heap.
    pub fn run<H: HeapModel>(&self, stack: Vec<Value>, interp: &dyn Interpretation, fuel: Fuel) -> Vec<Execution<H>> {
        self.run_from(stack, H::empty(), interp, fuel)
    }

    pub fn run_from<H: HeapModel>(
        &self,
        stack: Vec<Value>,
        heap: H,
        interp: &dyn Interpretation,
        fuel: Fuel,
    ) -> Vec<Execution<H>> {
        let engine = Engine { c: &self.compiled, interp };
        let mut done = Vec::new();
        let init = State { stack, heap, pending: SmallVec::new(), loops: fuel.loops, heap_ops: fuel.heap_ops };
        let finals = engine.block(&self.compiled.body, smallvec::smallvec![init], &mut done);
        done.extend(finals.into_iter().map(|s| Execution { outcome: Outcome::Top, stack: s.stack, heap: s.heap }));
        done
    }

    /// The unique execution of a deterministic program; branching yields
    /// `Undefined(Ambiguous)`.
    pub fn eval<H: HeapModel>(&self, stack: Vec<Value>, interp: &dyn Interpretation, fuel: Fuel) -> Execution<H> {
        let mut all = self.run::<H>(stack.clone(), interp, fuel);
        if all.len() == 1 {
            all.pop().unwrap()
        } else {
            Execution { outcome: Outcome::Undefined(UndefReason::Ambiguous), stack, heap: H::empty() }
        }
    }

    pub fn eval_heap(&self, stack: Vec<Value>, interp: &dyn Interpretation, fuel: Fuel) -> Execution<Heap> {
        self.eval(stack, interp, fuel)
    }

    /// Evaluation with the heap kept as a chronological write trace.
    pub fn eval_trace(&self, stack: Vec<Value>, interp: &dyn Interpretation, fuel: Fuel) -> Execution<TraceHeap> {
        self.eval(stack, interp, fuel)
    }
}

struct Engine<'a> {
    c: &'a Compiled,
    interp: &'a dyn Interpretation,
}

impl Engine<'_> {
    fn stop<H>(&self, s: State<H>, outcome: Outcome, done: &mut Vec<Execution<H>>) {
        done.push(Execution { outcome, stack: s.stack, heap: s.heap });
    }

    fn expr_failure<H>(&self, s: State<H>, e: ExprError, done: &mut Vec<Execution<H>>) {
        let o = match e {
            ExprError::DivByZero => Outcome::fail(),
            ExprError::Pending(_) => Outcome::Undefined(UndefReason::Unresolved),
        };
        self.stop(s, o, done);
    }

    fn block<H: HeapModel>(&self, b: &[CStmt], mut states: States<H>, done: &mut Vec<Execution<H>>) -> States<H> {
        for st in b {
            if states.is_empty() {
                break;
            }
            let mut next = States::new();
            for s in states {
                self.stmt(st, s, &mut next, done);
            }
            states = next;
        }
        states
    }

    fn eval<H>(&self, e: &CExpr, s: &State<H>) -> Result<Value, ExprError> {
        eval_expr(e, &s.stack, &s.pending)
    }

    fn set<H>(s: &mut State<H>, x: usize, v: Value) {
        s.stack[x] = v;
        if !s.pending.is_empty() {
            s.pending.retain(|p| *p as usize != x);
        }
    }

    fn stmt<H: HeapModel>(&self, st: &CStmt, mut s: State<H>, out: &mut States<H>, done: &mut Vec<Execution<H>>) {
        macro_rules! value {
            ($e:expr) => {
                match self.eval($e, &s) {
                    Ok(v) => v,
                    Err(err) => return self.expr_failure(s, err, done),
                }
            };
        }
        macro_rules! heap_op {
            () => {
                if s.heap_ops == 0 {
                    return self.stop(s, Outcome::Undefined(UndefReason::FuelExhausted), done);
                }
                s.heap_ops -= 1;
            };
        }
        match st {
            CStmt::Skip => out.push(s),
            CStmt::Assign(x, e) => {
                let v = value!(e);
                Self::set(&mut s, *x, v);
                out.push(s);
            }
            CStmt::Havoc(x) => {
                if !s.pending.contains(&(*x as u16)) {
                    s.pending.push(*x as u16);
                }
                out.push(s);
            }
            CStmt::Alloc(x, e) => {
                let o = value!(e);
                heap_op!();
                let a = s.heap.allocate(o);
                let v = match self.c.vars[*x].1 {
                    crate::ast::Type::Addr => Value::Addr(a),
                    _ => Value::Int(Int::from(a)),
                };
                Self::set(&mut s, *x, v);
                out.push(s);
            }
            CStmt::Read(x, p) => {
                let a = value!(&CExpr::Var(*p));
                heap_op!();
                let o = match a.as_addr() {
                    Some(a) => s.heap.read(a, &self.c.def_obj),
                    None => self.c.def_obj.clone(),
                };
                Self::set(&mut s, *x, o);
                out.push(s);
            }
            CStmt::Write(p, e) => {
                let a = value!(&CExpr::Var(*p));
                let o = value!(e);
                heap_op!();
                if let Some(a) = a.as_addr() {
                    s.heap.write(a, o);
                }
                out.push(s);
            }
            CStmt::If(c, t, e) => {
                let branch = if value!(c).truthy() { t } else { e };
                out.extend(self.block(branch, smallvec::smallvec![s], done));
            }
            CStmt::While(c, body) => {
                let mut cur: States<H> = smallvec::smallvec![s];
                while !cur.is_empty() {
                    if cur.len() > 1 {
                        cur.sort();
                        cur.dedup();
                    }
                    let mut enter = States::new();
                    for mut s in cur {
                        let v = match self.eval(c, &s) {
                            Ok(v) => v,
                            Err(err) => {
                                self.expr_failure(s, err, done);
                                continue;
                            }
                        };
                        if !v.truthy() {
                            out.push(s);
                        } else if s.loops == 0 {
                            self.stop(s, Outcome::Undefined(UndefReason::FuelExhausted), done);
                        } else {
                            s.loops -= 1;
                            enter.push(s);
                        }
                    }
                    cur = self.block(body, enter, done);
                }
            }
            CStmt::Assert(CCond::Expr(e)) => {
                if value!(e).truthy() {
                    out.push(s);
                } else {
                    self.stop(s, Outcome::fail(), done);
                }
            }
            CStmt::Assume(CCond::Expr(e), on_budget) => {
                if value!(e).truthy() {
                    out.push(s);
                } else {
                    let r = if *on_budget { UndefReason::FuelExhausted } else { UndefReason::AssumeFailed };
                    self.stop(s, Outcome::Undefined(r), done);
                }
            }
            CStmt::Assert(CCond::Pred(p, args)) => {
                let mut vals = Vec::with_capacity(args.len());
                for a in args {
                    vals.push(value!(a));
                }
                if self.interp.contains(p, &vals) {
                    out.push(s);
                } else {
                    self.stop(s, Outcome::Bot(p.clone(), vals), done);
                }
            }
            CStmt::Assume(CCond::Pred(p, args), _) => {
                let mut pattern: Vec<Option<Value>> = Vec::with_capacity(args.len());
                let mut holes: SmallVec<[(usize, usize); 2]> = SmallVec::new();
                for (i, a) in args.iter().enumerate() {
                    match a {
                        CExpr::Var(x) if s.pending.contains(&(*x as u16)) => {
                            pattern.push(None);
                            holes.push((i, *x));
                        }
                        _ => pattern.push(Some(value!(a))),
                    }
                }
                if holes.is_empty() {
                    let vals: Vec<Value> = pattern.into_iter().map(Option::unwrap).collect();
                    if self.interp.contains(p, &vals) {
                        out.push(s);
                    } else {
                        self.stop(s, Outcome::Undefined(UndefReason::AssumeFailed), done);
                    }
                    return;
                }
                let tuples = self.interp.candidates(p, &pattern);
                let mut any = false;
                for t in tuples {
                    // a variable passed twice must receive one value
                    let consistent = holes
                        .iter()
                        .all(|(i, x)| holes.iter().all(|(j, y)| x != y || t[*i] == t[*j]));
                    if !consistent {
                        continue;
                    }
                    let mut ns = s.clone();
                    for (i, x) in &holes {
                        Self::set(&mut ns, *x, t[*i].clone());
                    }
                    out.push(ns);
                    any = true;
                }
                if !any {
                    self.stop(s, Outcome::Undefined(UndefReason::AssumeFailed), done);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_program;
    use crate::interp::interpretation::TupleInterp;

    fn run1(src: &str, interp: &TupleInterp) -> Execution {
        let p = parse_program(src).unwrap();
        let m = Machine::new(&p);
        m.eval(m.initial_stack(&Inputs::default()), interp, Fuel::default())
    }

    #[test]
    fn assert_zero_fails() {
        let e = run1("prog { assert(0); }", &TupleInterp::new());
        assert_eq!(e.outcome, Outcome::Bot("F".into(), vec![]));
    }

    #[test]
    fn assume_zero_is_undefined() {
        let e = run1("prog { assume(0); }", &TupleInterp::new());
        assert_eq!(e.outcome, Outcome::Undefined(UndefReason::AssumeFailed));
    }

    #[test]
    fn predicate_assert_consults_interpretation() {
        let mut i = TupleInterp::new();
        let src = "prog { pred P(Int); assert(P(1)); }";
        assert_eq!(run1(src, &i).outcome, Outcome::Bot("P".into(), vec![Value::int(1)]));
        i.insert("P", vec![Value::int(1)]);
        assert_eq!(run1(src, &i).outcome, Outcome::Top);
    }

    #[test]
    fn division_by_zero_fails() {
        let e = run1("prog { var x: Int; x := 1 / (x - x); }", &TupleInterp::new());
        assert_eq!(e.outcome, Outcome::Bot("F".into(), vec![]));
    }

    #[test]
    fn heap_fuel_is_spent_per_operation() {
        let p = parse_program("prog { adt N { default N(d: Int); } var p: Addr; p := alloc(defObj); }").unwrap();
        let m = Machine::new(&p);
        let e = m.eval_heap(m.initial_stack(&Inputs::default()), &TupleInterp::new(), Fuel { loops: 1, heap_ops: 0 });
        assert_eq!(e.outcome, Outcome::Undefined(UndefReason::FuelExhausted));
        let e = m.eval_heap(m.initial_stack(&Inputs::default()), &TupleInterp::new(), Fuel { loops: 1, heap_ops: 1 });
        assert_eq!(e.outcome, Outcome::Top);
        assert_eq!(e.heap.len(), 1);
    }

    #[test]
    fn loop_fuel_bounds_iterations() {
        let e = run1("prog { while 1 { skip; } }", &TupleInterp::new());
        assert_eq!(e.outcome, Outcome::Undefined(UndefReason::FuelExhausted));
    }

    #[test]
    fn havoc_resolves_through_assumption() {
        let mut i = TupleInterp::new();
        i.insert("R", vec![Value::int(0), Value::int(7)]);
        i.insert("R", vec![Value::int(0), Value::int(9)]);
        i.insert("R", vec![Value::int(1), Value::int(3)]);
        let p = parse_program("prog { pred R(Int, Int); var x: Int; havoc x; assume(R(in, x)); assert(x < 8); }").unwrap();
        let m = Machine::new(&p);
        let runs: Vec<Execution> = m.run(m.initial_stack(&Inputs::default()), &i, Fuel::default());
        let mut outcomes: Vec<_> = runs.iter().map(|e| e.outcome.clone()).collect();
        outcomes.sort();
        assert_eq!(outcomes, vec![Outcome::Top, Outcome::Bot("F".into(), vec![])]);
        let e: Execution = m.eval(m.initial_stack(&Inputs::default()), &i, Fuel::default());
        assert_eq!(e.outcome, Outcome::Undefined(UndefReason::Ambiguous));
    }

    #[test]
    fn unresolved_havoc_is_undefined() {
        let e = run1("prog { var x: Int; havoc x; assert(x = 0); }", &TupleInterp::new());
        assert_eq!(e.outcome, Outcome::Undefined(UndefReason::Unresolved));
    }

    #[test]
    fn selector_on_other_constructor_yields_field_default() {
        let src = "prog { adt N { default A(d: Int); B(e: Int); } var n: N; var x: Int;
                   n := B(5); x := n.d; assert(x = 0 && n is B && n.e = 5); }";
        assert_eq!(run1(src, &TupleInterp::new()).outcome, Outcome::Top);
    }
}
