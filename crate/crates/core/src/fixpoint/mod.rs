//! Bounded least fixed points of the immediate consequence operator, bounded
//! safety verdicts, and the equi-safety differential oracle.
//!
//! Every check runs a program over a finite grid of initial inputs. Grid
//! points are evaluated in parallel against an immutable interpretation
//! snapshot; discovered tuples are merged between iterations.

mod cosim;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{Program, FAIL_PRED};
use crate::int::Int;
use crate::interp::{AuditHeap, Fuel, Heap, Inputs, Interpretation, Machine, Outcome, TupleInterp, UndefReason, Value};

pub use cosim::{cosimulate, functional_violations, CosimFailure, CosimReport, Phi};

/// The finite slice of initial configurations explored by the oracle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, rename_all = "camelCase")]
pub struct InputDomain {
    pub in_range: (i64, i64),
    pub seed_range: (i64, i64),
    pub last_addr_range: (i64, i64),
    pub loop_fuel: u64,
    pub heap_op_fuel: u64,
    /// Maximum number of fixpoint iterations; `None` means ten times the grid size.
    pub iteration_cap: Option<usize>,
}

impl Default for InputDomain {
    fn default() -> InputDomain {
        InputDomain {
            in_range: (-3, 3),
            seed_range: (0, 255),
            last_addr_range: (0, 6),
            loop_fuel: 64,
            heap_op_fuel: 32,
            iteration_cap: None,
        }
    }
}

impl InputDomain {
    pub fn validate(&self) -> Result<(), FixpointError> {
        let check = |name: &str, (lo, hi): (i64, i64), min: i64| {
            if lo > hi {
                Err(FixpointError::InvalidDomain(format!("{name} range [{lo}..{hi}] is empty")))
            } else if lo < min {
                Err(FixpointError::InvalidDomain(format!("{name} range must start at {min} or above")))
            } else {
                Ok(())
            }
        };
        check("in", self.in_range, i64::MIN)?;
        check("seed", self.seed_range, 0)?;
        check("lastAddr", self.last_addr_range, 0)
    }

    pub fn fuel(&self) -> Fuel {
        Fuel { loops: self.loop_fuel, heap_ops: self.heap_op_fuel }
    }

    /// Grid points for `p` in lexicographic order over (in, seed, lastAddr).
    /// The seed axis collapses to its lower bound when `p` never reads its
    /// seed, and the lastAddr axis when `p` has no prophecy variable. The
    /// budget variable, if any, starts at the heap-operation fuel.
    pub fn grid(&self, p: &Program) -> Vec<Inputs> {
        let seeds = if p.reads_var(&p.seed) { self.seed_range } else { (self.seed_range.0, self.seed_range.0) };
        let addrs = if p.prophecy.is_some() { self.last_addr_range } else { (self.last_addr_range.0, self.last_addr_range.0) };
        self.points(seeds, addrs)
    }

    /// Every grid point, without collapsing unused axes.
    pub fn full_grid(&self) -> Vec<Inputs> {
        self.points(self.seed_range, self.last_addr_range)
    }

    fn points(&self, seeds: (i64, i64), addrs: (i64, i64)) -> Vec<Inputs> {
        let budget = Int::from(self.heap_op_fuel);
        let mut out = Vec::new();
        for i in self.in_range.0..=self.in_range.1 {
            for s in seeds.0..=seeds.1 {
                for a in addrs.0..=addrs.1 {
                    out.push(Inputs { input: Int::from(i), seed: Int::from(s), prophecy: Int::from(a), budget: budget.clone() });
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FixpointError {
    #[error("invalid input domain: {0}")]
    InvalidDomain(String),
    #[error("{0}")]
    Unsupported(String),
    #[error("no fixed point after {iterations} iterations (predicate sizes {sizes:?})")]
    IterationCap { iterations: usize, sizes: BTreeMap<String, usize> },
}

/// A grid point whose execution failed an assertion.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub inputs: Inputs,
    pub predicate: String,
    pub tuple: Vec<Value>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let args: Vec<String> = self.tuple.iter().map(Value::to_string).collect();
        write!(f, "{}: {}({})", self.inputs, self.predicate, args.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SafetyVerdict {
    Safe,
    Unsafe(Witness),
    /// No failure found, but this many executions ran out of fuel or used
    /// an unresolved value.
    Inconclusive(usize),
}

impl SafetyVerdict {
    pub fn is_unsafe(&self) -> bool {
        matches!(self, SafetyVerdict::Unsafe(_))
    }

    pub fn name(&self) -> &'static str {
        match self {
            SafetyVerdict::Safe => "safe",
            SafetyVerdict::Unsafe(_) => "unsafe",
            SafetyVerdict::Inconclusive(_) => "inconclusive",
        }
    }
}

impl fmt::Display for SafetyVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SafetyVerdict::Safe => f.write_str("Safe"),
            SafetyVerdict::Unsafe(w) => write!(f, "Unsafe ({w})"),
            SafetyVerdict::Inconclusive(n) => write!(f, "Inconclusive ({n} truncated executions)"),
        }
    }
}

/// Results of one application of the immediate consequence operator.
#[derive(Clone, Debug)]
pub struct Step {
    /// `T(I)`.
    pub interp: TupleInterp,
    /// First failed assertion of each failing grid point, in grid order.
    pub failures: Vec<Witness>,
    /// Executions ending in fuel exhaustion or an unresolved value.
    pub inconclusive: usize,
    /// Executions ending in `assume` failure.
    pub blocked: usize,
    pub executions: usize,
}

/// A program paired with its grid, ready for repeated evaluation.
pub struct Oracle {
    pub machine: Machine,
    pub grid: Vec<Inputs>,
    pub fuel: Fuel,
    cap: usize,
}

struct PointResult {
    tuples: Vec<(Arc<str>, Vec<Value>)>,
    first_bot: Option<(Arc<str>, Vec<Value>)>,
    inconclusive: usize,
    blocked: usize,
    executions: usize,
}

impl Oracle {
    pub fn new(p: &Program, d: &InputDomain) -> Result<Oracle, FixpointError> {
        d.validate()?;
        let grid = d.grid(p);
        Ok(Oracle::with_grid(p, d, grid))
    }

    pub fn with_grid(p: &Program, d: &InputDomain, grid: Vec<Inputs>) -> Oracle {
        let cap = d.iteration_cap.unwrap_or(10 * grid.len().max(1));
        Oracle { machine: Machine::new(p), grid, fuel: d.fuel(), cap }
    }

    fn point(&self, inputs: &Inputs, interp: &dyn Interpretation) -> PointResult {
        let runs = self.machine.run::<Heap>(self.machine.initial_stack(inputs), interp, self.fuel);
        let mut r = PointResult { tuples: Vec::new(), first_bot: None, inconclusive: 0, blocked: 0, executions: runs.len() };
        for e in runs {
            match e.outcome {
                Outcome::Bot(p, args) => {
                    if r.first_bot.is_none() {
                        r.first_bot = Some((p.clone(), args.clone()));
                    }
                    if &*p != FAIL_PRED {
                        r.tuples.push((p, args));
                    }
                }
                Outcome::Undefined(UndefReason::AssumeFailed) => r.blocked += 1,
                Outcome::Undefined(_) => r.inconclusive += 1,
                Outcome::Top => {}
            }
        }
        r
    }

    /// Runs the grid under `interp` without collecting tuples into a new interpretation.
    pub fn evaluate(&self, interp: &dyn Interpretation) -> Vec<(Inputs, Vec<Outcome>)> {
        self.grid
            .par_iter()
            .map(|i| {
                let runs = self.machine.run::<Heap>(self.machine.initial_stack(i), interp, self.fuel);
                (i.clone(), runs.into_iter().map(|e| e.outcome).collect())
            })
            .collect()
    }

    /// One application of the immediate consequence operator to `interp`.
    pub fn step(&self, interp: &TupleInterp) -> Step {
        let results: Vec<PointResult> = self.grid.par_iter().map(|i| self.point(i, interp)).collect();
        let mut next = interp.clone();
        let mut step = Step { interp: TupleInterp::new(), failures: Vec::new(), inconclusive: 0, blocked: 0, executions: 0 };
        for (inputs, r) in self.grid.iter().zip(results) {
            for (p, t) in r.tuples {
                next.insert(&p, t);
            }
            if let Some((p, t)) = r.first_bot {
                step.failures.push(Witness { inputs: inputs.clone(), predicate: p.to_string(), tuple: t });
            }
            step.inconclusive += r.inconclusive;
            step.blocked += r.blocked;
            step.executions += r.executions;
        }
        step.interp = next;
        step
    }

    /// Iterates from the empty interpretation until `T(I) = I`.
    pub fn least_fixpoint(&self) -> Result<Fixpoint, FixpointError> {
        let mut current = TupleInterp::new();
        let mut iterations = 0;
        loop {
            let step = self.step(&current);
            if step.interp == current {
                return Ok(Fixpoint { interp: current, iterations, last: step });
            }
            iterations += 1;
            if iterations > self.cap {
                return Err(FixpointError::IterationCap { iterations: self.cap, sizes: step.interp.sizes() });
            }
            current = step.interp;
        }
    }
}

#[derive(Clone, Debug)]
pub struct Fixpoint {
    pub interp: TupleInterp,
    /// Number of productive iterations: `I*` equals `T^iterations(∅)`.
    pub iterations: usize,
    /// The confirming application `T(I*) = I*`, whose failures and counts
    /// describe the executions under `I*`.
    pub last: Step,
}

/// `T_p(I)`: `I` plus every tuple whose assertion fails on some grid input.
pub fn immediate_consequence(p: &Program, interp: &TupleInterp, d: &InputDomain) -> Result<TupleInterp, FixpointError> {
    Ok(Oracle::new(p, d)?.step(interp).interp)
}

pub fn least_fixpoint(p: &Program, d: &InputDomain) -> Result<Fixpoint, FixpointError> {
    Oracle::new(p, d)?.least_fixpoint()
}

/// Report of a bounded safety check.
#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct SafetyReport {
    #[serde(serialize_with = "verdict_name")]
    pub verdict: SafetyVerdict,
    pub iterations: usize,
    pub predicate_sizes: BTreeMap<String, usize>,
    pub inconclusive_count: usize,
    pub grid_size: usize,
    pub executions: usize,
    /// Failing grid points under `I*`, at most [`MAX_WITNESSES`].
    pub witnesses: Vec<Witness>,
    pub unsafe_points: usize,
    #[serde(skip)]
    pub interp: TupleInterp,
}

pub const MAX_WITNESSES: usize = 32;

fn verdict_name<S: serde::Serializer>(v: &SafetyVerdict, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(v.name())
}

/// Decides bounded safety of `p`: runs the grid under `I*`.
pub fn check_safety(p: &Program, d: &InputDomain) -> Result<SafetyReport, FixpointError> {
    let oracle = Oracle::new(p, d)?;
    let fp = oracle.least_fixpoint()?;
    Ok(report(&oracle, fp))
}

fn report(oracle: &Oracle, fp: Fixpoint) -> SafetyReport {
    let last = fp.last;
    let verdict = match last.failures.first() {
        Some(w) => SafetyVerdict::Unsafe(w.clone()),
        None if last.inconclusive > 0 => SafetyVerdict::Inconclusive(last.inconclusive),
        None => SafetyVerdict::Safe,
    };
    SafetyReport {
        verdict,
        iterations: fp.iterations,
        predicate_sizes: fp.interp.sizes(),
        inconclusive_count: last.inconclusive,
        grid_size: oracle.grid.len(),
        executions: last.executions,
        unsafe_points: last.failures.len(),
        witnesses: last.failures.into_iter().take(MAX_WITNESSES).collect(),
        interp: fp.interp,
    }
}

/// Re-runs a witness under `interp`; true if it ends in an assertion failure.
pub fn replay(p: &Program, interp: &TupleInterp, w: &Witness, d: &InputDomain) -> bool {
    let m = Machine::new(p);
    m.run::<Heap>(m.initial_stack(&w.inputs), interp, d.fuel()).iter().any(|e| e.outcome.is_bot())
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquiReport {
    pub agree: bool,
    pub original: SafetyReport,
    pub encoded: SafetyReport,
}

/// Compares the bounded verdicts of `p` and its encoding `q`. The programs
/// agree when both or neither are unsafe.
pub fn check_equisafety(p: &Program, q: &Program, d: &InputDomain) -> Result<EquiReport, FixpointError> {
    let (original, encoded) = rayon::join(|| check_safety(p, d), || check_safety(q, d));
    let (original, encoded) = (original?, encoded?);
    Ok(EquiReport { agree: original.verdict.is_unsafe() == encoded.verdict.is_unsafe(), original, encoded })
}

/// Memory-safety profile of a program over its grid under `I*`.
#[derive(Clone, Debug, Default, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct MemoryAudit {
    pub points: usize,
    /// Grid points with an access to null or an unallocated address.
    pub invalid_points: usize,
    /// Grid points reading an allocated object before any write to it.
    pub unwritten_points: usize,
    pub first_invalid: Option<Inputs>,
    pub first_unwritten: Option<Inputs>,
}

impl MemoryAudit {
    /// Every access is to an allocated address and every read sees a written object.
    pub fn memory_safe(&self) -> bool {
        self.invalid_points == 0 && self.unwritten_points == 0
    }
}

pub fn memory_audit(p: &Program, d: &InputDomain) -> Result<MemoryAudit, FixpointError> {
    let oracle = Oracle::new(p, d)?;
    let interp = oracle.least_fixpoint()?.interp;
    let flags: Vec<(bool, bool)> = oracle
        .grid
        .par_iter()
        .map(|i| {
            let runs = oracle.machine.run::<AuditHeap>(oracle.machine.initial_stack(i), &interp, oracle.fuel);
            (runs.iter().any(|e| e.heap.invalid.is_some()), runs.iter().any(|e| e.heap.unwritten.is_some()))
        })
        .collect();
    let mut a = MemoryAudit { points: oracle.grid.len(), ..MemoryAudit::default() };
    for (i, (inv, unw)) in oracle.grid.iter().zip(flags) {
        if inv {
            a.invalid_points += 1;
            a.first_invalid.get_or_insert_with(|| i.clone());
        }
        if unw {
            a.unwritten_points += 1;
            a.first_unwritten.get_or_insert_with(|| i.clone());
        }
    }
    Ok(a)
}

#[cfg(test)]
mod tests;
