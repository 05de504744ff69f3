//! Pointwise co-simulation of a heap program with its `R` encoding, and the
//! functional-consistency check on fixed points.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::encode::EncodedProgram;
use crate::interp::{Execution, Heap, HeapModel, Inputs, Interpretation, Machine, Outcome, TupleInterp, Value};

use super::{FixpointError, InputDomain, Oracle};

/// The properties relating an execution of the normalized program to the
/// execution of its encoding from the same inputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "camelCase")]
pub enum Phi {
    /// Same outcome.
    Sigma,
    /// Same final values of the original variables.
    Stacks,
    /// `$last` holds the object stored at `$last_addr`.
    Reads,
    /// `$cnt_alloc` equals the heap length.
    Allocs,
}

impl fmt::Display for Phi {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phi::Sigma => "phi_sigma",
            Phi::Stacks => "phi_stacks",
            Phi::Reads => "phi_reads",
            Phi::Allocs => "phi_allocs",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CosimFailure {
    pub inputs: Inputs,
    pub phi: Phi,
    pub detail: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct CosimReport {
    pub points: usize,
    pub failures: Vec<CosimFailure>,
}

impl CosimReport {
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }

    pub fn holds_for(&self, phi: Phi) -> bool {
        self.failures.iter().all(|f| f.phi != phi)
    }
}

fn outcome_matches(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (Outcome::Bot(p, x), Outcome::Bot(q, y)) => p == q && x.len() == y.len() && x.iter().zip(y).all(|(u, v)| u.loose_eq(v)),
        _ => a == b,
    }
}

fn single<H: HeapModel>(m: &Machine, inputs: &Inputs, interp: &dyn Interpretation, d: &InputDomain) -> Result<Execution<H>, usize> {
    let mut runs = m.run::<H>(m.initial_stack(inputs), interp, d.fuel());
    if runs.len() == 1 {
        Ok(runs.pop().unwrap())
    } else {
        Err(runs.len())
    }
}

/// Checks the four co-simulation properties at every grid point of an
/// `R`-family encoding, each program running under its own least fixed point.
pub fn cosimulate(enc: &EncodedProgram, d: &InputDomain) -> Result<CosimReport, FixpointError> {
    let (Some(last), Some(cnt_alloc), Some(last_addr)) =
        (&enc.introduced.last, &enc.introduced.cnt_alloc, &enc.introduced.last_addr)
    else {
        return Err(FixpointError::Unsupported(format!("co-simulation needs an R encoding, got {}", enc.config.label())));
    };
    let p = &enc.normalized;
    let q = &enc.program;
    let op = Oracle::new(p, d)?;
    let oq = Oracle::new(q, d)?;
    let (ip, iq) = rayon::join(|| op.least_fixpoint(), || oq.least_fixpoint());
    let (ip, iq) = (ip?.interp, iq?.interp);
    let (mp, mq) = (&op.machine, &oq.machine);
    let common: Vec<(usize, usize, String)> = mp
        .var_names()
        .enumerate()
        .filter_map(|(i, n)| mq.var_index(n).map(|j| (i, j, n.to_string())))
        .collect();
    let (i_last, i_cnt, i_addr) = (mq.var_index(last).unwrap(), mq.var_index(cnt_alloc).unwrap(), mq.var_index(last_addr).unwrap());

    let failures: Vec<CosimFailure> = oq
        .grid
        .par_iter()
        .flat_map_iter(|inputs| {
            let fail = |phi, detail: String| CosimFailure { inputs: inputs.clone(), phi, detail };
            let (pe, qe) = match (single::<Heap>(mp, inputs, &ip, d), single::<Heap>(mq, inputs, &iq, d)) {
                (Ok(a), Ok(b)) => (a, b),
                (a, b) => {
                    let n = |r: &Result<Execution, usize>| r.as_ref().map_or_else(|n| *n, |_| 1);
                    return vec![fail(Phi::Sigma, format!("{} original and {} encoded executions", n(&a), n(&b)))];
                }
            };
            let mut out = Vec::new();
            if !outcome_matches(&pe.outcome, &qe.outcome) {
                out.push(fail(Phi::Sigma, format!("original {} vs encoded {}", pe.outcome, qe.outcome)));
            }
            for (i, j, name) in &common {
                if !pe.stack[*i].loose_eq(&qe.stack[*j]) {
                    out.push(fail(Phi::Stacks, format!("{name}: {} vs {}", pe.stack[*i], qe.stack[*j])));
                }
            }
            let tracked = qe.stack[i_addr].as_addr().map_or_else(|| mp.def_obj().clone(), |a| pe.heap.get(a, mp.def_obj()));
            if !tracked.loose_eq(&qe.stack[i_last]) {
                out.push(fail(Phi::Reads, format!("{last} = {} but the heap holds {tracked}", qe.stack[i_last])));
            }
            if qe.stack[i_cnt] != Value::int(pe.heap.len() as i64) {
                out.push(fail(Phi::Allocs, format!("{cnt_alloc} = {} but the heap has {} objects", qe.stack[i_cnt], pe.heap.len())));
            }
            out
        })
        .collect();
    Ok(CosimReport { points: oq.grid.len(), failures })
}

/// Pairs of tuples witnessing that an introduced predicate is not a partial
/// function of its key positions.
pub fn functional_violations(enc: &EncodedProgram, interp: &TupleInterp) -> Vec<(String, Vec<Value>, Vec<Value>)> {
    enc.functional_keys
        .iter()
        .flat_map(|(p, key)| interp.functional_violations(p, key).into_iter().map(move |(a, b)| (p.clone(), a, b)))
        .collect()
}
