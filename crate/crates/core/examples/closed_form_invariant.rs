//! Runs the R encoding of the list program under the bundled closed-form
//! interpretation of R and counts the outcomes.

use std::collections::BTreeMap;

use heapinv::corpus;
use heapinv::encode::{encode, Base, EncodingConfig};
use heapinv::fixpoint::InputDomain;
use heapinv::interp::{FormulaInterp, Heap, Machine};

fn main() {
    let p = corpus::entry(corpus::LIST_EXAMPLE).expect("bundled entry").program().expect("bundled program parses");
    let enc = encode(&p, &EncodingConfig { native_havoc: true, ..EncodingConfig::new(Base::R) }).expect("encodable");
    let interp = FormulaInterp::parse(&enc.program, corpus::LIST_INVARIANT).expect("invariant parses");
    let m = Machine::new(&enc.program);
    let d = InputDomain { seed_range: (0, 0), ..InputDomain::default() };
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for i in d.full_grid() {
        for e in m.run::<Heap>(m.initial_stack(&i), &interp, d.fuel()) {
            *counts.entry(e.outcome.to_string()).or_default() += 1;
        }
    }
    println!("{counts:?}");
}
