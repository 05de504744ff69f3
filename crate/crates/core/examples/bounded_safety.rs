//! Computes the least fixed point of a program with predicate assertions and
//! its bounded safety verdict.

use heapinv::ast::load_program;
use heapinv::fixpoint::{check_safety, InputDomain};

fn main() {
    let src = "prog {
      pred P(Int);
      var y: Int;
      assert(P(in + 1));
      havoc y;
      assume(P(y));
      assert(y != 0);
    }";
    let p = load_program(src).expect("example parses").program;
    let r = check_safety(&p, &InputDomain::default()).expect("fixpoint converges");
    println!("verdict {} after {} iterations", r.verdict.name(), r.iterations);
    for (pred, tuples) in r.interp.relations() {
        let ts: Vec<String> = tuples.iter().map(|t| format!("{:?}", t)).collect();
        println!("{pred} = {{{}}}", ts.join(", "));
    }
    if let Some(w) = r.witnesses.first() {
        println!("witness: {w}");
    }
}
