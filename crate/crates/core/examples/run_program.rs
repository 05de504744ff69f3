//! Evaluates a heap program on a few inputs, with both heap models.

use heapinv::ast::load_program;
use heapinv::interp::{Fuel, Inputs, Machine, TupleInterp};

fn main() {
    let src = "prog {
      adt Node { default Node(data: Int, next: Addr); }
      var x: Addr;
      var n: Node;
      x := alloc(defObj);
      write(x, Node(in * 2, null));
      n := read(x);
      assert(n.data != 4);
    }";
    let p = load_program(src).expect("example parses").program;
    let m = Machine::new(&p);
    let empty = TupleInterp::new();
    for i in 0..4 {
        let inputs = Inputs { input: i.into(), ..Inputs::default() };
        let h = m.eval_heap(m.initial_stack(&inputs), &empty, Fuel::default());
        let t = m.eval_trace(m.initial_stack(&inputs), &empty, Fuel::default());
        println!("in={i}: {} (heap of {} objects; trace of {} writes)", h.outcome, h.heap.len(), t.heap.trace.len());
    }
}
