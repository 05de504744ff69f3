//! Parses a program, typechecks it and prints it back with control locations.

use heapinv::ast::{load_program, pretty_print, visit_stmts};

const SRC: &str = "prog {
  adt Node { default Node(data: Int, next: Addr); }
  var x: Addr;
  var n: Node;
  x := alloc(Node(in, null));
  n := read(x);
  assert(n.data = in);
}";

fn main() {
    let typed = match load_program(SRC) {
        Ok(t) => t,
        Err(ds) => {
            for d in ds {
                eprintln!("{d}");
            }
            std::process::exit(2);
        }
    };
    print!("{}", pretty_print(&typed.program));
    visit_stmts(&typed.program.body, &mut |s| println!("location {} at {}", s.loc, s.pos));
}
