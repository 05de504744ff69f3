//! Prints the R and RW encodings of the bundled linked-list program.

use heapinv::ast::pretty_print;
use heapinv::corpus;
use heapinv::encode::{encode, Base, EncodingConfig};

fn main() {
    let p = corpus::entry(corpus::LIST_EXAMPLE).expect("bundled entry").program().expect("bundled program parses");
    for base in [Base::R, Base::RW] {
        let cfg = EncodingConfig { native_havoc: true, ..EncodingConfig::new(base) };
        let e = encode(&p, &cfg).expect("encodable");
        println!("// {}", cfg.label());
        print!("{}", pretty_print(&e.program));
    }
}
