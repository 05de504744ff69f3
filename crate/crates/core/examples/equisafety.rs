//! Checks every encoding variant of one corpus entry against the original.

use heapinv::cli::equisafe;
use heapinv::corpus;
use heapinv::fixpoint::InputDomain;

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "list_sum".to_string());
    let Some(e) = corpus::entry(&name) else {
        eprintln!("no corpus entry '{name}'");
        std::process::exit(2);
    };
    let p = e.program().expect("bundled program parses");
    let d = InputDomain::default();
    for cfg in corpus::standard_variants(&p) {
        let r = equisafe(&p, &cfg, &d).expect("pipeline runs");
        let enc = r.encoded.as_ref().map_or("-", |x| x.verdict.name());
        println!("{:<28} {:?} original {} encoded {enc}", r.encoding, r.status, r.original.verdict.name());
    }
}
