//! Emits Horn clauses for the encoded list program and, if a solver is
//! installed, runs it.

use std::time::Duration;

use heapinv::chc::{emit_smtlib, solve, solver_available, solver_template, to_chc};
use heapinv::corpus;
use heapinv::encode::{encode, Base, EncodingConfig};

fn main() {
    let name = std::env::args().nth(1).unwrap_or_else(|| "write_read".to_string());
    let p = corpus::entry(&name).expect("bundled entry").program().expect("bundled program parses");
    let enc = encode(&p, &EncodingConfig { native_havoc: true, ..EncodingConfig::new(Base::R) }).expect("encodable");
    let cs = to_chc(&enc.program).expect("heap-free");
    let text = emit_smtlib(&cs);
    print!("{text}");
    let template = solver_template();
    if solver_available(&template) {
        let dir = std::env::temp_dir().join(format!("heapinv-example-{}", std::process::id()));
        std::fs::create_dir_all(&dir).expect("temp dir");
        let f = dir.join(format!("{name}.smt2"));
        std::fs::write(&f, &text).expect("clause file");
        println!("; {}", solve(&f, &template, Duration::from_secs(60)));
        let _ = std::fs::remove_dir_all(&dir);
    }
}
