//! Checks the bundled corpus under the R encoding and prints a summary.

use heapinv::cli::{check_corpus, select_entries, Subset};
use heapinv::corpus::oracle_config;
use heapinv::encode::Base;
use heapinv::fixpoint::InputDomain;

fn main() {
    let entries = select_entries(None, Subset::All).expect("no filter");
    let r = check_corpus(&entries, &[Some(oracle_config(Base::R))], &InputDomain::default());
    for c in &r.checks {
        println!("{:<28} expected {:<6} encoded {}", c.name, c.expected.name(), c.encoded.as_deref().unwrap_or("-"));
    }
    println!("{:?}", r.summary);
}
