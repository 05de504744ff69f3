mod common;

use heapinv::ast::{load_program, parse_program, pretty_print};
use heapinv::corpus;
use heapinv::encode::{encode, Base, EncodingConfig};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn printed_programs_parse_back(p in common::program()) {
        let text = pretty_print(&p);
        let q = parse_program(&text).map_err(|e| TestCaseError::fail(format!("{e}\n{text}")))?;
        prop_assert_eq!(q, p);
    }

    #[test]
    fn encodings_of_generated_programs_typecheck(p in common::program(), b in prop::sample::select(Base::ALL.to_vec())) {
        let e = encode(&p, &EncodingConfig::new(b)).unwrap();
        let text = pretty_print(&e.program);
        let t = load_program(&text).map_err(|ds| TestCaseError::fail(format!("{ds:?}\n{text}")))?;
        prop_assert_eq!(t.program, e.program);
    }
}

#[test]
fn corpus_programs_round_trip() {
    for e in corpus::entries() {
        let p = e.program().unwrap();
        assert_eq!(parse_program(&pretty_print(&p)).unwrap(), p, "{}", e.name);
        for cfg in corpus::standard_variants(&p) {
            let enc = encode(&p, &cfg).unwrap();
            assert_eq!(parse_program(&pretty_print(&enc.program)).unwrap(), enc.program, "{} {}", e.name, cfg.label());
        }
    }
}
