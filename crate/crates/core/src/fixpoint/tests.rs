use super::*;
use crate::ast::parse_program;
use crate::encode::{encode, Base, EncodingConfig};

fn small() -> InputDomain {
    InputDomain { seed_range: (0, 3), ..InputDomain::default() }
}

fn prog(src: &str) -> Program {
    parse_program(src).unwrap()
}

fn ints(t: &[i64]) -> Vec<Value> {
    t.iter().map(|&v| Value::int(v)).collect()
}

const LIST: &str = "adt Node { default Node(data: Int, next: Addr); } heaptype Node; var x: Addr; var y: Addr; var n: Node;";

#[test]
fn grid_collapses_unused_axes() {
    let d = InputDomain::default();
    assert_eq!(d.grid(&prog("prog { skip; }")).len(), 7);
    assert_eq!(d.grid(&prog("prog { var x: Int; x := seed; }")).len(), 7 * 256);
    assert_eq!(d.full_grid().len(), 7 * 256 * 7);
    let g = d.grid(&prog("prog { skip; }"));
    assert_eq!(g[0].input, Int::from(-3));
    assert_eq!(g[0].budget, Int::from(32));
    assert!(InputDomain { seed_range: (-1, 3), ..d.clone() }.validate().is_err());
    assert!(InputDomain { in_range: (2, 1), ..d }.validate().is_err());
}

#[test]
fn single_failing_assert_adds_its_tuple() {
    let t = immediate_consequence(&prog("prog { pred P(Int); assert(P(1)); }"), &TupleInterp::new(), &small()).unwrap();
    assert_eq!(t.relation("P").unwrap().iter().cloned().collect::<Vec<_>>(), vec![ints(&[1])]);
}

#[test]
fn assume_blocks_before_assert() {
    let p = prog("prog { pred P(Int); assume(P(0)); assert(P(1)); }");
    let t = immediate_consequence(&p, &TupleInterp::new(), &small()).unwrap();
    assert_eq!(t.size(), 0);
}

#[test]
fn no_predicate_asserts_give_empty_fixpoint() {
    let fp = least_fixpoint(&prog("prog { var x: Int; x := in; assert(x = in); }"), &small()).unwrap();
    assert_eq!(fp.interp.size(), 0);
    assert_eq!(fp.iterations, 0);
}

#[test]
fn sequential_asserts_take_one_iteration_each() {
    let fp = least_fixpoint(&prog("prog { pred P(Int); assert(P(1)); assert(P(2)); }"), &small()).unwrap();
    let mut expected = TupleInterp::new();
    expected.insert("P", ints(&[1]));
    expected.insert("P", ints(&[2]));
    assert_eq!(fp.interp, expected);
    assert_eq!(fp.iterations, 2);
}

#[test]
fn fixpoint_of_a_single_read() {
    let src = format!("prog {{ {LIST} x := alloc(Node(in, null)); n := read(x); }}");
    let e = encode(&prog(&src), &EncodingConfig { native_havoc: true, ..EncodingConfig::new(Base::R) }).unwrap();
    let fp = least_fixpoint(&e.program, &InputDomain::default()).unwrap();
    let r = fp.interp.relation("R").unwrap();
    assert_eq!(r.len(), 7);
    for i in -3..=3 {
        assert!(r.contains(&vec![Value::int(i), Value::int(1), Value::obj("Node", ints(&[i, 0]))]));
    }
    assert_eq!(Oracle::new(&e.program, &InputDomain::default()).unwrap().step(&fp.interp).interp, fp.interp);
}

#[test]
fn iteration_cap_is_reported() {
    let p = prog("prog { pred P(Int); assert(P(1)); assert(P(2)); assert(P(3)); }");
    let d = InputDomain { iteration_cap: Some(2), ..small() };
    assert!(matches!(least_fixpoint(&p, &d), Err(FixpointError::IterationCap { .. })));
}

#[test]
fn safety_verdicts() {
    let d = small();
    assert_eq!(check_safety(&prog("prog { assert(1); }"), &d).unwrap().verdict, SafetyVerdict::Safe);
    let r = check_safety(&prog("prog { assert(0); }"), &d).unwrap();
    match &r.verdict {
        SafetyVerdict::Unsafe(w) => {
            assert_eq!((w.predicate.as_str(), w.tuple.len()), ("F", 0));
            assert!(replay(&prog("prog { assert(0); }"), &r.interp, w, &d));
        }
        v => panic!("{v}"),
    }
    let r = check_safety(&prog("prog { while 1 { skip; } }"), &d).unwrap();
    assert_eq!(r.verdict, SafetyVerdict::Inconclusive(7));
    let json = serde_json::to_value(&r).unwrap();
    assert_eq!(json["verdict"], "inconclusive");
    assert_eq!(json["inconclusiveCount"], 7);
}

#[test]
fn unsafe_write_read_agrees_under_rw() {
    let src = format!("prog {{ {LIST} x := alloc(defObj); write(x, Node(in, null)); n := read(x); assert(n.data != 1); }}");
    let p = prog(&src);
    let cfg = EncodingConfig { native_havoc: true, bound_heap_ops: true, ..EncodingConfig::new(Base::RW) };
    let e = encode(&p, &cfg).unwrap();
    let r = check_equisafety(&p, &e.program, &InputDomain::default()).unwrap();
    assert!(r.agree);
    assert!(r.original.verdict.is_unsafe() && r.encoded.verdict.is_unsafe());
    assert!(functional_violations(&e, &r.encoded.interp).is_empty());
}

#[test]
fn cosimulation_on_a_list_prefix() {
    let src = format!(
        "prog {{ {LIST} var i: Int; x := alloc(defObj); y := x; i := 0;
         while i < in {{ y := alloc(Node(i, y)); i := i + 1; }}
         write(x, Node(7, y)); n := read(y); x := n.next; n := read(x); assert(n.data < in); }}"
    );
    let cfg = EncodingConfig { native_havoc: true, bound_heap_ops: true, ..EncodingConfig::new(Base::R) };
    let e = encode(&prog(&src), &cfg).unwrap();
    let r = cosimulate(&e, &InputDomain::default()).unwrap();
    assert_eq!(r.points, 49);
    assert!(r.holds(), "{:?}", r.failures);
    let rw = encode(&prog(&src), &EncodingConfig { base: Base::RW, ..cfg }).unwrap();
    assert!(matches!(cosimulate(&rw, &InputDomain::default()), Err(FixpointError::Unsupported(_))));
}
