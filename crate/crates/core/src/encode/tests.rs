use super::*;
use crate::ast::{parse_program, pretty_print, typecheck, visit_stmts, Program, Type};

const NODE: &str = "adt Node { default Node(data: Int, next: Addr); } heaptype Node;";

fn prog(body: &str) -> Program {
    parse_program(&format!("prog {{ {NODE} var x: Addr; var y: Addr; var n: Node; var i: Int; {body} }}")).unwrap()
}

/// The statements of `b` in concrete syntax, one per line, unindented at top level.
fn stmts(b: &Block) -> String {
    pretty_print(&Program::new(b.clone()))
        .lines()
        .filter(|l| !l.starts_with("prog") && !l.starts_with("  input") && !l.starts_with("  seed") && *l != "}")
        .map(|l| &l[2..])
        .collect::<Vec<_>>()
        .join("\n")
}

fn native(base: Base) -> EncodingConfig {
    EncodingConfig { native_havoc: true, ..EncodingConfig::new(base) }
}

fn structural_checks(e: &EncodedProgram) {
    let p = &e.program;
    if e.config.base != Base::N {
        assert_eq!(p.heap_op_count(), 0);
        assert!(p.vars.iter().all(|v| v.ty != Type::Addr));
        assert!(p.adts.iter().flat_map(|a| &a.ctors).flat_map(|c| &c.fields).all(|f| f.ty != Type::Addr));
    }
    if let Err(d) = typecheck(p) {
        panic!("{d:?}\n{}", pretty_print(p));
    }
    let text = pretty_print(p);
    assert_eq!(parse_program(&text).unwrap(), *p);
}

#[test]
fn enc_r_alloc_row() {
    let e = encode(&prog("x := alloc(n);"), &native(Base::R)).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.ends_with("$cnt_alloc := $cnt_alloc + 1;\nx := $cnt_alloc;\nif $last_addr = x {\n  $last := n;\n}"), "{body}");
    assert!(body.starts_with("$cnt_alloc := 0;\n$cnt := 0;\n$last := defObj;"), "{body}");
    assert_eq!(e.program.prophecy.as_deref(), Some("$last_addr"));
    assert_eq!(e.predicates[0].params, vec![Type::Int, Type::Int, Type::Obj("Node".into())]);
}

#[test]
fn enc_r_read_and_write_rows() {
    let e = encode(&prog("write(x, n); n := read(x);"), &native(Base::R)).unwrap();
    let body = stmts(&e.program.body);
    let expected = "if $last_addr = x && (0 < x && x <= $cnt_alloc) {
  $last := n;
}
$cnt := $cnt + 1;
if $last_addr = x {
  assert(R(in, $cnt, $last));
  n := $last;
} else {
  havoc n;
  assume(R(in, $cnt, n));
}";
    assert!(body.ends_with(expected), "{body}");
}

#[test]
fn enc_rw_rows() {
    let e = encode(&prog("x := alloc(n); write(x, n); n := read(x);"), &native(Base::RW)).unwrap();
    let body = stmts(&e.program.body);
    let expected = "$cnt_alloc := 0;
$cnt := 0;
$cnt_last := 0;
$t := 0;
assert(W(in, 0, defObj));
$cnt_alloc := $cnt_alloc + 1;
x := $cnt_alloc;
$cnt := $cnt + 1;
assert(W(in, $cnt, n));
if $last_addr = x {
  $cnt_last := $cnt;
}
$cnt := $cnt + 1;
if 0 < x && x <= $cnt_alloc {
  assert(W(in, $cnt, n));
  if $last_addr = x {
    $cnt_last := $cnt;
  }
}
$cnt := $cnt + 1;
if $last_addr = x {
  assert(R(in, $cnt, $cnt_last));
  $t := $cnt_last;
} else {
  havoc $t;
  assume(R(in, $cnt, $t));
}
havoc n;
assume(W(in, $t, n));";
    assert_eq!(body, expected);
    assert_eq!(e.functional_keys[W_PRED], vec![0, 1]);
}

#[test]
fn fun_variants() {
    let src = prog("x := alloc(n); write(x, n); n := read(x);");
    let f = stmts(&encode(&src, &native(Base::RWfun)).unwrap().program.body);
    assert!(!f.contains("W(in, 0, defObj)"));
    assert!(f.contains("x := $cnt_alloc;\n$cnt := $cnt + 1;\nif 0 < x"), "{f}");
    let m = stmts(&encode(&src, &native(Base::RWmem)).unwrap().program.body);
    assert!(m.contains("$cnt := $cnt + 1;\nassert(0 < x && x <= $cnt_alloc);\nif $last_addr = x {"), "{m}");
    assert!(m.contains("} else {\n  assert(0);\n}"), "{m}");
    let cfg = EncodingConfig { fun_alloc_writes: true, ..native(Base::RWfun) };
    let a = stmts(&encode(&src, &cfg).unwrap().program.body);
    assert!(a.contains("x := $cnt_alloc;\n$cnt := $cnt + 1;\nassert(W(in, $cnt, n));"), "{a}");
}

#[test]
fn strip_asserts_keeps_predicate_asserts() {
    let cfg = EncodingConfig { strip_asserts: true, ..native(Base::RWmem) };
    let e = encode(&prog("x := alloc(n); n := read(x); assert(n.data = 1);"), &cfg).unwrap();
    let body = stmts(&e.program.body);
    assert!(!body.contains("n.data"));
    assert!(body.contains("assert(R("));
}

#[test]
fn null_becomes_zero_and_addr_becomes_int() {
    let e = encode(&prog("x := null; n := Node(1, null);"), &native(Base::R)).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("x := 0;\nn := Node(1, 0);"), "{body}");
    structural_checks(&e);
}

#[test]
fn enc_n_inserts_budget_checks() {
    let p = enc_n(&prog("n := read(x); i := 1;")).unwrap();
    assert_eq!(stmts(&p.body), "$c := $c - 1;\nassume($c >= 0);\nn := read(x);\ni := 1;");
    assert_eq!(p.budget.as_deref(), Some("$c"));
    let q = enc_n(&prog("i := 1;")).unwrap();
    assert_eq!(q.body, prog("i := 1;").body);
    assert!(enc_n(&p).is_err());
}

#[test]
fn tagging_adds_locations() {
    // locations: 1 write, 2 skip, 3 skip, 4 read
    let e = encode(&prog("write(x, n); skip; skip; n := read(x);"), &EncodingConfig { tagging: true, ..native(Base::R) }).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("$last := n;\n  $last_loc := 1;"), "{body}");
    assert!(body.contains("assert(R(in, $cnt, $last, $last_loc, 4));"), "{body}");
    assert!(body.contains("havoc n;\n  havoc $l;\n  assume(R(in, $cnt, n, $l, 4));"), "{body}");
    assert_eq!(e.predicates[0].params.len(), 5);
    assert_eq!(e.functional_keys[R_PRED], vec![0, 1, 4]);
    structural_checks(&e);

    let rw = encode(&prog("write(x, n); n := read(x);"), &EncodingConfig { tagging: true, ..native(Base::RW) }).unwrap();
    let body = stmts(&rw.program.body);
    assert!(body.contains("assert(W(in, 0, defObj, 0));"), "{body}");
    assert!(body.contains("assert(W(in, $cnt, n, 1));"), "{body}");
    assert!(body.contains("assume(W(in, $t, n, $l));"), "{body}");
    structural_checks(&rw);
}

#[test]
fn scope_vars_extend_r_only() {
    let cfg = EncodingConfig { scope_vars: vec!["i".into()], ..native(Base::RW) };
    let e = encode(&prog("write(x, n); n := read(x);"), &cfg).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("assume(R(in, $cnt, $t, i));"), "{body}");
    assert!(body.contains("assume(W(in, $t, n));"), "{body}");
    let bad = EncodingConfig { scope_vars: vec!["n".into()], ..native(Base::R) };
    assert_eq!(encode(&prog("skip;"), &bad).unwrap_err(), EncodeError::NotInt("n".into()));
    let same = encode(&prog("n := read(x);"), &native(Base::R)).unwrap();
    let with_none = apply_scope_vars(&same, &[]).unwrap();
    assert_eq!(same.program, with_none.program);
}

#[test]
fn drop_counter_argument() {
    let mut drop = BTreeMap::new();
    drop.insert("R".to_string(), vec![1]);
    let cfg = EncodingConfig { drop_args: drop, ..native(Base::R) };
    let e = encode(&prog("n := read(x);"), &cfg).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("assert(R(in, $last));") && body.contains("assume(R(in, n));"), "{body}");
    assert_eq!(e.predicates[0].params.len(), 2);
    assert!(e.functional_keys.is_empty());
    structural_checks(&e);
    let mut bad = BTreeMap::new();
    bad.insert("R".to_string(), vec![7]);
    assert!(matches!(
        encode(&prog("skip;"), &EncodingConfig { drop_args: bad, ..native(Base::R) }),
        Err(EncodeError::BadIndex { .. })
    ));
    assert_eq!(parse_drop_spec("R:1,2").unwrap(), ("R".to_string(), vec![1, 2]));
}

#[test]
fn caching_wraps_reads() {
    let e = encode(&prog("write(x, n); n := read(x);"), &EncodingConfig { caching: true, ..native(Base::R) }).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("$lastc_addr := -1;\n$lastc_data := defObj;"), "{body}");
    assert!(body.contains("if 0 < x && x <= $cnt_alloc {\n  $lastc_addr := x;\n  $lastc_data := n;\n}"), "{body}");
    assert!(body.contains("if $lastc_addr = x {\n  n := $lastc_data;\n} else {\n  $cnt := $cnt + 1;"), "{body}");
    assert!(body.ends_with("  $lastc_addr := x;\n  $lastc_data := n;\n}"), "{body}");
    structural_checks(&e);
}

#[test]
fn operands_that_could_fail_or_alias_use_a_temporary() {
    let e = encode(&prog("x := alloc(Node(1 / i, x));"), &native(Base::RWfun)).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.contains("$wv := Node(1 / i, x);\n$cnt_alloc := $cnt_alloc + 1;"), "{body}");
    structural_checks(&e);
}

#[test]
fn seed_is_snapshotted_when_used() {
    let e = encode(&prog("i := seed; n := read(x);"), &native(Base::R)).unwrap();
    let body = stmts(&e.program.body);
    assert!(body.starts_with("$seed0 := seed;"));
    assert!(body.contains("assert(R(in, $cnt, $last, $seed0));"), "{body}");
}

#[test]
fn introduced_names_avoid_capture() {
    let p = parse_program(&format!("prog {{ {NODE} var $cnt: Int; var x: Addr; var n: Node; $cnt := 5; n := read(x); }}")).unwrap();
    let e = encode(&p, &native(Base::R)).unwrap();
    assert_eq!(e.introduced.cnt.as_deref(), Some("$cnt1"));
    assert!(stmts(&e.program.body).contains("$cnt := 5;"));
    structural_checks(&e);
    let clash = parse_program(&format!("prog {{ {NODE} pred R(Int); skip; }}")).unwrap();
    assert_eq!(encode(&clash, &native(Base::R)).unwrap_err(), EncodeError::PredicateClash("R".into()));
}

#[test]
fn macro_havoc_by_default() {
    let e = encode(&prog("n := read(x);"), &EncodingConfig::new(Base::RW)).unwrap();
    let mut havocs = 0;
    visit_stmts(&e.program.body, &mut |s| havocs += matches!(s.kind, StmtKind::Havoc(_)) as usize);
    assert_eq!(havocs, 0);
    assert_eq!(e.introduced.hseed.as_deref(), Some("$hseed"));
    assert!(stmts(&e.program.body).contains("$hseed := $hseed / 2;"));
    structural_checks(&e);
}

#[test]
fn every_configuration_is_well_formed() {
    let p = prog(
        "x := alloc(defObj); y := x; i := 0;
         while i < in { y := alloc(Node(i, y)); write(x, Node(2, y)); n := read(x); x := n.next; i := i + 1; }
         if x != null { n := read(y); } else { write(y, defObj); }
         assert(n.data >= 0);",
    );
    for base in Base::ALL {
        for tagging in [false, true] {
            for caching in [false, true] {
                for native_havoc in [false, true] {
                    let cfg = EncodingConfig { base, tagging, caching, native_havoc, bound_heap_ops: true, ..EncodingConfig::default() };
                    let e = encode(&p, &cfg).unwrap_or_else(|err| panic!("{}: {err}", cfg.label()));
                    structural_checks(&e);
                    let again = encode(&p, &cfg).unwrap();
                    assert_eq!(pretty_print(&again.program), pretty_print(&e.program));
                }
            }
        }
    }
}
