use std::collections::{BTreeMap, BTreeSet};
use std::time::Duration;

use super::*;
use crate::ast::parse_program;

fn chc(src: &str) -> ClauseSet {
    to_chc(&parse_program(src).unwrap()).unwrap()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum G {
    I(i64),
    B(bool),
    O(String, Vec<G>),
}

fn int(g: &G) -> i64 {
    match g {
        G::I(v) => *v,
        g => panic!("not an integer: {g:?}"),
    }
}

fn truth(g: &G) -> bool {
    match g {
        G::B(b) => *b,
        g => panic!("not a Boolean: {g:?}"),
    }
}

/// Ground evaluation of a term; `None` on an unbound variable.
fn eval(t: &Term, env: &BTreeMap<String, G>, cs: &ClauseSet) -> Option<G> {
    let args = |ts: &[Term]| ts.iter().map(|a| eval(a, env, cs)).collect::<Option<Vec<G>>>();
    Some(match t {
        Term::Int(v) => G::I(v.to_i64().unwrap()),
        Term::Bool(b) => G::B(*b),
        Term::Var(x) => env.get(x)?.clone(),
        Term::App(f, ts) => {
            let a = args(ts)?;
            match f.split_once('.') {
                Some((adt, field)) => match &a[0] {
                    G::O(k, fs) => {
                        let d = cs.datatypes.iter().find(|d| d.name == adt).unwrap();
                        let (_, c) = d.ctor(k).unwrap();
                        // unspecified off the selector's constructor; the emitted ite never uses it
                        c.fields.iter().position(|x| x.name == field).map_or(G::I(0), |i| fs[i].clone())
                    }
                    g => panic!("selector on {g:?}"),
                },
                None => G::O(f.clone(), a),
            }
        }
        Term::Tester(c, b) => match eval(b, env, cs)? {
            G::O(k, _) => G::B(&k == c),
            g => panic!("tester on {g:?}"),
        },
        Term::Op(op, ts) => {
            let a = args(ts)?;
            match (*op, a.as_slice()) {
                ("-", [x]) => G::I(-int(x)),
                ("+", [x, y]) => G::I(int(x) + int(y)),
                ("-", [x, y]) => G::I(int(x) - int(y)),
                ("*", [x, y]) => G::I(int(x) * int(y)),
                ("div", [x, y]) => G::I(if int(y) == 0 { 0 } else { int(x).div_euclid(int(y)) }),
                ("mod", [x, y]) => G::I(if int(y) == 0 { 0 } else { int(x).rem_euclid(int(y)) }),
                ("<", [x, y]) => G::B(int(x) < int(y)),
                ("<=", [x, y]) => G::B(int(x) <= int(y)),
                (">", [x, y]) => G::B(int(x) > int(y)),
                (">=", [x, y]) => G::B(int(x) >= int(y)),
                ("=", [x, y]) => G::B(x == y),
                ("not", [x]) => G::B(!truth(x)),
                ("and", [x, y]) => G::B(truth(x) && truth(y)),
                ("or", [x, y]) => G::B(truth(x) || truth(y)),
                ("ite", [c, x, y]) => if truth(c) { x.clone() } else { y.clone() },
                _ => panic!("unsupported operator {op}"),
            }
        }
    })
}

/// Bounded forward chaining: unbound integer variables range over
/// `domain`. Returns true when `false` is derived.
fn derives_false(cs: &ClauseSet, domain: &[i64]) -> bool {
    let mut facts: BTreeMap<String, BTreeSet<Vec<G>>> = BTreeMap::new();
    for _ in 0..200 {
        let mut new = Vec::new();
        for c in &cs.clauses {
            let mut envs = vec![BTreeMap::new()];
            for a in &c.body {
                let rel = facts.get(&a.pred).cloned().unwrap_or_default();
                let mut next = Vec::new();
                for env in &envs {
                    'tuple: for tup in &rel {
                        let mut e: BTreeMap<String, G> = env.clone();
                        for (t, v) in a.args.iter().zip(tup) {
                            match t {
                                Term::Var(x) if !e.contains_key(x) => {
                                    e.insert(x.clone(), v.clone());
                                }
                                t => {
                                    if eval(t, &e, cs).as_ref() != Some(v) {
                                        continue 'tuple;
                                    }
                                }
                            }
                        }
                        next.push(e);
                    }
                }
                envs = next;
            }
            for (x, _) in &c.vars {
                if envs.first().is_some_and(|e| !e.contains_key(x)) {
                    envs = envs
                        .into_iter()
                        .flat_map(|e| {
                            domain.iter().map(move |v| {
                                let mut e = e.clone();
                                e.insert(x.clone(), G::I(*v));
                                e
                            })
                        })
                        .collect();
                }
            }
            for env in envs {
                if !c.constraint.iter().all(|t| truth(&eval(t, &env, cs).unwrap())) {
                    continue;
                }
                match &c.head {
                    None => return true,
                    Some(h) => new.push((h.pred.clone(), h.args.iter().map(|t| eval(t, &env, cs).unwrap()).collect::<Vec<G>>())),
                }
            }
        }
        let mut changed = false;
        for (p, t) in new {
            changed |= facts.entry(p).or_default().insert(t);
        }
        if !changed {
            return false;
        }
    }
    panic!("ground reasoning did not converge")
}

const DOMAIN: &[i64] = &[-3, -2, -1, 0, 1, 2, 3];

#[test]
fn skip_only_program_has_one_entry_clause() {
    let cs = chc("prog { skip; }");
    assert_eq!(cs.clauses.len(), 1);
    let c = &cs.clauses[0];
    assert!(c.body.is_empty() && c.constraint.is_empty());
    assert_eq!(c.head.as_ref().unwrap().pred, "Inv@1");
    assert_eq!(cs.query_clauses().count(), 0);
    assert!(!derives_false(&cs, DOMAIN));
}

#[test]
fn assert_zero_yields_a_false_clause_that_fires() {
    let cs = chc("prog { assert(0); }");
    assert_eq!(cs.clauses.len(), 2);
    assert_eq!(cs.entry_clauses().count(), 1);
    let q: Vec<&Clause> = cs.query_clauses().collect();
    assert_eq!(q.len(), 1);
    assert_eq!(q[0].body[0].pred, "Inv@1");
    assert!(q[0].constraint.is_empty());
    assert!(derives_false(&cs, DOMAIN));
    assert!(!derives_false(&chc("prog { assert(1); }"), DOMAIN));
}

#[test]
fn assumed_predicate_joins_the_body() {
    let cs = chc("prog { pred R(Int, Int, Int); var c: Int; var x: Int; assume(R(in, c, x)); assert(x = 0); }");
    let c = cs.clauses.iter().find(|c| c.body.len() == 2).expect("nonlinear clause");
    assert_eq!(c.body[0].pred, "Inv@1");
    assert_eq!(c.body[1].pred, "R");
    assert_eq!(c.head.as_ref().unwrap().pred, "Inv@2");
}

#[test]
fn asserted_predicate_heads_a_clause_and_execution_continues() {
    let cs = chc("prog { pred P(Int); assert(P(in + 1)); assert(in < 5); }");
    let heads: Vec<Option<&str>> = cs.clauses.iter().map(|c| c.head.as_ref().map(|h| h.pred.as_str())).collect();
    assert_eq!(heads, vec![Some("Inv@1"), Some("P"), Some("Inv@2"), None]);
    assert!(!derives_false(&cs, DOMAIN));
}

#[test]
fn heap_statements_are_rejected() {
    let p = parse_program("prog { adt N { default N(d: Int); } var p: Addr; p := alloc(defObj); }").unwrap();
    assert!(matches!(to_chc(&p), Err(ChcError::HeapStatement { loc: 1, .. })));
}

#[test]
fn havoc_leaves_the_variable_unconstrained() {
    let cs = chc("prog { var x: Int; havoc x; assert(x != 2); }");
    let c = &cs.clauses[1];
    assert!(c.vars.iter().any(|(v, _)| v == "x'"));
    assert_eq!(c.head.as_ref().unwrap().args[2], Term::Var("x'".into()));
    assert!(derives_false(&cs, DOMAIN));
    assert!(!derives_false(&chc("prog { var x: Int; havoc x; assume(x != 2); assert(x != 2); }"), DOMAIN));
}

#[test]
fn loops_become_recursive_clauses() {
    let src = |k| format!("prog {{ var i: Int; i := 0; while i < 3 {{ i := i + 1; }} assert(i = {k}); }}");
    let cs = chc(&src(3));
    assert!(cs.clauses.iter().any(|c| c.body.first().is_some_and(|b| b.pred == "Inv@3") && c.head.as_ref().is_some_and(|h| h.pred == "Inv@2")));
    assert!(!derives_false(&cs, DOMAIN));
    assert!(derives_false(&chc(&src(2)), DOMAIN));
}

#[test]
fn divisors_that_may_be_zero_get_false_clauses() {
    let cs = chc("prog { var x: Int; x := 6 / (in - 1) + in % 2; }");
    assert_eq!(cs.query_clauses().count(), 1);
    assert!(derives_false(&cs, DOMAIN));
    assert!(!derives_false(&chc("prog { var x: Int; x := 6 / (in * in + 1); }"), DOMAIN));
}

#[test]
fn truncating_division_matches_the_interpreter() {
    for (a, b) in [(7, 2), (-7, 2), (7, -2), (-7, -2), (0, 3)] {
        let cs = chc(&format!("prog {{ assert({a} / {b} = {} && {a} % {b} = {}); }}", a / b, a % b));
        assert!(!derives_false(&cs, &[0]), "{a} {b}");
    }
}

#[test]
fn selectors_on_other_constructors_yield_defaults() {
    let cs = chc("prog { adt C { default E(); F(v: Int); } var c: C; c := E(); assert(c.v = 0); assert(c is E); }");
    assert!(!derives_false(&cs, &[0]));
    let cs = chc("prog { adt C { default E(); F(v: Int); } var c: C; c := F(in); assert(c.v = 0); }");
    assert!(derives_false(&cs, DOMAIN));
}

#[test]
fn empty_clause_set_emits_header_and_check_sat() {
    assert_eq!(emit_smtlib(&ClauseSet::default()), "(set-logic HORN)\n(check-sat)\n");
}

#[test]
fn emission_declares_sorts_and_predicates() {
    let cs = chc("prog { adt C { default E(); F(v: Int, w: Addr); } pred P(Int, C); var c: C; havoc c; assume(P(in, c)); }");
    let s = emit_smtlib(&cs);
    assert!(s.starts_with("(set-logic HORN)\n(declare-datatypes ((C 0)) (((E) (F (C.v Int) (C.w Int)))))\n"), "{s}");
    assert!(s.contains("(declare-fun P (Int C) Bool)"));
    assert!(s.contains("(declare-fun Inv@1 (Int Int C) Bool)"));
    assert!(s.contains("(|c'| C)"));
    assert!(s.ends_with("(check-sat)\n"));
    assert_eq!(s, emit_smtlib(&cs));
}

#[test]
fn reserved_names_are_escaped() {
    assert_eq!(smt::symbol("div"), "|div#|");
    assert_eq!(smt::symbol("$cnt"), "$cnt");
    assert_eq!(smt::symbol("x'"), "|x'|");
    let s = emit_smtlib(&chc("prog { input let; var div: Int; div := let - 1; assert(div < let); }"));
    assert!(s.contains("(|let#| Int)") && s.contains("(- |let#| 1)"), "{s}");
}

#[test]
fn negative_literals_use_unary_minus() {
    let s = emit_smtlib(&chc("prog { assert(in != -3); }"));
    assert!(s.contains("(- 3)"), "{s}");
}

#[test]
fn solver_decides_trivial_systems() {
    let template = solver_template();
    if !solver_available(&template) {
        eprintln!("no Horn solver available for '{template}', skipping");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    for (src, want) in [("prog { assert(1); }", SolverVerdict::Sat), ("prog { assert(0); }", SolverVerdict::Unsat)] {
        let f = dir.path().join("p.smt2");
        std::fs::write(&f, emit_smtlib(&chc(src))).unwrap();
        assert_eq!(solve(&f, &template, Duration::from_secs(60)), want, "{src}");
    }
}
