//! Random well-typed heap programs over a fixed set of declarations.
#![allow(dead_code)]

use heapinv::ast::{assign_locations, build, parse_program, typecheck, BinOp, Block, Expr, Program, Stmt};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};

pub const HEADER: &str = "prog {
  adt Node { default Node(data: Int, next: Addr); }
  var a: Addr;
  var b: Addr;
  var n: Node;
  var x: Int;
  var y: Int;
  skip;
}";

const INT_VARS: &[&str] = &["x", "y", "in"];
const ADDR_VARS: &[&str] = &["a", "b"];

fn int_leaf() -> BoxedStrategy<Expr> {
    prop_oneof![
        (-3i64..=3).prop_map(Expr::int),
        prop::sample::select(INT_VARS).prop_map(Expr::var),
        Just(Expr::Sel(Box::new(Expr::var("n")), "data".into())),
        Just(Expr::bin(BinOp::Mod, Expr::var("seed"), Expr::int(4))),
    ]
    .boxed()
}

pub fn int_expr() -> BoxedStrategy<Expr> {
    int_leaf()
        .prop_recursive(2, 6, 2, |inner| {
            (prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul]), inner.clone(), inner)
                .prop_map(|(op, l, r)| Expr::bin(op, l, r))
        })
        .boxed()
}

pub fn addr_expr() -> BoxedStrategy<Expr> {
    prop_oneof![
        prop::sample::select(ADDR_VARS).prop_map(Expr::var),
        Just(Expr::Null),
        Just(Expr::Sel(Box::new(Expr::var("n")), "next".into())),
    ]
    .boxed()
}

pub fn cond_expr() -> BoxedStrategy<Expr> {
    prop_oneof![
        (prop::sample::select(vec![BinOp::Lt, BinOp::Le, BinOp::Eq, BinOp::Ne]), int_expr(), int_expr())
            .prop_map(|(op, l, r)| Expr::bin(op, l, r)),
        (prop::sample::select(vec![BinOp::Eq, BinOp::Ne]), addr_expr(), addr_expr()).prop_map(|(op, l, r)| Expr::bin(op, l, r)),
    ]
    .boxed()
}

fn obj_expr() -> BoxedStrategy<Expr> {
    prop_oneof![
        1 => Just(Expr::DefObj),
        3 => (int_expr(), addr_expr()).prop_map(|(d, p)| Expr::Ctor("Node".into(), vec![d, p])),
    ]
    .boxed()
}

fn simple_stmt() -> BoxedStrategy<Stmt> {
    prop_oneof![
        3 => (prop::sample::select(&["x", "y"][..]), int_expr()).prop_map(|(v, e)| build::assign(v, e)),
        1 => (prop::sample::select(ADDR_VARS), addr_expr()).prop_map(|(v, e)| build::assign(v, e)),
        2 => (prop::sample::select(ADDR_VARS), obj_expr()).prop_map(|(v, e)| build::alloc(v, e)),
        3 => prop::sample::select(ADDR_VARS).prop_map(|p| build::read("n", p)),
        3 => (prop::sample::select(ADDR_VARS), obj_expr()).prop_map(|(p, e)| build::write(p, e)),
        1 => cond_expr().prop_map(build::assert),
        1 => Just(build::skip()),
    ]
    .boxed()
}

fn block(depth: u32) -> BoxedStrategy<Block> {
    if depth == 0 {
        return prop::collection::vec(simple_stmt(), 1..4).boxed();
    }
    let stmt = prop_oneof![
        6 => simple_stmt(),
        1 => (cond_expr(), block(depth - 1), block(depth - 1)).prop_map(|(c, t, e)| build::if_(c, t, e)),
        1 => (1i64..=3, block(depth - 1)).prop_map(|(k, mut body)| {
            body.push(build::assign("y", Expr::bin(BinOp::Add, Expr::var("y"), Expr::int(1))));
            build::while_(Expr::bin(BinOp::Lt, Expr::var("y"), Expr::int(k)), body)
        }),
    ];
    prop::collection::vec(stmt, 1..5).boxed()
}

/// Programs over [`HEADER`]'s declarations with nested branches and loops.
pub fn program() -> impl Strategy<Value = Program> {
    block(2).prop_map(|body| {
        let mut p = parse_program(HEADER).expect("header parses");
        p.body = body;
        let p = assign_locations(p);
        typecheck(&p).expect("generated program typechecks");
        p
    })
}

/// `n` programs drawn deterministically from [`program`].
pub fn sample_programs(n: usize, seed: u64) -> Vec<Program> {
    let mut bytes = [0u8; 32];
    bytes[..8].copy_from_slice(&seed.to_le_bytes());
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &bytes);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let s = program();
    (0..n).map(|_| s.new_tree(&mut runner).expect("generation succeeds").current()).collect()
}
