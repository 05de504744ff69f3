//! Determinization: `havoc` as a macro that draws bits from a seed variable.

use std::collections::BTreeSet;

use crate::ast::{build, fresh_name, BinOp, Block, Expr, Program, Stmt, StmtKind, Type, UnOp, VarDecl};

/// The bit-reading macro for an `Int` target:
///
/// ```text
/// x := -(seed % 2); seed := seed / 2;
/// while seed % 2 = 1 { seed := seed / 2; x := 2 * x + seed % 2; seed := seed / 2; }
/// seed := seed / 2;
/// ```
pub fn havoc_int(x: &str, seed: &str) -> Block {
    let s = || Expr::var(seed);
    let bit = || Expr::bin(BinOp::Mod, s(), Expr::int(2));
    let halve = || build::assign(seed, Expr::bin(BinOp::Div, s(), Expr::int(2)));
    vec![
        build::assign(x, Expr::Unary(UnOp::Neg, Box::new(bit()))),
        halve(),
        build::while_(
            Expr::bin(BinOp::Eq, bit(), Expr::int(1)),
            vec![
                halve(),
                build::assign(x, Expr::bin(BinOp::Add, Expr::bin(BinOp::Mul, Expr::int(2), Expr::var(x)), bit())),
                halve(),
            ],
        ),
        halve(),
    ]
}

/// Rewrites every `havoc x` into macro code reading from `seed`.
///
/// Object-typed targets are built from havoced integer leaves, with a
/// havoced tag choosing the constructor when there are several (tag 0 picks
/// the first, 1 the second, anything else the last). Leaves live in fresh
/// `$`-prefixed variables that are reused across havoc sites. Address-typed
/// targets cannot be determinized and are rejected.
pub fn determinize_with(p: &Program, seed: &str) -> Result<Program, String> {
    let mut h = Havocker { p, seed, used: p.identifiers(), temps: Vec::new() };
    let body = h.block(&p.body)?;
    let mut out = p.clone();
    out.body = body;
    out.vars.extend(h.temps.into_iter().map(|(name, ty)| VarDecl { name, ty }));
    Ok(out)
}

/// [`determinize_with`] using the program's own seed variable.
pub fn determinize(p: &Program) -> Result<Program, String> {
    determinize_with(p, &p.seed.clone())
}

struct Havocker<'a> {
    p: &'a Program,
    seed: &'a str,
    used: BTreeSet<String>,
    temps: Vec<(String, Type)>,
}

impl Havocker<'_> {
    fn block(&mut self, b: &[Stmt]) -> Result<Block, String> {
        let mut out = Vec::new();
        for s in b {
            match &s.kind {
                StmtKind::Havoc(x) => {
                    let ty = self.p.var_type(x).ok_or_else(|| format!("unknown variable '{x}'"))?;
                    let mut taken = BTreeSet::new();
                    out.extend(self.havoc(x, &ty, &mut taken)?);
                }
                StmtKind::If(c, t, e) => {
                    let t = self.block(t)?;
                    let e = self.block(e)?;
                    out.push(Stmt { kind: StmtKind::If(c.clone(), t, e), ..s.clone() });
                }
                StmtKind::While(c, body) => {
                    let body = self.block(body)?;
                    out.push(Stmt { kind: StmtKind::While(c.clone(), body), ..s.clone() });
                }
                _ => out.push(s.clone()),
            }
        }
        Ok(out)
    }

    /// A temporary of type `ty` not in `taken`, declaring a new one if needed.
    fn temp(&mut self, ty: &Type, taken: &mut BTreeSet<String>) -> String {
        if let Some((n, _)) = self.temps.iter().find(|(n, t)| t == ty && !taken.contains(n)) {
            let n = n.clone();
            taken.insert(n.clone());
            return n;
        }
        let n = fresh_name("$hv", &self.used);
        self.used.insert(n.clone());
        self.temps.push((n.clone(), ty.clone()));
        taken.insert(n.clone());
        n
    }

    fn havoc(&mut self, x: &str, ty: &Type, taken: &mut BTreeSet<String>) -> Result<Block, String> {
        let name = match ty {
            Type::Int => return Ok(havoc_int(x, self.seed)),
            Type::Addr => return Err(format!("cannot havoc Addr variable '{x}'")),
            Type::Obj(n) => n,
        };
        let adt = self.p.adt(name).ok_or_else(|| format!("unknown data type '{name}'"))?.clone();
        let mut code = Vec::new();
        let tag = if adt.ctors.len() > 1 {
            let t = self.temp(&Type::Int, taken);
            code.extend(havoc_int(&t, self.seed));
            Some(t)
        } else {
            None
        };
        let mut assigns = Vec::new();
        for c in &adt.ctors {
            let mut args = Vec::new();
            for f in &c.fields {
                if f.ty == Type::Addr {
                    return Err(format!("cannot havoc Addr field '{}' of '{name}'", f.name));
                }
                let t = self.temp(&f.ty, taken);
                code.extend(self.havoc(&t, &f.ty, taken)?);
                args.push(Expr::var(t));
            }
            assigns.push(build::assign(x, Expr::Ctor(c.name.clone(), args)));
        }
        let mut chain = vec![assigns.pop().unwrap()];
        if let Some(t) = tag {
            for (i, a) in assigns.into_iter().enumerate().rev() {
                chain = vec![build::if_(Expr::bin(BinOp::Eq, Expr::var(&t), Expr::int(i as i64)), vec![a], chain)];
            }
        }
        code.extend(chain);
        Ok(code)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::parse_program;
    use crate::interp::eval::{Fuel, Inputs, Machine};
    use crate::interp::interpretation::TupleInterp;
    use crate::interp::value::Value;
    use crate::int::Int;

    /// Runs the macro twice from `seed` and returns both values and the final seed.
    fn sample(seed: i64) -> (i64, i64, i64) {
        let p = parse_program("prog { var x: Int; var y: Int; havoc x; havoc y; }").unwrap();
        let p = determinize(&p).unwrap();
        let m = Machine::new(&p);
        let inputs = Inputs { seed: Int::from(seed), ..Inputs::default() };
        let e = m.eval_heap(m.initial_stack(&inputs), &TupleInterp::new(), Fuel { loops: 1000, heap_ops: 0 });
        let get = |n: &str| e.stack[m.var_index(n).unwrap()].as_int().unwrap().to_i64().unwrap();
        (get("x"), get("y"), get("seed"))
    }

    /// Direct reading of the bit encoding the macro implements.
    fn decode(mut seed: i64) -> (i64, i64) {
        let mut x = -(seed % 2);
        seed /= 2;
        while seed % 2 == 1 {
            seed /= 2;
            x = 2 * x + seed % 2;
            seed /= 2;
        }
        (x, seed / 2)
    }

    #[test]
    fn seed_zero_gives_zero() {
        let (x, _, s) = sample(0);
        assert_eq!((x, s), (0, 0));
    }

    #[test]
    fn macro_matches_bit_decoding_table() {
        for seed in 0..64 {
            let (x, rest) = decode(seed);
            let (y, _) = decode(rest);
            let (mx, my, _) = sample(seed);
            assert_eq!((mx, my), (x, y), "seed {seed}");
        }
        assert_eq!(decode(2), (0, 0));
        assert_eq!(decode(1), (-1, 0));
        assert_eq!(decode(6), (1, 0));
    }

    #[test]
    fn consecutive_havocs_cover_small_pairs() {
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..(1 << 16) {
            let (x, rest) = decode(seed);
            let (y, _) = decode(rest);
            seen.insert((x, y));
        }
        for x in -3..=3 {
            for y in -3..=3 {
                assert!(seen.contains(&(x, y)), "({x}, {y}) unreachable");
            }
        }
    }

    #[test]
    fn object_havoc_builds_from_int_leaves() {
        let p = parse_program("prog { adt N { default N(d: Int, e: Int); } var n: N; havoc n; }").unwrap();
        let d = determinize(&p).unwrap();
        assert!(crate::ast::typecheck(&d).is_ok());
        let m = Machine::new(&d);
        // bits: d = 1 ("011"), e = 0 ("0")
        let inputs = Inputs { seed: Int::from(0b0110), ..Inputs::default() };
        let e = m.eval_heap(m.initial_stack(&inputs), &TupleInterp::new(), Fuel::default());
        assert_eq!(e.stack[m.var_index("n").unwrap()], Value::obj("N", vec![Value::int(1), Value::int(0)]));
    }

    #[test]
    fn multi_constructor_havoc_picks_by_tag() {
        let src = "prog { adt T { default L(v: Int); B(a: Int, b: Int); } var t: T; havoc t; }";
        let d = determinize(&parse_program(src).unwrap()).unwrap();
        assert!(crate::ast::typecheck(&d).is_ok());
        let m = Machine::new(&d);
        let mut seen = std::collections::BTreeSet::new();
        for seed in 0..4096 {
            let inputs = Inputs { seed: Int::from(seed), ..Inputs::default() };
            let e = m.eval_heap(m.initial_stack(&inputs), &TupleInterp::new(), Fuel { loops: 1000, heap_ops: 0 });
            match &e.stack[m.var_index("t").unwrap()] {
                Value::Obj(o) => seen.insert(o.ctor.to_string()),
                v => panic!("not an object: {v}"),
            };
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), ["B", "L"]);
    }
}
