use std::fmt::Write as _;

use super::*;

/// Canonical concrete syntax. Deterministic, two-space indentation, and the
/// inverse of [`parse_program`](super::parse_program) on its image.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::from("prog {\n");
    for a in &p.adts {
        let _ = write!(out, "  adt {} {{", a.name);
        for (i, c) in a.ctors.iter().enumerate() {
            out.push(' ');
            if i == a.default_ctor {
                out.push_str("default ");
            }
            out.push_str(&c.name);
            out.push('(');
            for (j, f) in c.fields.iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                let _ = write!(out, "{}: {}", f.name, f.ty);
            }
            out.push_str(");");
        }
        out.push_str(" }\n");
    }
    if let Some(h) = &p.heap_type {
        let _ = writeln!(out, "  heaptype {h};");
    }
    for pd in &p.preds {
        let params: Vec<String> = pd.params.iter().map(|t| t.to_string()).collect();
        let _ = writeln!(out, "  pred {}({});", pd.name, params.join(", "));
    }
    let _ = writeln!(out, "  input {};", p.input);
    let _ = writeln!(out, "  seed {};", p.seed);
    if let Some(v) = &p.prophecy {
        let _ = writeln!(out, "  prophecy {v};");
    }
    if let Some(v) = &p.budget {
        let _ = writeln!(out, "  budget {v};");
    }
    for v in &p.vars {
        let _ = writeln!(out, "  var {}: {};", v.name, v.ty);
    }
    print_block(&mut out, &p.body, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn print_block(out: &mut String, block: &[Stmt], depth: usize) {
    for s in block {
        print_stmt(out, s, depth);
    }
}

fn print_stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    match &s.kind {
        StmtKind::Assign(x, e) => {
            let _ = writeln!(out, "{x} := {};", print_expr(e));
        }
        StmtKind::Alloc(p, e) => {
            let _ = writeln!(out, "{p} := alloc({});", print_expr(e));
        }
        StmtKind::Read(x, p) => {
            let _ = writeln!(out, "{x} := read({p});");
        }
        StmtKind::Write(p, e) => {
            let _ = writeln!(out, "write({p}, {});", print_expr(e));
        }
        StmtKind::Skip => out.push_str("skip;\n"),
        StmtKind::Havoc(x) => {
            let _ = writeln!(out, "havoc {x};");
        }
        StmtKind::If(c, t, e) => {
            let _ = writeln!(out, "if {} {{", print_expr(c));
            print_block(out, t, depth + 1);
            indent(out, depth);
            if e.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                print_block(out, e, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While(c, b) => {
            let _ = writeln!(out, "while {} {{", print_expr(c));
            print_block(out, b, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Assume(c) => {
            let _ = writeln!(out, "assume({});", print_cond(c));
        }
        StmtKind::Assert(c) => {
            let _ = writeln!(out, "assert({});", print_cond(c));
        }
    }
}

fn print_cond(c: &Cond) -> String {
    match c {
        Cond::Expr(e) => print_expr(e),
        Cond::Pred(p, args) => format!("{p}({})", join(args)),
    }
}

fn join(args: &[Expr]) -> String {
    args.iter().map(print_expr).collect::<Vec<_>>().join(", ")
}

const OR: u8 = 1;
const AND: u8 = 2;
const CMP: u8 = 3;
const ADD: u8 = 4;
const MUL: u8 = 5;
const UNARY: u8 = 6;
const POSTFIX: u8 = 7;
const ATOM: u8 = 8;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Binary(op, ..) => match op {
            BinOp::Or => OR,
            BinOp::And => AND,
            BinOp::Add | BinOp::Sub => ADD,
            BinOp::Mul | BinOp::Div | BinOp::Mod => MUL,
            _ => CMP,
        },
        Expr::Is(..) => CMP,
        Expr::Unary(..) => UNARY,
        Expr::Int(v) if v.is_negative() => UNARY,
        Expr::Sel(..) => POSTFIX,
        _ => ATOM,
    }
}

fn wrap(e: &Expr, min: u8) -> String {
    let s = print_expr(e);
    if prec(e) < min {
        format!("({s})")
    } else {
        s
    }
}

/// Prints an expression with the minimal parentheses needed to re-parse it.
pub fn print_expr(e: &Expr) -> String {
    match e {
        Expr::Int(v) => v.to_string(),
        Expr::Var(x) => x.clone(),
        Expr::Null => "null".into(),
        Expr::DefObj => "defObj".into(),
        Expr::Ctor(c, args) => format!("{c}({})", join(args)),
        Expr::Sel(b, f) => format!("{}.{f}", wrap(b, POSTFIX)),
        Expr::Is(b, c) => format!("{} is {c}", wrap(b, ADD)),
        Expr::Unary(op, b) => {
            let sym = match op {
                UnOp::Neg => "-",
                UnOp::Not => "!",
            };
            // `-5` would re-parse as a negative literal
            let needs_parens = match (op, &**b) {
                (UnOp::Neg, Expr::Int(_)) => true,
                _ => prec(b) < UNARY || matches!(&**b, Expr::Int(v) if v.is_negative()),
            };
            if needs_parens {
                format!("{sym}({})", print_expr(b))
            } else {
                format!("{sym}{}", print_expr(b))
            }
        }
        Expr::Binary(op, l, r) => {
            let p = prec(e);
            let (lmin, rmin) = if p == CMP { (p + 1, p + 1) } else { (p, p + 1) };
            format!("{} {} {}", wrap(l, lmin), op.symbol(), wrap(r, rmin))
        }
    }
}
