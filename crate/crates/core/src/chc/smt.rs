use std::fmt::Write as _;

use super::{Atom, Clause, ClauseSet, Sort, Term};
use crate::ast::Type;

/// Symbols that would collide with SMT-LIB keywords or core and integer
/// theory functions when used as user names.
const RESERVED: &[&str] = &[
    "_", "!", "as", "let", "exists", "forall", "match", "par", "and", "or", "not", "xor", "=>", "ite", "=",
    "distinct", "true", "false", "div", "mod", "abs", "to_real", "to_int", "is_int", "Int", "Bool", "Real",
    "Array", "select", "store", "BINARY", "DECIMAL", "HEXADECIMAL", "NUMERAL", "STRING",
];

fn simple(s: &str) -> bool {
    let mut cs = s.chars();
    let Some(c0) = cs.next() else { return false };
    let ok = |c: char| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c);
    !c0.is_ascii_digit() && ok(c0) && cs.all(ok)
}

/// Renders a user identifier as an SMT-LIB symbol.
pub(super) fn symbol(s: &str) -> String {
    if RESERVED.contains(&s) {
        format!("|{s}#|")
    } else if simple(s) {
        s.to_string()
    } else {
        format!("|{s}|")
    }
}

fn sort(s: &Sort) -> String {
    match s {
        Sort::Int => "Int".into(),
        Sort::Adt(n) => symbol(n),
    }
}

fn field_sort(t: &Type) -> String {
    sort(&Sort::of(t))
}

fn term(t: &Term, out: &mut String) {
    match t {
        Term::Int(v) if v.is_negative() => {
            let _ = write!(out, "(- {})", v.neg());
        }
        Term::Int(v) => {
            let _ = write!(out, "{v}");
        }
        Term::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Term::Var(x) => out.push_str(&symbol(x)),
        Term::App(f, args) if args.is_empty() => out.push_str(&symbol(f)),
        Term::App(f, args) => app(&symbol(f), args, out),
        Term::Op(f, args) => app(f, args, out),
        Term::Tester(c, b) => {
            let _ = write!(out, "((_ is {}) ", symbol(c));
            term(b, out);
            out.push(')');
        }
    }
}

fn app(f: &str, args: &[Term], out: &mut String) {
    out.push('(');
    out.push_str(f);
    for a in args {
        out.push(' ');
        term(a, out);
    }
    out.push(')');
}

fn atom(a: &Atom, out: &mut String) {
    if a.args.is_empty() {
        out.push_str(&symbol(&a.pred));
    } else {
        app(&symbol(&a.pred), &a.args, out);
    }
}

fn clause(c: &Clause, out: &mut String) {
    let mut body = String::new();
    let parts = c.body.len() + c.constraint.len();
    if parts > 1 {
        body.push_str("(and");
    }
    for a in &c.body {
        if parts > 1 {
            body.push(' ');
        }
        atom(a, &mut body);
    }
    for t in &c.constraint {
        if parts > 1 {
            body.push(' ');
        }
        term(t, &mut body);
    }
    if parts > 1 {
        body.push(')');
    }
    let mut head = String::new();
    match &c.head {
        Some(a) => atom(a, &mut head),
        None => head.push_str("false"),
    }
    let imp = if parts == 0 { head } else { format!("(=> {body} {head})") };
    out.push_str("(assert ");
    if c.vars.is_empty() {
        out.push_str(&imp);
    } else {
        out.push_str("(forall (");
        for (i, (v, s)) in c.vars.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({} {})", symbol(v), sort(s));
        }
        let _ = write!(out, ") {imp})");
    }
    out.push_str(")\n");
}

/// Serializes a clause set as an SMT-LIB2 script in the HORN logic.
pub fn emit_smtlib(cs: &ClauseSet) -> String {
    let mut out = String::from("(set-logic HORN)\n");
    if !cs.datatypes.is_empty() {
        out.push_str("(declare-datatypes (");
        for (i, a) in cs.datatypes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            let _ = write!(out, "({} 0)", symbol(&a.name));
        }
        out.push_str(") (");
        for (i, a) in cs.datatypes.iter().enumerate() {
            if i > 0 {
                out.push(' ');
            }
            out.push('(');
            for (j, c) in a.ctors.iter().enumerate() {
                if j > 0 {
                    out.push(' ');
                }
                let _ = write!(out, "({}", symbol(&c.name));
                for f in &c.fields {
                    let _ = write!(out, " ({} {})", symbol(&super::selector_name(&a.name, &f.name)), field_sort(&f.ty));
                }
                out.push(')');
            }
            out.push(')');
        }
        out.push_str("))\n");
    }
    for p in &cs.preds {
        let sorts: Vec<String> = p.sorts.iter().map(sort).collect();
        let _ = writeln!(out, "(declare-fun {} ({}) Bool)", symbol(&p.name), sorts.join(" "));
    }
    for c in &cs.clauses {
        clause(c, &mut out);
    }
    out.push_str("(check-sat)\n");
    out
}
