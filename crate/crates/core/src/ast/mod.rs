//! UPLang abstract syntax, concrete grammar, type checker and printer.
//!
//! A program is a single `prog { ... }` unit: algebraic data type declarations,
//! the designated heap object type, uninterpreted predicate declarations, the
//! designated input and seed variables, ordinary variable declarations, and a
//! statement block.
//!
//! ```text
//! prog {
//!   adt Node { default Node(data: Int, next: Addr); }
//!   heaptype Node;
//!   pred P(Int, Node);
//!   input in;
//!   seed s;
//!   var p: Addr;
//!   var n: Node;
//!   p := alloc(Node(in, null));
//!   n := read(p);
//!   assert(n.data = in);
//! }
//! ```

mod lexer;
mod parser;
mod printer;
mod typeck;

use std::collections::BTreeSet;
use std::fmt;

use crate::int::Int;

pub use parser::{parse_expr_in, parse_formula_defs, parse_program, FormulaDef, ParseError};
pub use printer::{print_expr, pretty_print};
pub use typeck::{typecheck, Diagnostic, TypeEnv, TypedProgram};

/// Name of the reserved 0-ary predicate used for failed expression assertions.
pub const FAIL_PRED: &str = "F";

/// Prefix reserved for encoder-introduced identifiers.
pub const RESERVED_PREFIX: char = '$';

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    Int,
    Addr,
    /// A value of the named algebraic data type.
    Obj(String),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("Int"),
            Type::Addr => f.write_str("Addr"),
            Type::Obj(n) => f.write_str(n),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Field {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ctor {
    pub name: String,
    pub fields: Vec<Field>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdtDecl {
    pub name: String,
    pub ctors: Vec<Ctor>,
    /// Index into `ctors` of the constructor whose all-default instance is the
    /// type's default value.
    pub default_ctor: usize,
}

impl AdtDecl {
    pub fn ctor(&self, name: &str) -> Option<(usize, &Ctor)> {
        self.ctors.iter().enumerate().find(|(_, c)| c.name == name)
    }

    /// Finds a selector by name; selector names are unique within a declaration.
    pub fn selector(&self, name: &str) -> Option<(usize, usize, &Field)> {
        self.ctors.iter().enumerate().find_map(|(ci, c)| {
            c.fields
                .iter()
                .enumerate()
                .find(|(_, f)| f.name == name)
                .map(|(fi, f)| (ci, fi, f))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PredDecl {
    pub name: String,
    pub params: Vec<Type>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarDecl {
    pub name: String,
    pub ty: Type,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Mod,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
    And,
    Or,
}

impl BinOp {
    pub fn is_arith(self) -> bool {
        matches!(self, BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Div | BinOp::Mod)
    }

    pub fn is_ordering(self) -> bool {
        matches!(self, BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Mod => "%",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::And => "&&",
            BinOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr {
    Int(Int),
    Var(String),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Null,
    DefObj,
    /// Constructor application `C(e, ...)`.
    Ctor(String, Vec<Expr>),
    /// Selector `e.field`.
    Sel(Box<Expr>, String),
    /// Tester `e is C`.
    Is(Box<Expr>, String),
}

impl Expr {
    pub fn int(v: i64) -> Expr {
        Expr::Int(Int::from(v))
    }

    pub fn var(name: impl Into<String>) -> Expr {
        Expr::Var(name.into())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    /// Calls `f` on every variable name read by the expression.
    pub fn for_each_var<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Var(v) => f(v),
            Expr::Int(_) | Expr::Null | Expr::DefObj => {}
            Expr::Unary(_, e) | Expr::Sel(e, _) | Expr::Is(e, _) => e.for_each_var(f),
            Expr::Binary(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
            Expr::Ctor(_, args) => args.iter().for_each(|a| a.for_each_var(f)),
        }
    }

    pub fn mentions(&self, var: &str) -> bool {
        let mut found = false;
        self.for_each_var(&mut |v| found |= v == var);
        found
    }
}

/// Condition of an `assume`/`assert`: a plain expression or a predicate atom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Cond {
    Expr(Expr),
    Pred(String, Vec<Expr>),
}

impl Cond {
    pub fn exprs(&self) -> &[Expr] {
        match self {
            Cond::Expr(e) => std::slice::from_ref(e),
            Cond::Pred(_, args) => args,
        }
    }
}

/// Source position, 1-based.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

pub type Block = Vec<Stmt>;

/// A statement with its control location.
///
/// Equality ignores the source position so that a re-parsed pretty-printed
/// program compares equal to the original.
#[derive(Clone, Debug)]
pub struct Stmt {
    pub loc: u32,
    pub pos: Pos,
    pub kind: StmtKind,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Stmt) -> bool {
        self.loc == other.loc && self.kind == other.kind
    }
}

impl Eq for Stmt {}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StmtKind {
    Assign(String, Expr),
    /// `p := alloc(e)`
    Alloc(String, Expr),
    /// `x := read(p)`
    Read(String, String),
    /// `write(p, e)`
    Write(String, Expr),
    Skip,
    If(Expr, Block, Block),
    While(Expr, Block),
    Assume(Cond),
    Assert(Cond),
    /// Native nondeterministic assignment.
    Havoc(String),
}

impl StmtKind {
    pub fn is_heap_op(&self) -> bool {
        matches!(self, StmtKind::Alloc(..) | StmtKind::Read(..) | StmtKind::Write(..))
    }
}

impl From<StmtKind> for Stmt {
    fn from(kind: StmtKind) -> Stmt {
        Stmt { loc: 0, pos: Pos::default(), kind }
    }
}

/// Statement constructors used by the encoders and tests.
pub mod build {
    use super::*;

    pub fn assign(x: &str, e: Expr) -> Stmt {
        StmtKind::Assign(x.into(), e).into()
    }

    pub fn alloc(p: &str, e: Expr) -> Stmt {
        StmtKind::Alloc(p.into(), e).into()
    }

    pub fn read(x: &str, p: &str) -> Stmt {
        StmtKind::Read(x.into(), p.into()).into()
    }

    pub fn write(p: &str, e: Expr) -> Stmt {
        StmtKind::Write(p.into(), e).into()
    }

    pub fn skip() -> Stmt {
        StmtKind::Skip.into()
    }

    pub fn if_(c: Expr, t: Block, e: Block) -> Stmt {
        StmtKind::If(c, t, e).into()
    }

    pub fn while_(c: Expr, body: Block) -> Stmt {
        StmtKind::While(c, body).into()
    }

    pub fn assume(e: Expr) -> Stmt {
        StmtKind::Assume(Cond::Expr(e)).into()
    }

    pub fn assert(e: Expr) -> Stmt {
        StmtKind::Assert(Cond::Expr(e)).into()
    }

    pub fn assume_pred(p: &str, args: Vec<Expr>) -> Stmt {
        StmtKind::Assume(Cond::Pred(p.into(), args)).into()
    }

    pub fn assert_pred(p: &str, args: Vec<Expr>) -> Stmt {
        StmtKind::Assert(Cond::Pred(p.into(), args)).into()
    }

    pub fn havoc(x: &str) -> Stmt {
        StmtKind::Havoc(x.into()).into()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub adts: Vec<AdtDecl>,
    /// Declared `heaptype`; when absent and exactly one ADT exists, that ADT is the heap type.
    pub heap_type: Option<String>,
    pub preds: Vec<PredDecl>,
    /// Designated program input (`input in;`), an Int variable.
    pub input: String,
    /// Designated havoc seed (`seed s;`), an Int variable.
    pub seed: String,
    /// Prophecy variable chosen by the initial configuration (`prophecy $last_addr;`).
    pub prophecy: Option<String>,
    /// Heap-operation budget counter (`budget $c;`).
    pub budget: Option<String>,
    /// Ordinary variables, excluding the designated ones above.
    pub vars: Vec<VarDecl>,
    pub body: Block,
}

impl Program {
    pub fn new(body: Block) -> Program {
        Program {
            adts: Vec::new(),
            heap_type: None,
            preds: Vec::new(),
            input: "in".into(),
            seed: "seed".into(),
            prophecy: None,
            budget: None,
            vars: Vec::new(),
            body,
        }
    }

    /// All variables in stack order: input, seed, prophecy, budget, then ordinary ones.
    pub fn all_vars(&self) -> Vec<VarDecl> {
        let mut out = vec![
            VarDecl { name: self.input.clone(), ty: Type::Int },
            VarDecl { name: self.seed.clone(), ty: Type::Int },
        ];
        for d in [&self.prophecy, &self.budget].into_iter().flatten() {
            out.push(VarDecl { name: d.clone(), ty: Type::Int });
        }
        out.extend(self.vars.iter().cloned());
        out
    }

    pub fn var_type(&self, name: &str) -> Option<Type> {
        if name == self.input
            || name == self.seed
            || self.prophecy.as_deref() == Some(name)
            || self.budget.as_deref() == Some(name)
        {
            return Some(Type::Int);
        }
        self.vars.iter().find(|v| v.name == name).map(|v| v.ty.clone())
    }

    pub fn adt(&self, name: &str) -> Option<&AdtDecl> {
        self.adts.iter().find(|a| a.name == name)
    }

    pub fn pred(&self, name: &str) -> Option<&PredDecl> {
        self.preds.iter().find(|p| p.name == name)
    }

    /// The heap object ADT: the declared `heaptype`, or the only ADT when there is one.
    pub fn heap_adt(&self) -> Option<&AdtDecl> {
        match &self.heap_type {
            Some(n) => self.adt(n),
            None if self.adts.len() == 1 => self.adts.first(),
            None => None,
        }
    }

    /// Finds the ADT and constructor index declaring constructor `name`.
    pub fn find_ctor(&self, name: &str) -> Option<(&AdtDecl, usize)> {
        self.adts
            .iter()
            .find_map(|a| a.ctor(name).map(|(i, _)| (a, i)))
    }

    /// Every identifier declared or referenced by the program.
    pub fn identifiers(&self) -> BTreeSet<String> {
        let mut ids: BTreeSet<String> = self.all_vars().into_iter().map(|v| v.name).collect();
        for a in &self.adts {
            ids.insert(a.name.clone());
            for c in &a.ctors {
                ids.insert(c.name.clone());
                ids.extend(c.fields.iter().map(|f| f.name.clone()));
            }
        }
        ids.extend(self.preds.iter().map(|p| p.name.clone()));
        ids
    }

    /// Number of read/write/alloc statements.
    pub fn heap_op_count(&self) -> usize {
        let mut n = 0;
        visit_stmts(&self.body, &mut |s| n += s.kind.is_heap_op() as usize);
        n
    }

    /// Whether any statement or expression reads variable `name`.
    pub fn reads_var(&self, name: &str) -> bool {
        let mut found = false;
        visit_stmts(&self.body, &mut |s| {
            found |= match &s.kind {
                StmtKind::Assign(_, e) | StmtKind::Alloc(_, e) => e.mentions(name),
                StmtKind::Read(_, p) => p == name,
                StmtKind::Write(p, e) => p == name || e.mentions(name),
                StmtKind::If(c, _, _) | StmtKind::While(c, _) => c.mentions(name),
                StmtKind::Assume(c) | StmtKind::Assert(c) => c.exprs().iter().any(|e| e.mentions(name)),
                StmtKind::Skip | StmtKind::Havoc(_) => false,
            }
        });
        found
    }
}

/// Parses and typechecks a program in one step.
pub fn load_program(src: &str) -> Result<TypedProgram, Vec<Diagnostic>> {
    let p = parse_program(src).map_err(|e| vec![Diagnostic::from(e)])?;
    typecheck(&p)
}

/// Returns `base` if it is not already used, otherwise `base1`, `base2`, ...
pub fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    if !used.contains(base) {
        return base.to_string();
    }
    (1..).map(|i| format!("{base}{i}")).find(|n| !used.contains(n)).unwrap()
}

/// Pre-order traversal over every statement, nested ones included.
pub fn visit_stmts<'a>(block: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in block {
        f(s);
        match &s.kind {
            StmtKind::If(_, t, e) => {
                visit_stmts(t, f);
                visit_stmts(e, f);
            }
            StmtKind::While(_, b) => visit_stmts(b, f),
            _ => {}
        }
    }
}

/// Assigns consecutive control locations, starting at 1, in pre-order.
pub fn assign_locations(mut p: Program) -> Program {
    fn go(block: &mut [Stmt], next: &mut u32) {
        for s in block {
            s.loc = *next;
            *next += 1;
            match &mut s.kind {
                StmtKind::If(_, t, e) => {
                    go(t, next);
                    go(e, next);
                }
                StmtKind::While(_, b) => go(b, next),
                _ => {}
            }
        }
    }
    let mut next = 1;
    go(&mut p.body, &mut next);
    p
}
