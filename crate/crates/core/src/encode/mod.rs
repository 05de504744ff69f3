//! Heap-eliminating program transformations.
//!
//! [`encode`] runs the whole pipeline for an [`EncodingConfig`]: optional
//! heap-operation bounding, one of the base encodings, the tagging, caching
//! and scope-variable extensions (applied while rewriting), argument removal
//! (applied afterwards) and finally expansion of the introduced `havoc`
//! statements unless native havoc was requested.

mod rules;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::{assign_locations, build, fresh_name, BinOp, Block, Cond, Expr, PredDecl, Program, StmtKind, Type, VarDecl};
use crate::interp::{determinize, determinize_with};

pub use rules::rewrite;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Base {
    /// Only bound the number of heap operations.
    N,
    #[default]
    R,
    RW,
    RWfun,
    RWmem,
}

impl Base {
    pub const ALL: [Base; 5] = [Base::N, Base::R, Base::RW, Base::RWfun, Base::RWmem];

    pub fn is_rw(self) -> bool {
        matches!(self, Base::RW | Base::RWfun | Base::RWmem)
    }

    pub fn name(self) -> &'static str {
        match self {
            Base::N => "n",
            Base::R => "r",
            Base::RW => "rw",
            Base::RWfun => "rwfun",
            Base::RWmem => "rwmem",
        }
    }
}

impl fmt::Display for Base {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Base {
    type Err = String;

    fn from_str(s: &str) -> Result<Base, String> {
        Base::ALL
            .into_iter()
            .find(|b| b.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown encoding '{s}' (expected n, r, rw, rwfun or rwmem)"))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct EncodingConfig {
    pub base: Base,
    /// Add write and read locations to the predicates.
    pub tagging: bool,
    /// Serve repeated accesses to one address from a one-element cache.
    pub caching: bool,
    /// Int variables whose current values are appended to every `R` occurrence.
    pub scope_vars: Vec<String>,
    /// Argument positions to remove, per predicate, after all other extensions.
    pub drop_args: BTreeMap<String, Vec<usize>>,
    /// Keep introduced `havoc` statements instead of expanding them.
    pub native_havoc: bool,
    /// Apply `Enc_n` before the base encoding.
    pub bound_heap_ops: bool,
    /// Let the fun variants record the allocated object in `W`.
    pub fun_alloc_writes: bool,
    /// Drop the program's own expression assertions (meant for `RWmem`).
    pub strip_asserts: bool,
}

impl Default for EncodingConfig {
    fn default() -> EncodingConfig {
        EncodingConfig {
            base: Base::R,
            tagging: false,
            caching: false,
            scope_vars: Vec::new(),
            drop_args: BTreeMap::new(),
            native_havoc: false,
            bound_heap_ops: false,
            fun_alloc_writes: false,
            strip_asserts: false,
        }
    }
}

impl EncodingConfig {
    pub fn new(base: Base) -> EncodingConfig {
        EncodingConfig { base, ..EncodingConfig::default() }
    }

    /// A short label such as `rw+tag+cache`.
    pub fn label(&self) -> String {
        let mut s = self.base.name().to_string();
        if self.tagging {
            s.push_str("+tag");
        }
        if self.caching {
            s.push_str("+cache");
        }
        if !self.scope_vars.is_empty() {
            s.push_str(&format!("+scope({})", self.scope_vars.join(",")));
        }
        for (p, idx) in &self.drop_args {
            let idx: Vec<String> = idx.iter().map(usize::to_string).collect();
            s.push_str(&format!("-{p}[{}]", idx.join(",")));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EncodeError {
    #[error("program already declares predicate '{0}'")]
    PredicateClash(String),
    #[error("program already has a {0} variable")]
    AlreadyEncoded(&'static str),
    #[error("unknown variable '{0}'")]
    UnknownVariable(String),
    #[error("variable '{0}' is not Int-typed")]
    NotInt(String),
    #[error("unknown predicate '{0}'")]
    UnknownPredicate(String),
    #[error("argument {index} out of range for predicate '{pred}' of arity {arity}")]
    BadIndex { pred: String, index: usize, arity: usize },
    #[error("{0}")]
    Havoc(String),
}

/// Names of the auxiliary variables an encoding introduced.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Introduced {
    pub budget: Option<String>,
    pub cnt_alloc: Option<String>,
    pub cnt: Option<String>,
    pub last: Option<String>,
    pub cnt_last: Option<String>,
    pub last_addr: Option<String>,
    pub t: Option<String>,
    pub last_loc: Option<String>,
    pub loc: Option<String>,
    pub cache_addr: Option<String>,
    pub cache_data: Option<String>,
    pub seed0: Option<String>,
    pub hseed: Option<String>,
    pub temp: Option<String>,
}

#[derive(Clone, Debug)]
pub struct EncodedProgram {
    pub program: Program,
    pub introduced: Introduced,
    /// `R` and `W` after augmentation and argument removal.
    pub predicates: Vec<PredDecl>,
    /// For each introduced predicate that must be a partial function, the
    /// argument positions forming its key. Predicates with removed
    /// arguments are absent.
    pub functional_keys: BTreeMap<String, Vec<usize>>,
    /// The program and configuration this encoding was produced from.
    pub source: Program,
    /// The source after havoc expansion, location numbering and, when
    /// requested, heap-operation bounding: the program the rules rewrote.
    pub normalized: Program,
    pub config: EncodingConfig,
}

pub const R_PRED: &str = "R";
pub const W_PRED: &str = "W";

/// Encodes `p` according to `cfg`.
pub fn encode(p: &Program, cfg: &EncodingConfig) -> Result<EncodedProgram, EncodeError> {
    let source = p.clone();
    let mut p = assign_locations(determinize(p).map_err(EncodeError::Havoc)?);
    let mut introduced = Introduced::default();
    if cfg.bound_heap_ops || cfg.base == Base::N {
        p = enc_n(&p)?;
        introduced.budget = p.budget.clone();
    }
    let mut enc = if cfg.base == Base::N {
        EncodedProgram {
            program: p.clone(),
            normalized: p,
            introduced,
            predicates: Vec::new(),
            functional_keys: BTreeMap::new(),
            source,
            config: cfg.clone(),
        }
    } else {
        let mut e = rewrite(&p, cfg)?;
        e.introduced.budget = introduced.budget;
        e.source = source;
        e
    };
    if !cfg.drop_args.is_empty() {
        enc = remove_arguments(enc, &cfg.drop_args)?;
    }
    if !cfg.native_havoc && has_havoc(&enc.program.body) {
        let used = enc.program.identifiers();
        let hseed = fresh_name("$hseed", &used);
        let mut q = enc.program.clone();
        q.vars.push(VarDecl { name: hseed.clone(), ty: Type::Int });
        enc.program = determinize_with(&q, &hseed).map_err(EncodeError::Havoc)?;
        enc.introduced.hseed = Some(hseed);
    }
    enc.program = assign_locations(enc.program);
    Ok(enc)
}

fn has_havoc(b: &Block) -> bool {
    let mut found = false;
    crate::ast::visit_stmts(b, &mut |s| found |= matches!(s.kind, StmtKind::Havoc(_)));
    found
}

/// Bounds heap operations: `$c := $c - 1; assume($c >= 0)` before every
/// `alloc`, `read` and `write`. `$c` becomes the program's budget variable.
pub fn enc_n(p: &Program) -> Result<Program, EncodeError> {
    if p.budget.is_some() {
        return Err(EncodeError::AlreadyEncoded("budget"));
    }
    let c = fresh_name("$c", &p.identifiers());
    fn go(b: &Block, c: &str) -> Block {
        let mut out = Vec::with_capacity(b.len());
        for s in b {
            let mut s = s.clone();
            match &mut s.kind {
                StmtKind::If(_, t, e) => {
                    *t = go(t, c);
                    *e = go(e, c);
                }
                StmtKind::While(_, body) => *body = go(body, c),
                k if k.is_heap_op() => {
                    out.push(build::assign(c, Expr::bin(BinOp::Sub, Expr::var(c), Expr::int(1))));
                    out.push(build::assume(Expr::bin(BinOp::Ge, Expr::var(c), Expr::int(0))));
                }
                _ => {}
            }
            out.push(s);
        }
        out
    }
    let mut q = p.clone();
    q.body = go(&p.body, &c);
    q.budget = Some(c);
    Ok(assign_locations(q))
}

/// Re-encodes the source of `e` with tagging switched on.
pub fn apply_tagging(e: &EncodedProgram) -> Result<EncodedProgram, EncodeError> {
    encode(&e.source, &EncodingConfig { tagging: true, ..e.config.clone() })
}

/// Re-encodes the source of `e` with the one-element cache.
pub fn apply_caching(e: &EncodedProgram) -> Result<EncodedProgram, EncodeError> {
    encode(&e.source, &EncodingConfig { caching: true, ..e.config.clone() })
}

/// Re-encodes the source of `e` with `vars` appended to every `R` occurrence.
pub fn apply_scope_vars(e: &EncodedProgram, vars: &[String]) -> Result<EncodedProgram, EncodeError> {
    let mut cfg = e.config.clone();
    cfg.scope_vars.extend(vars.iter().cloned());
    encode(&e.source, &cfg)
}

/// Removes the given argument positions of each predicate from its
/// declaration and from every assertion and assumption.
pub fn remove_arguments(mut e: EncodedProgram, drop: &BTreeMap<String, Vec<usize>>) -> Result<EncodedProgram, EncodeError> {
    let mut keep: BTreeMap<String, Vec<bool>> = BTreeMap::new();
    for (pred, idx) in drop {
        if idx.is_empty() {
            continue;
        }
        let decl = e
            .program
            .preds
            .iter_mut()
            .find(|d| &d.name == pred)
            .ok_or_else(|| EncodeError::UnknownPredicate(pred.clone()))?;
        let arity = decl.params.len();
        let mut mask = vec![true; arity];
        for &i in idx {
            if i >= arity {
                return Err(EncodeError::BadIndex { pred: pred.clone(), index: i, arity });
            }
            mask[i] = false;
        }
        decl.params = retain_mask(std::mem::take(&mut decl.params), &mask);
        keep.insert(pred.clone(), mask);
        e.functional_keys.remove(pred);
    }
    fn go(b: &mut Block, keep: &BTreeMap<String, Vec<bool>>) {
        for s in b {
            match &mut s.kind {
                StmtKind::Assume(Cond::Pred(p, args)) | StmtKind::Assert(Cond::Pred(p, args)) => {
                    if let Some(mask) = keep.get(p.as_str()) {
                        *args = retain_mask(std::mem::take(args), mask);
                    }
                }
                StmtKind::If(_, t, f) => {
                    go(t, keep);
                    go(f, keep);
                }
                StmtKind::While(_, body) => go(body, keep),
                _ => {}
            }
        }
    }
    go(&mut e.program.body, &keep);
    let names: BTreeSet<&str> = e.predicates.iter().map(|d| d.name.as_str()).collect();
    e.predicates = e.program.preds.iter().filter(|d| names.contains(d.name.as_str())).cloned().collect();
    Ok(e)
}

fn retain_mask<T>(v: Vec<T>, mask: &[bool]) -> Vec<T> {
    v.into_iter().zip(mask).filter(|(_, k)| **k).map(|(x, _)| x).collect()
}

/// Parses `R:1,2` style removal specifications.
pub fn parse_drop_spec(s: &str) -> Result<(String, Vec<usize>), String> {
    let (p, idx) = s.split_once(':').ok_or_else(|| format!("expected PRED:INDEX[,INDEX..], got '{s}'"))?;
    let idx = idx
        .split(',')
        .map(|i| i.trim().parse::<usize>().map_err(|e| format!("bad index '{i}': {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((p.trim().to_string(), idx))
}

#[cfg(test)]
mod tests;
