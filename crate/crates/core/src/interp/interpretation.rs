//! Interpretations of uninterpreted predicates: explicit tuple sets, and
//! closed formulas loaded from a file.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::{Arc, RwLock};

use crate::ast::{parse_formula_defs, ParseError, Program, Type};
use crate::int::Int;

use super::compile::{eval_expr, CExpr, ExprCompiler};
use super::value::Value;

/// Membership oracle for predicate relations.
pub trait Interpretation: Send + Sync {
    fn contains(&self, pred: &str, args: &[Value]) -> bool;

    /// All tuples of `pred` agreeing with `pattern` at its `Some` positions.
    fn candidates(&self, pred: &str, pattern: &[Option<Value>]) -> Vec<Vec<Value>>;
}

type Index = HashMap<Vec<Value>, Vec<Vec<Value>>>;

/// A finite interpretation: a set of argument tuples per predicate. Absent
/// predicates denote the empty relation. Ordered pointwise by inclusion.
#[derive(Default)]
pub struct TupleInterp {
    rels: BTreeMap<String, BTreeSet<Vec<Value>>>,
    /// Lazily built lookup tables keyed by predicate and concrete-position mask.
    index: RwLock<HashMap<(String, u64), Arc<Index>>>,
}

impl Clone for TupleInterp {
    fn clone(&self) -> TupleInterp {
        TupleInterp { rels: self.rels.clone(), index: RwLock::default() }
    }
}

impl PartialEq for TupleInterp {
    fn eq(&self, other: &TupleInterp) -> bool {
        self.normalized() == other.normalized()
    }
}

impl Eq for TupleInterp {}

impl fmt::Debug for TupleInterp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.rels.iter()).finish()
    }
}

impl TupleInterp {
    pub fn new() -> TupleInterp {
        TupleInterp::default()
    }

    fn normalized(&self) -> BTreeMap<&String, &BTreeSet<Vec<Value>>> {
        self.rels.iter().filter(|(_, s)| !s.is_empty()).collect()
    }

    /// Adds a tuple; returns whether it was new.
    pub fn insert(&mut self, pred: &str, tuple: Vec<Value>) -> bool {
        let added = self.rels.entry(pred.to_string()).or_default().insert(tuple);
        if added {
            self.index.get_mut().unwrap().clear();
        }
        added
    }

    pub fn relation(&self, pred: &str) -> Option<&BTreeSet<Vec<Value>>> {
        self.rels.get(pred)
    }

    pub fn relations(&self) -> impl Iterator<Item = (&String, &BTreeSet<Vec<Value>>)> {
        self.rels.iter()
    }

    /// Adds every tuple of `other`; returns the number of new tuples.
    pub fn union_with(&mut self, other: &TupleInterp) -> usize {
        let mut n = 0;
        for (p, set) in &other.rels {
            for t in set {
                n += self.insert(p, t.clone()) as usize;
            }
        }
        n
    }

    /// Pointwise inclusion `self ⊑ other`.
    pub fn is_subset(&self, other: &TupleInterp) -> bool {
        self.rels.iter().all(|(p, s)| match other.rels.get(p) {
            Some(o) => s.is_subset(o),
            None => s.is_empty(),
        })
    }

    pub fn size(&self) -> usize {
        self.rels.values().map(BTreeSet::len).sum()
    }

    pub fn sizes(&self) -> BTreeMap<String, usize> {
        self.rels.iter().map(|(p, s)| (p.clone(), s.len())).collect()
    }

    /// Pairs of tuples of `pred` that agree on the `key` positions but differ
    /// elsewhere, i.e. witnesses that the relation is not a partial function
    /// of those positions.
    pub fn functional_violations(&self, pred: &str, key: &[usize]) -> Vec<(Vec<Value>, Vec<Value>)> {
        let mut seen: HashMap<Vec<Value>, &Vec<Value>> = HashMap::new();
        let mut out = Vec::new();
        for t in self.rels.get(pred).into_iter().flatten() {
            let k: Vec<Value> = key.iter().map(|&i| t[i].clone()).collect();
            match seen.get(&k) {
                Some(prev) => out.push(((*prev).clone(), t.clone())),
                None => {
                    seen.insert(k, t);
                }
            }
        }
        out
    }

    fn lookup(&self, pred: &str, pattern: &[Option<Value>]) -> Vec<Vec<Value>> {
        let Some(rel) = self.rels.get(pred) else { return Vec::new() };
        let mask = pattern
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .fold(0u64, |m, (i, _)| m | (1 << i));
        let key: Vec<Value> = pattern.iter().flatten().cloned().collect();
        let cache_key = (pred.to_string(), mask);
        let idx = self.index.read().unwrap().get(&cache_key).cloned();
        let idx = match idx {
            Some(i) => i,
            None => {
                let mut built: Index = HashMap::new();
                for t in rel {
                    let k: Vec<Value> = (0..t.len()).filter(|i| mask & (1 << i) != 0).map(|i| t[i].clone()).collect();
                    built.entry(k).or_default().push(t.clone());
                }
                let built = Arc::new(built);
                self.index.write().unwrap().insert(cache_key, built.clone());
                built
            }
        };
        idx.get(&key).cloned().unwrap_or_default()
    }
}

impl Interpretation for TupleInterp {
    fn contains(&self, pred: &str, args: &[Value]) -> bool {
        self.rels.get(pred).is_some_and(|s| s.contains(args))
    }

    fn candidates(&self, pred: &str, pattern: &[Option<Value>]) -> Vec<Vec<Value>> {
        if pattern.len() > 64 {
            return self
                .rels
                .get(pred)
                .into_iter()
                .flatten()
                .filter(|t| t.iter().zip(pattern).all(|(v, p)| p.as_ref().is_none_or(|p| p == v)))
                .cloned()
                .collect();
        }
        self.lookup(pred, pattern)
    }
}

struct Formula {
    types: Vec<Type>,
    disjuncts: Vec<CExpr>,
}

/// An interpretation given by closed formulas over each predicate's
/// parameters, e.g. `R(in: Int, c: Int, n: Node) { in < 0 && c = 1; ... }`.
///
/// Candidate enumeration for unresolved positions ranges over a finite
/// universe: integers in `int_range` and every constructor instance built
/// from it.
pub struct FormulaInterp {
    preds: BTreeMap<String, Formula>,
    program: Program,
    pub int_range: (i64, i64),
    memo: RwLock<HashMap<(String, Vec<Option<Value>>), Vec<Vec<Value>>>>,
}

impl FormulaInterp {
    /// Parses formula definitions against the declarations of `program`.
    pub fn parse(program: &Program, src: &str) -> Result<FormulaInterp, ParseError> {
        let defs = parse_formula_defs(program, src)?;
        let mut preds = BTreeMap::new();
        for d in defs {
            let index: HashMap<String, usize> = d.params.iter().enumerate().map(|(i, (n, _))| (n.clone(), i)).collect();
            let ec = ExprCompiler { program, index: &index };
            let disjuncts = d.disjuncts.iter().map(|e| ec.expr(e)).collect();
            preds.insert(d.pred, Formula { types: d.params.into_iter().map(|(_, t)| t).collect(), disjuncts });
        }
        Ok(FormulaInterp { preds, program: program.clone(), int_range: (-8, 8), memo: RwLock::default() })
    }

    fn holds(f: &Formula, args: &[Value]) -> bool {
        f.disjuncts
            .iter()
            .any(|d| eval_expr(d, args, &[]).map(|v| v.truthy()).unwrap_or(false))
    }

    fn universe(&self, ty: &Type) -> Vec<Value> {
        match ty {
            Type::Int => (self.int_range.0..=self.int_range.1).map(|v| Value::Int(Int::from(v))).collect(),
            Type::Addr => (0..=self.int_range.1.max(0) as u64).map(Value::Addr).collect(),
            Type::Obj(n) => {
                let adt = self.program.adt(n).expect("declared data type");
                let mut out = Vec::new();
                for c in &adt.ctors {
                    let mut combos: Vec<Vec<Value>> = vec![Vec::new()];
                    for f in &c.fields {
                        let vals = self.universe(&f.ty);
                        combos = combos
                            .into_iter()
                            .flat_map(|pre| {
                                vals.iter().map(move |v| {
                                    let mut p = pre.clone();
                                    p.push(v.clone());
                                    p
                                })
                            })
                            .collect();
                    }
                    out.extend(combos.into_iter().map(|fs| Value::obj(&c.name, fs)));
                }
                out
            }
        }
    }
}

impl Interpretation for FormulaInterp {
    fn contains(&self, pred: &str, args: &[Value]) -> bool {
        self.preds.get(pred).is_some_and(|f| f.types.len() == args.len() && Self::holds(f, args))
    }

    fn candidates(&self, pred: &str, pattern: &[Option<Value>]) -> Vec<Vec<Value>> {
        let key = (pred.to_string(), pattern.to_vec());
        if let Some(c) = self.memo.read().unwrap().get(&key) {
            return c.clone();
        }
        let c = self.enumerate(pred, pattern);
        self.memo.write().unwrap().insert(key, c.clone());
        c
    }
}

impl FormulaInterp {
    fn enumerate(&self, pred: &str, pattern: &[Option<Value>]) -> Vec<Vec<Value>> {
        let Some(f) = self.preds.get(pred) else { return Vec::new() };
        if f.types.len() != pattern.len() {
            return Vec::new();
        }
        let mut tuples: Vec<Vec<Value>> = vec![Vec::new()];
        for (p, ty) in pattern.iter().zip(&f.types) {
            let choices = match p {
                Some(v) => vec![v.clone()],
                None => self.universe(ty),
            };
            tuples = tuples
                .into_iter()
                .flat_map(|pre| {
                    choices.iter().map(move |v| {
                        let mut t = pre.clone();
                        t.push(v.clone());
                        t
                    })
                })
                .collect();
        }
        tuples.retain(|t| Self::holds(f, t));
        tuples
    }
}
