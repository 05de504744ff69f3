//! The bundled fixture programs with their expected bounded verdicts, and
//! the pipelines that check them.

use std::fmt;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ast::{assign_locations, load_program, Program, Type};
use crate::encode::{encode, Base, EncodingConfig};
use crate::fixpoint::{check_safety, InputDomain, SafetyVerdict};
use crate::interp::determinize;

const MANIFEST: &str = include_str!("../corpus/manifest.toml");

const SOURCES: &[(&str, &str)] = &[
    ("aliasing.up", include_str!("../corpus/aliasing.up")),
    ("alloc_only_read.up", include_str!("../corpus/alloc_only_read.up")),
    ("alloc_only_read_unsafe.up", include_str!("../corpus/alloc_only_read_unsafe.up")),
    ("conditional_write.up", include_str!("../corpus/conditional_write.up")),
    ("conditional_write_unsafe.up", include_str!("../corpus/conditional_write_unsafe.up")),
    ("division_in_write.up", include_str!("../corpus/division_in_write.up")),
    ("havoc_value.up", include_str!("../corpus/havoc_value.up")),
    ("havoc_value_unsafe.up", include_str!("../corpus/havoc_value_unsafe.up")),
    ("list_build_traverse.up", include_str!("../corpus/list_build_traverse.up")),
    ("list_sum.up", include_str!("../corpus/list_sum.up")),
    ("list_sum_unsafe.up", include_str!("../corpus/list_sum_unsafe.up")),
    ("list_tail_wrong.up", include_str!("../corpus/list_tail_wrong.up")),
    ("loop_overwrite.up", include_str!("../corpus/loop_overwrite.up")),
    ("loop_overwrite_unsafe.up", include_str!("../corpus/loop_overwrite_unsafe.up")),
    ("null_read.up", include_str!("../corpus/null_read.up")),
    ("null_read_unsafe.up", include_str!("../corpus/null_read_unsafe.up")),
    ("null_write.up", include_str!("../corpus/null_write.up")),
    ("overwrite.up", include_str!("../corpus/overwrite.up")),
    ("skip_links.up", include_str!("../corpus/skip_links.up")),
    ("skip_links_unsafe.up", include_str!("../corpus/skip_links_unsafe.up")),
    ("swap_cells.up", include_str!("../corpus/swap_cells.up")),
    ("tagged_cells.up", include_str!("../corpus/tagged_cells.up")),
    ("write_read.up", include_str!("../corpus/write_read.up")),
    ("write_read_unsafe.up", include_str!("../corpus/write_read_unsafe.up")),
];

/// Name of the linked-list entry whose `R` encoding has a closed-form invariant.
pub const LIST_EXAMPLE: &str = "list_build_traverse";

/// Formula interpretation of `R` solving the `R` encoding of [`LIST_EXAMPLE`].
pub const LIST_INVARIANT: &str = include_str!("../corpus/list_build_traverse.inv");

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Safe,
    Unsafe,
}

impl Label {
    pub fn is_unsafe(self) -> bool {
        self == Label::Unsafe
    }

    pub fn of(unsafe_: bool) -> Label {
        if unsafe_ {
            Label::Unsafe
        } else {
            Label::Safe
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Label::Safe => "safe",
            Label::Unsafe => "unsafe",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub name: String,
    pub file: String,
    pub expected: Label,
    /// Every access hits an allocated address and every read sees an
    /// object stored by `write`.
    pub memory_safe: bool,
    /// Some execution accesses null or an unallocated address.
    pub invalid_access: bool,
    pub note: String,
    #[serde(skip)]
    pub source: &'static str,
}

#[derive(Deserialize)]
struct Manifest {
    entry: Vec<CorpusEntry>,
}

/// All entries, sorted by name.
pub fn entries() -> &'static [CorpusEntry] {
    static ENTRIES: OnceLock<Vec<CorpusEntry>> = OnceLock::new();
    ENTRIES.get_or_init(|| {
        let m: Manifest = toml::from_str(MANIFEST).expect("bundled manifest parses");
        let mut v: Vec<CorpusEntry> = m
            .entry
            .into_iter()
            .map(|mut e| {
                e.source = SOURCES
                    .iter()
                    .find(|(f, _)| *f == e.file)
                    .unwrap_or_else(|| panic!("no bundled source {}", e.file))
                    .1;
                e
            })
            .collect();
        v.sort_by(|a, b| a.name.cmp(&b.name));
        v
    })
}

pub fn entry(name: &str) -> Option<&'static CorpusEntry> {
    entries().iter().find(|e| e.name == name)
}

impl CorpusEntry {
    pub fn program(&self) -> Result<Program, String> {
        load_program(self.source).map(|t| t.program).map_err(|ds| {
            let msgs: Vec<String> = ds.iter().map(|d| format!("{}:{}", self.file, d)).collect();
            msgs.join("\n")
        })
    }

    /// Whether the encoding with base `base` is expected to be unsafe, or
    /// `None` when the entry violates that encoding's precondition.
    pub fn expects_unsafe(&self, base: Base) -> Option<bool> {
        match base {
            Base::N | Base::R | Base::RW => Some(self.expected.is_unsafe()),
            Base::RWfun => self.memory_safe.then_some(self.expected.is_unsafe()),
            Base::RWmem if self.invalid_access => Some(true),
            Base::RWmem => self.memory_safe.then_some(self.expected.is_unsafe()),
        }
    }
}

/// The program whose bounded verdict an encoding must reproduce: `p` with
/// its own `havoc` statements expanded through the seed.
pub fn original(p: &Program) -> Result<Program, String> {
    determinize(p).map(assign_locations)
}

/// Configuration used by the verdict pipelines: heap operations bounded by
/// the budget, and encoder havocs kept native so the oracle enumerates them.
pub fn oracle_config(base: Base) -> EncodingConfig {
    EncodingConfig { bound_heap_ops: true, native_havoc: true, ..EncodingConfig::new(base) }
}

/// The declared ordinary `Int` variables of `p`, used as scope variables.
pub fn int_vars(p: &Program) -> Vec<String> {
    p.vars.iter().filter(|v| v.ty == Type::Int).map(|v| v.name.clone()).collect()
}

/// Every encoding configuration the equi-safety suite checks for `p`.
pub fn standard_variants(p: &Program) -> Vec<EncodingConfig> {
    let mut out: Vec<EncodingConfig> = Base::ALL.iter().map(|b| oracle_config(*b)).collect();
    for base in [Base::R, Base::RW] {
        for (tagging, caching) in [(true, false), (false, true), (true, true)] {
            out.push(EncodingConfig { tagging, caching, ..oracle_config(base) });
        }
    }
    out.push(EncodingConfig { scope_vars: int_vars(p), ..oracle_config(Base::R) });
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Agree,
    Mismatch,
    /// The entry violates the encoding's precondition.
    Skipped,
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EntryCheck {
    pub name: String,
    pub pipeline: String,
    pub expected: Label,
    pub original: String,
    /// Expected verdict of the encoding, when it differs from `expected`.
    pub expected_encoded: Option<Label>,
    pub encoded: Option<String>,
    pub status: CheckStatus,
}

fn matches(v: &SafetyVerdict, l: Label) -> bool {
    v.name() == l.name()
}

/// Checks one entry: the original against its label and, when `cfg` is
/// given, the encoding against the label adjusted for the encoding.
pub fn check_entry(e: &CorpusEntry, cfg: Option<&EncodingConfig>, d: &InputDomain) -> Result<EntryCheck, String> {
    let p = e.program()?;
    let orig = check_safety(&original(&p)?, d).map_err(|x| x.to_string())?;
    let mut c = EntryCheck {
        name: e.name.clone(),
        pipeline: cfg.map_or_else(|| "original".to_string(), |c| c.label()),
        expected: e.expected,
        original: orig.verdict.name().to_string(),
        expected_encoded: None,
        encoded: None,
        status: if matches(&orig.verdict, e.expected) { CheckStatus::Agree } else { CheckStatus::Mismatch },
    };
    let Some(cfg) = cfg else { return Ok(c) };
    let Some(exp) = e.expects_unsafe(cfg.base) else {
        c.status = CheckStatus::Skipped;
        return Ok(c);
    };
    let exp = Label::of(exp);
    if exp != e.expected {
        c.expected_encoded = Some(exp);
    }
    let enc = encode(&p, cfg).map_err(|x| x.to_string())?;
    let r = check_safety(&enc.program, d).map_err(|x| x.to_string())?;
    if !matches(&r.verdict, exp) {
        c.status = CheckStatus::Mismatch;
    }
    c.encoded = Some(r.verdict.name().to_string());
    Ok(c)
}

/// Checks every entry in parallel; results are sorted by name.
pub fn check_entries(
    es: &[&CorpusEntry],
    cfg: Option<&EncodingConfig>,
    d: &InputDomain,
) -> Vec<(String, Result<EntryCheck, String>)> {
    let mut out: Vec<_> = es.par_iter().map(|e| (e.name.clone(), check_entry(e, cfg, d))).collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixpoint::memory_audit;

    #[test]
    fn every_bundled_source_is_listed_once() {
        assert_eq!(entries().len(), SOURCES.len());
        for (f, _) in SOURCES {
            assert_eq!(entries().iter().filter(|e| &e.file == f).count(), 1, "{f}");
        }
    }

    #[test]
    fn every_entry_typechecks() {
        for e in entries() {
            e.program().unwrap();
        }
    }

    #[test]
    fn labels_are_reproduced_by_the_oracle() {
        let d = InputDomain::default();
        for e in entries() {
            let c = check_entry(e, None, &d).unwrap();
            assert_eq!(c.status, CheckStatus::Agree, "{}: {} expected {}", e.name, c.original, e.expected);
        }
    }

    #[test]
    fn memory_flags_are_reproduced_by_the_audit() {
        let d = InputDomain::default();
        for e in entries() {
            let a = memory_audit(&original(&e.program().unwrap()).unwrap(), &d).unwrap();
            assert_eq!(a.memory_safe(), e.memory_safe, "{}", e.name);
            assert_eq!(a.invalid_points > 0, e.invalid_access, "{}", e.name);
        }
    }

    #[test]
    fn corpus_has_both_labels_and_a_memory_error_subset() {
        let es = entries();
        assert!(es.len() >= 20);
        assert!(es.iter().any(|e| e.expected == Label::Unsafe));
        assert!(es.iter().any(|e| e.expected == Label::Safe));
        assert!(es.iter().any(|e| e.invalid_access));
        assert!(es.iter().any(|e| !e.memory_safe && !e.invalid_access));
    }

    #[test]
    fn rwfun_and_rwmem_expectations() {
        let e = entry("null_read").unwrap();
        assert_eq!(e.expects_unsafe(Base::RWfun), None);
        assert_eq!(e.expects_unsafe(Base::RWmem), Some(true));
        let e = entry("alloc_only_read").unwrap();
        assert_eq!(e.expects_unsafe(Base::RWmem), None);
        assert_eq!(e.expects_unsafe(Base::R), Some(false));
    }
}
