//! The `heapinv` command line: argument definitions and subcommand drivers.
//!
//! Exit codes: 0 success (or agreement), 1 disagreement or mismatch, 2
//! usage, input or tool error, 3 encoding precondition violated. `solve`
//! exits 0 on sat, 1 on unsat, 2 on a tool error and 3 on unknown.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value as Json};

use crate::ast::{load_program, pretty_print, Program};
use crate::chc::{emit_smtlib, solve, solver_template, to_chc, SolverVerdict};
use crate::corpus::{self, CheckStatus, CorpusEntry, EntryCheck};
use crate::encode::{encode, parse_drop_spec, Base, EncodingConfig};
use crate::fixpoint::{check_equisafety, check_safety, least_fixpoint, memory_audit, InputDomain, MemoryAudit, SafetyReport, SafetyVerdict};
use crate::int::Int;
use crate::interp::{FormulaInterp, Heap, HeapModel, Inputs, Interpretation, Machine, Outcome, TraceHeap, TupleInterp};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DISAGREE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "heapinv", version, about = "Heap-eliminating encodings, bounded oracle and CHC emission for UPLang programs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Print the heap-free encoding of a program.
    Encode(EncodeArgs),
    /// Evaluate a program on one input (or the whole grid) and print each execution.
    Run(RunArgs),
    /// Compute the bounded least fixed point and safety verdict.
    Fixpoint(FixpointArgs),
    /// Compare bounded verdicts of a program and its encoding.
    Equisafe(EquisafeArgs),
    /// Emit SMT-LIB2 Horn clauses for a program, encoding it first if it uses the heap.
    EmitChc(EmitArgs),
    /// Run an external Horn solver on a clause file or a program.
    Solve(SolveArgs),
    /// Check the bundled corpus against its expected labels.
    Corpus(CorpusArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
}

#[derive(Args, Debug, Clone, Default)]
pub struct EncArgs {
    /// Base encoding: n, r, rw, rwfun or rwmem.
    #[arg(long = "enc", value_name = "BASE")]
    pub base: Option<Base>,
    /// Add write/read locations to the predicates.
    #[arg(long = "tag")]
    pub tagging: bool,
    /// Serve repeated accesses to one address from a cache.
    #[arg(long = "cache")]
    pub caching: bool,
    /// Int variables appended to every R occurrence.
    #[arg(long = "scope", value_delimiter = ',', value_name = "VAR")]
    pub scope_vars: Vec<String>,
    /// Remove predicate arguments, e.g. R:1 (repeatable).
    #[arg(long = "drop", value_name = "PRED:IDX[,IDX..]")]
    pub drop_args: Vec<String>,
    /// Keep introduced havoc statements native instead of expanding them through the seed.
    #[arg(long)]
    pub native_havoc: bool,
    /// Bound the number of heap operations before encoding.
    #[arg(long)]
    pub bound_heap_ops: bool,
    /// Let the fun variants record allocated objects in W.
    #[arg(long)]
    pub fun_alloc_writes: bool,
    /// Drop the program's own expression assertions.
    #[arg(long)]
    pub strip_asserts: bool,
}

impl EncArgs {
    pub fn config(&self, default: Base) -> Result<EncodingConfig, String> {
        let mut drop_args: BTreeMap<String, Vec<usize>> = BTreeMap::new();
        for d in &self.drop_args {
            let (p, idx) = parse_drop_spec(d)?;
            drop_args.entry(p).or_default().extend(idx);
        }
        Ok(EncodingConfig {
            base: self.base.unwrap_or(default),
            tagging: self.tagging,
            caching: self.caching,
            scope_vars: self.scope_vars.clone(),
            drop_args,
            native_havoc: self.native_havoc,
            bound_heap_ops: self.bound_heap_ops,
            fun_alloc_writes: self.fun_alloc_writes,
            strip_asserts: self.strip_asserts,
        })
    }
}

fn parse_range(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once("..").ok_or_else(|| format!("expected LO..HI, got '{s}'"))?;
    let lo = lo.trim().parse::<i64>().map_err(|e| format!("bad bound '{lo}': {e}"))?;
    let hi = hi.trim().parse::<i64>().map_err(|e| format!("bad bound '{hi}': {e}"))?;
    Ok((lo, hi))
}

#[derive(Args, Debug, Clone)]
pub struct DomainArgs {
    /// Range of the input variable.
    #[arg(long, value_parser = parse_range, default_value = "-3..3", allow_hyphen_values = true, value_name = "LO..HI")]
    pub in_range: (i64, i64),
    /// Range of the seed variable.
    #[arg(long, value_parser = parse_range, default_value = "0..255", value_name = "LO..HI")]
    pub seed_range: (i64, i64),
    /// Range of the prophecy address.
    #[arg(long, value_parser = parse_range, default_value = "0..6", value_name = "LO..HI")]
    pub last_addr_range: (i64, i64),
    /// Loop-body entries allowed per execution.
    #[arg(long, default_value_t = 64)]
    pub loop_fuel: u64,
    /// Heap operations allowed per execution; also the initial budget.
    #[arg(long, default_value_t = 32)]
    pub heap_fuel: u64,
    /// Maximum number of fixpoint iterations.
    #[arg(long)]
    pub iteration_cap: Option<usize>,
}

impl DomainArgs {
    pub fn domain(&self) -> InputDomain {
        InputDomain {
            in_range: self.in_range,
            seed_range: self.seed_range,
            last_addr_range: self.last_addr_range,
            loop_fuel: self.loop_fuel,
            heap_op_fuel: self.heap_fuel,
            iteration_cap: self.iteration_cap,
        }
    }
}

#[derive(Args, Debug)]
pub struct EncodeArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub enc: EncArgs,
    /// Write the output here instead of standard output.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub file: PathBuf,
    /// Input value.
    #[arg(long = "in", default_value_t = 0, allow_hyphen_values = true)]
    pub input: i64,
    #[arg(long, default_value_t = 0)]
    pub seed: i64,
    /// Prophecy address, for encoded programs.
    #[arg(long, default_value_t = 0)]
    pub last_addr: i64,
    /// Initial heap-operation budget, for programs bounded by the n encoding
    /// (defaults to the heap fuel).
    #[arg(long)]
    pub budget: Option<i64>,
    /// Predicate interpretation: `empty`, `fixpoint` (computed over the domain) or a formula file.
    #[arg(long, default_value = "empty", value_name = "empty|fixpoint|FILE")]
    pub interp: String,
    /// Integer range enumerated for unresolved arguments of formula interpretations.
    #[arg(long, value_parser = parse_range, default_value = "-8..8", allow_hyphen_values = true, value_name = "LO..HI")]
    pub universe: (i64, i64),
    /// Run every point of the input domain instead of a single input.
    #[arg(long)]
    pub grid: bool,
    /// Keep the heap as a chronological write trace.
    #[arg(long)]
    pub trace: bool,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct FixpointArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub domain: DomainArgs,
    /// Include the tuples of the fixed point in the report.
    #[arg(long)]
    pub relations: bool,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct EquisafeArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub enc: EncArgs,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Args, Debug)]
pub struct EmitArgs {
    pub file: PathBuf,
    #[command(flatten)]
    pub enc: EncArgs,
    /// Expand introduced havocs through the seed instead of emitting them as fresh variables.
    #[arg(long)]
    pub macro_havoc: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct SolveArgs {
    /// An `.smt2` clause file, or a program that is emitted first.
    pub file: PathBuf,
    #[command(flatten)]
    pub enc: EncArgs,
    /// Solver command; `{file}` is replaced by the clause file. Defaults to $HEAPINV_SOLVER or z3.
    #[arg(long)]
    pub solver: Option<String>,
    /// Seconds before the solver is killed.
    #[arg(long, default_value_t = 300.0)]
    pub timeout: f64,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum Subset {
    #[default]
    All,
    /// Entries whose every access is valid and reads a written object.
    MemorySafe,
    /// Entries with a null or unallocated access.
    MemoryErrors,
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    /// Only entries whose name contains this text.
    #[arg(long)]
    pub filter: Option<String>,
    #[arg(long, value_enum, default_value_t)]
    pub subset: Subset,
    /// Check every standard encoding variant instead of one pipeline.
    #[arg(long, conflicts_with = "base")]
    pub all_variants: bool,
    #[command(flatten)]
    pub enc: EncArgs,
    #[command(flatten)]
    pub domain: DomainArgs,
    #[arg(long, value_enum, default_value_t)]
    pub format: Format,
}

/// A failed command: message for standard error and exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl Failure {
    fn error(message: impl Into<String>) -> Failure {
        Failure { code: EXIT_ERROR, message: message.into() }
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli, out, err),
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            e.exit_code()
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let r = match cli.command {
        Command::Encode(a) => cmd_encode(&a, out),
        Command::Run(a) => cmd_run(&a, out),
        Command::Fixpoint(a) => cmd_fixpoint(&a, out),
        Command::Equisafe(a) => cmd_equisafe(&a, out),
        Command::EmitChc(a) => cmd_emit(&a, out),
        Command::Solve(a) => cmd_solve(&a, out),
        Command::Corpus(a) => cmd_corpus(&a, out),
    };
    match r {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "{}", f.message.trim_end());
            f.code
        }
    }
}

/// Reads and typechecks a program; diagnostics are `file:line:col: message`.
pub fn load(path: &Path) -> Result<Program, Failure> {
    let src = std::fs::read_to_string(path).map_err(|e| Failure::error(format!("{}: {e}", path.display())))?;
    load_program(&src).map(|t| t.program).map_err(|ds| {
        let lines: Vec<String> = ds.iter().map(|d| format!("{}:{d}", path.display())).collect();
        Failure::error(lines.join("\n"))
    })
}

fn io(e: std::io::Error) -> Failure {
    Failure::error(e.to_string())
}

fn emit_text(text: &str, output: Option<&Path>, out: &mut dyn Write) -> Result<(), Failure> {
    match output {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::error(format!("{}: {e}", p.display()))),
        None => out.write_all(text.as_bytes()).map_err(io),
    }
}

fn print_json(v: &impl Serialize, out: &mut dyn Write) -> Result<(), Failure> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Failure::error(e.to_string()))?;
    writeln!(out, "{s}").map_err(io)
}

fn cmd_encode(a: &EncodeArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.file)?;
    let cfg = a.enc.config(Base::R).map_err(Failure::error)?;
    let enc = encode(&p, &cfg).map_err(|e| Failure::error(format!("{}: {e}", a.file.display())))?;
    emit_text(&pretty_print(&enc.program), a.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

/// JSON form of an execution outcome.
pub fn outcome_json(o: &Outcome) -> Json {
    match o {
        Outcome::Top => json!({ "outcome": "top" }),
        Outcome::Bot(p, args) => json!({ "outcome": "bot", "predicate": &**p, "args": args }),
        Outcome::Undefined(r) => json!({ "outcome": "undefined", "reason": format!("{r:?}") }),
    }
}

fn load_interp(spec: &str, p: &Program, d: &InputDomain, universe: (i64, i64)) -> Result<Box<dyn Interpretation>, Failure> {
    match spec {
        "empty" => Ok(Box::new(TupleInterp::new())),
        "fixpoint" => Ok(Box::new(least_fixpoint(p, d).map_err(|e| Failure::error(e.to_string()))?.interp)),
        path => {
            let src = std::fs::read_to_string(path).map_err(|e| Failure::error(format!("{path}: {e}")))?;
            let mut f = FormulaInterp::parse(p, &src).map_err(|e| Failure::error(format!("{path}:{}: {}", e.pos, e.message)))?;
            f.int_range = universe;
            Ok(Box::new(f))
        }
    }
}

fn cmd_run(a: &RunArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.file)?;
    let d = a.domain.domain();
    d.validate().map_err(|e| Failure::error(e.to_string()))?;
    let interp = load_interp(&a.interp, &p, &d, a.universe)?;
    let machine = Machine::new(&p);
    let points = if a.grid {
        d.grid(&p)
    } else {
        vec![Inputs {
            input: Int::from(a.input),
            seed: Int::from(a.seed),
            prophecy: Int::from(a.last_addr),
            budget: Int::from(a.budget.unwrap_or(a.domain.heap_fuel as i64)),
        }]
    };
    let names: Vec<String> = machine.var_names().map(str::to_string).collect();
    for i in &points {
        let stack = machine.initial_stack(i);
        let runs: Vec<(Outcome, Vec<crate::interp::Value>, u64)> = if a.trace {
            machine.run::<TraceHeap>(stack, &*interp, d.fuel()).into_iter().map(|e| (e.outcome, e.stack, e.heap.alloc_count())).collect()
        } else {
            machine.run::<Heap>(stack, &*interp, d.fuel()).into_iter().map(|e| (e.outcome, e.stack, e.heap.alloc_count())).collect()
        };
        for (outcome, stack, heap_len) in runs {
            match a.format {
                Format::Json => {
                    let mut line = outcome_json(&outcome);
                    let vars: serde_json::Map<String, Json> =
                        names.iter().zip(&stack).map(|(n, v)| (n.clone(), serde_json::to_value(v).unwrap_or(Json::Null))).collect();
                    line["inputs"] = serde_json::to_value(i).unwrap_or(Json::Null);
                    line["stack"] = Json::Object(vars);
                    line["heapLen"] = json!(heap_len);
                    writeln!(out, "{line}").map_err(io)?;
                }
                Format::Human => {
                    let vars: Vec<String> = names.iter().zip(&stack).map(|(n, v)| format!("{n}={v}")).collect();
                    writeln!(out, "{i}: {outcome} [{}] heap={heap_len}", vars.join(" ")).map_err(io)?;
                }
            }
        }
    }
    Ok(EXIT_OK)
}

fn relations_json(i: &TupleInterp) -> Json {
    let m: serde_json::Map<String, Json> = i.relations().map(|(p, ts)| (p.clone(), json!(ts.iter().collect::<Vec<_>>()))).collect();
    Json::Object(m)
}

fn human_safety(r: &SafetyReport) -> String {
    let mut s = format!(
        "verdict: {}\niterations: {}\ngrid: {} points, {} executions\ninconclusive: {}\n",
        r.verdict.name(),
        r.iterations,
        r.grid_size,
        r.executions,
        r.inconclusive_count
    );
    for (p, n) in &r.predicate_sizes {
        s.push_str(&format!("|{p}| = {n}\n"));
    }
    if let Some(w) = r.witnesses.first() {
        s.push_str(&format!("witness: {w} ({} failing points)\n", r.unsafe_points));
    }
    s
}

fn cmd_fixpoint(a: &FixpointArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.file)?;
    let r = check_safety(&p, &a.domain.domain()).map_err(|e| Failure::error(e.to_string()))?;
    match a.format {
        Format::Json => {
            let mut v = serde_json::to_value(&r).map_err(|e| Failure::error(e.to_string()))?;
            if a.relations {
                v["relations"] = relations_json(&r.interp);
            }
            print_json(&v, out)?;
        }
        Format::Human => {
            write!(out, "{}", human_safety(&r)).map_err(io)?;
            if a.relations {
                for (pred, ts) in r.interp.relations() {
                    for t in ts {
                        let args: Vec<String> = t.iter().map(ToString::to_string).collect();
                        writeln!(out, "{pred}({})", args.join(", ")).map_err(io)?;
                    }
                }
            }
        }
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EquiStatus {
    Agree,
    Disagree,
    /// The original violates the encoding's memory-safety precondition.
    Precondition,
    /// Some bounded verdict was inconclusive.
    Inconclusive,
}

impl EquiStatus {
    pub fn exit_code(self) -> i32 {
        match self {
            EquiStatus::Agree => EXIT_OK,
            EquiStatus::Disagree => EXIT_DISAGREE,
            EquiStatus::Precondition => EXIT_PRECONDITION,
            EquiStatus::Inconclusive => EXIT_ERROR,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct EquisafeReport {
    pub status: EquiStatus,
    pub encoding: String,
    pub original: SafetyReport,
    /// Expected verdict of the encoding: the original's, except that the
    /// memory-checking encoding must report invalid accesses.
    pub expected_encoded: Option<String>,
    pub encoded: Option<SafetyReport>,
    pub memory: Option<MemoryAudit>,
}

/// Runs the equi-safety pipeline for `p`: the original with its havocs
/// expanded against the encoding under `cfg` (with heap operations bounded
/// and introduced havocs native).
pub fn equisafe(p: &Program, cfg: &EncodingConfig, d: &InputDomain) -> Result<EquisafeReport, String> {
    let cfg = EncodingConfig { native_havoc: true, bound_heap_ops: true, ..cfg.clone() };
    let orig = corpus::original(p)?;
    let memory = match cfg.base {
        Base::RWfun | Base::RWmem => Some(memory_audit(&orig, d).map_err(|e| e.to_string())?),
        _ => None,
    };
    let enc = encode(p, &cfg).map_err(|e| e.to_string())?;
    let mut r = EquisafeReport { status: EquiStatus::Agree, encoding: cfg.label(), original: check_safety(&orig, d).map_err(|e| e.to_string())?, expected_encoded: None, encoded: None, memory };
    let invalid = r.memory.as_ref().is_some_and(|m| m.invalid_points > 0);
    let safe_mem = r.memory.as_ref().is_none_or(MemoryAudit::memory_safe);
    let expect_unsafe = if cfg.base == Base::RWmem && invalid {
        true
    } else if !safe_mem {
        r.status = EquiStatus::Precondition;
        return Ok(r);
    } else {
        r.original.verdict.is_unsafe()
    };
    let eq = check_equisafety(&orig, &enc.program, d).map_err(|e| e.to_string())?;
    r.expected_encoded = Some(if expect_unsafe { "unsafe" } else { "safe" }.to_string());
    let inconclusive = |v: &SafetyVerdict| matches!(v, SafetyVerdict::Inconclusive(_));
    r.status = if inconclusive(&eq.original.verdict) || inconclusive(&eq.encoded.verdict) {
        EquiStatus::Inconclusive
    } else if eq.encoded.verdict.is_unsafe() == expect_unsafe {
        EquiStatus::Agree
    } else {
        EquiStatus::Disagree
    };
    r.encoded = Some(eq.encoded);
    Ok(r)
}

fn cmd_equisafe(a: &EquisafeArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.file)?;
    let cfg = a.enc.config(Base::R).map_err(Failure::error)?;
    let r = equisafe(&p, &cfg, &a.domain.domain()).map_err(|e| Failure::error(format!("{}: {e}", a.file.display())))?;
    match a.format {
        Format::Json => print_json(&r, out)?,
        Format::Human => {
            let enc = r.encoded.as_ref().map_or("-", |e| e.verdict.name());
            writeln!(out, "{}: {} (original {}, encoded {enc})", r.encoding, json!(r.status).as_str().unwrap_or(""), r.original.verdict.name()).map_err(io)?;
            if r.status == EquiStatus::Precondition {
                if let Some(m) = &r.memory {
                    writeln!(out, "precondition violated: {} invalid, {} unwritten-read points", m.invalid_points, m.unwritten_points).map_err(io)?;
                }
            }
        }
    }
    Ok(r.status.exit_code())
}

/// The Horn clauses for `p`: translated directly when heap-free, otherwise
/// after encoding with `cfg`.
pub fn program_smtlib(p: &Program, cfg: &EncodingConfig) -> Result<String, String> {
    let q = if p.heap_op_count() == 0 { p.clone() } else { encode(p, cfg).map_err(|e| e.to_string())?.program };
    let cs = to_chc(&q).map_err(|e| e.to_string())?;
    Ok(emit_smtlib(&cs))
}

fn chc_config(enc: &EncArgs, macro_havoc: bool) -> Result<EncodingConfig, Failure> {
    let mut cfg = enc.config(Base::R).map_err(Failure::error)?;
    cfg.native_havoc = !macro_havoc;
    Ok(cfg)
}

fn cmd_emit(a: &EmitArgs, out: &mut dyn Write) -> CmdResult {
    let p = load(&a.file)?;
    let s = program_smtlib(&p, &chc_config(&a.enc, a.macro_havoc)?).map_err(|e| Failure::error(format!("{}: {e}", a.file.display())))?;
    emit_text(&s, a.output.as_deref(), out)?;
    Ok(EXIT_OK)
}

fn cmd_solve(a: &SolveArgs, out: &mut dyn Write) -> CmdResult {
    let template = a.solver.clone().unwrap_or_else(solver_template);
    let timeout = Duration::from_secs_f64(a.timeout.max(0.0));
    let is_smt = a.file.extension().is_some_and(|e| e == "smt2");
    let verdict = if is_smt {
        solve(&a.file, &template, timeout)
    } else {
        let p = load(&a.file)?;
        let s = program_smtlib(&p, &chc_config(&a.enc, false)?).map_err(|e| Failure::error(format!("{}: {e}", a.file.display())))?;
        let dir = std::env::temp_dir().join(format!("heapinv-{}", std::process::id()));
        std::fs::create_dir_all(&dir).map_err(io)?;
        let f = dir.join("clauses.smt2");
        std::fs::write(&f, s).map_err(io)?;
        let v = solve(&f, &template, timeout);
        let _ = std::fs::remove_dir_all(&dir);
        v
    };
    match a.format {
        Format::Json => print_json(&json!({ "file": a.file, "solver": template, "result": verdict }), out)?,
        Format::Human => writeln!(out, "{verdict}").map_err(io)?,
    }
    Ok(match verdict {
        SolverVerdict::Sat => EXIT_OK,
        SolverVerdict::Unsat => EXIT_DISAGREE,
        SolverVerdict::ToolError(_) => EXIT_ERROR,
        SolverVerdict::Unknown => EXIT_PRECONDITION,
    })
}

/// Entries selected by a name filter and subset.
pub fn select_entries(filter: Option<&str>, subset: Subset) -> Result<Vec<&'static CorpusEntry>, String> {
    if filter.is_some_and(|f| f.trim().is_empty()) {
        return Err("--filter must not be empty".into());
    }
    Ok(corpus::entries()
        .iter()
        .filter(|e| filter.is_none_or(|f| e.name.contains(f)))
        .filter(|e| match subset {
            Subset::All => true,
            Subset::MemorySafe => e.memory_safe,
            Subset::MemoryErrors => e.invalid_access,
        })
        .collect())
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Summary {
    pub agree: usize,
    pub mismatch: usize,
    pub skipped: usize,
    pub errors: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusReport {
    pub checks: Vec<EntryCheck>,
    pub errors: Vec<CorpusError>,
    pub summary: Summary,
}

#[derive(Clone, Debug, Serialize)]
pub struct CorpusError {
    pub name: String,
    pub pipeline: String,
    pub message: String,
}

impl CorpusReport {
    pub fn passed(&self) -> bool {
        self.summary.mismatch == 0 && self.summary.errors == 0
    }
}

/// Checks `entries` under each pipeline (`None` checks only the originals).
pub fn check_corpus(entries: &[&CorpusEntry], pipelines: &[Option<EncodingConfig>], d: &InputDomain) -> CorpusReport {
    let mut r = CorpusReport { checks: Vec::new(), errors: Vec::new(), summary: Summary::default() };
    for cfg in pipelines {
        for (name, res) in corpus::check_entries(entries, cfg.as_ref(), d) {
            match res {
                Ok(c) => {
                    match c.status {
                        CheckStatus::Agree => r.summary.agree += 1,
                        CheckStatus::Mismatch => r.summary.mismatch += 1,
                        CheckStatus::Skipped => r.summary.skipped += 1,
                    }
                    r.checks.push(c);
                }
                Err(message) => {
                    r.summary.errors += 1;
                    let pipeline = cfg.as_ref().map_or_else(|| "original".to_string(), EncodingConfig::label);
                    r.errors.push(CorpusError { name, pipeline, message });
                }
            }
        }
    }
    r
}

fn cmd_corpus(a: &CorpusArgs, out: &mut dyn Write) -> CmdResult {
    let entries = select_entries(a.filter.as_deref(), a.subset).map_err(Failure::error)?;
    if entries.is_empty() {
        return Err(Failure::error("no corpus entry matches the selection"));
    }
    let d = a.domain.domain();
    d.validate().map_err(|e| Failure::error(e.to_string()))?;
    let user = |base: Base| -> Result<EncodingConfig, Failure> {
        let c = a.enc.config(base).map_err(Failure::error)?;
        Ok(EncodingConfig { native_havoc: true, bound_heap_ops: true, ..c })
    };
    let report = if a.all_variants {
        let mut r = CorpusReport { checks: Vec::new(), errors: Vec::new(), summary: Summary::default() };
        for e in &entries {
            let p = e.program().map_err(Failure::error)?;
            let pipelines: Vec<Option<EncodingConfig>> = std::iter::once(None).chain(corpus::standard_variants(&p).into_iter().map(Some)).collect();
            let part = check_corpus(&[*e], &pipelines, &d);
            r.checks.extend(part.checks);
            r.errors.extend(part.errors);
            r.summary.agree += part.summary.agree;
            r.summary.mismatch += part.summary.mismatch;
            r.summary.skipped += part.summary.skipped;
            r.summary.errors += part.summary.errors;
        }
        r
    } else {
        let pipeline = match a.enc.base {
            Some(b) => Some(user(b)?),
            None => None,
        };
        check_corpus(&entries, &[pipeline], &d)
    };
    match a.format {
        Format::Json => print_json(&report, out)?,
        Format::Human => {
            for c in &report.checks {
                let enc = c.encoded.as_deref().unwrap_or("-");
                let exp = c.expected_encoded.unwrap_or(c.expected);
                writeln!(
                    out,
                    "{:<28} {:<24} expected {:<6} original {:<12} encoded {:<12} (expect {exp}) {}",
                    c.name,
                    c.pipeline,
                    c.expected.name(),
                    c.original,
                    enc,
                    json!(c.status).as_str().unwrap_or("")
                )
                .map_err(io)?;
            }
            for e in &report.errors {
                writeln!(out, "{:<28} {:<24} error: {}", e.name, e.pipeline, e.message).map_err(io)?;
            }
            let s = &report.summary;
            writeln!(out, "agree {} mismatch {} skipped {} errors {}", s.agree, s.mismatch, s.skipped, s.errors).map_err(io)?;
        }
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_DISAGREE })
}
