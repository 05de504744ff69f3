use std::fmt;
use std::io::Read;
use std::path::Path;
use std::process::{Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde::Serialize;

/// Solver command used when [`SOLVER_ENV`] is unset.
pub const DEFAULT_SOLVER: &str = "z3 {file}";

/// Environment variable overriding the solver command template.
pub const SOLVER_ENV: &str = "HEAPINV_SOLVER";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "camelCase", tag = "verdict", content = "detail")]
pub enum SolverVerdict {
    /// The clauses have a model: the program is safe.
    Sat,
    Unsat,
    Unknown,
    ToolError(String),
}

impl SolverVerdict {
    pub fn name(&self) -> &'static str {
        match self {
            SolverVerdict::Sat => "sat",
            SolverVerdict::Unsat => "unsat",
            SolverVerdict::Unknown => "unknown",
            SolverVerdict::ToolError(_) => "error",
        }
    }
}

impl fmt::Display for SolverVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolverVerdict::ToolError(d) => write!(f, "error: {d}"),
            v => f.write_str(v.name()),
        }
    }
}

/// The solver command template: [`SOLVER_ENV`] if set, else [`DEFAULT_SOLVER`].
pub fn solver_template() -> String {
    std::env::var(SOLVER_ENV).ok().filter(|s| !s.trim().is_empty()).unwrap_or_else(|| DEFAULT_SOLVER.to_string())
}

fn command_line(template: &str, path: &Path) -> Vec<String> {
    let file = path.to_string_lossy();
    let mut words: Vec<String> = template.split_whitespace().map(|w| w.replace("{file}", &file)).collect();
    if !template.contains("{file}") {
        words.push(file.into_owned());
    }
    words
}

/// Whether the program named by the template is an executable on `PATH`
/// (or an existing path).
pub fn solver_available(template: &str) -> bool {
    let Some(prog) = template.split_whitespace().next() else { return false };
    if prog.contains('/') {
        return Path::new(prog).is_file();
    }
    std::env::var_os("PATH").is_some_and(|paths| std::env::split_paths(&paths).any(|d| d.join(prog).is_file()))
}

/// Runs the solver on `path`, killing it after `timeout`. The verdict is
/// read from standard output; the exit code is ignored.
pub fn solve(path: &Path, template: &str, timeout: Duration) -> SolverVerdict {
    let words = command_line(template, path);
    let Some((prog, args)) = words.split_first() else {
        return SolverVerdict::ToolError("empty solver command".into());
    };
    let mut child = match Command::new(prog).args(args).stdin(Stdio::null()).stdout(Stdio::piped()).stderr(Stdio::piped()).spawn() {
        Ok(c) => c,
        Err(e) => return SolverVerdict::ToolError(format!("cannot run '{prog}': {e}")),
    };
    let drain = |r: Option<Box<dyn Read + Send>>| {
        thread::spawn(move || {
            let mut s = String::new();
            if let Some(mut r) = r {
                let _ = r.read_to_string(&mut s);
            }
            s
        })
    };
    let out = drain(child.stdout.take().map(|r| Box::new(r) as Box<dyn Read + Send>));
    let err = drain(child.stderr.take().map(|r| Box::new(r) as Box<dyn Read + Send>));
    let start = Instant::now();
    loop {
        match child.try_wait() {
            Ok(Some(_)) => break,
            Ok(None) if start.elapsed() >= timeout => {
                let _ = child.kill();
                let _ = child.wait();
                return SolverVerdict::ToolError(format!("timeout after {:.1}s", timeout.as_secs_f64()));
            }
            Ok(None) => thread::sleep(Duration::from_millis(10)),
            Err(e) => return SolverVerdict::ToolError(e.to_string()),
        }
    }
    let stdout = out.join().unwrap_or_default();
    let stderr = err.join().unwrap_or_default();
    parse_output(&stdout, &stderr)
}

fn parse_output(stdout: &str, stderr: &str) -> SolverVerdict {
    let lines: Vec<&str> = stdout.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if let Some(e) = lines.iter().find(|l| l.starts_with("(error")) {
        return SolverVerdict::ToolError(e.to_string());
    }
    match lines.first().copied() {
        Some("sat") => SolverVerdict::Sat,
        Some("unsat") => SolverVerdict::Unsat,
        Some("unknown") => SolverVerdict::Unknown,
        Some(other) => SolverVerdict::ToolError(format!("unexpected solver output: {other}")),
        None => {
            let e = stderr.lines().next().unwrap_or("").trim();
            SolverVerdict::ToolError(if e.is_empty() { "no solver output".into() } else { format!("no solver output: {e}") })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn output_parsing() {
        assert_eq!(parse_output("sat\n", ""), SolverVerdict::Sat);
        assert_eq!(parse_output("\nunsat\n", ""), SolverVerdict::Unsat);
        assert_eq!(parse_output("unknown", ""), SolverVerdict::Unknown);
        assert!(matches!(parse_output("(error \"line 1\")\nsat", ""), SolverVerdict::ToolError(_)));
        assert!(matches!(parse_output("", "segfault"), SolverVerdict::ToolError(d) if d.contains("segfault")));
        assert!(matches!(parse_output("maybe", ""), SolverVerdict::ToolError(_)));
    }

    #[test]
    fn template_substitution() {
        let p = Path::new("/tmp/a.smt2");
        assert_eq!(command_line("z3 -T:5 {file}", p), vec!["z3", "-T:5", "/tmp/a.smt2"]);
        assert_eq!(command_line("eld", p), vec!["eld", "/tmp/a.smt2"]);
    }

    #[test]
    fn missing_binary_is_a_tool_error() {
        let v = solve(Path::new("/nonexistent.smt2"), "heapinv-no-such-solver {file}", Duration::from_secs(5));
        assert!(matches!(v, SolverVerdict::ToolError(_)), "{v:?}");
        assert!(!solver_available("heapinv-no-such-solver"));
    }

    #[test]
    fn timeout_is_a_tool_error() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.smt2");
        std::fs::write(&f, "").unwrap();
        let v = solve(&f, "tail -f {file}", Duration::from_millis(200));
        assert!(matches!(&v, SolverVerdict::ToolError(d) if d.contains("timeout")), "{v:?}");
    }

    #[test]
    fn unparseable_output_is_a_tool_error() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("x.smt2");
        std::fs::write(&f, "(set-logic HORN)\n").unwrap();
        assert!(matches!(solve(&f, "cat {file}", Duration::from_secs(5)), SolverVerdict::ToolError(_)));
    }
}
