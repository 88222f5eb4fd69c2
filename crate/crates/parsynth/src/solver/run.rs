//! The solver subprocess: write a full script on stdin, read the textual
//! response, enforce a wall-clock timeout.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::encoder::SmtScript;

use super::model::{parse_sexps, Sexp, SmtModel};
use super::{SolverError, SolverResult, SolverStatus};

/// An executable speaking SMT-LIB2 on stdin/stdout, e.g. `z3 -in`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverCmd {
    pub program: String,
    pub args: Vec<String>,
}

impl SolverCmd {
    /// Splits a command line on whitespace; the first token is the
    /// executable.
    pub fn parse(text: &str) -> Option<SolverCmd> {
        let mut parts = text.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(SolverCmd { program, args: parts.collect() })
    }

    pub fn display(&self) -> String {
        let mut s = self.program.clone();
        for a in &self.args {
            s.push(' ');
            s.push_str(a);
        }
        s
    }
}

/// Runs the script through the solver. The status is parsed from the
/// first `sat`/`unsat`/`unknown` token; on `sat` the `get-value` responses
/// are parsed positionally against the script's query list. Exceeding the
/// timeout kills the process and reports `Unknown("timeout")`.
pub fn run_solver(
    script: &SmtScript,
    cmd: &SolverCmd,
    timeout: Duration,
) -> Result<SolverResult, SolverError> {
    let start = Instant::now();
    let mut child = Command::new(&cmd.program)
        .args(&cmd.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|source| SolverError::Spawn { cmd: cmd.display(), source })?;

    let text = script.render();
    let mut stdin = child.stdin.take().expect("stdin piped");
    let writer = std::thread::spawn(move || {
        let _ = stdin.write_all(text.as_bytes());
        drop(stdin);
    });
    let mut stdout = child.stdout.take().expect("stdout piped");
    let out_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stdout.read_to_string(&mut buf);
        buf
    });
    let mut stderr = child.stderr.take().expect("stderr piped");
    let err_reader = std::thread::spawn(move || {
        let mut buf = String::new();
        let _ = stderr.read_to_string(&mut buf);
        buf
    });

    let mut timed_out = false;
    loop {
        match child.try_wait()? {
            Some(_) => break,
            None => {
                if start.elapsed() >= timeout {
                    timed_out = true;
                    let _ = child.kill();
                    let _ = child.wait();
                    break;
                }
                std::thread::sleep(Duration::from_millis(10));
            }
        }
    }
    let _ = writer.join();
    let stdout_text = out_reader.join().unwrap_or_default();
    let stderr_text = err_reader.join().unwrap_or_default();
    let wall = start.elapsed();

    if timed_out {
        return Ok(SolverResult {
            status: SolverStatus::Unknown("timeout".into()),
            model: None,
            wall,
        });
    }

    let sexps = parse_sexps(&stdout_text)
        .map_err(|e| SolverError::Malformed(format!("{e}; stderr: {}", stderr_text.trim())))?;
    let mut iter = sexps.into_iter();
    let status = loop {
        match iter.next() {
            Some(Sexp::Atom(a)) if a == "sat" => break SolverStatus::Sat,
            Some(Sexp::Atom(a)) if a == "unsat" => break SolverStatus::Unsat,
            Some(Sexp::Atom(a)) if a == "unknown" => {
                break SolverStatus::Unknown("solver returned unknown".into())
            }
            // Solvers may emit informational lists before the verdict.
            Some(Sexp::List(_)) => continue,
            Some(Sexp::Atom(other)) => {
                return Err(SolverError::Malformed(format!(
                    "expected sat/unsat/unknown, got `{other}`; stderr: {}",
                    stderr_text.trim()
                )));
            }
            None => {
                return Err(SolverError::Malformed(format!(
                    "no verdict in solver output; stderr: {}",
                    stderr_text.trim()
                )));
            }
        }
    };

    let model = if status == SolverStatus::Sat {
        let rest: Vec<Sexp> = iter.collect();
        Some(SmtModel::from_responses(&script.queries, &rest)?)
    } else {
        None
    };
    Ok(SolverResult { status, model, wall })
}

/// Picks a usable solver command: the `PARSYNTH_SOLVER` environment
/// variable, a `z3` binary on the PATH, or the bundled WebAssembly z3
/// wrapper under `tools/` (which needs `node` and the `z3-solver` npm
/// package).
pub fn discover_solver() -> Option<SolverCmd> {
    if let Ok(text) = std::env::var("PARSYNTH_SOLVER") {
        if let Some(cmd) = SolverCmd::parse(&text) {
            return Some(cmd);
        }
    }
    let works = |cmd: &SolverCmd| -> bool {
        let script = "(set-logic QF_UF)(check-sat)\n";
        let mut child = match Command::new(&cmd.program)
            .args(&cmd.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
        {
            Ok(c) => c,
            Err(_) => return false,
        };
        if let Some(mut stdin) = child.stdin.take() {
            let _ = stdin.write_all(script.as_bytes());
        }
        let out = match child.wait_with_output() {
            Ok(o) => o,
            Err(_) => return false,
        };
        String::from_utf8_lossy(&out.stdout).contains("sat")
    };
    let z3 = SolverCmd { program: "z3".into(), args: vec!["-in".into()] };
    if works(&z3) {
        return Some(z3);
    }
    let roots = [
        std::path::PathBuf::from("."),
        std::path::PathBuf::from(".."),
        std::path::PathBuf::from("../.."),
        std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../.."),
    ];
    // The statically linked shim, if it has been built.
    for root in &roots {
        let path = root.join("tools/z3shim/target/release/z3shim");
        if path.is_file() {
            let cmd = SolverCmd { program: path.to_string_lossy().into_owned(), args: vec![] };
            if works(&cmd) {
                return Some(cmd);
            }
        }
    }
    // The WebAssembly build behind a node wrapper.
    for root in &roots {
        let path = root.join("tools/z3-wasm.js");
        if path.is_file() {
            let cmd = SolverCmd {
                program: "node".into(),
                args: vec![path.to_string_lossy().into_owned()],
            };
            if works(&cmd) {
                return Some(cmd);
            }
        }
    }
    None
}
