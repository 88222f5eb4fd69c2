//! Command-line driver: classification, automaton translation, bounded
//! synthesis through an external SMT solver, process extraction, and
//! independent verification of the result.

use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, ValueEnum};
use serde::Serialize;

use parsynth::ltl::{
    build_token_assumption, classify_conjunction, is_transposition_symmetric, merge_k_indexed,
    parse_spec, upgrade_single_obligation, CutoffClass, IndexedSpec, ShapeClass, SpecFile,
};
use parsynth::pipeline::{
    network_instance_spec, ring_instance_spec, ucw_of, verify_in_rings, verify_on_network,
    InstanceVerdict,
};
use parsynth::solver::{
    discover_solver, synthesize, AttemptLog, BoundSchedule, SolverCmd, SynthesisJob,
    SynthesisMode, SynthesisOutcome,
};
use parsynth::topology::{
    builtin_graph, k_topology, parse_graph_file, symmetry_reduce, NetworkGraph,
};
use parsynth::verify::{ProcessLts, DEFAULT_STATE_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Ring,
    Network,
    Single,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Dot,
    Json,
    Both,
}

/// Synthesizes a single replicable process implementation from an indexed
/// temporal specification, for token rings and token-passing networks.
#[derive(Parser, Debug)]
#[command(name = "parsynth", version)]
struct Args {
    /// Specification file.
    #[arg(long)]
    spec: PathBuf,

    /// Synthesis mode.
    #[arg(long, value_enum)]
    mode: Mode,

    /// Network graph: a file, `ring:<n>`, or `prio-ring:<n>:<from>:<to>`.
    /// Required in network mode.
    #[arg(long)]
    graph: Option<String>,

    /// Override the ring size used for synthesis (defaults to the
    /// classified cutoff).
    #[arg(long)]
    cutoff: Option<u32>,

    /// Bound schedule `l1,g1;l2,g2;...` (local,global pairs).
    #[arg(long)]
    bounds: Option<String>,

    /// Solver command, e.g. `z3 -in`. Defaults to $PARSYNTH_SOLVER, then
    /// `z3 -in`, then the bundled tools/z3-wasm.js wrapper.
    #[arg(long)]
    solver: Option<String>,

    /// Output directory; artifacts go to <out>/<specname>/.
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Keep every attempted SMT script under <out>/<specname>/smt/.
    #[arg(long)]
    emit_smt: bool,

    /// Skip the model-checking verification pass (the report will say so).
    #[arg(long)]
    no_verify: bool,

    /// Drop symmetric topology variants (network mode, symmetric specs).
    #[arg(long)]
    symmetry_reduce: bool,

    /// Process artifact format.
    #[arg(long, value_enum, default_value_t = Format::Both)]
    format: Format,

    /// Solver timeout per attempt, in seconds.
    #[arg(long, default_value_t = 600)]
    timeout: u64,

    /// State cap for the verification compositions.
    #[arg(long, default_value_t = DEFAULT_STATE_CAP)]
    state_cap: usize,
}

#[derive(Serialize)]
struct VerificationEntry {
    instance: String,
    holds: bool,
    one_token: bool,
    unscheduled_invariance: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    counterexample: Option<String>,
}

#[derive(Serialize)]
struct TopologyReport {
    total: usize,
    used: usize,
    symmetric: bool,
    reduced: bool,
}

#[derive(Serialize)]
struct Report {
    spec: String,
    mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    class: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff: Option<u32>,
    solver: String,
    bounds_attempted: Vec<AttemptLog>,
    synthesized: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    local_states: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    global_bound: Option<usize>,
    verified: bool,
    verification: Vec<VerificationEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    topologies: Option<TopologyReport>,
    warnings: Vec<String>,
}

fn entry_of(v: &InstanceVerdict) -> VerificationEntry {
    VerificationEntry {
        instance: v.instance.clone(),
        holds: v.holds,
        one_token: v.one_token.is_ok(),
        unscheduled_invariance: v.unscheduled.is_ok(),
        counterexample: v.detail.clone(),
    }
}

fn load_graph(arg: &str) -> Result<NetworkGraph> {
    if let Some(built) = builtin_graph(arg) {
        return built.map_err(|e| anyhow!(e));
    }
    let text = std::fs::read_to_string(arg).with_context(|| format!("reading graph {arg}"))?;
    parse_graph_file(&text).map_err(|e| anyhow!(e))
}

fn write_artifacts(dir: &Path, process: &ProcessLts, format: Format) -> Result<()> {
    if matches!(format, Format::Dot | Format::Both) {
        std::fs::write(dir.join("process.dot"), process.to_dot("process"))?;
    }
    if matches!(format, Format::Json | Format::Both) {
        std::fs::write(
            dir.join("process.json"),
            serde_json::to_string_pretty(&process.to_json())?,
        )?;
    }
    Ok(())
}

fn main() {
    let args = Args::parse();
    std::process::exit(match run(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    });
}

fn run(args: &Args) -> Result<i32> {
    let text = std::fs::read_to_string(&args.spec)
        .with_context(|| format!("reading {}", args.spec.display()))?;
    let file = parse_spec(&text).map_err(|e| anyhow!("{e}"))?;

    let spec_name = args
        .spec
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "spec".into());
    let out_dir = args.out.join(&spec_name);
    std::fs::create_dir_all(&out_dir)?;

    let solver = match &args.solver {
        Some(text) => SolverCmd::parse(text).ok_or_else(|| anyhow!("empty solver command"))?,
        None => discover_solver().ok_or_else(|| {
            anyhow!(
                "no SMT solver found: install z3, set PARSYNTH_SOLVER, or pass --solver \
                 (the bundled tools/z3-wasm.js works via `npm install -g z3-solver`)"
            )
        })?,
    };
    let timeout = Duration::from_secs(args.timeout);
    let emit_dir = args.emit_smt.then(|| out_dir.join("smt"));

    let mut report = Report {
        spec: args.spec.display().to_string(),
        mode: format!("{:?}", args.mode).to_lowercase(),
        class: None,
        cutoff: None,
        solver: solver.display(),
        bounds_attempted: Vec::new(),
        synthesized: false,
        local_states: None,
        global_bound: None,
        verified: false,
        verification: Vec::new(),
        topologies: None,
        warnings: Vec::new(),
    };

    let outcome = match args.mode {
        Mode::Ring => run_ring(args, &file, solver, timeout, emit_dir, &mut report)?,
        Mode::Network => run_network(args, &file, solver, timeout, emit_dir, &mut report)?,
        Mode::Single => run_single(args, &file, solver, timeout, emit_dir, &mut report)?,
    };

    let code = match outcome {
        Some(process) => {
            write_artifacts(&out_dir, &process, args.format)?;
            report.synthesized = true;
            report.local_states = Some(process.reachable().len());
            let all_ok = report.verification.iter().all(|v| {
                v.holds && v.one_token && v.unscheduled_invariance
            });
            if args.no_verify {
                report.warnings.push("verification skipped (--no-verify)".into());
                println!("synthesized (unverified): {} reachable states", process.n_states());
                0
            } else if all_ok {
                report.verified = true;
                println!(
                    "synthesized and verified: {} local states, artifacts in {}",
                    process.n_states(),
                    out_dir.display()
                );
                0
            } else {
                eprintln!("error: synthesized process failed verification; see report");
                1
            }
        }
        None => {
            println!("no implementation within the bound schedule (semi-decision: this does \
                      not prove unrealizability)");
            2
        }
    };
    std::fs::write(
        out_dir.join("report.json"),
        serde_json::to_string_pretty(&report)?,
    )?;
    println!("report: {}", out_dir.join("report.json").display());
    Ok(code)
}

fn classify_or_override(
    args: &Args,
    guarantees: &[IndexedSpec],
    report: &mut Report,
) -> Result<u32> {
    match classify_conjunction(guarantees) {
        Ok(CutoffClass { class, cutoff }) => {
            report.class = Some(format!("{class:?}"));
            report.cutoff = Some(cutoff);
            println!("classified: class {class:?}, cutoff {cutoff}");
            Ok(args.cutoff.unwrap_or(cutoff))
        }
        Err(e) => match args.cutoff {
            Some(n) => {
                report.warnings.push(format!("{e}; using --cutoff {n}"));
                report.cutoff = Some(n);
                Ok(n)
            }
            None => bail!("{e} (pass --cutoff to synthesize anyway)"),
        },
    }
}

fn run_ring(
    args: &Args,
    file: &SpecFile,
    solver: SolverCmd,
    timeout: Duration,
    emit_dir: Option<PathBuf>,
    report: &mut Report,
) -> Result<Option<ProcessLts>> {
    let n = classify_or_override(args, &file.guarantees, report)?;
    if n < 2 {
        bail!("ring synthesis needs a cutoff of at least 2");
    }
    let spec_n = ring_instance_spec(&file.guarantees, n).map_err(|e| anyhow!("{e}"))?;
    let ucw = ucw_of(&spec_n).map_err(|e| anyhow!("{e}"))?;
    println!("automaton: {} states, {} edges", ucw.n_states(), ucw.n_edges());

    let schedule = match &args.bounds {
        Some(text) => BoundSchedule::parse(text).map_err(|e| anyhow!(e))?,
        None => BoundSchedule::ring_default(n as usize, 12),
    };
    let job = SynthesisJob {
        ucw: &ucw,
        interface: &file.interface,
        mode: SynthesisMode::Ring { n: n as usize },
        schedule,
        solver,
        timeout,
        emit_dir,
    };
    let outcome = synthesize(&job)?;
    match outcome {
        SynthesisOutcome::Synthesized { process, local, global, attempts } => {
            report.bounds_attempted = attempts;
            report.global_bound = Some(global);
            println!("model found at bounds (local {local}, global {global})");
            if !args.no_verify {
                let sizes: Vec<u32> = (2..=n + 2).collect();
                let verdicts = verify_in_rings(&process, &file.guarantees, &sizes, args.state_cap)
                    .map_err(|e| anyhow!("{e}"))?;
                for v in &verdicts {
                    println!(
                        "verify {}: {}",
                        v.instance,
                        if v.ok() { "holds" } else { "FAILED" }
                    );
                    report.verification.push(entry_of(v));
                }
            }
            Ok(Some(process))
        }
        SynthesisOutcome::NoneWithinSchedule { attempts } => {
            report.bounds_attempted = attempts;
            Ok(None)
        }
    }
}

fn run_network(
    args: &Args,
    file: &SpecFile,
    solver: SolverCmd,
    timeout: Duration,
    emit_dir: Option<PathBuf>,
    report: &mut Report,
) -> Result<Option<ProcessLts>> {
    let graph_arg = args
        .graph
        .as_ref()
        .ok_or_else(|| anyhow!("network mode requires --graph"))?;
    let graph = load_graph(graph_arg)?;
    let merged = merge_k_indexed(&file.guarantees).map_err(|e| anyhow!("{e}"))?;
    let k = merged.prefix.len();
    let symmetric = is_transposition_symmetric(&merged);
    let cts = k_topology(&graph, k).map_err(|e| anyhow!("{e}"))?;
    let total = cts.len();
    let used = if args.symmetry_reduce {
        if symmetric {
            symmetry_reduce(&cts, true)
        } else {
            report
                .warnings
                .push("--symmetry-reduce ignored: specification is not symmetric".into());
            cts
        }
    } else {
        cts
    };
    report.topologies = Some(TopologyReport {
        total,
        used: used.len(),
        symmetric,
        reduced: used.len() < total,
    });
    println!("topologies: {} of {} after reduction", used.len(), total);

    let site_assign: Vec<u32> = (1..=k as u32).collect();
    let body = parsynth::ltl::instantiate_at(&merged, &site_assign, k as u32)
        .map_err(|e| anyhow!("{e}"))?;
    let aug = parsynth::ltl::augment_fairness(&body, parsynth::ltl::FairnessMode::Network, k as u32);
    let ucw = ucw_of(&aug).map_err(|e| anyhow!("{e}"))?;
    println!("automaton: {} states, {} edges", ucw.n_states(), ucw.n_edges());

    let schedule = match &args.bounds {
        Some(text) => BoundSchedule::parse(text).map_err(|e| anyhow!(e))?,
        None => BoundSchedule::local_only(4),
    };
    let job = SynthesisJob {
        ucw: &ucw,
        interface: &file.interface,
        mode: SynthesisMode::Network { cts: &used, boolean_fn: None },
        schedule,
        solver,
        timeout,
        emit_dir,
    };
    let outcome = synthesize(&job)?;
    match outcome {
        SynthesisOutcome::Synthesized { process, local, global, attempts } => {
            report.bounds_attempted = attempts;
            report.global_bound = Some(global);
            println!("model found at local bound {local}");
            if !args.no_verify {
                let v = verify_on_network(&process, &file.guarantees, &graph, args.state_cap)
                    .map_err(|e| anyhow!("{e}"))?;
                println!(
                    "verify {}: {}",
                    v.instance,
                    if v.ok() { "holds" } else { "FAILED" }
                );
                report.verification.push(entry_of(&v));
            }
            Ok(Some(process))
        }
        SynthesisOutcome::NoneWithinSchedule { attempts } => {
            report.bounds_attempted = attempts;
            Ok(None)
        }
    }
}

fn run_single(
    args: &Args,
    file: &SpecFile,
    solver: SolverCmd,
    timeout: Duration,
    emit_dir: Option<PathBuf>,
    report: &mut Report,
) -> Result<Option<ProcessLts>> {
    let merged = merge_k_indexed(&file.guarantees).map_err(|e| anyhow!("{e}"))?;
    let class = classify_conjunction(&file.guarantees).map_err(|e| anyhow!("{e}"))?;
    report.class = Some(format!("{:?}", class.class));
    report.cutoff = Some(class.cutoff);
    if class.class != ShapeClass::A {
        bail!(
            "single-process synthesis applies to class A specifications only, got class {:?}",
            class.class
        );
    }
    let obligation = build_token_assumption(&merged).map_err(|e| anyhow!("{e}"))?;
    let full = upgrade_single_obligation(&obligation);
    let ucw = ucw_of(&full).map_err(|e| anyhow!("{e}"))?;
    println!("automaton: {} states, {} edges", ucw.n_states(), ucw.n_edges());

    let schedule = match &args.bounds {
        Some(text) => BoundSchedule::parse(text).map_err(|e| anyhow!(e))?,
        None => BoundSchedule::local_only(4),
    };
    let job = SynthesisJob {
        ucw: &ucw,
        interface: &file.interface,
        mode: SynthesisMode::Single,
        schedule,
        solver,
        timeout,
        emit_dir,
    };
    let outcome = synthesize(&job)?;
    match outcome {
        SynthesisOutcome::Synthesized { process, local, global: _, attempts } => {
            report.bounds_attempted = attempts;
            println!("model found at local bound {local}");
            if !args.no_verify {
                let sizes: Vec<u32> = (2..=class.cutoff + 2).collect();
                let verdicts = verify_in_rings(&process, &file.guarantees, &sizes, args.state_cap)
                    .map_err(|e| anyhow!("{e}"))?;
                for v in &verdicts {
                    println!(
                        "verify {}: {}",
                        v.instance,
                        if v.ok() { "holds" } else { "FAILED" }
                    );
                    report.verification.push(entry_of(v));
                }
            }
            Ok(Some(process))
        }
        SynthesisOutcome::NoneWithinSchedule { attempts } => {
            report.bounds_attempted = attempts;
            Ok(None)
        }
    }
}
