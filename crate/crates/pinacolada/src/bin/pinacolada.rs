//! Command-line front door: verify a MiniC program (default), solve a DIMACS
//! file with the bundled solver (`sat`), or brute-force a program's whole
//! input grid (`oracle`).
//!
//! Exit codes for verification: 0 = safe, 10 = assertion violation found,
//! 2 = a resource budget ran out (also used for output I/O failures after the
//! verdict was printed), 1 = usage, parse, or type errors. The `sat`
//! subcommand uses the conventional 10 = satisfiable / 20 = unsatisfiable.

use clap::{Args, Parser, Subcommand};
use pinacolada::explorer::{self, ExplorerConfig, Mode, Outcome, Strategy};
use pinacolada::frontend::parse_program;
use pinacolada::goto::lower::lower;
use pinacolada::goto::GotoProgram;
use pinacolada::oracle;
use pinacolada::semantics::Value;
use pinacolada::solver::{dimacs, Solver, Verdict as SatResult};
use pinacolada::witness::{correctness_graphml, RunReport, Witness};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

const EXIT_SAFE: i32 = 0;
const EXIT_USAGE: i32 = 1;
const EXIT_RESOURCE: i32 = 2;
const EXIT_FAILED: i32 = 10;
const EXIT_SAT: i32 = 10;
const EXIT_UNSAT: i32 = 20;

/// Replay budget for validating counterexamples; far beyond any path the
/// explorer can produce at desk scale.
const REPLAY_STEP_LIMIT: u64 = 50_000_000;

const REACH_SAFETY_PROPERTY: &str = "CHECK( init(main()), LTL(G ! call(reach_error())) )";

/// Print to stdout without panicking when the reader hangs up (e.g. piped
/// into `head`): write errors are ignored, matching Unix tool convention.
fn say(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes());
    let _ = out.write_all(b"\n");
}

macro_rules! say_fmt {
    ($($arg:tt)*) => { say(&format!($($arg)*)) };
}

#[derive(Parser)]
#[command(
    name = "pinacolada",
    version,
    about = "Bit-precise bounded verifier for MiniC programs",
    args_conflicts_with_subcommands = true,
    subcommand_negates_reqs = true
)]
struct Cli {
    #[command(subcommand)]
    command: Option<Cmd>,

    #[command(flatten)]
    verify: VerifyArgs,
}

#[derive(Args)]
struct VerifyArgs {
    /// MiniC source file to verify
    #[arg(value_name = "FILE")]
    file: Option<PathBuf>,

    /// Explore breadth-first instead of depth-first
    #[arg(long)]
    bfs: bool,

    /// One solver per active path, re-encoding the prefix on each backtrack
    /// (default: one global incremental solver with activation literals)
    #[arg(long)]
    partial_incremental: bool,

    /// Truncate a path once any loop exceeds NUM iterations
    #[arg(long, value_name = "NUM")]
    unwind: Option<u32>,

    /// Write a GraphML witness (violation, or a correctness stub when safe)
    #[arg(long, value_name = "FILE")]
    graphml_witness: Option<PathBuf>,

    /// Write the run report, including any witness, as JSON
    #[arg(long, value_name = "FILE")]
    json_witness: Option<PathBuf>,

    /// Property file; only the standard reach-safety property is accepted
    #[arg(long, value_name = "FILE")]
    propertyfile: Option<PathBuf>,

    /// Use 32-bit integers (the default)
    #[arg(long = "32", conflicts_with = "arch64")]
    arch32: bool,

    /// Use 64-bit integers
    #[arg(long = "64")]
    arch64: bool,

    /// Integer width in bits (4..=64); overrides --32/--64
    #[arg(long, value_name = "N")]
    int_width: Option<u32>,

    /// Print the lowered instruction listing before verifying
    #[arg(long)]
    dump_goto: bool,

    /// Write the final solver clause database as DIMACS
    /// (full-incremental mode only)
    #[arg(long, value_name = "FILE")]
    dump_cnf: Option<PathBuf>,

    /// Wall-clock budget in seconds
    #[arg(long, value_name = "N")]
    timeout_sec: Option<u64>,

    /// Stop with RESOURCE LIMIT after exploring N states
    #[arg(long, value_name = "N")]
    max_states: Option<u64>,

    /// Call-inlining depth bound; paths beyond it are truncated
    #[arg(long, value_name = "N", default_value_t = 256)]
    max_call_depth: usize,

    /// Keep retired-path activation literals as negative assumptions on
    /// every query instead of adding permanent unit clauses
    /// (full-incremental mode only)
    #[arg(long)]
    fi_strict_assumptions: bool,

    /// Print exploration statistics after the verdict
    #[arg(long)]
    stats: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve a DIMACS CNF file with the bundled solver
    Sat {
        /// DIMACS .cnf file
        #[arg(value_name = "FILE")]
        file: PathBuf,
    },
    /// Exhaustively run a program on every input tape and report the verdict
    Oracle {
        /// MiniC source file
        #[arg(value_name = "FILE")]
        file: PathBuf,

        /// Integer width in bits (4..=64)
        #[arg(long, value_name = "N", default_value_t = 4)]
        int_width: u32,

        /// Refuse input grids with more than N tapes
        #[arg(long, value_name = "N", default_value_t = 1 << 24)]
        grid_limit: u128,

        /// Interpreter step budget per tape
        #[arg(long, value_name = "N", default_value_t = 100_000)]
        step_limit: u64,
    },
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Some(Cmd::Sat { file }) => run_sat(&file),
        Some(Cmd::Oracle {
            file,
            int_width,
            grid_limit,
            step_limit,
        }) => run_oracle(&file, int_width, grid_limit, step_limit),
        None => run_verify(&cli.verify),
    };
    std::process::exit(code);
}

fn load_program(path: &Path) -> Result<GotoProgram, i32> {
    let source = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", path.display());
            return Err(EXIT_USAGE);
        }
    };
    match parse_program(&source) {
        Ok((ast, warnings)) => {
            for w in &warnings {
                eprintln!("{w}");
            }
            Ok(lower(&ast))
        }
        Err(e) => {
            eprintln!("{e}");
            Err(EXIT_USAGE)
        }
    }
}

fn run_verify(args: &VerifyArgs) -> i32 {
    let Some(file) = &args.file else {
        eprintln!("error: no input file; run with --help for usage");
        return EXIT_USAGE;
    };

    if let Some(pf) = &args.propertyfile {
        let text = match std::fs::read_to_string(pf) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("error: cannot read {}: {e}", pf.display());
                return EXIT_USAGE;
            }
        };
        let normalized = text.split_whitespace().collect::<Vec<_>>().join(" ");
        if normalized != REACH_SAFETY_PROPERTY {
            eprintln!(
                "error: unsupported property in {}; only the reach-safety property is recognized:\n  {REACH_SAFETY_PROPERTY}",
                pf.display()
            );
            return EXIT_USAGE;
        }
    }

    let width = match args.int_width {
        Some(w) => {
            if !(4..=64).contains(&w) {
                eprintln!("error: --int-width must be between 4 and 64, got {w}");
                return EXIT_USAGE;
            }
            w
        }
        None => {
            if args.arch64 {
                64
            } else {
                32
            }
        }
    };

    if args.dump_cnf.is_some() && args.partial_incremental {
        eprintln!("error: --dump-cnf requires the full-incremental mode");
        return EXIT_USAGE;
    }
    if args.fi_strict_assumptions && args.partial_incremental {
        eprintln!("error: --fi-strict-assumptions has no effect in partial-incremental mode");
        return EXIT_USAGE;
    }

    let program = match load_program(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if args.dump_goto {
        say(program.to_string().trim_end());
    }

    let cfg = ExplorerConfig {
        width,
        strategy: if args.bfs { Strategy::Bfs } else { Strategy::Dfs },
        mode: if args.partial_incremental {
            Mode::PartialIncremental
        } else {
            Mode::FullIncremental
        },
        unwind: args.unwind,
        max_call_depth: args.max_call_depth,
        stop_at_first_violation: true,
        fi_strict_assumptions: args.fi_strict_assumptions,
        max_states: args.max_states,
        deadline: args
            .timeout_sec
            .map(|s| Instant::now() + Duration::from_secs(s)),
        keep_cnf: args.dump_cnf.is_some(),
    };

    if args.bfs && args.partial_incremental {
        eprintln!(
            "warning: --bfs with --partial-incremental keeps a live solver per enqueued path; this combination is not recommended"
        );
    }

    let started = Instant::now();
    let verdict = explorer::explore(&program, &cfg);
    let wall_ms = started.elapsed().as_millis() as u64;

    // Never report a counterexample that does not replay concretely.
    if let Outcome::Unsafe(v) = &verdict.outcome {
        if !oracle::confirms_violation(
            &program,
            width,
            &v.tape,
            REPLAY_STEP_LIMIT,
            &v.function,
            v.index,
        ) {
            eprintln!("internal error: counterexample failed concrete replay; refusing to emit it");
            return EXIT_USAGE;
        }
    }

    let exit = match &verdict.outcome {
        Outcome::Safe => {
            if verdict.bounded {
                say("VERIFICATION SUCCESSFUL (BOUNDED)");
                say_fmt!(
                    "note: {} path(s) were truncated by the unwinding/call-depth bound; safety holds only up to those bounds",
                    verdict.stats.truncated_paths
                );
            } else {
                say("VERIFICATION SUCCESSFUL");
            }
            EXIT_SAFE
        }
        Outcome::Unsafe(v) => {
            say("VERIFICATION FAILED");
            say_fmt!(
                "violated assertion: {} instruction {} (line {})",
                v.function, v.index, v.loc.line
            );
            for i in &v.inputs {
                let shown = match i.value {
                    Value::Int(n) => n.to_string(),
                    Value::Bool(b) => b.to_string(),
                };
                say_fmt!("  input {} = {shown}", i.var);
            }
            EXIT_FAILED
        }
        Outcome::ResourceLimit(why) => {
            say("RESOURCE LIMIT");
            say(&format!("reason: {why}"));
            EXIT_RESOURCE
        }
    };

    if args.stats {
        let s = &verdict.stats;
        say_fmt!("states_explored: {}", s.states_explored);
        say_fmt!("solver_queries: {}", s.solver_queries);
        say_fmt!("solver_instances_created: {}", s.solver_instances_created);
        say_fmt!("max_live_solvers: {}", s.max_live_solvers);
        say_fmt!("max_frontier_size: {}", s.max_frontier_size);
        say_fmt!("clauses_added: {}", s.clauses_added);
        say_fmt!("folded_decisions: {}", s.folded_decisions);
        say_fmt!("truncated_paths: {}", s.truncated_paths);
        say_fmt!("discarded_assumes: {}", s.discarded_assumes);
        say_fmt!("paths_completed: {}", s.paths_completed);
        say(&format!("wall_time_ms: {wall_ms}"));
    }

    // File outputs come after the verdict; failures here exit 2 with the
    // verdict already printed.
    let mut io_failed = false;
    if let Some(path) = &args.graphml_witness {
        let content = match &verdict.outcome {
            Outcome::Unsafe(v) => Some(Witness::from_violation(v, &cfg).to_graphml()),
            Outcome::Safe => Some(correctness_graphml(&cfg)),
            Outcome::ResourceLimit(_) => None,
        };
        if let Some(content) = content {
            if let Err(e) = std::fs::write(path, content) {
                eprintln!("error: cannot write {}: {e}", path.display());
                io_failed = true;
            }
        }
    }
    if let Some(path) = &args.json_witness {
        let report = RunReport::new(&verdict, &cfg, wall_ms);
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            io_failed = true;
        }
    }
    if let Some(path) = &args.dump_cnf {
        if let Some((num_vars, clauses)) = &verdict.final_cnf {
            if let Err(e) = std::fs::write(path, dimacs::write(*num_vars, clauses)) {
                eprintln!("error: cannot write {}: {e}", path.display());
                io_failed = true;
            }
        }
    }
    if io_failed {
        return EXIT_RESOURCE;
    }
    exit
}

fn run_sat(file: &Path) -> i32 {
    let text = match std::fs::read_to_string(file) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", file.display());
            return EXIT_USAGE;
        }
    };
    let instance = match dimacs::parse(&text) {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let mut solver = Solver::new();
    for _ in 0..instance.num_vars {
        solver.new_var();
    }
    for clause in &instance.clauses {
        solver.add_clause(clause);
    }
    match solver.solve(&[]) {
        SatResult::Sat => {
            say("s SATISFIABLE");
            let model = solver.model().expect("sat verdicts carry a model");
            let mut line = String::from("v");
            for (i, &value) in model.iter().enumerate() {
                let lit = if value { (i + 1) as i64 } else { -((i + 1) as i64) };
                line.push_str(&format!(" {lit}"));
                if line.len() > 72 {
                    say(&line);
                    line = String::from("v");
                }
            }
            line.push_str(" 0");
            say(&line);
            EXIT_SAT
        }
        SatResult::Unsat => {
            say("s UNSATISFIABLE");
            EXIT_UNSAT
        }
    }
}

fn run_oracle(file: &Path, int_width: u32, grid_limit: u128, step_limit: u64) -> i32 {
    if !(4..=64).contains(&int_width) {
        eprintln!("error: --int-width must be between 4 and 64, got {int_width}");
        return EXIT_USAGE;
    }
    let program = match load_program(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    let inputs = oracle::static_input_count(&program);
    match oracle::enumerate(&program, int_width, inputs, step_limit, grid_limit) {
        Ok(report) => {
            say_fmt!(
                "{}",
                serde_json::to_string_pretty(&report).expect("report serializes")
            );
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}
