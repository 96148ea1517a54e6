//! `rb1`: check, run, inspect, fuzz, benchmark and serve `.rb1` programs.
//!
//! Exit codes: 0 success, 1 diagnostics or failed checks, 2 runtime or
//! I/O errors.

use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use rb1_core::lowering::export_dot;
use rb1_core::runtime::run_function;
use rb1_core::serialize::{parse_trace, to_text};
use rb1_core::tools::bench::{bench, compare_logging, BenchConfig};
use rb1_core::tools::check::{check, Severity};
use rb1_core::tools::fuzz::{fuzz, FuzzConfig};
use rb1_core::tools::{idl, serve};
use rb1_core::types::ActId;
use rb1_core::{Environment, Program, Value};

#[derive(Parser)]
#[command(name = "rb1", version, about = "Compiler and runtime for rb1 environment programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, type-check and lower a file, printing diagnostics.
    Check { file: PathBuf },
    /// Call a free function and print its result.
    Run {
        file: PathBuf,
        #[arg(long = "fun", default_value = "main")]
        function: String,
        /// Argument literal (`3`, `true`, `1.5`); repeat in order.
        #[arg(long = "arg")]
        args: Vec<String>,
    },
    /// Emit the action flow graph of an act as DOT.
    Graph {
        file: PathBuf,
        #[arg(long)]
        act: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Random playouts with consistency checks after every step.
    Fuzz {
        file: PathBuf,
        #[arg(long)]
        act: Option<String>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        traces: u64,
        #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
        max_steps: u64,
        /// Directory for failing traces.
        #[arg(long, default_value = "fuzz-failures")]
        out_dir: PathBuf,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Time instantiation and indexed apply over pre-generated traces.
    Bench {
        file: PathBuf,
        #[arg(long)]
        act: Option<String>,
        #[arg(long, default_value_t = 1024)]
        traces: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        max_steps: u64,
        #[arg(long, value_enum, default_value_t = LogMode::Off)]
        action_log: LogMode,
        #[arg(long, default_value_t = 5)]
        repeats: usize,
    },
    /// Apply a trace file and print the final state.
    Replay {
        file: PathBuf,
        trace: PathBuf,
        #[arg(long)]
        act: Option<String>,
    },
    /// Print the interface description as JSON.
    Idl { file: PathBuf },
    /// Line-delimited JSON session on stdin and stdout.
    Serve {
        file: PathBuf,
        #[arg(long)]
        act: Option<String>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LogMode {
    On,
    Off,
    /// Median of `--repeats` interleaved runs in each mode.
    Both,
}

/// Failure carrying its own exit code; anything else exits 2.
#[derive(Debug)]
struct Exit(u8);

impl std::fmt::Display for Exit {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "exit {}", self.0)
    }
}

impl std::error::Error for Exit {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => match e.downcast_ref::<Exit>() {
            Some(Exit(code)) => ExitCode::from(*code),
            // A closed pipe (`rb1 idl f | head`) is not a failure.
            None if e.downcast_ref::<io::Error>().is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) => {
                ExitCode::SUCCESS
            }
            None => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
    }
}

fn dispatch(command: Command) -> Result<()> {
    match command {
        Command::Check { file } => {
            let (program, diags) = check(&read(&file)?);
            let name = file.display().to_string();
            for d in &diags {
                eprintln!("{}", d.render(&name));
            }
            if program.is_none() || diags.iter().any(|d| d.severity == Severity::Error) {
                return Err(Exit(1).into());
            }
            println!("{name}: ok");
            Ok(())
        }
        Command::Run { file, function, args } => {
            let program = load(&file)?;
            let args = args.iter().map(|a| literal(a)).collect::<Result<Vec<_>>>()?;
            match run_function(&program, &function, &args) {
                Ok(v) => {
                    println!("{v}");
                    Ok(())
                }
                Err(e) => {
                    eprintln!("error[{}]: {e}", e.kind());
                    Err(Exit(2).into())
                }
            }
        }
        Command::Graph { file, act, out } => {
            let program = load(&file)?;
            let act = pick_act(&program, act.as_deref())?;
            let dot = export_dot(&program.module.acts[act].name, &program.afg(act));
            match out {
                Some(path) => std::fs::write(&path, dot).with_context(|| format!("writing {}", path.display()))?,
                None => emit(&dot)?,
            }
            Ok(())
        }
        Command::Fuzz {
            file,
            act,
            seed,
            traces,
            max_steps,
            out_dir,
            workers,
        } => {
            let program = Arc::new(load(&file)?);
            let act = pick_act(&program, act.as_deref())?;
            let mut cfg = FuzzConfig::new(act, seed, traces);
            cfg.max_steps = max_steps;
            cfg.out_dir = Some(out_dir);
            cfg.workers = workers;
            let report = fuzz(&program, &cfg);
            println!(
                "act {} seed {} traces {} steps {} failures {}",
                program.module.acts[act].name,
                report.seed,
                report.traces_run,
                report.steps_total,
                report.failures.len()
            );
            for (label, n) in &report.terminal_counts {
                println!("  {label}: {n}");
            }
            for f in &report.failures {
                let at = f.trace_file.as_ref().map(|p| format!(" ({})", p.display())).unwrap_or_default();
                println!("trace {} step {}: {}: {}{at}", f.trace_index, f.step, f.kind, f.message);
            }
            if report.passed() {
                Ok(())
            } else {
                Err(Exit(1).into())
            }
        }
        Command::Bench {
            file,
            act,
            traces,
            seed,
            max_steps,
            action_log,
            repeats,
        } => {
            let program = Arc::new(load(&file)?);
            let act = pick_act(&program, act.as_deref())?;
            let cfg = BenchConfig {
                act,
                seed,
                traces,
                max_steps,
                action_log: action_log == LogMode::On,
            };
            println!("act: {}", program.module.acts[act].name);
            if action_log == LogMode::Both {
                let (off, on) = compare_logging(&program, &cfg, repeats.max(1)).map_err(|e| anyhow!("{e}"))?;
                println!("traces: {traces}");
                println!("repeats: {repeats}");
                println!("action_log_off_total_us: {}", off.as_micros());
                println!("action_log_on_total_us: {}", on.as_micros());
                return Ok(());
            }
            let r = bench(&program, &cfg).map_err(|e| anyhow!("{e}"))?;
            println!("traces: {}", r.traces);
            println!("steps: {}", r.steps);
            println!("action_table: {}", r.table_size);
            println!("action_log: {}", if r.action_log { "on" } else { "off" });
            println!("total_us: {}", r.total.as_micros());
            println!("mean_us: {:.3}", r.total.as_secs_f64() * 1e6 / r.traces.max(1) as f64);
            Ok(())
        }
        Command::Replay { file, trace, act } => {
            let program = Arc::new(load(&file)?);
            let text = read(&trace)?;
            let act = match act {
                Some(a) => pick_act(&program, Some(&a))?,
                None => pick_act(&program, header_act(&text))?,
            };
            let actions = parse_trace(&program, act, &text).map_err(|e| {
                eprintln!("{}:{e}", trace.display());
                Exit(1)
            })?;
            let mut env = Environment::with_act(&program, act, &[]).map_err(|e| anyhow!("{e}"))?;
            if let Err(e) = env.replay(&actions) {
                emit(&format!("{}\n", to_text(&env)))?;
                eprintln!("error: step {} `{}`: {}", e.at, actions[e.at], e.error);
                return Err(Exit(if e.error.kind() == "precondition" { 1 } else { 2 }).into());
            }
            emit(&format!("{}\n", to_text(&env)))
        }
        Command::Idl { file } => {
            emit(&format!("{}\n", idl::to_json(&load(&file)?)))
        }
        Command::Serve { file, act } => {
            let program = Arc::new(load(&file)?);
            let act = pick_act(&program, act.as_deref())?;
            let mut session = serve::Session::new(program, act).map_err(|e| anyhow!("{e}"))?;
            serve::serve(&mut session, io::stdin().lock(), BufWriter::new(io::stdout().lock()))?;
            Ok(())
        }
    }
}

/// Writes to stdout, returning a closed pipe as an error instead of
/// panicking like `print!`.
fn emit(text: &str) -> Result<()> {
    let mut out = io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Compiles `path`, printing diagnostics and exiting 1 on errors.
fn load(path: &Path) -> Result<Program> {
    let (program, diags) = check(&read(path)?);
    let name = path.display().to_string();
    for d in &diags {
        eprintln!("{}", d.render(&name));
    }
    program.ok_or_else(|| Exit(1).into())
}

fn pick_act(program: &Program, name: Option<&str>) -> Result<ActId> {
    match name {
        Some(n) => program.act(n).ok_or_else(|| anyhow!("no act named `{n}`")),
        None => program.default_act().ok_or_else(|| anyhow!("program declares no acts")),
    }
}

/// The act named by a `# act NAME` header line, as written by fuzz.
fn header_act(text: &str) -> Option<&str> {
    text.lines()
        .find_map(|l| l.trim().strip_prefix("# act "))
        .map(str::trim)
}

fn literal(s: &str) -> Result<Value> {
    match s {
        "true" => return Ok(Value::Bool(true)),
        "false" => return Ok(Value::Bool(false)),
        _ => {}
    }
    if let Ok(i) = s.parse::<i64>() {
        return Ok(Value::Int(i));
    }
    match s.parse::<f64>() {
        Ok(f) => Ok(Value::Float(f)),
        Err(_) => bail!("cannot parse argument `{s}`"),
    }
}
