//! The `qtvm` command line.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or compile error,
//! 3 capacity (qubit count or memory budget) exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::{magnetization_series, symmetric_loschmidt_series, QuenchParams, QuenchSummary};
use crate::asm::{compile, emit, optimize};
use crate::bench::{run_bench, to_csv, BenchConfig};
use crate::circuits::{shor_source, tfim_source, ShorSpec, TfimQuenchSpec};
use crate::debugger::{enumerate_branches, inspect, run_to, DebugError, DebugOptions, DEFAULT_TOP_K};
use crate::engine::{write_dump, Capacity};
use crate::isa::Program;
use crate::vm::{run_shot, run_shot_results, EngineConfig, EngineKind, Histogram, MachineState, RunOptions, SnapOptions, VmError};

/// Seed used when `--seed` is absent.
pub const DEFAULT_SEED: u64 = 2020;

#[derive(Parser, Debug)]
#[command(name = "qtvm", version, about = "Quantum computing virtual machine")]
pub struct Cli {
    /// Worker threads (falls back to QTVM_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Execute a program for a number of shots.
    Run(RunArgs),
    /// Execute one shot and write the final state vector.
    State(StateArgs),
    /// Time random 200-gate programs over a range of register sizes.
    Bench(BenchArgs),
    /// Generate a QtASM program.
    #[command(subcommand)]
    Gen(GenCommand),
    /// Enumerate measurement branches or inspect a program at a breakpoint.
    Debug(DebugArgs),
    /// Compile, optionally optimize, and print canonical text.
    Asm(AsmArgs),
    /// Run an Ising quench and write m_z, return-rate and summary files.
    Quench(QuenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum EngineChoice {
    Single,
    Paged,
}

#[derive(Args, Debug)]
pub struct EngineArgs {
    #[arg(long, value_enum, default_value = "single")]
    pub engine: EngineChoice,
    /// Sector size exponent for the paged engine.
    #[arg(long)]
    pub sector_bits: Option<usize>,
    /// Memory budget for amplitudes, e.g. 16GiB, 512M or plain bytes (default 8GiB).
    #[arg(long, value_parser = parse_bytes)]
    pub mem: Option<u64>,
}

impl EngineArgs {
    fn config(&self) -> Result<EngineConfig, CliError> {
        if self.sector_bits.is_some() && self.engine == EngineChoice::Single {
            return Err(CliError::Usage("--sector-bits needs --engine paged".into()));
        }
        let kind = match self.engine {
            EngineChoice::Single => EngineKind::Single,
            EngineChoice::Paged => EngineKind::Paged(self.sector_bits),
        };
        let capacity = self.mem.map_or_else(Capacity::default, Capacity::large);
        Ok(EngineConfig { kind, capacity })
    }
}

#[derive(Args, Debug)]
pub struct RunArgs {
    pub file: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub shots: u64,
    /// Integer seed or `random`.
    #[arg(long)]
    pub seed: Option<String>,
    /// Optimization level (`-O1` enables gate fusion).
    #[arg(short = 'O', default_value_t = 0)]
    pub opt: u8,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Histogram JSON output.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Histogram CSV output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Per-shot results with snapshots, as JSON.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    /// Also record ⟨σˣ⟩ at each snap.
    #[arg(long)]
    pub snap_x: bool,
    /// Directory for state dumps taken at each snap of shot 0.
    #[arg(long)]
    pub snap_states: Option<PathBuf>,
    /// Abort a shot after this many instructions.
    #[arg(long)]
    pub max_instructions: Option<u64>,
}

#[derive(Args, Debug)]
pub struct StateArgs {
    pub file: PathBuf,
    /// Output dump path.
    #[arg(short, long)]
    pub output: PathBuf,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(short = 'O', default_value_t = 0)]
    pub opt: u8,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 20)]
    pub max_qubits: usize,
    #[arg(long, default_value_t = 4)]
    pub min_qubits: usize,
    /// Total gates, split evenly between single-qubit gates and CNOTs.
    #[arg(long, default_value_t = 200)]
    pub gates: usize,
    #[arg(long, default_value_t = 100)]
    pub shots: u64,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub csv: Option<PathBuf>,
    #[command(flatten)]
    pub engine: EngineArgs,
}

#[derive(Subcommand, Debug)]
pub enum GenCommand {
    /// Trotterized transverse-field Ising quench.
    Tfim {
        #[arg(long)]
        l: usize,
        #[arg(long, default_value_t = 0.0)]
        g0: f64,
        #[arg(long)]
        g1: f64,
        #[arg(long)]
        dt: f64,
        #[arg(long)]
        steps: usize,
        /// Snap every this many steps; 0 disables snaps.
        #[arg(long, default_value_t = 1)]
        snapshot_every: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Order finding of 2 modulo N.
    Shor {
        #[arg(long)]
        n: u64,
        /// Phase bits.
        #[arg(long)]
        t: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Teleportation of u(theta, phi, lambda)|0>.
    Teleport {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        phi: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        lambda: f64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct DebugArgs {
    pub file: PathBuf,
    /// Print the probability tree.
    #[arg(long)]
    pub tree: bool,
    /// Print the tree as JSON.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value_t = 20)]
    pub max_meas: usize,
    /// Stop before this instruction index and report (default: run to the end).
    #[arg(long = "break")]
    pub breakpoint: Option<usize>,
    /// Amplitudes shown in the report.
    #[arg(long, default_value_t = DEFAULT_TOP_K)]
    pub top: usize,
    /// Outcome forced for every measurement before the breakpoint (default: the likelier one).
    #[arg(long)]
    pub outcome: Option<u8>,
}

#[derive(Args, Debug)]
pub struct AsmArgs {
    pub file: PathBuf,
    #[arg(short = 'O', default_value_t = 0)]
    pub opt: u8,
    /// Print canonical QtASM.
    #[arg(long)]
    pub emit: bool,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct QuenchArgs {
    #[arg(long, default_value_t = 10)]
    pub l: usize,
    #[arg(long, default_value_t = 2.0)]
    pub g1: f64,
    #[arg(long, default_value_t = 0.01)]
    pub dt: f64,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    /// Output directory for mz.csv, rate.csv and summary.json.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {message}")]
    Compile { path: String, message: String },
    #[error("{0}")]
    Runtime(String),
    #[error("{0}")]
    Capacity(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Runtime(_) => 1,
            CliError::Usage(_) | CliError::Compile { .. } => 2,
            CliError::Capacity(_) => 3,
        }
    }
}

impl From<VmError> for CliError {
    fn from(e: VmError) -> Self {
        if e.is_capacity() {
            CliError::Capacity(e.to_string())
        } else {
            CliError::Runtime(e.to_string())
        }
    }
}

impl From<DebugError> for CliError {
    fn from(e: DebugError) -> Self {
        match e {
            DebugError::Vm(v) => v.into(),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

/// Byte counts such as `4096`, `512M`, `8G` or `16GiB` (binary units).
pub fn parse_bytes(s: &str) -> Result<u64, String> {
    let s = s.trim();
    let split = s.find(|c: char| !c.is_ascii_digit()).unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let n: u64 = num.parse().map_err(|_| format!("bad size `{s}`"))?;
    let shift = match unit.trim().to_ascii_lowercase().as_str() {
        "" | "b" => 0,
        "k" | "kb" | "kib" => 10,
        "m" | "mb" | "mib" => 20,
        "g" | "gb" | "gib" => 30,
        "t" | "tb" | "tib" => 40,
        other => return Err(format!("unknown unit `{other}`")),
    };
    n.checked_mul(1 << shift).ok_or_else(|| format!("size `{s}` overflows"))
}

fn parse_seed(s: Option<&str>) -> Result<u64, CliError> {
    match s {
        None => Ok(DEFAULT_SEED),
        Some("random") => {
            let seed = rand::random();
            eprintln!("seed {seed}");
            Ok(seed)
        }
        Some(v) => v
            .parse()
            .map_err(|_| CliError::Usage(format!("seed must be an integer or `random`, got `{v}`"))),
    }
}

fn read_source(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path, opt: u8) -> Result<Program, CliError> {
    let src = read_source(path)?;
    let p = compile(&src).map_err(|e| CliError::Compile {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    Ok(if opt > 0 { optimize(&p, opt) } else { p })
}

fn write_out(path: &Path, contents: impl AsRef<[u8]>) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn emit_or_print(output: Option<&Path>, text: &str) -> Result<(), CliError> {
    match output {
        Some(p) => write_out(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

fn cmd_run(a: &RunArgs) -> Result<(), CliError> {
    if a.shots == 0 {
        return Err(CliError::Usage("--shots must be at least 1".into()));
    }
    let program = load(&a.file, a.opt)?;
    let seed = parse_seed(a.seed.as_deref())?;
    let opts = RunOptions {
        engine: a.engine.config()?,
        max_instructions: a.max_instructions,
        snap: SnapOptions {
            expect_z: true,
            expect_x: a.snap_x,
            state: a.snap_states.is_some(),
        },
        ..RunOptions::default()
    };
    let results = run_shot_results(&program, a.shots, seed, &opts)?;
    let mut hist = Histogram::new(program.written_registers().into_iter().rev().collect());
    for r in &results {
        hist.record(&r.cregs);
    }

    println!("{} shots, seed {seed}", hist.shots);
    for (k, v) in &hist.counts {
        println!("{k:>width$}  {v}", width = hist.registers.len().max(1));
    }
    if let Some(p) = &a.json {
        write_out(p, hist.to_json())?;
    }
    if let Some(p) = &a.csv {
        write_out(p, hist.to_csv())?;
    }
    if let Some(p) = &a.snapshots {
        write_out(p, to_json(&results))?;
    }
    if let Some(dir) = &a.snap_states {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        for s in &results[0].snapshots {
            if let Some(state) = &s.state {
                let mut buf = Vec::new();
                write_dump(state, &mut buf).map_err(|e| CliError::Runtime(e.to_string()))?;
                write_out(&dir.join(format!("{}.qtvm", s.tag)), buf)?;
            }
        }
    }
    Ok(())
}

fn cmd_state(a: &StateArgs) -> Result<(), CliError> {
    let program = load(&a.file, a.opt)?;
    let seed = parse_seed(a.seed.as_deref())?;
    let opts = RunOptions {
        engine: a.engine.config()?,
        snap: SnapOptions {
            expect_z: false,
            expect_x: false,
            state: false,
        },
        ..RunOptions::default()
    };
    let (_, mut machine) = crate::vm::run_shot_machine(&program, seed, 0, &opts)?;
    let state = machine.quantum.to_state_vector().map_err(|e| CliError::from(VmError::from(e)))?;
    let file = fs::File::create(&a.output).map_err(|e| CliError::Runtime(format!("{}: {e}", a.output.display())))?;
    write_dump(&state, std::io::BufWriter::new(file)).map_err(|e| CliError::Runtime(e.to_string()))?;
    println!("{} qubits written to {}", state.num_qubits(), a.output.display());
    Ok(())
}

fn cmd_bench(a: &BenchArgs) -> Result<(), CliError> {
    let engine = a.engine.config()?;
    if a.max_qubits > engine.capacity.max_qubits {
        return Err(CliError::Capacity(format!(
            "{} qubits exceed the limit of {}",
            a.max_qubits, engine.capacity.max_qubits
        )));
    }
    let config = BenchConfig {
        min_qubits: a.min_qubits,
        max_qubits: a.max_qubits,
        single: a.gates / 2,
        cnots: a.gates - a.gates / 2,
        shots: a.shots,
        seed: parse_seed(a.seed.as_deref())?,
    };
    let opts = RunOptions {
        engine,
        ..RunOptions::default()
    };
    println!("qubits,gates,shots,seconds");
    let rows = run_bench(&config, &opts, |r| println!("{},{},{},{:.6}", r.qubits, r.gates, r.shots, r.seconds))?;
    if let Some(p) = &a.csv {
        write_out(p, to_csv(&rows))?;
    }
    Ok(())
}

fn cmd_gen(g: &GenCommand) -> Result<(), CliError> {
    let usage = |e: &dyn std::fmt::Display| CliError::Usage(e.to_string());
    let (text, output) = match g {
        GenCommand::Tfim {
            l,
            g0,
            g1,
            dt,
            steps,
            snapshot_every,
            output,
        } => {
            let spec = TfimQuenchSpec {
                num_qubits: *l,
                g0: *g0,
                g1: *g1,
                dt: *dt,
                steps: *steps,
                snapshot_every: *snapshot_every,
            };
            (tfim_source(&spec).map_err(|e| usage(&e))?, output)
        }
        GenCommand::Shor { n, t, output } => (shor_source(&ShorSpec::new(*n, *t)).map_err(|e| usage(&e))?, output),
        GenCommand::Teleport {
            theta,
            phi,
            lambda,
            output,
        } => {
            let p = crate::circuits::build_teleportation(*theta, *phi, *lambda);
            (emit(&p), output)
        }
    };
    emit_or_print(output.as_deref(), &text)
}

fn cmd_debug(a: &DebugArgs) -> Result<(), CliError> {
    let program = load(&a.file, 0)?;
    if a.tree || a.json {
        let opts = DebugOptions {
            max_measurements: a.max_meas,
            ..DebugOptions::default()
        };
        let tree = enumerate_branches(&program, &opts)?;
        if a.tree {
            print!("{tree}");
        }
        if a.json {
            println!("{}", tree.to_json());
        }
        return Ok(());
    }
    let opts = RunOptions::default();
    let mut m = MachineState::new(&program, &opts.engine)?;
    let stop = a.breakpoint.unwrap_or(usize::MAX);
    let forced = a.outcome.map(|o| o != 0);
    run_to(&mut m, &program, &opts, stop, |_, p1| forced.unwrap_or(p1 > 0.5))?;
    print!("{}", inspect(&mut m, &program, a.top)?);
    Ok(())
}

fn cmd_asm(a: &AsmArgs) -> Result<(), CliError> {
    let program = load(&a.file, a.opt)?;
    if a.emit || a.output.is_some() {
        emit_or_print(a.output.as_deref(), &emit(&program))
    } else {
        println!(
            "{} qubits, {} instructions, {} gates, {} registers",
            program.num_qubits,
            program.len(),
            program.gate_count(),
            program.num_registers
        );
        Ok(())
    }
}

fn cmd_quench(a: &QuenchArgs) -> Result<(), CliError> {
    let spec = TfimQuenchSpec {
        num_qubits: a.l,
        g0: 0.0,
        g1: a.g1,
        dt: a.dt,
        steps: a.steps,
        snapshot_every: 1,
    };
    let program = crate::circuits::build_tfim_quench(&spec).map_err(|e| CliError::Usage(e.to_string()))?;
    let opts = RunOptions {
        snap: SnapOptions {
            expect_z: true,
            expect_x: false,
            state: true,
        },
        ..RunOptions::default()
    };
    let shot = run_shot(&program, DEFAULT_SEED, 0, &opts)?;
    let runtime = |e: crate::analytics::AnalyticsError| CliError::Runtime(e.to_string());
    let mz = magnetization_series(&shot.snapshots, a.dt).map_err(runtime)?;
    let rate = symmetric_loschmidt_series(&shot.snapshots, a.dt).map_err(runtime)?;
    let params = QuenchParams { g0: 0.0, g1: a.g1, l: a.l };
    let summary = QuenchSummary::new(params, a.dt, &mz, Some(&rate));
    println!("{}", summary.to_json());
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
        write_out(&dir.join("mz.csv"), mz.to_csv("mz"))?;
        write_out(&dir.join("rate.csv"), rate.to_csv("rate"))?;
        write_out(&dir.join("summary.json"), summary.to_json())?;
    }
    Ok(())
}

fn configure_threads(threads: Option<usize>) -> Result<(), CliError> {
    let n = match threads {
        Some(n) => Some(n),
        None => match std::env::var("QTVM_THREADS") {
            Ok(v) => Some(
                v.parse()
                    .map_err(|_| CliError::Usage(format!("QTVM_THREADS must be an integer, got `{v}`")))?,
            ),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Runtime(e.to_string()))?;
    }
    Ok(())
}

pub fn execute(cli: &Cli) -> Result<(), CliError> {
    configure_threads(cli.threads)?;
    match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::State(a) => cmd_state(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Gen(g) => cmd_gen(g),
        Command::Debug(a) => cmd_debug(a),
        Command::Asm(a) => cmd_asm(a),
        Command::Quench(a) => cmd_quench(a),
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qtvm: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
