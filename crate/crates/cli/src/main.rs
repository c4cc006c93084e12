//! `rvsim`: assemble, run, trace and inspect RV32I programs.
//!
//! Exit codes: 0 ok, 1 user-input error or machine fault, 2 I/O error,
//! 3 differential divergence, 4 cycle budget exhausted.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rvsim_core::asm::{assemble, disassemble, disassemble_image, parse_int};
use rvsim_core::control::{control_table_csv, TABLE_HEADER};
use rvsim_core::cpu::{run_lockstep, LockstepOutcome, RunError};
use rvsim_core::datapath::{DEFAULT_DISPLAY_ADDR, DEFAULT_DMEM_BYTES, DEFAULT_IMEM_BYTES};
use rvsim_core::display::{render_output, DEFAULT_DIGITS};
use rvsim_core::image::{read_bin, read_v2raw, write_bin, write_v2raw};
use rvsim_core::{Engine, MachineConfig, MachineState, MemImage, Mnemonic, Status};

const EXIT_USER: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_DIVERGENCE: u8 = 3;
const EXIT_BUDGET: u8 = 4;

/// `write!` to the command output, mapping failures to the I/O exit code.
macro_rules! emit {
    ($out:expr, $($arg:tt)*) => {
        write!($out, $($arg)*).context("cannot write output").code(EXIT_IO)?
    };
}

macro_rules! emitln {
    ($out:expr, $($arg:tt)*) => {
        writeln!($out, $($arg)*).context("cannot write output").code(EXIT_IO)?
    };
}

#[derive(Parser)]
#[command(name = "rvsim", version, about = "Single-cycle RV32I simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Assemble a source file into a memory image.
    Asm {
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, value_enum, default_value_t = ImageFormat::Hex)]
        format: ImageFormat,
    },
    /// Run a program until it halts, faults or exhausts the cycle budget.
    Run(RunArgs),
    /// Execute a fixed number of cycles, printing one trace line per cycle.
    Step {
        #[command(flatten)]
        machine: MachineArgs,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Disassemble a memory image.
    Disasm {
        image: PathBuf,
        /// Emit plain source that reassembles to the same image.
        #[arg(long)]
        source: bool,
    },
    /// Show control signals: the full table as CSV, or one mnemonic's row.
    Controls {
        #[arg(long, conflicts_with = "mnemonic")]
        table: bool,
        #[arg(required_unless_present = "table")]
        mnemonic: Option<String>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ImageFormat {
    /// Logisim `v2.0 raw` text.
    Hex,
    /// Little-endian words.
    Bin,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum EngineChoice {
    Structural,
    Functional,
    /// Run both engines in lockstep and report the first divergence.
    Differential,
}

#[derive(Args)]
struct MachineArgs {
    /// Program: assembly source (.s/.asm), `v2.0 raw` text, or .bin.
    imem: PathBuf,
    /// Initial data memory image.
    #[arg(long)]
    dmem: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_IMEM_BYTES, value_parser = parse_u32)]
    imem_size: u32,
    #[arg(long, default_value_t = DEFAULT_DMEM_BYTES, value_parser = parse_u32)]
    dmem_size: u32,
    #[arg(long, default_value_t = DEFAULT_DISPLAY_ADDR, value_parser = parse_u32)]
    display_addr: u32,
    /// Number of seven-segment digits to render.
    #[arg(long, default_value_t = DEFAULT_DIGITS)]
    digits: usize,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    machine: MachineArgs,
    #[arg(long, default_value_t = 1_000_000)]
    max_cycles: u64,
    #[arg(long, value_enum, default_value_t = EngineChoice::Structural)]
    engine: EngineChoice,
    /// Print one line per cycle (structural engine only).
    #[arg(long)]
    trace: bool,
    /// Print data memory after the run.
    #[arg(long)]
    dump_dmem: bool,
}

fn parse_u32(s: &str) -> Result<u32, String> {
    parse_int(s)
        .filter(|&v| v >= 0)
        .map(|v| v as u32)
        .ok_or_else(|| format!("`{s}` is not an unsigned 32-bit number"))
}

/// An error paired with the exit code it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

trait ExitCodeExt<T> {
    fn code(self, code: u8) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitCodeExt<T> for Result<T, E> {
    fn code(self, code: u8) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            code,
            error: e.into(),
        })
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path)
        .with_context(|| format!("cannot read {}", path.display()))
        .code(EXIT_IO)
}

fn utf8(path: &Path, bytes: Vec<u8>) -> Result<String, Failure> {
    String::from_utf8(bytes)
        .with_context(|| format!("{} is not UTF-8 text", path.display()))
        .code(EXIT_USER)
}

fn assemble_file(path: &Path) -> Result<MemImage, Failure> {
    let src = utf8(path, read_file(path)?)?;
    assemble(&src, 0).map_err(|errs| {
        let lines: Vec<String> = errs
            .0
            .iter()
            .map(|e| format!("{}:{e}", path.display()))
            .collect();
        Failure {
            code: EXIT_USER,
            error: anyhow!(lines.join("\n")),
        }
    })
}

fn load_image(path: &Path) -> Result<MemImage, Failure> {
    let ext = path.extension().and_then(|e| e.to_str()).unwrap_or("");
    match ext {
        "s" | "asm" => assemble_file(path),
        "bin" => read_bin(&read_file(path)?)
            .with_context(|| path.display().to_string())
            .code(EXIT_USER),
        _ => read_v2raw(&utf8(path, read_file(path)?)?)
            .with_context(|| path.display().to_string())
            .code(EXIT_USER),
    }
}

fn build_machine(args: &MachineArgs) -> Result<MachineState, Failure> {
    let program = load_image(&args.imem)?;
    let data = args.dmem.as_deref().map(load_image).transpose()?;
    let config = MachineConfig {
        imem_bytes: args.imem_size,
        dmem_bytes: args.dmem_size,
        display_addr: args.display_addr,
    };
    MachineState::from_images(&config, &program, data.as_ref()).code(EXIT_USER)
}

fn report(s: &MachineState, digits: usize) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "status: {}", s.status);
    let _ = writeln!(out, "cycles: {}", s.cycle_count);
    let _ = writeln!(out, "pc: {:#010x}", s.pc.get());
    for row in 0..8u8 {
        let cells: Vec<String> = (0..4u8)
            .map(|c| {
                let r = row * 4 + c;
                format!("{:<16}", format!("x{r}={:#x}", s.reg(r)))
            })
            .collect();
        let _ = writeln!(out, "{}", cells.concat().trim_end());
    }
    let _ = writeln!(out, "display: {}", s.dmem.output_latch());
    out.push_str(&render_output(s.dmem.output_latch(), digits));
    out
}

fn finish(s: &MachineState) -> u8 {
    match s.status {
        Status::Halted(_) => 0,
        Status::Fault(kind) => {
            eprintln!("error: {kind} at pc {:#010x}", s.pc.get());
            EXIT_USER
        }
        Status::Running => {
            eprintln!("error: cycle budget exhausted after {} cycles", s.cycle_count);
            EXIT_BUDGET
        }
    }
}

fn cmd_run(out: &mut impl Write, args: &RunArgs) -> Result<u8, Failure> {
    let mut s = build_machine(&args.machine)?;
    match args.engine {
        EngineChoice::Differential => {
            if args.trace {
                return Err(anyhow!("--trace is only available with the structural engine"))
                    .code(EXIT_USER);
            }
            if let LockstepOutcome::Diverged(d) = run_lockstep(&s, args.max_cycles) {
                emitln!(out, "divergence at cycle {} (pc {:#010x}): {}", d.cycle, d.pc, d.detail);
                emitln!(out, "--- structural\n{}", report(&d.structural, args.machine.digits));
                emitln!(out, "--- functional\n{}", report(&d.functional, args.machine.digits));
                return Ok(EXIT_DIVERGENCE);
            }
            // both engines agree, so either one gives the final state
            let _ = s.run(Engine::Structural, args.max_cycles);
            emitln!(out, "engines agree");
        }
        EngineChoice::Structural if args.trace => {
            while s.status.is_running() && s.cycle_count < args.max_cycles {
                let rec = s.trace_step().expect("machine is running");
                emitln!(out, "{rec}");
            }
        }
        EngineChoice::Functional if args.trace => {
            return Err(anyhow!("--trace is only available with the structural engine"))
                .code(EXIT_USER);
        }
        EngineChoice::Structural | EngineChoice::Functional => {
            let engine = if args.engine == EngineChoice::Structural {
                Engine::Structural
            } else {
                Engine::Functional
            };
            // an exhausted budget leaves the status Running; `finish` reports it
            let _: Result<Status, RunError> = s.run(engine, args.max_cycles);
        }
    }
    emit!(out, "{}", report(&s, args.machine.digits));
    if args.dump_dmem {
        emit!(out, "{}", s.dmem.dump());
    }
    out.flush().context("cannot write output").code(EXIT_IO)?;
    Ok(finish(&s))
}

fn cmd_step(out: &mut impl Write, machine: &MachineArgs, count: u64) -> Result<u8, Failure> {
    let mut s = build_machine(machine)?;
    for _ in 0..count {
        let Ok(rec) = s.trace_step() else { break };
        emitln!(out, "{rec}");
    }
    out.flush().context("cannot write output").code(EXIT_IO)?;
    Ok(match s.status {
        Status::Fault(_) => finish(&s),
        _ => 0,
    })
}

fn cmd_asm(input: &Path, output: &Path, format: ImageFormat) -> Result<u8, Failure> {
    let img = assemble_file(input)?;
    let bytes = match format {
        ImageFormat::Hex => write_v2raw(&img).into_bytes(),
        ImageFormat::Bin => write_bin(&img),
    };
    fs::write(output, bytes)
        .with_context(|| format!("cannot write {}", output.display()))
        .code(EXIT_IO)?;
    Ok(0)
}

fn cmd_disasm(out: &mut impl Write, path: &Path, source: bool) -> Result<u8, Failure> {
    let img = load_image(path)?;
    if source {
        emit!(out, "{}", disassemble_image(&img));
        return Ok(0);
    }
    for (k, &w) in img.words.iter().enumerate() {
        let pc = img.origin.wrapping_add(4 * k as u32);
        emitln!(out, "{pc:08x}:  {w:08x}  {}", disassemble(w, pc));
    }
    Ok(0)
}

fn cmd_controls(out: &mut impl Write, table: bool, mnemonic: Option<&str>) -> Result<u8, Failure> {
    let csv = control_table_csv();
    if table {
        emit!(out, "{csv}");
        return Ok(0);
    }
    let name = mnemonic.unwrap_or_default();
    let m: Mnemonic = name
        .parse()
        .map_err(|_| anyhow!("unknown mnemonic `{name}`"))
        .code(EXIT_USER)?;
    let row = csv
        .lines()
        .find(|l| l.split(',').next() == Some(m.name()))
        .expect("every mnemonic has a row");
    for (field, value) in TABLE_HEADER.split(',').zip(row.split(',')) {
        emitln!(out, "{field:<14} {value}");
    }
    Ok(0)
}

fn is_broken_pipe(e: &anyhow::Error) -> bool {
    e.chain()
        .filter_map(|c| c.downcast_ref::<io::Error>())
        .any(|io| io.kind() == io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = BufWriter::new(io::stdout().lock());
    let result = match &cli.command {
        Command::Asm {
            input,
            output,
            format,
        } => cmd_asm(input, output, *format),
        Command::Run(args) => cmd_run(&mut out, args),
        Command::Step { machine, count } => cmd_step(&mut out, machine, *count),
        Command::Disasm { image, source } => cmd_disasm(&mut out, image, *source),
        Command::Controls { table, mnemonic } => {
            cmd_controls(&mut out, *table, mnemonic.as_deref())
        }
    }
    .and_then(|code| {
        out.flush().context("cannot write output").code(EXIT_IO)?;
        Ok(code)
    });
    match result {
        Ok(code) => ExitCode::from(code),
        // the reader went away (e.g. `| head`); nothing left to report to
        Err(f) if is_broken_pipe(&f.error) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
