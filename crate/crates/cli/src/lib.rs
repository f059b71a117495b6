//! The `subflow` command-line tool.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod bench;
mod commands;
pub mod format;
mod gen;
mod selftest;

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Input(String),
    Solver(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Input(_) => 2,
            CliError::Solver(_) => 3,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Input(m) => write!(f, "input error: {m}"),
            CliError::Solver(m) => write!(f, "solver error: {m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "subflow", version, about = "Separable convex minimization over graph-cut base polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Io {
    /// problem file (JSON)
    #[arg(long)]
    input: PathBuf,
    /// write the result here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum CutArg {
    Maximal,
    Minimal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DataKind {
    Fused,
    Group,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Maximum flow and an extremal minimum cut (JSON or DIMACS input)
    Maxflow {
        #[command(flatten)]
        io: Io,
        /// which minimum cut to report; overrides the problem file
        #[arg(long, value_enum)]
        cut: Option<CutArg>,
    },
    /// Chain of maximal minimizers and the optimal base
    Solve {
        #[command(flatten)]
        io: Io,
    },
    /// Proximal operator of a fused, group or graph-cut norm
    Prox {
        #[command(flatten)]
        io: Io,
    },
    /// Densest-subgraph level sets
    Densest {
        #[command(flatten)]
        io: Io,
    },
    /// Minimum ratio g(S) / b(S)
    Minratio {
        #[command(flatten)]
        io: Io,
    },
    /// Regularized least squares by accelerated proximal gradient
    Regress {
        #[command(flatten)]
        io: Io,
    },
    /// Generate a synthetic regression dataset
    Gen {
        #[arg(value_enum)]
        kind: DataKind,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rows: usize,
        /// causal features (fused data)
        #[arg(long, default_value_t = 20)]
        k: usize,
        #[arg(long, default_value_t = 0.1)]
        sigma: f64,
        #[arg(long, default_value_t = 20)]
        n_groups: usize,
        #[arg(long, default_value_t = 15)]
        group_size: usize,
        /// offset between group starts; evenly spread when absent
        #[arg(long)]
        stride: Option<usize>,
        /// regularization weight written into the generated problem file
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Run a benchmark profile and emit CSV
    Bench {
        /// fused-scaling, densest or table1-desk
        #[arg(long)]
        profile: String,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the embedded oracle-equivalence suites
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Input(format!("cannot write output: {e}"))),
    }
}

fn dispatch(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Maxflow { io, cut } => {
            let cut = cut.map(|c| match c {
                CutArg::Maximal => format::CutChoice::Maximal,
                CutArg::Minimal => format::CutChoice::Minimal,
            });
            let text = commands::maxflow(&io.input, cut)?;
            emit(&io.out, &text, stdout)?;
        }
        Command::Solve { io } => emit(&io.out, &commands::by_kind(&io.input, "solve")?, stdout)?,
        Command::Prox { io } => emit(&io.out, &commands::by_kind(&io.input, "prox")?, stdout)?,
        Command::Densest { io } => emit(&io.out, &commands::by_kind(&io.input, "densest")?, stdout)?,
        Command::Minratio { io } => emit(&io.out, &commands::by_kind(&io.input, "minratio")?, stdout)?,
        Command::Regress { io } => emit(&io.out, &commands::by_kind(&io.input, "regress")?, stdout)?,
        Command::Gen {
            kind,
            n,
            rows,
            k,
            sigma,
            n_groups,
            group_size,
            stride,
            lambda,
            seed,
            out_dir,
        } => {
            let spec = match kind {
                DataKind::Fused => gen::DataRequest::Fused { n, rows, k, sigma },
                DataKind::Group => gen::DataRequest::Group {
                    n,
                    rows,
                    n_groups,
                    group_size,
                    stride,
                    sigma,
                },
            };
            let summary = gen::generate(spec, lambda, seed, &out_dir)?;
            emit(&None, &summary, stdout)?;
        }
        Command::Bench {
            profile,
            jobs,
            seed,
            out,
        } => {
            if jobs == 0 {
                return Err(CliError::Usage("--jobs must be at least 1".into()));
            }
            let csv = bench::run(&profile, jobs, seed)?;
            emit(&out, &csv, stdout)?;
        }
        Command::Selftest { seed, inject_fault } => {
            let (report, ok) = selftest::run(seed, inject_fault);
            emit(&None, &report, stdout)?;
            return Ok(if ok { 0 } else { 1 });
        }
    }
    Ok(0)
}

/// Runs the tool on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let rendered = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = stdout.write_all(rendered.as_bytes());
                    0
                }
                _ => {
                    let _ = stderr.write_all(rendered.as_bytes());
                    2
                }
            };
        }
    };
    match dispatch(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "subflow: {e}");
            e.exit_code()
        }
    }
}
