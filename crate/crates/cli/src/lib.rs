//! Command-line front end: argument and config parsing, dispatch to the
//! kernels, and CSV/JSON/SVG output.

use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod svg;
pub mod table;

pub use args::{Cli, Command, Format};
pub use commands::Report;
pub use table::{Cell, ResultTable};

pub const WORKERS_ENV: &str = "SPINLAW_WORKERS";

const CONVENTIONS: &str = "conventions: Pauli operators with eigenvalues +-1, natural logarithms, \
k_B = 1, J(x) = -scale xi^-|x| (exp) or -scale |x|^-alpha (dyson), sites numbered from 0";

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// --help or --version output.
    Info(String),
    /// Rejected by the argument parser; the message is clap's rendering.
    Usage(String),
    Validation(Vec<String>),
    Resource(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Info(_) => 0,
            CliError::Usage(_) | CliError::Validation(_) => 2,
            CliError::Resource(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Info(m) | CliError::Usage(m) => write!(f, "{}", m.trim_end()),
            CliError::Validation(v) => {
                write!(f, "invalid configuration:")?;
                for line in v {
                    write!(f, "\n  {line}")?;
                }
                Ok(())
            }
            CliError::Resource(m) => write!(f, "resource limit: {m}"),
            CliError::Io(m) => write!(f, "{m}"),
        }
    }
}

impl std::error::Error for CliError {}

/// Parses argv (program name first) with config-file merging.
pub fn parse_args(argv: Vec<String>) -> Result<Cli, CliError> {
    let merged = args::merge_config(argv)?;
    use clap::error::ErrorKind;
    Cli::try_parse_from(merged).map_err(|e| match e.kind() {
        ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Info(e.render().to_string()),
        _ => CliError::Usage(e.render().to_string()),
    })
}

fn worker_count(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => Some(v.trim().parse::<usize>().map_err(|_| {
                CliError::Validation(vec![format!("{WORKERS_ENV}: expected a positive integer, got {v:?}")])
            })?),
            Err(_) => None,
        },
    };
    if n == Some(0) {
        return Err(CliError::Validation(vec!["--workers: workers >= 1 required".into()]));
    }
    Ok(n)
}

/// Runs the command on a pool of the requested size and stamps provenance.
/// Output does not depend on the worker count.
pub fn execute(cli: &Cli) -> Result<Report, CliError> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = worker_count(cli.workers)? {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Resource(format!("cannot start worker pool: {e}")))?;
    let mut report = pool.install(|| commands::run(&cli.command))?;
    report.table.provenance = vec![
        format!("spinlaw {}", env!("CARGO_PKG_VERSION")),
        format!("config: {:?}", cli.command),
        CONVENTIONS.to_string(),
    ];
    Ok(report)
}

fn write_file(path: &Path, f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), CliError> {
    let io_err = |e: io::Error| CliError::Io(format!("cannot write {}: {e}", path.display()));
    let mut w = BufWriter::new(File::create(path).map_err(io_err)?);
    f(&mut w).and_then(|_| w.flush()).map_err(io_err)
}

pub fn emit(report: &Report, cli: &Cli) -> Result<(), CliError> {
    let out = &cli.output;
    let write = |w: &mut dyn Write| match out.format {
        Format::Csv => report.table.write_csv(w),
        Format::Json => report.table.write_json(w),
    };
    match &out.output {
        Some(path) => write_file(path, |w| write(w))?,
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)
                .and_then(|_| lock.flush())
                .map_err(|e| CliError::Io(format!("cannot write stdout: {e}")))?;
        }
    }
    if let Some(path) = &out.svg {
        let plot = report.plot.as_ref().ok_or_else(|| {
            CliError::Validation(vec!["--svg: this command has no plot".into()])
        })?;
        write_file(path, |w| w.write_all(plot.render().as_bytes()))?;
    }
    Ok(())
}

/// Full run; returns the process exit code.
pub fn main_with(argv: Vec<String>) -> i32 {
    let cli = match parse_args(argv) {
        Ok(cli) => cli,
        Err(CliError::Info(m)) => {
            print!("{m}");
            return 0;
        }
        Err(e) => {
            eprintln!("{e}");
            return e.exit_code();
        }
    };
    match execute(&cli).and_then(|r| emit(&r, &cli)) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("spinlaw: {e}");
            e.exit_code()
        }
    }
}
