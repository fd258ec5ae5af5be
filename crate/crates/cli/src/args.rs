use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "spinlaw", version, about = "Dyadic smoothing, cosine products and Ising-chain quench runs")]
pub struct Cli {
    /// key=value file with defaults for any flag; flags on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Worker threads (overrides SPINLAW_WORKERS).
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(flatten)]
    pub output: OutputArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Table destination; stdout when absent.
    #[arg(long, short, global = true, value_name = "PATH")]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Also write an SVG line plot here.
    #[arg(long, global = true, value_name = "PATH")]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Subcommand)]
pub enum Command {
    /// Entropy of a piecewise-constant density under repeated doubling-map averaging.
    Dyadic(DyadicArgs),
    /// Cl_{p;s}(t) = prod_n (1 - p + p cos(t n^-s)) on a time grid.
    Cloitre(CloitreArgs),
    /// Infinite-volume <sigma^1(t)> of the all-plus product state.
    Correlator(CorrelatorArgs),
    /// lambda-norms and the Lieb-Robinson velocity of a coupling.
    Lrv(LrvArgs),
    /// State-vector evolution of a product state on a finite chain.
    Evolve(EvolveArgs),
    /// Block-state quench cycle on a finite chain.
    Quench(QuenchArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    /// All mass in the first cell.
    Spike,
    /// Weights proportional to the cell index plus one.
    Ramp,
    /// Independent uniform weights from --seed.
    Random,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct DyadicArgs {
    /// Binary resolution m (2^m cells).
    #[arg(long, default_value_t = 10)]
    pub resolution: u32,
    /// Number of transfer-operator steps; defaults to m.
    #[arg(long)]
    pub steps: Option<u32>,
    #[arg(long, value_enum, default_value_t = Init::Random)]
    pub init: Init,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Print the shifted orbit of these binary digits instead.
    #[arg(long)]
    pub orbit: Option<String>,
    /// Number of shifts for --orbit.
    #[arg(long, default_value_t = 8)]
    pub shift: usize,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct GridArgs {
    #[arg(long, allow_hyphen_values = true)]
    pub tmin: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub tmax: Option<f64>,
    /// Number of grid intervals.
    #[arg(long)]
    pub steps: Option<u64>,
    /// Explicit comma-separated times; overrides the grid.
    #[arg(long, allow_hyphen_values = true)]
    pub times: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Exp,
    Dyson,
    Table,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value_t = Model::Exp)]
    pub model: Model,
    /// xi for exp (default e), alpha for dyson (default 2).
    #[arg(long)]
    pub param: Option<f64>,
    /// Couplings for --model table as distance:J pairs, e.g. "1:-1,2:-0.25".
    #[arg(long, allow_hyphen_values = true)]
    pub table: Option<String>,
    /// Overall factor multiplying J.
    #[arg(long, default_value_t = 1.0)]
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CloitreArgs {
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 1.2)]
    pub s: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Add |F(t + delta) - F(t)|.
    #[arg(long)]
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct CorrelatorArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Use the exact finite open chain of this many sites (middle site).
    #[arg(long)]
    pub sites: Option<usize>,
    /// Add |F(t + delta) - F(t)|.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Dyson only: also report the two Cloitre readings.
    #[arg(long)]
    pub readings: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct LrvArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Comma-separated lambdas; prints the norm profile instead of the summary.
    #[arg(long)]
    pub lambdas: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Product state such as "+x+x-x+z"; all +x when absent.
    #[arg(long, allow_hyphen_values = true)]
    pub state: Option<String>,
    /// Chain length when --state is absent.
    #[arg(long)]
    pub sites: Option<usize>,
    /// Region as "2,3,4" or "2..5" (0-based, half-open).
    #[arg(long)]
    pub subregion: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Add one <sigma^1_x> column per site.
    #[arg(long)]
    pub sigma: bool,
}

#[derive(Debug, Clone, PartialEq, Args)]
pub struct QuenchArgs {
    #[arg(long = "A", default_value_t = 1)]
    pub a: u64,
    #[arg(long = "B", default_value_t = 2)]
    pub b: u64,
    #[arg(long = "C", default_value_t = 4)]
    pub c: u64,
    #[arg(long = "K", default_value_t = 2)]
    pub k: u64,
    #[command(flatten)]
    pub model: ModelArgs,
    /// Region as "2,3,4" or "2..5"; the middle four sites when absent.
    #[arg(long)]
    pub subregion: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Field decay base psi.
    #[arg(long, default_value_t = std::f64::consts::E)]
    pub psi: f64,
    /// Field decay exponent alpha.
    #[arg(long, default_value_t = 3.0)]
    pub alpha: f64,
    /// Accept 1 < alpha <= 2.
    #[arg(long)]
    pub allow_alpha_le_2: bool,
    /// Add f(t) = <sigma^1_x>(t) - <sigma^1_x>(0) for this site.
    #[arg(long)]
    pub witness_site: Option<usize>,
    /// Add one <sigma^1_x> column per site.
    #[arg(long)]
    pub sigma: bool,
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config_file(text: &str) -> Result<Vec<(String, String)>, CliError> {
    let mut out = Vec::new();
    let mut bad = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        match line.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() => {
                let key = k.trim().trim_start_matches("--").to_string();
                out.push((key, v.trim().to_string()));
            }
            _ => bad.push(format!("--config: line {} is not key=value: {raw:?}", no + 1)),
        }
    }
    if bad.is_empty() { Ok(out) } else { Err(CliError::Validation(bad)) }
}

fn config_path(argv: &[String]) -> Option<String> {
    let mut it = argv.iter();
    while let Some(a) = it.next() {
        if a == "--config" {
            return it.next().cloned();
        }
        if let Some(p) = a.strip_prefix("--config=") {
            return Some(p.to_string());
        }
    }
    None
}

/// Appends config-file entries whose flag is absent from `argv`.
pub fn merge_config(argv: Vec<String>) -> Result<Vec<String>, CliError> {
    let Some(path) = config_path(&argv) else {
        return Ok(argv);
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Validation(vec![format!("--config: cannot read {path}: {e}")]))?;
    let mut merged = argv.clone();
    for (key, value) in parse_config_file(&text)? {
        let flag = format!("--{key}");
        let present = argv
            .iter()
            .any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present || key == "config" {
            continue;
        }
        match value.as_str() {
            "true" => merged.push(flag),
            "false" => {}
            _ => merged.push(format!("{flag}={value}")),
        }
    }
    Ok(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn config_lines() {
        let kv = parse_config_file("# sweep\nA = 1\n--B=2 # inline\n\nsigma = true\n").unwrap();
        assert_eq!(kv, vec![
            ("A".into(), "1".into()),
            ("B".into(), "2".into()),
            ("sigma".into(), "true".into()),
        ]);
        assert!(matches!(parse_config_file("oops"), Err(CliError::Validation(_))));
    }

    #[test]
    fn flags_win_over_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "C = 8\nK = 3\nsigma = true\nwitness-site = 1\n").unwrap();
        let argv = s(&["spinlaw", "quench", "--C", "4", "--config", path.to_str().unwrap()]);
        let merged = merge_config(argv).unwrap();
        assert!(merged.ends_with(&s(&["--K=3", "--sigma", "--witness-site=1"])));
        let cli = Cli::try_parse_from(&merged).unwrap();
        match cli.command {
            Command::Quench(q) => {
                assert_eq!((q.c, q.k), (4, 3));
                assert!(q.sigma);
            }
            other => panic!("{other:?}"),
        }
    }
}
