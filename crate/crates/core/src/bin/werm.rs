//! Command-line front end. Every subcommand builds a [`SweepConfig`] and hands
//! it to the library; `run --config` takes the same configuration from TOML.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use imbalance_werm::sweep::{self, Format, Mode, Param, SweepConfig};
use imbalance_werm::{Error, Grid, LossKind};

#[derive(Parser)]
#[command(name = "werm", version, about = "Asymptotics of class-weighted ERM on imbalanced Gaussian data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the asymptotic system at one point.
    Solve(Common),
    /// Equal-error weight ratio and the solution there.
    RhoTilde(Common),
    /// Sweep one parameter.
    Sweep {
        #[arg(long, value_parser = ["delta", "rho", "pi"])]
        vary: String,
        #[command(flatten)]
        common: Common,
    },
    /// Equal-error weighting against majority downsampling over delta.
    DsCompare(Common),
    /// Monte-Carlo fits against theory.
    Simulate {
        /// Parameter swept by --grid.
        #[arg(long, default_value = "rho")]
        vary: Param,
        #[command(flatten)]
        common: Common,
    },
    /// Weighted against unweighted worst-class error over s.
    CompareSep(Common),
    /// Effective dimension of a feature file.
    Effdim {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.99)]
        threshold: f64,
        #[arg(long)]
        labels_col: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value = "csv")]
        format: Format,
    },
    /// Run a TOML configuration file.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the file's output path.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        format: Option<Format>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 2.0)]
    s: f64,
    #[arg(long, default_value_t = 0.2)]
    pi_plus: f64,
    #[arg(long, default_value_t = 0.2)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value = "square")]
    loss: LossKind,
    /// start:stop:points[:log]
    #[arg(long)]
    grid: Option<Grid>,
    #[arg(long, default_value_t = 4000)]
    n: usize,
    /// Comma-separated seeds, or a count `k` meaning 0..k.
    #[arg(long, default_value = "10")]
    seeds: String,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value = "csv")]
    format: Format,
}

impl Common {
    fn into_config(self, mode: Mode) -> Result<SweepConfig, Error> {
        let mut c = SweepConfig::new(mode);
        c.s = self.s;
        c.pi_plus = self.pi_plus;
        c.delta = self.delta;
        c.rho = self.rho;
        c.loss = self.loss;
        c.grid = self.grid;
        c.n = self.n;
        c.seeds = parse_seeds(&self.seeds)?;
        c.out = self.out;
        c.format = self.format;
        Ok(c)
    }
}

fn parse_seeds(s: &str) -> Result<Vec<u64>, Error> {
    let bad = || Error::Config(format!("seeds `{s}` must be a count or a comma-separated list"));
    if s.contains(',') {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
    } else {
        let k: u64 = s.trim().parse().map_err(|_| bad())?;
        Ok((0..k).collect())
    }
}

fn config_of(command: Command) -> Result<SweepConfig, Error> {
    Ok(match command {
        Command::Solve(c) => c.into_config(Mode::Solve)?,
        Command::RhoTilde(c) => c.into_config(Mode::RhoTilde)?,
        Command::Sweep { vary, common } => common.into_config(match vary.as_str() {
            "delta" => Mode::DeltaSweep,
            "rho" => Mode::RhoSweep,
            _ => Mode::PiSweep,
        })?,
        Command::DsCompare(c) => c.into_config(Mode::DsCompare)?,
        Command::Simulate { vary, common } => {
            let mut c = common.into_config(Mode::Simulate)?;
            c.vary = Some(vary);
            c
        }
        Command::CompareSep(c) => c.into_config(Mode::CompareSep)?,
        Command::Effdim { input, threshold, labels_col, out, format } => {
            let mut c = SweepConfig::new(Mode::Effdim);
            c.input = Some(input);
            c.threshold = threshold;
            c.labels_col = labels_col;
            c.out = out;
            c.format = format;
            c.seeds = Vec::new();
            c
        }
        Command::Run { config, out, format } => {
            let mut c = SweepConfig::from_path(&config)?;
            if out.is_some() {
                c.out = out;
            }
            if let Some(f) = format {
                c.format = f;
            }
            c
        }
    })
}

fn execute(command: Command) -> Result<(), Error> {
    let config = config_of(command)?;
    let table = sweep::run(&config)?;
    match &config.out {
        Some(path) => {
            let file = std::fs::File::create(path).map_err(|source| Error::Io { path: path.clone(), source })?;
            sweep::write_table(&config, &table, config.format, std::io::BufWriter::new(file))
        }
        None => sweep::write_table(&config, &table, config.format, std::io::stdout().lock()),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("werm: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
