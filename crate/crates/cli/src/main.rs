use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ionforge::config::{parse_config, Mode, Overrides};
use ionforge::report;

/// Trap design and frequency planning for ion chains in tailored microtraps.
///
/// Exit codes: 0 success, 2 usage, 3 unknown or malformed config key,
/// 4 out-of-range value, 5 unknown species, 6 file i/o, 7 computation failed.
#[derive(Debug, Parser)]
#[command(name = "ionforge", version)]
struct Cli {
    /// analyze, design, plan, fig2, fig3, table1, scan-N, scan-h or perturb
    mode: String,
    /// TOML config file whose keys mirror the run settings
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Species name or path to a species TOML file
    #[arg(long, value_name = "NAME")]
    species: Option<String>,
    /// Field offset (T)
    #[arg(long, value_name = "T", allow_negative_numbers = true)]
    b0: Option<f64>,
    /// Field gradient (T/m)
    #[arg(long, value_name = "T/m", allow_negative_numbers = true)]
    grad: Option<f64>,
    /// Number of ions
    #[arg(long, value_name = "N")]
    n: Option<usize>,
    /// Ion spacing (um)
    #[arg(long, value_name = "UM", allow_negative_numbers = true)]
    h: Option<f64>,
    /// End-trap frequency (MHz)
    #[arg(long, value_name = "MHZ", allow_negative_numbers = true)]
    nu1: Option<f64>,
    /// Monte-Carlo seed
    #[arg(long, value_name = "INT")]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mode: Mode = match cli.mode.parse() {
        Ok(m) => m,
        Err(_) => {
            eprintln!("error: unknown mode `{}`", cli.mode);
            return ExitCode::from(2);
        }
    };
    let flags = Overrides {
        species: cli.species,
        b0: cli.b0,
        grad: cli.grad,
        n: cli.n,
        h: cli.h,
        nu1: cli.nu1,
        seed: cli.seed,
        out: cli.out,
    };
    let config = match parse_config(cli.config.as_deref(), Some(mode), &flags) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    match report::execute(&config) {
        Ok((output, paths)) => {
            print!("{}", output.summary);
            for p in paths {
                println!("wrote {}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
