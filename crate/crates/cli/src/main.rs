use clap::{Args, Parser, Subcommand};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use nevanlinna_cli::commands::{cmd_plotdata, cmd_table, cmd_verify, cmd_zeros, read_table_csv, write_plotdata};
use nevanlinna_cli::scenario::{apply_tolerances, load, Loaded, Tolerances};
use nevanlinna_cli::{CliError, EXIT_INPUT, EXIT_OK};
use nevanlinna_core::lab::LabConfig;

#[derive(Parser)]
#[command(name = "nevanlinna", version, about = "Angular and Tsuji Nevanlinna functionals on sectors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output file (directory for plotdata); standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    tol_slope: Option<f64>,
    #[arg(long)]
    tol_bound_cap: Option<f64>,
    #[arg(long)]
    tol_slack: Option<f64>,
    #[arg(long)]
    tol_satisfaction: Option<f64>,
    #[arg(long)]
    tol_exceptional: Option<f64>,
    #[arg(long)]
    tol_lambda: Option<f64>,
    #[arg(long)]
    tol_epsilon: Option<f64>,
    #[arg(long)]
    tol_ratio: Option<f64>,
    #[arg(long)]
    tol_locator: Option<f64>,
    #[arg(long)]
    tol_quad_abs: Option<f64>,
    #[arg(long)]
    tol_quad_rel: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Characteristic table as CSV.
    Table {
        #[command(flatten)]
        common: Common,
        /// Comma-separated functional names, e.g. T,m.0,N.0
        #[arg(long, value_delimiter = ',')]
        functionals: Option<Vec<String>>,
    },
    /// Zeros of a function or of Q(f) in a region, as CSV.
    Zeros {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        target: String,
        /// Compose the target form with this curve.
        #[arg(long)]
        curve: Option<String>,
        #[arg(long, default_value = "sector-annulus")]
        region: String,
        #[arg(long)]
        r: f64,
        #[arg(long, default_value_t = 1.0)]
        r_lo: f64,
    },
    /// Run every check and emit one JSON report per line.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Two-column data files per functional plus a gnuplot script.
    Plotdata {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        functionals: Option<Vec<String>>,
        /// Read series from an existing table CSV instead of recomputing.
        #[arg(long)]
        from_table: Option<PathBuf>,
    },
}

fn setup(c: &Common) -> Result<(Loaded, LabConfig), CliError> {
    if let Some(n) = c.threads {
        if n == 0 {
            return Err(CliError::Input("--threads must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Input(format!("--threads: {e}")))?;
    }
    let l = load(&c.scenario)?;
    let mut cfg = l.lab_config();
    apply_tolerances(
        &mut cfg,
        &Tolerances {
            slope: c.tol_slope,
            bound_cap: c.tol_bound_cap,
            slack: c.tol_slack,
            satisfaction: c.tol_satisfaction,
            exceptional_fraction: c.tol_exceptional,
            lambda_max: c.tol_lambda,
            epsilon_max: c.tol_epsilon,
            ratio_bound: c.tol_ratio,
            locator: c.tol_locator,
        },
    );
    if let Some(v) = c.tol_quad_abs {
        cfg.quad.abs_tol = v;
    }
    if let Some(v) = c.tol_quad_rel {
        cfg.quad.rel_tol = v;
    }
    cfg.quad
        .validate()
        .map_err(|e| CliError::Input(format!("quadrature settings: {e}")))?;
    Ok((l, cfg))
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Input(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(text.as_bytes())
                .and_then(|_| so.flush())
                .map_err(|e| CliError::Input(format!("cannot write output: {e}")))
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    match cli.command {
        Command::Table { common, functionals } => {
            let (l, cfg) = setup(&common)?;
            emit(common.out.as_deref(), &cmd_table(&l, &cfg, functionals.as_deref())?)?;
            Ok(EXIT_OK)
        }
        Command::Zeros {
            common,
            target,
            curve,
            region,
            r,
            r_lo,
        } => {
            let (l, cfg) = setup(&common)?;
            emit(common.out.as_deref(), &cmd_zeros(&l, &cfg, &target, curve.as_deref(), &region, r, r_lo)?)?;
            Ok(EXIT_OK)
        }
        Command::Verify { common } => {
            let (l, cfg) = setup(&common)?;
            let v = cmd_verify(&l, &cfg)?;
            emit(common.out.as_deref(), &v.reports)?;
            for line in &v.summary {
                eprintln!("{line}");
            }
            Ok(v.exit)
        }
        Command::Plotdata {
            common,
            functionals,
            from_table,
        } => {
            let dir = common
                .out
                .clone()
                .ok_or_else(|| CliError::Input("plotdata needs --out <directory>".into()))?;
            match from_table {
                Some(csv) => {
                    let text = std::fs::read_to_string(&csv)
                        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", csv.display())))?;
                    write_plotdata(&read_table_csv(&text)?, &dir)?;
                }
                None => {
                    let (l, cfg) = setup(&common)?;
                    cmd_plotdata(&l, &cfg, functionals.as_deref(), &dir)?;
                }
            }
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { EXIT_OK });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
