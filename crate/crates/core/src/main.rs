use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmaps::runner::config::PAPER_SCALE_N;
use qmaps::runner::{run_experiment, sweep, ExperimentConfig, FitOutcome, OutputRequest, RunOutput, SweepAxis};
use qmaps::selftest::run_selftest;
use qmaps::snapshot::{write_classical, write_grid_csv, write_wigner};
use qmaps::toymodel::{toy_entropy, toy_purity, ToyModelParams};
use qmaps::Error;

#[derive(Parser)]
#[command(name = "qmaps", version, about = "Entropy production in open quantum maps on the torus")]
struct Cli {
    /// Override the config dimension with N = 1594
    #[arg(long, global = true)]
    paper_scale: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its entropy series
    Run {
        config: PathBuf,
        /// Directory for series.csv and snapshots; series goes to stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Repeat an experiment along an alpha grid or a list of dimensions
    Sweep {
        config: PathBuf,
        /// alpha=start:stop:step, alpha=a,b,..., or n=64,128,256
        #[arg(long)]
        axis: String,
        /// CSV file; stdout if absent
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dump Wigner (and classical, if configured) grids every k steps
    Snapshot {
        config: PathBuf,
        #[arg(long)]
        every: usize,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Also write q,p,value CSV files next to the binary grids
        #[arg(long)]
        csv: bool,
    },
    /// Entropy of the analytic model
    Toy {
        #[arg(long)]
        alpha: f64,
        #[arg(long)]
        tmax: u32,
    },
    /// Check fast paths against brute-force oracles
    Selftest,
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config { .. } | Error::Domain(_) | Error::Unsupported(_) | Error::DimensionMismatch { .. } => 2,
        Error::Numerical(_) => 3,
        Error::Format(_) | Error::Io(_) => 1,
    }
}

fn load(path: &Path, paper_scale: bool) -> qmaps::Result<ExperimentConfig> {
    let mut config = ExperimentConfig::load(path)?;
    if paper_scale {
        config.n = PAPER_SCALE_N;
        config.validate()?;
    }
    Ok(config)
}

fn create(path: &Path) -> qmaps::Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn write_snapshots(run: &RunOutput, dir: &Path, csv: bool) -> qmaps::Result<()> {
    fs::create_dir_all(dir)?;
    for (t, w) in &run.wigner {
        write_wigner(&mut create(&dir.join(format!("wigner_t{t:05}.wgrd")))?, w)?;
        if csv {
            write_grid_csv(&mut create(&dir.join(format!("wigner_t{t:05}.csv")))?, w.side(), w.values())?;
        }
    }
    for (t, c) in &run.classical {
        write_classical(&mut create(&dir.join(format!("classical_t{t:05}.cgrd")))?, c)?;
        if csv {
            write_grid_csv(&mut create(&dir.join(format!("classical_t{t:05}.csv")))?, c.grid(), c.values())?;
        }
    }
    Ok(())
}

fn report_fit(fit: &Option<FitOutcome>) {
    match fit {
        Some(FitOutcome::Fit(f)) => eprintln!(
            "slope = {:.6} over t = {}..={}",
            f.slope, f.window.0, f.window.1
        ),
        Some(FitOutcome::NoLinearRegime) => eprintln!("slope: no linear regime"),
        None => {}
    }
}

fn execute(cli: Cli) -> qmaps::Result<bool> {
    match cli.command {
        Command::Run { config, out } => {
            let config = load(&config, cli.paper_scale)?;
            let run = run_experiment(&config)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    let mut f = create(&dir.join("series.csv"))?;
                    run.series.write_csv(&mut f)?;
                    f.flush()?;
                    write_snapshots(&run, &dir, false)?;
                }
                None => run.series.write_csv(&mut io::stdout().lock())?,
            }
            report_fit(&run.fit);
        }
        Command::Sweep { config, axis, out } => {
            let config = load(&config, cli.paper_scale)?;
            let axis: SweepAxis = axis.parse()?;
            let table = sweep(&config, &axis);
            match out {
                Some(path) => {
                    let mut f = create(&path)?;
                    table.write_csv(&mut f)?;
                    f.flush()?;
                }
                None => table.write_csv(&mut io::stdout().lock())?,
            }
            let failed = table.rows.iter().filter(|r| r.outcome.is_err()).count();
            if failed > 0 {
                eprintln!("{failed} of {} runs failed; see the error column", table.rows.len());
            }
        }
        Command::Snapshot { config, every, out, csv } => {
            let mut config = load(&config, cli.paper_scale)?;
            if every == 0 {
                return Err(Error::Config {
                    field: "every".into(),
                    message: "cadence must be positive".into(),
                });
            }
            config.outputs.retain(|o| !matches!(o, OutputRequest::WignerEvery(_)));
            config.outputs.push(OutputRequest::WignerEvery(every));
            let run = run_experiment(&config)?;
            write_snapshots(&run, &out, csv)?;
            eprintln!("wrote {} Wigner and {} classical grids to {}", run.wigner.len(), run.classical.len(), out.display());
        }
        Command::Toy { alpha, tmax } => {
            let mut stdout = io::stdout().lock();
            writeln!(stdout, "t,entropy,purity")?;
            for t in 0..=tmax {
                let p = ToyModelParams::new(alpha, t).map_err(|e| Error::Config {
                    field: "alpha".into(),
                    message: e.to_string(),
                })?;
                writeln!(stdout, "{t},{:.16e},{:.16e}", toy_entropy(&p), toy_purity(&p))?;
            }
        }
        Command::Selftest => {
            let mut all = true;
            for c in run_selftest()? {
                let status = if c.passed() { "PASS" } else { "FAIL" };
                println!("{status}  {}  (deviation {:.3e}, tolerance {:.1e})", c.name, c.deviation, c.tolerance);
                all &= c.passed();
            }
            return Ok(all);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
