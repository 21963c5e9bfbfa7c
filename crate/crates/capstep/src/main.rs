use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use capstep::bench::bench;
use capstep::error::{Error, Result};
use capstep::estimate::{estimate, write_com};
use capstep::run::{run_scenario, write_trajectory, RunOptions};
use capstep::scenario::{Mode, Scenario};
use capstep::sweep::{containment, default_base, parse_grid, sweep, write_cells};
use capstep::FileConfig;
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "capstep", version, about = "Capture-step gait controller simulator")]
struct Cli {
    /// Configuration file (TOML); built-in defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Open,
    Closed,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario, writing report.json and trajectory.csv.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
    },
    /// Sweep perturbations over phase-space grids in both modes.
    Sweep {
        /// e.g. "cy=-0.05:0.05:21,vy=-0.3:0.3:21|cx=-0.05:0.05:21,vx=-0.3:0.3:21"
        #[arg(long)]
        grid: String,
        /// Base walk to perturb; 8 s standing walk when omitted.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Output CSV file.
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = default_workers())]
        workers: usize,
    },
    /// Time the controller tick.
    Bench {
        #[arg(long, default_value_t = 100_000)]
        ticks: usize,
        /// Upper bound on the mean tick duration, ms.
        #[arg(long, default_value_t = 0.5)]
        max_mean_ms: f64,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the CoM from a recorded sensor log.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Support sign of the first frame.
        #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
        initial_support: f64,
    },
    /// Print the built-in configuration.
    DefaultConfig,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

fn execute(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    match cli.command {
        Command::Run { scenario, out, seed, mode } => {
            let mut sc = Scenario::load(&scenario)?;
            if let Some(s) = seed {
                sc.seed = s;
            }
            if let Some(m) = mode {
                sc.mode = match m {
                    ModeArg::Open => Mode::Open,
                    ModeArg::Closed => Mode::Closed,
                };
            }
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let r = run_scenario(&cfg, &sc, RunOptions { record: true, timing: true, diagnostics: false });
            let traj = out.join("trajectory.csv");
            write_trajectory(create(&traj)?, &r.rows).map_err(csv_err(&traj))?;
            write_json(&out.join("report.json"), &r.report)?;
            println!(
                "{}: {} after {} steps ({} mode)",
                r.report.scenario,
                r.report.outcome.as_str(),
                r.report.steps,
                sc.mode.as_str()
            );
        }
        Command::Sweep { grid, scenario, out, workers } => {
            let grids = parse_grid(&grid)?;
            let base = match scenario {
                Some(p) => Scenario::load(&p)?,
                None => default_base(),
            };
            let cells = sweep(&cfg, &base, &grids, workers);
            write_cells(create(&out)?, &cells).map_err(csv_err(&out))?;
            for g in &grids {
                let c = containment(cells.iter().filter(|c| c.plane == g.plane));
                println!(
                    "{}: {} cells, open {} recovered, closed {} recovered, contained {}",
                    g.plane.as_str(),
                    c.cells,
                    c.open,
                    c.closed,
                    c.contained
                );
            }
        }
        Command::Bench { ticks, max_mean_ms, out } => {
            let r = bench(&cfg, ticks.max(1000), max_mean_ms * 1e-3);
            println!(
                "ticks {} mean {:.6} ms max {:.6} ms p99 {:.6} ms",
                r.timing.ticks,
                r.timing.mean * 1e3,
                r.timing.max * 1e3,
                r.timing.p99 * 1e3
            );
            if let Some(p) = out {
                write_json(&p, &r)?;
            }
            if !r.passed {
                return Err(Error::BenchFailed { mean_ms: r.timing.mean * 1e3, limit_ms: max_mean_ms });
            }
        }
        Command::Estimate { input, out, initial_support } => {
            let f = File::open(&input).map_err(|e| Error::io(&input, e))?;
            let rows = estimate(&cfg, io::BufReader::new(f), initial_support, &input)?;
            write_com(create(&out)?, &rows).map_err(csv_err(&out))?;
        }
        Command::DefaultConfig => {
            io::stdout().write_all(cfg.to_toml().as_bytes()).map_err(|e| Error::io("stdout", e))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("capstep: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
