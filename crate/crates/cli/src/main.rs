use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use coag_core::generator::bitstring;
use coag_core::model::{ChainSpec, RateTriple};
use coag_core::simulator::{aggregate, run_replicas, Horizon, LatticeState};
use coag_core::spectrum::spectrum_report;
use coag_core::sweep::{
    default_impurity_grid, default_quench_grid, impurity_sweep, quench_sweep, rows_to_csv, Grid, QuenchRates, Sig12,
    SweepRow,
};
use coag_core::verify::{brute_force_comparison, run_verification, VerifyLevel, VerifyOptions};
use coag_core::{Error, Result};

/// Spectrum and spectral gap of two coupled coagulation/decoagulation chains.
#[derive(Debug, Parser)]
#[command(name = "coag", version)]
struct Cli {
    /// Chain specification (JSON).
    #[arg(long, global = true)]
    spec: Option<PathBuf>,
    /// Output directory; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    /// Sites per segment for the sweeps.
    #[arg(long, global = true, default_value_t = 60)]
    length: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One-particle energies, vacuum energy, parity and gap of one chain.
    Spectrum {
        /// Also write the labeled one-particle energies as CSV.
        #[arg(long)]
        one_particle: bool,
        /// Diagonalize the 2^N generator and compare.
        #[arg(long)]
        brute_force: bool,
        /// Assemble all 2^N eigenvalues.
        #[arg(long)]
        full: bool,
    },
    /// Gap against the impurity strength s, one curve per θ.
    GapImpurity {
        #[arg(long, default_value_t = 0.5)]
        p: f64,
        #[arg(long, default_value_t = 3.0)]
        q: f64,
        /// Angles θ; ignored when --spec is given.
        #[arg(long, default_value = "0.1,0.5,0.6,0.65")]
        theta: Grid,
        /// s values; default [−min(p,q), 3] with 200 points.
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Gap of the spatial quench against Δ2, one curve per Δ1.
    GapQuench {
        #[arg(long, default_value_t = 0.6)]
        p1: f64,
        #[arg(long, default_value_t = 6.0)]
        q1: f64,
        #[arg(long, default_value_t = 6.0)]
        p2: f64,
        #[arg(long, default_value_t = 0.2)]
        q2: f64,
        #[arg(long, default_value = "0.5,1,2")]
        delta1: Grid,
        /// Δ2 values; default [0.05, 3] with 200 points.
        #[arg(long)]
        grid: Option<Grid>,
    },
    /// Run every cross-check on one chain.
    Verify {
        #[arg(long, value_enum, default_value_t = Level::Full)]
        level: Level,
        /// Simulator events.
        #[arg(long, default_value = "1e6")]
        events: Horizon,
    },
    /// Gillespie simulation from a given configuration.
    Simulate {
        /// Event count ("1e6") or time horizon ("t=20").
        #[arg(long, default_value = "1e6")]
        events: Horizon,
        /// "full", "empty" or a bitstring such as 0110.
        #[arg(long, default_value = "full")]
        initial: String,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        /// Write the site-density profile instead of the configuration histogram.
        #[arg(long)]
        density: bool,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Level {
    Fast,
    Full,
}

struct Output {
    dir: Option<PathBuf>,
}

impl Output {
    fn emit(&self, name: &str, content: &str) -> Result<()> {
        match &self.dir {
            Some(dir) => {
                fs::create_dir_all(dir).map_err(|e| io_error(dir, e))?;
                let path = dir.join(name);
                fs::write(&path, content).map_err(|e| io_error(&path, e))
            }
            None => {
                println!("# {name}");
                print!("{content}");
                Ok(())
            }
        }
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Error {
    Error::Parse(format!("{}: {e}", path.display()))
}

fn load_spec(path: Option<&Path>) -> Result<ChainSpec> {
    let path = path.ok_or_else(|| Error::Parse("--spec is required for this command".into()))?;
    let text = fs::read_to_string(path).map_err(|e| io_error(path, e))?;
    ChainSpec::from_json(&text)
}

fn cmd_spectrum(cli: &Cli, out: &Output, one_particle: bool, brute_force: bool, full: bool) -> Result<()> {
    let spec = load_spec(cli.spec.as_deref())?;
    spec.ensure_valid()?;
    let mut report = spectrum_report(&spec, full)?;
    if brute_force {
        let brute = brute_force_comparison(&spec, report.full_spectrum.as_deref())?;
        let mut csv = String::from("re,im\n");
        for z in &brute.eigenvalues {
            csv.push_str(&format!("{},{}\n", Sig12(z.re), Sig12(z.im)));
        }
        report.checks.brute_force_distance = brute.distance;
        report.checks.brute_force_match = brute.matches();
        out.emit("brute_force.csv", &csv)?;
    }
    if one_particle {
        let mut csv = String::from("label,lambda\n");
        for l in report.one_particle.levels() {
            csv.push_str(&format!("{},{}\n", l.label, Sig12(l.lambda)));
        }
        out.emit("one_particle.csv", &csv)?;
    }
    if let Some(full) = &report.full_spectrum {
        let mut csv = String::from("eigenvalue\n");
        for x in full {
            csv.push_str(&format!("{}\n", Sig12(*x)));
        }
        out.emit("full_spectrum.csv", &csv)?;
    }
    out.emit("spectrum.json", &(serde_json::to_string_pretty(&report)? + "\n"))?;
    if report.checks.brute_force_match == Some(false) {
        return Err(Error::Consistency("assembled spectrum differs from the brute-force spectrum".into()));
    }
    Ok(())
}

fn log_failures(name: &str, rows: &[SweepRow]) {
    for r in rows {
        if let Err(e) = &r.outcome {
            eprintln!("skipped {name} = {}: {e}", Sig12(r.value));
        }
    }
}

fn cmd_gap_impurity(cli: &Cli, out: &Output, p: f64, q: f64, thetas: &Grid, grid: Option<&Grid>) -> Result<()> {
    let curves: Vec<(f64, RateTriple)> = match cli.spec.as_deref() {
        Some(path) => {
            let rates = *load_spec(Some(path))?.seg1();
            vec![(rates.theta(), rates)]
        }
        None => thetas.values().iter().map(|&t| Ok((t, RateTriple::from_theta(p, q, t)?))).collect::<Result<_>>()?,
    };
    for (theta, rates) in curves {
        let grid = grid.cloned().unwrap_or_else(|| default_impurity_grid(&rates));
        let rows = impurity_sweep(&rates, cli.length, &grid);
        log_failures("s", &rows);
        out.emit(&format!("gap_impurity_theta_{theta}.csv"), &rows_to_csv("s", &rows))?;
    }
    Ok(())
}

fn cmd_gap_quench(cli: &Cli, out: &Output, rates: QuenchRates, delta1: &Grid, grid: Option<&Grid>) -> Result<()> {
    let grid = grid.cloned().unwrap_or_else(default_quench_grid);
    for &d1 in delta1.values() {
        let rows = quench_sweep(&rates, cli.length, d1, &grid);
        log_failures("delta2", &rows);
        out.emit(&format!("gap_quench_delta1_{d1}.csv"), &rows_to_csv("delta2", &rows))?;
    }
    Ok(())
}

fn cmd_verify(cli: &Cli, out: &Output, level: Level, events: Horizon) -> Result<ExitCode> {
    let spec = load_spec(cli.spec.as_deref())?;
    let events = match events {
        Horizon::Events(n) => n,
        Horizon::Time(_) => return Err(Error::Parse("verify takes an event count".into())),
    };
    let level = match level {
        Level::Fast => VerifyLevel::Fast,
        Level::Full => VerifyLevel::Full,
    };
    let report = run_verification(&spec, VerifyOptions { level, seed: cli.seed, events });
    match &out.dir {
        Some(_) => out.emit("verify.json", &(serde_json::to_string_pretty(&report)? + "\n"))?,
        None => print!("{report}"),
    }
    let code = match report.failures().next() {
        None => 0,
        Some(c) if c.name == "validation" => 1,
        Some(_) => 2,
    };
    Ok(ExitCode::from(code))
}

fn parse_initial(s: &str, sites: usize) -> Result<LatticeState> {
    let state = match s {
        "full" => LatticeState::full(sites),
        "empty" => LatticeState::empty(sites),
        bits => LatticeState::from_bitstring(bits)?,
    };
    if state.sites() != sites {
        return Err(Error::Parse(format!("initial state has {} sites, spec has {sites}", state.sites())));
    }
    Ok(state)
}

fn cmd_simulate(cli: &Cli, out: &Output, horizon: Horizon, initial: &str, replicas: u64, density: bool) -> Result<()> {
    let spec = load_spec(cli.spec.as_deref())?;
    let n = spec.sites();
    let initial = parse_initial(initial, n)?;
    let runs = run_replicas(&spec, &initial, horizon, cli.seed, replicas.max(1))?;
    let (hist, dens) = aggregate(&runs);
    match hist {
        Some(h) if !density => {
            let mut csv = String::from("config,weight\n");
            for (config, w) in h.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", bitstring(config, n), Sig12(*w)));
            }
            out.emit("histogram.csv", &csv)
        }
        _ => {
            let mut csv = String::from("site,density\n");
            for (i, d) in dens.iter().enumerate() {
                csv.push_str(&format!("{},{}\n", i + 1, Sig12(*d)));
            }
            out.emit("density.csv", &csv)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<ExitCode> {
    let out = Output { dir: cli.out.clone() };
    match &cli.command {
        Command::Spectrum { one_particle, brute_force, full } => cmd_spectrum(cli, &out, *one_particle, *brute_force, *full)?,
        Command::GapImpurity { p, q, theta, grid } => cmd_gap_impurity(cli, &out, *p, *q, theta, grid.as_ref())?,
        Command::GapQuench { p1, q1, p2, q2, delta1, grid } => {
            let rates = QuenchRates { p1: *p1, q1: *q1, p2: *p2, q2: *q2 };
            cmd_gap_quench(cli, &out, rates, delta1, grid.as_ref())?
        }
        Command::Verify { level, events } => return cmd_verify(cli, &out, *level, *events),
        Command::Simulate { events, initial, replicas, density } => {
            cmd_simulate(cli, &out, *events, initial, *replicas, *density)?
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
