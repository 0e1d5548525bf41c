//! `icap`: run interface-capturing benchmarks and convergence studies.

mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use icap_core::cases::{build, CaseName, CaseSetup};
use icap_core::diagnostics::{error_norms, DiagnosticSeries};
use icap_core::study::convergence_study_with;
use icap_core::IcapError;

use config::RunConfig;

const EXIT_CONFIG: u8 = 2;
const EXIT_INSTABILITY: u8 = 3;

#[derive(Parser)]
#[command(name = "icap", version, about = "Finite-volume interface capturing benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one benchmark case and write fields and diagnostics.
    Run(RunArgs),
    /// Run a case on several grids and fit error orders.
    Convergence {
        #[command(flatten)]
        run: RunArgs,
        /// Comma-separated cell counts, e.g. 32,64,128.
        #[arg(long, value_delimiter = ',')]
        grids: Option<Vec<usize>>,
    },
    /// List the benchmark cases and their defaults.
    ListCases,
}

#[derive(Args)]
struct RunArgs {
    /// Configuration file with `[section]` headers and `key = value` lines.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    case: Option<String>,
    /// mlp, muscl:superbee, muscl:overbee, muscl:unlimited or muscl:zero.
    #[arg(long)]
    scheme: Option<String>,
    /// MLP corner bound in [1, 2].
    #[arg(long)]
    beta: Option<f64>,
    /// euler, rk2 or rk2-midpoint.
    #[arg(long)]
    integrator: Option<String>,
    #[arg(long)]
    cfl: Option<f64>,
    /// Cells per side.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long = "t-end")]
    t_end: Option<f64>,
    /// Sub-samples per direction for initial data projection.
    #[arg(long)]
    subsamples: Option<usize>,
    /// Comma-separated output times.
    #[arg(long, value_delimiter = ',')]
    snapshots: Option<Vec<f64>>,
    /// Output directory.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write `-log(z(1-z))` fields.
    #[arg(long)]
    log_smearing: bool,
    /// Use the case's artefact-demonstration scheme.
    #[arg(long)]
    artefact: bool,
}

impl RunArgs {
    fn load(&self) -> icap_core::Result<RunConfig> {
        let file = match &self.config {
            Some(p) => RunConfig::from_file(p)?,
            None => RunConfig::default(),
        };
        let flags = RunConfig {
            case: self.case.clone(),
            n: self.n,
            t_end: self.t_end,
            subsamples: self.subsamples,
            artefact: self.artefact.then_some(true),
            scheme: self.scheme.clone(),
            beta: self.beta,
            integrator: self.integrator.clone(),
            cfl: self.cfl,
            dir: self.output.clone(),
            snapshots: self.snapshots.clone(),
            log_smearing: self.log_smearing.then_some(true),
            grids: None,
        };
        Ok(file.overlay(flags))
    }
}

fn init_threads() {
    if let Some(n) = std::env::var("ICAP_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if n > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
}

fn exit_code(e: &IcapError) -> u8 {
    match e {
        IcapError::Instability { .. } => EXIT_INSTABILITY,
        IcapError::Io(_) | IcapError::Inadmissible { .. } | IcapError::Degenerate(_) => 1,
        _ => EXIT_CONFIG,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    init_threads();
    let result = match cli.command {
        Command::Run(args) => args.load().and_then(|cfg| run(&cfg)),
        Command::Convergence { run, grids } => run.load().and_then(|mut cfg| {
            if grids.is_some() {
                cfg.grids = grids;
            }
            convergence(&cfg)
        }),
        Command::ListCases => {
            list_cases();
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("icap: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn list_cases() {
    for case in CaseName::ALL {
        let d = case.defaults();
        println!(
            "{:<15} {} [scheme {}, {}, cfl {}, n {}, t_end {}]",
            case.as_str(),
            case.description(),
            d.scheme.label(),
            d.integrator.name(),
            d.cfl,
            d.n,
            d.t_end
        );
    }
}

fn output_dir(cfg: &RunConfig, setup: &CaseSetup) -> icap_core::Result<PathBuf> {
    let dir = cfg.dir.clone().unwrap_or_else(|| PathBuf::from(format!("out_{}", setup.case)));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn run(cfg: &RunConfig) -> icap_core::Result<()> {
    let setup = cfg.resolve()?;
    let problem = build(&setup)?;
    let dir = output_dir(cfg, &setup)?;
    let snapshots = cfg.snapshots.clone().unwrap_or_default();
    let log = cfg.log_smearing.unwrap_or(false);
    let started = Instant::now();

    let mut state = problem.initial.clone();
    let mut series = DiagnosticSeries::new();
    let mut written = Vec::new();
    let mut io_error = None;
    let result = problem.run_with(&mut state, &snapshots, |t, z, snap| {
        let (lo, hi) = if problem.is_one_dimensional() {
            z.row(0).iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
        } else {
            z.interior_min_max()
        };
        series.push(t, problem.smearing(z), lo, hi, problem.mass(z));
        if snap && io_error.is_none() {
            match output::write_snapshot(&dir, z, t, log) {
                Ok(mut files) => written.append(&mut files),
                Err(e) => io_error = Some(e),
            }
        }
    });
    if let Some(e) = io_error {
        return Err(e);
    }
    let wall = started.elapsed().as_secs_f64();

    let (status, steps, t_final) = match &result {
        Ok(s) => ("ok", s.steps, s.t_final),
        Err(IcapError::Instability { time, step }) => ("instability", *step, *time),
        Err(_) => return result.map(|_| ()),
    };
    let final_name = if status == "ok" { "field_final.csv" } else { "field_last_good.csv" };
    output::write_field(&dir.join(final_name), &state, t_final)?;
    written.push(final_name.to_string());
    if log && status == "ok" {
        let name = "log_smearing_final.csv";
        output::write_log_smearing(&dir.join(name), &state, t_final)?;
        written.push(name.to_string());
    }
    series.write_csv(std::io::BufWriter::new(std::fs::File::create(dir.join("diagnostics.csv"))?))?;
    written.push("diagnostics.csv".into());

    let errors = match (&problem.reference, status) {
        (Some(r), "ok") => Some(error_norms(&state, r)?),
        _ => None,
    };
    let run_info = output::RunInfo {
        setup: &setup,
        grid: &problem.grid,
        dt: problem.dt,
        snapshots: &snapshots,
        steps,
        t_final,
        wall_time: wall,
        status,
        errors,
        last: series.last(),
        files: &written,
    };
    output::write_manifest(&dir.join("manifest.json"), &run_info)?;
    println!(
        "{}: {} steps to t = {t_final}, status {status}, output in {}",
        setup.case,
        steps,
        dir.display()
    );
    result.map(|_| ())
}

fn convergence(cfg: &RunConfig) -> icap_core::Result<()> {
    let setup = cfg.resolve()?;
    let grids = cfg
        .grids
        .clone()
        .ok_or_else(|| IcapError::Config("convergence needs --grids or [convergence] grids".into()))?;
    if grids.len() < 2 {
        return Err(IcapError::Config("a convergence study needs at least two grids".into()));
    }
    // fail on a bad configuration before any grid is run
    build(&CaseSetup { n: grids[0], ..setup.clone() })?;
    let dir = output_dir(cfg, &setup)?;
    let table = convergence_study_with(&setup, &grids, |row| {
        eprintln!("n = {:>5}  L1 = {:.6e}  steps = {}", row.n, row.norms.l1, row.steps);
    })?;
    let path = dir.join("convergence.csv");
    table.write_csv(std::io::BufWriter::new(std::fs::File::create(&path)?))?;
    for (name, fit) in [("L1", table.l1), ("L2", table.l2), ("Linf", table.linf), ("Econs", table.econs)] {
        match fit.slope() {
            Some(s) => println!("order {name}: {s:.3}"),
            None => println!("order {name}: exact"),
        }
    }
    println!("wrote {}", path.display());
    Ok(())
}
