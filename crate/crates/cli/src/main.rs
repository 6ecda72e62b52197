use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use binex_core::harness::{
    self, hydro_compare, invariance_report, simulate, validate_all, write_simulation,
    ExperimentConfig, Manifest, Mutation, SimulateParams, ValidateOptions,
};
use binex_core::pde::{solve, uniform_times, Mode, PdeGrid};
use binex_core::{Error, Profile, Result};

#[derive(Parser)]
#[command(name = "binex", version, about = "Interpolating exclusion process toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate replicas and write box-averaged densities.
    Simulate(SimulateArgs),
    /// Solve the porous-medium / fast-diffusion equation.
    Pde(PdeArgs),
    /// Write the constraint on gap classes, one CSV per exponent.
    RatesTable(RatesArgs),
    /// Check invariance of a Bernoulli product measure by enumeration.
    CheckInvariance(InvarianceArgs),
    /// Compare particle densities with the PDE across lattice sizes.
    HydroCompare(HydroArgs),
    /// Run every validator.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    n: usize,
    #[arg(long)]
    m: f64,
    /// Truncation order; max(2, ceil(log2 n)) when omitted.
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long)]
    t_final: f64,
    /// Number of equally spaced snapshots in (0, t_final].
    #[arg(long, default_value_t = 10)]
    samples: usize,
    #[arg(long, default_value_t = 1.0 / 32.0)]
    eps: f64,
    /// cosine, cosine:MEAN:AMP, constant:RHO, or a file of values.
    #[arg(long, default_value = "cosine")]
    profile: String,
    #[arg(long, default_value_t = 1)]
    replicas: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PdeArgs {
    #[arg(long)]
    m: f64,
    /// exact or truncated:ELL
    #[arg(long, default_value = "exact")]
    mode: String,
    #[arg(long, default_value = "cosine")]
    profile: String,
    #[arg(long)]
    t_final: f64,
    #[arg(long, default_value_t = 512)]
    grid: usize,
    #[arg(long, default_value_t = 10)]
    samples: usize,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    /// Exponents; the eight values 0.25, 0.5, ..., 2 when omitted.
    #[arg(long, value_delimiter = ',')]
    m: Vec<f64>,
    #[arg(long, default_value_t = 40)]
    ell: usize,
    /// Classes x0 in 1..=size, x1 in 2..=size+1.
    #[arg(long, default_value_t = 40)]
    size: usize,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InvarianceArgs {
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    m: f64,
    #[arg(long)]
    ell: usize,
    #[arg(long)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Random polynomial test functions, on top of all two-site indicators.
    #[arg(long, default_value_t = 20)]
    functions: usize,
}

#[derive(Args)]
struct HydroArgs {
    /// TOML experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    id: Option<String>,
    #[arg(long)]
    m: Option<f64>,
    #[arg(long)]
    ell: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    ns: Option<Vec<usize>>,
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, value_delimiter = ',')]
    times: Option<Vec<f64>>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    replicas: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    pde_grid: Option<usize>,
    #[arg(long)]
    budget_secs: Option<f64>,
    #[arg(long)]
    threshold: Option<f64>,
    /// Report file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Inject a defect: binom-sign-flip or edge-defect.
    #[arg(long)]
    mutation: Option<Mutation>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(value: &impl Serialize, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    match out {
        Some(path) => {
            if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)?;
            }
            std::fs::write(path, text + "\n")?;
        }
        None => println!("{text}"),
    }
    Ok(())
}

fn run_simulate(a: SimulateArgs) -> Result<bool> {
    let p = SimulateParams {
        n: a.n,
        m: a.m,
        ell: a.ell,
        t_final: a.t_final,
        samples: a.samples,
        eps: a.eps,
        profile: a.profile,
        replicas: a.replicas,
        seed: a.seed,
    };
    let outputs = simulate(&p)?;
    for path in write_simulation(&a.out, &p, &outputs)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(true)
}

fn run_pde(a: PdeArgs) -> Result<bool> {
    let mode: Mode = a.mode.parse()?;
    let profile = Profile::parse(&a.profile)?;
    let grid = PdeGrid::from_profile(&profile, a.m, mode, a.grid)?;
    let traj = solve(grid, &uniform_times(a.t_final, a.samples))?;
    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(&a.out, traj.to_csv())?;
    #[derive(Serialize)]
    struct Params<'a> {
        m: f64,
        mode: String,
        profile: &'a Profile,
        t_final: f64,
        grid: usize,
        samples: usize,
        steps: u64,
    }
    let manifest = Manifest::new(
        "pde",
        0,
        Params {
            m: a.m,
            mode: mode.to_string(),
            profile: &profile,
            t_final: a.t_final,
            grid: a.grid,
            samples: a.samples,
            steps: traj.steps,
        },
    );
    manifest.write(&a.out.with_extension("manifest.json"))?;
    eprintln!("wrote {}", a.out.display());
    Ok(true)
}

fn run_rates(a: RatesArgs) -> Result<bool> {
    let ms = if a.m.is_empty() { harness::FIGURE_MS.to_vec() } else { a.m };
    for path in harness::write_rate_tables(&a.out, &ms, a.ell, a.size)? {
        eprintln!("wrote {}", path.display());
    }
    Ok(true)
}

fn run_invariance(a: InvarianceArgs) -> Result<bool> {
    let report = invariance_report(a.n, a.m, a.ell, a.rho, a.seed, a.functions)?;
    emit(&report, None)?;
    Ok(report.pass)
}

fn run_hydro(a: HydroArgs) -> Result<bool> {
    let mut c = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig {
            id: "hydro".into(),
            m: a.m.ok_or_else(|| Error::InvalidConfig("--m or --config is required".into()))?,
            ell: None,
            ns: vec![256, 512, 1024],
            profile: "cosine:0.5:0.3".into(),
            times: vec![0.05],
            eps: 1.0 / 32.0,
            replicas: 20,
            seed: 0,
            pde_grid: 512,
            budget_secs: None,
            threshold: None,
            out_dir: None,
        },
    };
    if let Some(v) = a.id {
        c.id = v;
    }
    if let Some(v) = a.m {
        c.m = v;
    }
    if a.ell.is_some() {
        c.ell = a.ell;
    }
    if let Some(v) = a.ns {
        c.ns = v;
    }
    if let Some(v) = a.profile {
        c.profile = v;
    }
    if let Some(v) = a.times {
        c.times = v;
    }
    if let Some(v) = a.eps {
        c.eps = v;
    }
    if let Some(v) = a.replicas {
        c.replicas = v;
    }
    if let Some(v) = a.seed {
        c.seed = v;
    }
    if let Some(v) = a.pde_grid {
        c.pde_grid = v;
    }
    if a.budget_secs.is_some() {
        c.budget_secs = a.budget_secs;
    }
    if a.threshold.is_some() {
        c.threshold = a.threshold;
    }
    let report = hydro_compare(&c)?;
    let out = a
        .out
        .or_else(|| c.out_dir.as_ref().map(|d| d.join(format!("{}.json", c.id))));
    emit(&report, out.as_deref())?;
    Ok(report.pass)
}

fn run_validate(a: ValidateArgs) -> Result<bool> {
    let report = validate_all(&ValidateOptions {
        seed: a.seed,
        samples: a.samples,
        mutation: a.mutation,
    })?;
    emit(&report, a.out.as_deref())?;
    Ok(report.pass)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(a) => run_simulate(a),
        Command::Pde(a) => run_pde(a),
        Command::RatesTable(a) => run_rates(a),
        Command::CheckInvariance(a) => run_invariance(a),
        Command::HydroCompare(a) => run_hydro(a),
        Command::Validate(a) => run_validate(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
