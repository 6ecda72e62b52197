//! Replica ensembles and their comparison with the PDE reference.

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{default_ell, ExperimentConfig};
use super::manifest::Manifest;
use crate::error::{Error, Result};
use crate::kernels::RateKernel;
use crate::kmc::{box_width, replica_rng, AuditSummary, RunOutput, SimState};
use crate::pde::{interpolate, solve, uniform_times, Mode, PdeGrid};
use crate::profile::Profile;

/// Parameters of the `simulate` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateParams {
    pub n: usize,
    pub m: f64,
    pub ell: Option<usize>,
    pub t_final: f64,
    pub samples: usize,
    pub eps: f64,
    pub profile: String,
    pub replicas: usize,
    pub seed: u64,
}

impl SimulateParams {
    pub fn ell(&self) -> usize {
        self.ell.unwrap_or_else(|| default_ell(self.n))
    }

    pub fn times(&self) -> Vec<f64> {
        uniform_times(self.t_final, self.samples)
    }
}

/// Independent trajectories from one initial profile; replica `r` uses
/// stream `stream_base + r` of the master seed.
#[derive(Debug, Clone)]
pub struct Ensemble<'a> {
    pub kernel: Arc<RateKernel>,
    pub profile: &'a Profile,
    pub times: &'a [f64],
    pub eps: f64,
    pub replicas: usize,
    pub seed: u64,
    pub stream_base: u64,
}

impl Ensemble<'_> {
    /// Runs the replicas in parallel; replicas not yet started when the
    /// `(start, budget)` deadline passes fail with `BudgetExceeded`.
    pub fn run(&self, deadline: Option<(Instant, f64)>) -> Result<Vec<RunOutput>> {
        (0..self.replicas)
            .into_par_iter()
            .map(|r| {
                if let Some((start, budget)) = deadline {
                    if start.elapsed().as_secs_f64() > budget {
                        return Err(Error::BudgetExceeded { budget_secs: budget });
                    }
                }
                let rng = replica_rng(self.seed, self.stream_base + r as u64);
                let mut state = SimState::init(self.profile, self.kernel.clone(), rng)?;
                state.run(self.times, self.eps)
            })
            .collect()
    }
}

pub fn simulate(p: &SimulateParams) -> Result<Vec<RunOutput>> {
    let kernel = Arc::new(RateKernel::new(p.m, p.ell(), p.n)?);
    let profile = Profile::parse(&p.profile)?;
    box_width(p.n, p.eps)?;
    Ensemble {
        kernel,
        profile: &profile,
        times: &p.times(),
        eps: p.eps,
        replicas: p.replicas,
        seed: p.seed,
        stream_base: 0,
    }
    .run(None)
}

/// Writes `replica_NNN.csv` per replica and `manifest.json` into `dir`.
pub fn write_simulation(dir: &Path, p: &SimulateParams, outputs: &[RunOutput]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut paths = Vec::new();
    for (r, out) in outputs.iter().enumerate() {
        let path = dir.join(format!("replica_{r:03}.csv"));
        std::fs::write(&path, out.to_csv())?;
        paths.push(path);
    }
    #[derive(Serialize)]
    struct Params<'a> {
        #[serde(flatten)]
        params: &'a SimulateParams,
        ell_resolved: usize,
        frozen_at: Vec<Option<f64>>,
        events: Vec<u64>,
    }
    let manifest = Manifest::new(
        "simulate",
        p.seed,
        Params {
            params: p,
            ell_resolved: p.ell(),
            frozen_at: outputs.iter().map(|o| o.frozen_at).collect(),
            events: outputs.iter().map(|o| o.events).collect(),
        },
    );
    let path = dir.join("manifest.json");
    manifest.write(&path)?;
    paths.push(path);
    Ok(paths)
}

/// `(1/N) sum_x |mean_r values_r[x] - reference[x]|` and its jackknife
/// standard error over replicas.
pub fn l1_with_error(replicas: &[&[f64]], reference: &[f64]) -> (f64, f64) {
    let r = replicas.len();
    let n = reference.len();
    let mut sum = vec![0.0; n];
    for v in replicas {
        for (s, x) in sum.iter_mut().zip(v.iter()) {
            *s += x;
        }
    }
    let l1 = |mean: &mut dyn Iterator<Item = f64>| {
        mean.zip(reference).map(|(a, b)| (a - b).abs()).sum::<f64>() / n as f64
    };
    let full = l1(&mut sum.iter().map(|s| s / r as f64));
    if r < 2 {
        return (full, 0.0);
    }
    let loo: Vec<f64> = replicas
        .iter()
        .map(|v| l1(&mut sum.iter().zip(v.iter()).map(|(s, x)| (s - x) / (r - 1) as f64)))
        .collect();
    let mean = loo.iter().sum::<f64>() / r as f64;
    let var = loo.iter().map(|x| (x - mean).powi(2)).sum::<f64>() * (r - 1) as f64 / r as f64;
    (full, var.sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub n: usize,
    pub ell: usize,
    pub box_width: usize,
    pub times: Vec<f64>,
    /// Mean L1 distance at each time.
    pub l1: Vec<f64>,
    pub se: Vec<f64>,
    pub events: u64,
    pub frozen_replicas: usize,
    pub audit: AuditSummary,
    pub pde_steps: u64,
    pub elapsed_secs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub git_describe: Option<String>,
    pub levels: Vec<LevelReport>,
    /// Distances non-increasing in `n` within the combined standard error.
    pub monotone: bool,
    /// Largest distance at the largest `n` below the threshold, if one is set.
    pub within_threshold: Option<bool>,
    pub pass: bool,
    pub elapsed_secs: f64,
}

/// Replica-averaged box densities against the truncated PDE with the same
/// truncation, at every `n` of the configuration.
pub fn hydro_compare(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let start = Instant::now();
    let deadline = config.budget_secs.map(|b| (start, b));
    let profile = config.parsed_profile()?;
    let mut levels = Vec::new();
    for &n in &config.ns {
        let level_start = Instant::now();
        let ell = config.ell_for(n);
        let kernel = Arc::new(RateKernel::new(config.m, ell, n)?);
        let outputs = Ensemble {
            kernel,
            profile: &profile,
            times: &config.times,
            eps: config.eps,
            replicas: config.replicas,
            seed: config.seed,
            stream_base: (n as u64) << 32,
        }
        .run(deadline)?;
        let grid = PdeGrid::from_profile(&profile, config.m, Mode::Truncated(ell), config.pde_grid)?;
        let traj = solve(grid, &config.times)?;
        let width = box_width(n, config.eps)?;

        let mut l1 = Vec::new();
        let mut se = Vec::new();
        for (j, &t) in config.times.iter().enumerate() {
            let state = traj
                .times
                .iter()
                .position(|&s| s == t)
                .map(|i| &traj.states[i])
                .expect("solver records every requested time");
            let first = &outputs[0].snapshots[j].density;
            let reference: Vec<f64> = (0..n).map(|x| interpolate(state, first.centre(x))).collect();
            let values: Vec<&[f64]> = outputs
                .iter()
                .map(|o| o.snapshots[j].density.values.as_slice())
                .collect();
            let (d, e) = l1_with_error(&values, &reference);
            l1.push(d);
            se.push(e);
        }
        let audit = outputs.iter().fold(AuditSummary::default(), |acc, o| AuditSummary {
            audits: acc.audits + o.audit.audits,
            max_rate_error: acc.max_rate_error.max(o.audit.max_rate_error),
            max_total_error: acc.max_total_error.max(o.audit.max_total_error),
        });
        levels.push(LevelReport {
            n,
            ell,
            box_width: width,
            times: config.times.clone(),
            l1,
            se,
            events: outputs.iter().map(|o| o.events).sum(),
            frozen_replicas: outputs.iter().filter(|o| o.frozen_at.is_some()).count(),
            audit,
            pde_steps: traj.steps,
            elapsed_secs: level_start.elapsed().as_secs_f64(),
        });
    }
    let monotone = levels.windows(2).all(|w| {
        (0..config.times.len()).all(|j| {
            let slack = (w[0].se[j].powi(2) + w[1].se[j].powi(2)).sqrt();
            w[1].l1[j] <= w[0].l1[j] + slack
        })
    });
    let within_threshold = config.threshold.map(|th| {
        levels
            .last()
            .map(|l| l.l1.iter().all(|&d| d <= th))
            .unwrap_or(false)
    });
    Ok(ConvergenceReport {
        config: config.clone(),
        git_describe: super::manifest::git_describe(),
        levels,
        monotone,
        within_threshold,
        pass: monotone && within_threshold.unwrap_or(true),
        elapsed_secs: start.elapsed().as_secs_f64(),
    })
}
