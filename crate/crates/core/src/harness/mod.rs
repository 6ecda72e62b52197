//! Experiment drivers: simulation ensembles, the particle-versus-PDE
//! comparison, rate tables and validator sweeps.

pub mod config;
pub mod hydro;
pub mod manifest;
pub mod validate;

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use config::{default_ell, ExperimentConfig};
pub use hydro::{hydro_compare, simulate, write_simulation, ConvergenceReport, Ensemble, LevelReport, SimulateParams};
pub use manifest::{git_describe, Manifest};
pub use validate::{validate_all, Mutation, ValidateOptions, ValidationReport};

use crate::error::Result;
use crate::exactgen::{check_stationarity, test_suite, ProductMeasure};
use crate::kernels::{GapTable, RateKernel};

/// Exponents of the rate-table figure.
pub const FIGURE_MS: [f64; 8] = [0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0];

/// Gap table of size `size` for each `m`.
pub fn rate_tables(ms: &[f64], ell: usize, size: usize) -> Result<Vec<GapTable>> {
    ms.iter()
        .map(|&m| Ok(RateKernel::new(m, ell, ell.max(4))?.build_gap_table(size)))
        .collect()
}

/// File name of the table for `m`, e.g. `rates_m1.25.csv`.
pub fn rate_table_name(m: f64) -> String {
    format!("rates_m{m}.csv")
}

/// Writes one CSV per `m` into `dir`.
pub fn write_rate_tables(dir: &Path, ms: &[f64], ell: usize, size: usize) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    rate_tables(ms, ell, size)?
        .iter()
        .map(|t| {
            let path = dir.join(rate_table_name(t.m));
            std::fs::write(&path, t.to_csv())?;
            Ok(path)
        })
        .collect()
}

/// The eight tables of [`FIGURE_MS`] at `ell`, on the 40 x 40 class grid.
pub fn figure1_export(dir: &Path, ell: usize) -> Result<Vec<PathBuf>> {
    write_rate_tables(dir, &FIGURE_MS, ell, 40)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    pub n: usize,
    pub m: f64,
    pub ell: usize,
    pub rho: f64,
    pub seed: u64,
    pub functions: usize,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Stationarity residuals of `nu_rho` on the torus of size `n` against
/// `functions` random test functions plus all two-site indicators.
pub fn invariance_report(n: usize, m: f64, ell: usize, rho: f64, seed: u64, functions: usize) -> Result<InvarianceReport> {
    let kern = RateKernel::new(m, ell, n)?;
    let nu = ProductMeasure::constant(rho, n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let suite = test_suite(n, functions, &mut rng);
    let rep = check_stationarity(&nu, &kern, &suite);
    let tolerance = validate::STATIONARITY_TOLERANCE;
    Ok(InvarianceReport {
        n,
        m,
        ell,
        rho,
        seed,
        functions: suite.len(),
        pass: rep.max_residual <= tolerance,
        residuals: rep.residuals,
        max_residual: rep.max_residual,
        tolerance,
    })
}
