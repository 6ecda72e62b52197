//! Aggregated validator sweep with optional injected defects.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactgen::{
    all_configurations, check_irreducibility, check_stationarity, constraint_mean,
    expect_constraint, expect_interp_constraint, test_suite, EdgeDefect, ProductMeasure,
};
use crate::genbinom::{bin_bound, truncated_diffusion, BinomialTable};
use crate::kernels::validators::{
    check_bounds, check_m_mono, check_m_mono2, check_r_seq, check_up_speed, linear_grid,
};
use crate::kernels::{c_k, h_k, r_k, EdgeRates, HForm, RateKernel};
use crate::lattice::Configuration;

/// Exponents swept by the stationarity and bound checks.
pub const M_GRID: [f64; 6] = [0.25, 0.5, 0.75, 1.25, 1.5, 1.75];

/// Residual tolerance of the stationarity check.
pub const STATIONARITY_TOLERANCE: f64 = 1e-12;

/// Defect injected into the model before validating it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mutation {
    /// Binomial coefficients from `binom(m,k+1) = binom(m,k) (k-m)/(k+1)`.
    BinomSignFlip,
    /// Extra rate on the right jumps across edge 0, which breaks the
    /// exchange symmetry of the rates.
    EdgeDefect,
}

impl FromStr for Mutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binom-sign-flip" => Ok(Mutation::BinomSignFlip),
            "edge-defect" => Ok(Mutation::EdgeDefect),
            _ => Err(Error::InvalidConfig(format!("unknown mutation {s:?}"))),
        }
    }
}

impl fmt::Display for Mutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mutation::BinomSignFlip => "binom-sign-flip",
            Mutation::EdgeDefect => "edge-defect",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidateOptions {
    pub seed: u64,
    /// Random configurations per randomized check.
    pub samples: usize,
    pub mutation: Option<Mutation>,
}

impl Default for ValidateOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 1000,
            mutation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub violations: usize,
    /// Largest residual or first violation, as text.
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub options: ValidateOptions,
    pub checks: Vec<CheckOutcome>,
    pub pass: bool,
}

struct Tally {
    name: &'static str,
    cases: usize,
    violations: usize,
    detail: Option<String>,
    worst: f64,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            cases: 0,
            violations: 0,
            detail: None,
            worst: 0.0,
        }
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.detail.is_none() {
                self.detail = Some(what());
            }
        }
    }

    fn residual(&mut self, r: f64, tol: f64, what: impl FnOnce() -> String) {
        self.worst = self.worst.max(r);
        self.record(r <= tol, what);
    }

    fn finish(self) -> CheckOutcome {
        CheckOutcome {
            name: self.name.to_string(),
            passed: self.violations == 0,
            cases: self.cases,
            violations: self.violations,
            detail: self
                .detail
                .unwrap_or_else(|| format!("max residual {:e}", self.worst)),
        }
    }
}

fn kernel(m: f64, ell: usize, n: usize, mutation: Option<Mutation>) -> Result<RateKernel> {
    match mutation {
        Some(Mutation::BinomSignFlip) => {
            RateKernel::from_table(BinomialTable::with_flipped_recurrence(m, ell)?, n)
        }
        _ => RateKernel::new(m, ell, n),
    }
}

fn rates(kern: RateKernel, mutation: Option<Mutation>) -> Box<dyn EdgeRates> {
    match mutation {
        Some(Mutation::EdgeDefect) => Box::new(EdgeDefect {
            inner: kern,
            edge: 0,
            bias: 0.25,
        }),
        _ => Box::new(kern),
    }
}

/// Runs every validator over its default domain.
pub fn validate_all(opts: &ValidateOptions) -> Result<ValidationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mu = opts.mutation;
    let mut checks = Vec::new();

    // stationarity of product measures, N = 8
    let mut t = Tally::new("stationarity");
    let suite = test_suite(8, 20, &mut rng);
    for &m in &M_GRID {
        for ell in [2, 4, 8] {
            let r = rates(kernel(m, ell, 8, mu)?, mu);
            for rho in [0.3, 0.5, 0.7] {
                let rep = check_stationarity(&ProductMeasure::constant(rho, 8)?, r.as_ref(), &suite);
                t.residual(rep.max_residual, STATIONARITY_TOLERANCE, || {
                    format!("m={m} ell={ell} rho={rho}: residual {:e}", rep.max_residual)
                });
            }
        }
    }
    checks.push(t.finish());

    // irreducibility of every particle number, N = 8
    let mut t = Tally::new("irreducibility");
    for &m in &M_GRID {
        let r = rates(kernel(m, 4, 8, mu)?, mu);
        for k in 0..=8 {
            let ok = check_irreducibility(8, k, r.as_ref());
            t.record(ok, || format!("m={m} k={k}: not irreducible"));
        }
    }
    checks.push(t.finish());

    // gradient identity and agreement of the two forms of h
    let mut t = Tally::new("gradient");
    for k in 0..=3usize {
        let n = (2 * k + 3).max(4);
        for c in all_configurations(n) {
            let v = c.view(0);
            let lhs = c_k(&v, k) as i64 * (v.at(1) as i64 - v.at(0) as i64);
            let h0 = h_k(&v, k, HForm::Sum)?;
            let h1 = h_k(&v.shifted(1), k, HForm::Sum)?;
            let ok = lhs == h1 - h0 && h0 == h_k(&v, k, HForm::Telescoped)?;
            t.record(ok, || format!("k={k} eta={c}"));
        }
    }
    checks.push(t.finish());

    // interpolation endpoints m = 1 and m = 2
    let mut t = Tally::new("interpolation");
    let n = 64;
    let k1 = kernel(1.0, 10, n, mu)?;
    let k2 = kernel(2.0, 10, n, mu)?;
    for _ in 0..opts.samples {
        let c = Configuration::sample(&[rng.random::<f64>(); 64], &mut rng)?;
        let x = rng.random_range(0..n);
        let v = c.view(x as i64);
        let d1 = (k1.rate_raw(c.occupations(), x) - v.exclusion_factor() as f64).abs();
        let d2 = (k2.rate_raw(c.occupations(), x) - r_k(&v, 1) as f64).abs();
        t.residual(d1.max(d2), 1e-12, || format!("eta={c} x={x}: {d1:e}, {d2:e}"));
    }
    checks.push(t.finish());

    // non-negativity, exhaustive at N = 12
    let mut t = Tally::new("nonnegativity");
    for &m in M_GRID.iter().chain(&[1.0, 2.0]) {
        for ell in [4, 12] {
            let kern = kernel(m, ell, 12, mu)?;
            for c in all_configurations(12) {
                let worst = (0..12)
                    .map(|x| kern.constraint_raw(c.occupations(), x))
                    .fold(f64::INFINITY, f64::min);
                t.record(worst >= 0.0, || format!("m={m} ell={ell} eta={c}: {worst}"));
            }
        }
    }
    checks.push(t.finish());

    // rate bounds by regime
    let mut t = Tally::new("rate_bounds");
    for &m in M_GRID.iter().chain(&[1.0, 2.0]) {
        let kern = kernel(m, 10, 64, mu)?;
        for _ in 0..opts.samples / 4 {
            let c = Configuration::sample(&[rng.random::<f64>(); 64], &mut rng)?;
            let x = rng.random_range(0..64);
            let res = check_bounds(&c, x, &kern);
            t.record(res.is_ok(), || format!("m={m} eta={c}: {:?}", res.err()));
        }
    }
    checks.push(t.finish());

    // rate sums, monotonicity in k and in m
    let mut t = Tally::new("monotonicity");
    let grid = linear_grid(0.01, 2.0, 100);
    for _ in 0..opts.samples {
        let c = Configuration::sample(&[rng.random::<f64>(); 64], &mut rng)?;
        let v = c.view(0);
        let k = rng.random_range(1..=5);
        let res = check_up_speed(&c, k, rng.random_range(k..=20))
            .and_then(|_| check_r_seq(&v, 7))
            .and_then(|_| check_m_mono2(&v, &grid, 12))
            .and_then(|_| M_GRID.iter().try_for_each(|&m| check_m_mono(&v, m, 12)));
        t.record(res.is_ok(), || format!("eta={c}: {:?}", res.err()));
    }
    checks.push(t.finish());

    // expectations under product measures, N = 10
    let mut t = Tally::new("expectations");
    for rho in [0.2, 0.5, 0.8] {
        let nu = ProductMeasure::constant(rho, 10)?;
        for k in 0..=3 {
            let d = (expect_constraint(&nu, k) - constraint_mean(rho, k)).abs();
            t.residual(d, 1e-12, || format!("k={k} rho={rho}: {d:e}"));
        }
        for &m in &M_GRID {
            let kern = kernel(m, 4, 10, mu)?;
            let d = (expect_interp_constraint(&nu, &kern) - truncated_diffusion(m, 4, rho)).abs();
            t.residual(d, 1e-12, || format!("m={m} rho={rho}: {d:e}"));
        }
    }
    checks.push(t.finish());

    // gamma sandwich of the binomial coefficients
    let mut t = Tally::new("binomial_bounds");
    for &m in &M_GRID {
        let mut b = 1.0f64;
        for k in 1..=10_000usize {
            b *= (m - 1.0 - (k - 1) as f64) / k as f64;
            if k >= 2 {
                let (lo, hi) = bin_bound(m, k);
                let a = b.abs();
                t.record(lo <= a && a <= hi, || format!("m={m} k={k}: {lo} <= {a} <= {hi}"));
            }
        }
    }
    checks.push(t.finish());

    // rates above m = 2 turn negative
    let mut t = Tally::new("negative_rate_diagnostic");
    let n = 32;
    let diag = RateKernel::diagnostic(2.5, 8, n)?;
    let mut c = Configuration::empty(n)?;
    c.set(0, true);
    for i in 3..n as i64 - 1 {
        c.set(i, true);
    }
    let res = diag.interp_rate(&c, 0);
    t.record(matches!(res, Err(Error::NegativeRate { .. })), || {
        format!("expected a negative rate, got {res:?}")
    });
    checks.push(t.finish());

    let pass = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        options: opts.clone(),
        checks,
        pass,
    })
}
