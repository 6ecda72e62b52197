//! Explicit conservative solver for `d_t rho = d_uu phi(rho)` on the periodic
//! unit interval, with `phi(rho) = rho^m` or its truncated binomial series.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::genbinom::gen_binom;
use crate::profile::Profile;

/// Stability factor: `dt <= CFL / (M^2 max D)`.
pub const CFL: f64 = 0.4;

/// Lower bound imposed on densities when `m < 1`.
pub const DEFAULT_FLOOR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// `phi(rho) = rho^m`.
    Exact,
    /// `phi(rho) = sum_{k=0}^{ell} binom(m,k) (-1)^k (1-rho)^k`.
    Truncated(usize),
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.split_once(':') {
            None if s == "exact" => Ok(Mode::Exact),
            Some(("truncated", ell)) => {
                let ell: usize = ell
                    .parse()
                    .map_err(|_| Error::InvalidConfig(format!("bad truncation in {s:?}")))?;
                if ell < 2 {
                    return Err(Error::InvalidTruncation(ell));
                }
                Ok(Mode::Truncated(ell))
            }
            _ => Err(Error::InvalidConfig(format!(
                "mode must be exact or truncated:ELL, got {s:?}"
            ))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::Exact => f.write_str("exact"),
            Mode::Truncated(ell) => write!(f, "truncated:{ell}"),
        }
    }
}

/// `phi` and `D = phi'` for a given exponent and mode.
#[derive(Debug, Clone, PartialEq)]
pub struct Nonlinearity {
    m: f64,
    // coefficients of phi as a polynomial in 1 - rho, truncated mode only
    coeffs: Option<Vec<f64>>,
}

impl Nonlinearity {
    pub fn new(m: f64, mode: Mode) -> Self {
        let coeffs = match mode {
            Mode::Exact => None,
            Mode::Truncated(ell) => Some(
                (0..=ell)
                    .map(|k| {
                        let b = gen_binom(m, k);
                        if k % 2 == 0 {
                            b
                        } else {
                            -b
                        }
                    })
                    .collect(),
            ),
        };
        Self { m, coeffs }
    }

    pub fn phi(&self, rho: f64) -> f64 {
        match &self.coeffs {
            None => rho.powf(self.m),
            Some(c) => {
                let q = 1.0 - rho;
                c.iter().rev().fold(0.0, |acc, &ck| acc * q + ck)
            }
        }
    }

    pub fn diffusion(&self, rho: f64) -> f64 {
        match &self.coeffs {
            None => {
                if self.m == 1.0 {
                    1.0
                } else {
                    self.m * rho.powf(self.m - 1.0)
                }
            }
            Some(c) => {
                // -d/dq sum_k c_k q^k
                let q = 1.0 - rho;
                let mut acc = 0.0;
                for (k, &ck) in c.iter().enumerate().skip(1).rev() {
                    acc = acc * q + k as f64 * ck;
                }
                -acc
            }
        }
    }
}

/// Cell densities `rho_i` at `u_i = i / M`.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeGrid {
    cells: Vec<f64>,
    m: f64,
    mode: Mode,
    t: f64,
    floor: Option<f64>,
    nonlinearity: Nonlinearity,
    phi: Vec<f64>,
}

impl PdeGrid {
    /// Grid with the default floor [`DEFAULT_FLOOR`] when `m < 1`.
    pub fn new(cells: Vec<f64>, m: f64, mode: Mode) -> Result<Self> {
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidExponent(m));
        }
        if cells.len() < 3 {
            return Err(Error::InvalidConfig(format!("grid of {} cells", cells.len())));
        }
        if let Some(v) = cells.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidProfile(format!("density {v} outside [0, 1]")));
        }
        let floor = (m < 1.0).then_some(DEFAULT_FLOOR);
        let nonlinearity = Nonlinearity::new(m, mode);
        let grid = Self {
            phi: vec![0.0; cells.len()],
            cells,
            m,
            mode,
            t: 0.0,
            floor,
            nonlinearity,
        };
        grid.check_floor()?;
        Ok(grid)
    }

    pub fn from_profile(profile: &Profile, m: f64, mode: Mode, cells: usize) -> Result<Self> {
        profile.check_range()?;
        Self::new(profile.grid(cells), m, mode)
    }

    pub fn with_floor(mut self, floor: Option<f64>) -> Result<Self> {
        self.floor = floor;
        self.check_floor()?;
        Ok(self)
    }

    fn check_floor(&self) -> Result<()> {
        if let Some(floor) = self.floor {
            if let Some((cell, &value)) = self.cells.iter().enumerate().find(|(_, &v)| v < floor) {
                return Err(Error::FloorBreach { cell, value, floor });
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> &[f64] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        &self.nonlinearity
    }

    /// `sum_i rho_i / M`.
    pub fn mass(&self) -> f64 {
        self.cells.iter().sum::<f64>() / self.cells.len() as f64
    }

    pub fn max_diffusion(&self) -> f64 {
        self.cells
            .iter()
            .map(|&r| self.nonlinearity.diffusion(r))
            .fold(0.0, f64::max)
    }

    /// Largest stable time step.
    pub fn cfl_bound(&self) -> f64 {
        let m2 = (self.cells.len() * self.cells.len()) as f64;
        let d = self.max_diffusion();
        if d > 0.0 {
            CFL / (m2 * d)
        } else {
            f64::INFINITY
        }
    }

    /// Linear periodic interpolation at `u`.
    pub fn interpolate(&self, u: f64) -> f64 {
        interpolate(&self.cells, u)
    }
}

/// Linear interpolation of grid values at `i / len`, periodic in `u`.
pub fn interpolate(values: &[f64], u: f64) -> f64 {
    let len = values.len();
    let s = u.rem_euclid(1.0) * len as f64;
    let i = (s.floor() as usize).min(len - 1);
    let w = s - i as f64;
    (1.0 - w) * values[i] + w * values[(i + 1) % len]
}

/// One explicit step `rho_i += dt M^2 (phi_{i+1} - 2 phi_i + phi_{i-1})`,
/// written as a difference of fluxes so the mass telescopes.
pub fn step_pde(grid: &mut PdeGrid, dt: f64) -> Result<()> {
    let bound = grid.cfl_bound();
    if dt > bound * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, bound });
    }
    let len = grid.cells.len();
    let lambda = dt * (len * len) as f64;
    for (p, &r) in grid.phi.iter_mut().zip(&grid.cells) {
        *p = grid.nonlinearity.phi(r);
    }
    let phi = &grid.phi;
    let mut flux_left = phi[0] - phi[len - 1];
    for i in 0..len {
        let next = if i + 1 == len { 0 } else { i + 1 };
        let flux_right = phi[next] - phi[i];
        grid.cells[i] += lambda * (flux_right - flux_left);
        flux_left = flux_right;
    }
    grid.t += dt;
    grid.check_floor()
}

/// States recorded at requested times.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub m: f64,
    pub mode: Mode,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub steps: u64,
}

impl Trajectory {
    pub fn last(&self) -> &[f64] {
        self.states.last().expect("non-empty trajectory")
    }

    /// CSV with header `t,u,rho`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,u,rho\n");
        for (t, s) in self.times.iter().zip(&self.states) {
            let len = s.len() as f64;
            for (i, r) in s.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", t, i as f64 / len, r));
            }
        }
        out
    }
}

/// Evolves `grid` with the largest stable steps, landing exactly on each of
/// the ascending `times`. The initial state is recorded at the grid's time.
pub fn solve(mut grid: PdeGrid, times: &[f64]) -> Result<Trajectory> {
    if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < grid.t) {
        return Err(Error::InvalidConfig("output times must be ascending".into()));
    }
    let mut traj = Trajectory {
        m: grid.m,
        mode: grid.mode,
        times: vec![grid.t],
        states: vec![grid.cells.clone()],
        steps: 0,
    };
    for &target in times {
        while grid.t < target {
            let remaining = target - grid.t;
            let dt = grid.cfl_bound().min(remaining);
            step_pde(&mut grid, dt)?;
            traj.steps += 1;
            if remaining - dt <= 1e-15 * target.max(1.0) {
                grid.t = target;
            }
        }
        if target > *traj.times.last().unwrap() {
            traj.times.push(target);
            traj.states.push(grid.cells.clone());
        }
    }
    Ok(traj)
}

/// `n` equally spaced times in `(0, t_final]`.
pub fn uniform_times(t_final: f64, n: usize) -> Vec<f64> {
    (1..=n).map(|i| t_final * i as f64 / n as f64).collect()
}

/// Space-time test function `G(t, u)` with the derivatives the weak form needs.
pub trait TestFunction {
    fn value(&self, t: f64, u: f64) -> f64;
    fn dt(&self, t: f64, u: f64) -> f64;
    fn duu(&self, t: f64, u: f64) -> f64;
}

/// `G = exp(-rate t) cos(2 pi k u + shift)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTest {
    pub k: u32,
    pub rate: f64,
    pub shift: f64,
}

impl TrigTest {
    pub fn cos(k: u32) -> Self {
        Self {
            k,
            rate: 0.0,
            shift: 0.0,
        }
    }
}

impl TestFunction for TrigTest {
    fn value(&self, t: f64, u: f64) -> f64 {
        let w = std::f64::consts::TAU * self.k as f64;
        (-self.rate * t).exp() * (w * u + self.shift).cos()
    }

    fn dt(&self, t: f64, u: f64) -> f64 {
        -self.rate * self.value(t, u)
    }

    fn duu(&self, t: f64, u: f64) -> f64 {
        let w = std::f64::consts::TAU * self.k as f64;
        -w * w * self.value(t, u)
    }
}

/// `G = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitFunction;

impl TestFunction for UnitFunction {
    fn value(&self, _: f64, _: f64) -> f64 {
        1.0
    }
    fn dt(&self, _: f64, _: f64) -> f64 {
        0.0
    }
    fn duu(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}

fn pairing(values: &[f64], f: impl Fn(f64) -> f64) -> f64 {
    let len = values.len() as f64;
    values
        .iter()
        .enumerate()
        .map(|(i, v)| v * f(i as f64 / len))
        .sum::<f64>()
        / len
}

/// `<rho_t, G_t> - <rho_0, G_0> - int_0^t (<rho_s, d_s G_s> + <phi(rho_s), d_uu G_s>) ds`
/// up to the recorded state at index `upto`, with the time integral by the
/// trapezoid rule over the recorded states and `phi` that of the
/// trajectory's mode.
pub fn weak_residual(traj: &Trajectory, g: &dyn TestFunction, upto: usize) -> f64 {
    let nl = Nonlinearity::new(traj.m, traj.mode);
    let integrand = |j: usize| {
        let t = traj.times[j];
        let s = &traj.states[j];
        let phi: Vec<f64> = s.iter().map(|&r| nl.phi(r)).collect();
        pairing(s, |u| g.dt(t, u)) + pairing(&phi, |u| g.duu(t, u))
    };
    let mut integral = 0.0;
    let mut prev = integrand(0);
    for j in 1..=upto {
        let cur = integrand(j);
        integral += 0.5 * (traj.times[j] - traj.times[j - 1]) * (prev + cur);
        prev = cur;
    }
    let t = traj.times[upto];
    pairing(&traj.states[upto], |u| g.value(t, u))
        - pairing(&traj.states[0], |u| g.value(traj.times[0], u))
        - integral
}

/// `max |rho(u) - rho(v)| / |u - v|^alpha` over grid pairs, periodic distance.
pub fn holder_quotient(values: &[f64], alpha: f64) -> f64 {
    let len = values.len();
    let mut best = 0.0f64;
    for i in 0..len {
        for j in i + 1..len {
            let d = (j - i).min(len - (j - i)) as f64 / len as f64;
            best = best.max((values[i] - values[j]).abs() / d.powf(alpha));
        }
    }
    best
}

/// Discrete `H^1` seminorm `(sum_i M (v_{i+1} - v_i)^2)^(1/2)`.
pub fn h1_seminorm(values: &[f64]) -> f64 {
    let len = values.len();
    let s: f64 = (0..len)
        .map(|i| {
            let d = values[(i + 1) % len] - values[i];
            d * d
        })
        .sum();
    (s * len as f64).sqrt()
}

/// Regularity indicators of a state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub mass: f64,
    pub min: f64,
    pub max: f64,
    pub holder_half: f64,
    pub h1_rho: f64,
    pub h1_phi: f64,
}

pub fn diagnostics(values: &[f64], m: f64, mode: Mode) -> Diagnostics {
    let nl = Nonlinearity::new(m, mode);
    let phi: Vec<f64> = values.iter().map(|&r| nl.phi(r)).collect();
    Diagnostics {
        mass: values.iter().sum::<f64>() / values.len() as f64,
        min: values.iter().cloned().fold(f64::INFINITY, f64::min),
        max: values.iter().cloned().fold(f64::NEG_INFINITY, f64::max),
        holder_half: holder_quotient(values, 0.5),
        h1_rho: h1_seminorm(values),
        h1_phi: h1_seminorm(&phi),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::genbinom::{truncated_diffusion, truncated_potential};

    fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn modes_parse() {
        assert_eq!("exact".parse::<Mode>().unwrap(), Mode::Exact);
        assert_eq!("truncated:40".parse::<Mode>().unwrap(), Mode::Truncated(40));
        assert_eq!("truncated:1".parse::<Mode>(), Err(Error::InvalidTruncation(1)));
        assert!("implicit".parse::<Mode>().is_err());
        assert_eq!(Mode::Truncated(7).to_string(), "truncated:7");
    }

    #[test]
    fn nonlinearity_matches_series() {
        for &m in &[0.5, 1.5] {
            let nl = Nonlinearity::new(m, Mode::Truncated(12));
            for &r in &[0.1, 0.5, 0.9] {
                assert!((nl.phi(r) - truncated_potential(m, 12, r)).abs() < 1e-13);
                assert!((nl.diffusion(r) - truncated_diffusion(m, 12, r)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn constant_profile_is_fixed() {
        let g = PdeGrid::new(vec![0.3; 64], 1.5, Mode::Exact).unwrap();
        let traj = solve(g, &[0.01]).unwrap();
        assert!(traj.last().iter().all(|&r| r == 0.3));
    }

    #[test]
    fn rejects_unstable_steps_and_floor_breaches() {
        let mut g = PdeGrid::new(vec![0.5; 16], 1.0, Mode::Exact).unwrap();
        let bound = g.cfl_bound();
        assert!(matches!(step_pde(&mut g, 2.0 * bound), Err(Error::CflViolation { .. })));
        let cells: Vec<f64> = (0..16).map(|i| if i == 3 { 0.01 } else { 0.5 }).collect();
        assert_eq!(
            PdeGrid::new(cells, 0.5, Mode::Exact).err(),
            Some(Error::FloorBreach {
                cell: 3,
                value: 0.01,
                floor: DEFAULT_FLOOR
            })
        );
    }

    #[test]
    fn heat_equation_mode_decay() {
        let p = Profile::Cosine {
            mean: 0.5,
            amplitude: 0.1,
        };
        let g = PdeGrid::from_profile(&p, 1.0, Mode::Exact, 128).unwrap();
        let traj = solve(g, &[0.05]).unwrap();
        let s = traj.last();
        let amp = 2.0 * pairing(s, |u| (std::f64::consts::TAU * u).cos());
        let exact = 0.1 * (-4.0 * std::f64::consts::PI.powi(2) * 0.05).exp();
        assert!((amp - exact).abs() / exact < 1e-3, "{amp} vs {exact}");
    }

    #[test]
    fn maximum_principle_in_fast_regime() {
        let g = PdeGrid::from_profile(&Profile::default(), 0.5, Mode::Exact, 128).unwrap();
        let traj = solve(g, &uniform_times(0.02, 4)).unwrap();
        for s in &traj.states {
            assert!(s.iter().all(|&r| (0.2 - 1e-12..=0.8 + 1e-12).contains(&r)));
        }
    }

    #[test]
    fn weak_residual_behaviour() {
        let g = PdeGrid::from_profile(&Profile::default(), 1.5, Mode::Exact, 64).unwrap();
        let traj = solve(g, &uniform_times(0.02, 200)).unwrap();
        let last = traj.times.len() - 1;
        assert!(weak_residual(&traj, &UnitFunction, last).abs() < 1e-12);
        let r = weak_residual(&traj, &TrigTest::cos(1), last).abs();
        assert!(r < 1e-4, "{r}");

        let mut corrupted = traj.clone();
        for s in corrupted.states.iter_mut().skip(1) {
            for v in s.iter_mut() {
                *v *= 1.01;
            }
        }
        let bad = weak_residual(&corrupted, &UnitFunction, last).abs();
        assert!(bad > 1e-3, "{bad}");
    }

    #[test]
    fn truncated_mode_approaches_exact() {
        let g = |mode| PdeGrid::from_profile(&Profile::default(), 1.5, mode, 64).unwrap();
        let exact = solve(g(Mode::Exact), &[0.01]).unwrap();
        let mut prev = f64::INFINITY;
        for ell in [4, 8, 16, 32] {
            let tr = solve(g(Mode::Truncated(ell)), &[0.01]).unwrap();
            let d = sup_diff(exact.last(), tr.last());
            assert!(d < prev, "ell={ell} d={d}");
            prev = d;
        }
    }

    #[test]
    fn diagnostic_values() {
        let v: Vec<f64> = (0..8).map(|i| if i < 4 { 1.0 } else { 0.0 }).collect();
        assert!((h1_seminorm(&v) - (2.0f64 * 8.0).sqrt()).abs() < 1e-12);
        assert!((holder_quotient(&v, 0.5) - 1.0 / (0.125f64).sqrt()).abs() < 1e-12);
        assert_eq!(interpolate(&[0.0, 1.0], 0.25), 0.5);
        assert_eq!(interpolate(&[0.0, 1.0], 0.75), 0.5);
    }
}
