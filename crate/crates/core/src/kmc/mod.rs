//! Event-driven simulation of the exclusion dynamics accelerated by `N^2`.

pub mod empirical;
pub mod sampler;

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

pub use empirical::{box_width, EmpiricalMeasure};
pub use sampler::RateTree;

use crate::error::{Error, Result};
use crate::kernels::RateKernel;
use crate::lattice::Configuration;
use crate::profile::Profile;

/// Events between two full recomputations of the edge rates when auditing.
pub const DEFAULT_AUDIT_INTERVAL: u64 = 10_000;

/// Generator for replica `replica` of a run seeded with `seed`.
pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

/// Largest discrepancy seen by the rate audits.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditSummary {
    pub audits: u64,
    pub max_rate_error: f64,
    pub max_total_error: f64,
}

#[derive(Debug, Clone)]
pub struct SimState {
    cfg: Configuration,
    kernel: Arc<RateKernel>,
    // unscaled rates r_N(tau_x eta); the process runs at N^2 times these
    rates: RateTree,
    active: usize,
    scale: f64,
    t: f64,
    events: u64,
    rate_integral: f64,
    rng: ChaCha8Rng,
    audit_interval: Option<u64>,
    audit: AuditSummary,
}

impl SimState {
    /// Draws the initial configuration from the product measure with
    /// densities `profile(x / N)`.
    pub fn init(profile: &Profile, kernel: Arc<RateKernel>, mut rng: ChaCha8Rng) -> Result<Self> {
        profile.check_range()?;
        let cfg = Configuration::sample(&profile.grid(kernel.n()), &mut rng)?;
        Self::from_configuration(cfg, kernel, rng)
    }

    pub fn from_configuration(
        cfg: Configuration,
        kernel: Arc<RateKernel>,
        rng: ChaCha8Rng,
    ) -> Result<Self> {
        if cfg.n() != kernel.n() {
            return Err(Error::InvalidLatticeSize(cfg.n()));
        }
        let rates: Vec<f64> = (0..cfg.n())
            .map(|x| kernel.rate_raw(cfg.occupations(), x))
            .collect();
        if let Some((edge, &value)) = rates.iter().enumerate().find(|(_, &r)| r < 0.0) {
            return Err(Error::NegativeRate { edge, value });
        }
        let active = rates.iter().filter(|&&r| r > 0.0).count();
        let n = cfg.n() as f64;
        Ok(Self {
            cfg,
            kernel,
            rates: RateTree::new(rates),
            active,
            scale: n * n,
            t: 0.0,
            events: 0,
            rate_integral: 0.0,
            rng,
            audit_interval: cfg!(debug_assertions).then_some(DEFAULT_AUDIT_INTERVAL),
            audit: AuditSummary::default(),
        })
    }

    /// Full rate recomputation every `interval` events; `None` disables it.
    pub fn set_audit_interval(&mut self, interval: Option<u64>) {
        self.audit_interval = interval.filter(|&i| i > 0);
    }

    pub fn configuration(&self) -> &Configuration {
        &self.cfg
    }

    pub fn kernel(&self) -> &RateKernel {
        &self.kernel
    }

    /// Macroscopic time.
    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn events(&self) -> u64 {
        self.events
    }

    /// `N^2 r_N(tau_x eta)`.
    pub fn edge_rate(&self, x: usize) -> f64 {
        self.scale * self.rates.get(x)
    }

    /// Sum of the scaled edge rates.
    pub fn total_rate(&self) -> f64 {
        self.scale * self.rates.total()
    }

    /// Integral of the total rate along the trajectory so far.
    pub fn rate_integral(&self) -> f64 {
        self.rate_integral
    }

    pub fn is_frozen(&self) -> bool {
        self.active == 0
    }

    pub fn audit(&self) -> AuditSummary {
        self.audit
    }

    fn wait(&mut self) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        e / (self.scale * self.rates.total())
    }

    /// Samples and applies one event; returns the edge and the macroscopic
    /// waiting time.
    pub fn step(&mut self) -> Result<(usize, f64)> {
        if self.is_frozen() {
            return Err(Error::FrozenState { t: self.t });
        }
        let dt = self.wait();
        self.rate_integral += dt * self.total_rate();
        self.t += dt;
        let edge = self.fire();
        Ok((edge, dt))
    }

    fn fire(&mut self) -> usize {
        let edge = self
            .rates
            .sample(&mut self.rng)
            .expect("active edges have positive total rate");
        self.cfg.exchange_in_place(edge);
        self.refresh_around(edge);
        self.events += 1;
        if let Some(every) = self.audit_interval {
            if self.events.is_multiple_of(every) {
                self.run_audit();
            }
        }
        edge
    }

    fn refresh_around(&mut self, edge: usize) {
        let n = self.cfg.n();
        let radius = self.kernel.ell() + 1;
        if 2 * radius + 1 >= n {
            for x in 0..n {
                self.refresh(x);
            }
        } else {
            for d in 0..=2 * radius {
                self.refresh((edge + n + d - radius) % n);
            }
        }
    }

    fn refresh(&mut self, x: usize) {
        let new = self.kernel.rate_raw(self.cfg.occupations(), x);
        let old = self.rates.get(x);
        if (old > 0.0) != (new > 0.0) {
            if new > 0.0 {
                self.active += 1;
            } else {
                self.active -= 1;
            }
        }
        self.rates.set(x, new);
    }

    /// Largest difference between stored and recomputed rates, and between
    /// the tree total and the plain sum, both relative to `N^2` units.
    pub fn refresh_error(&self) -> (f64, f64) {
        let occ = self.cfg.occupations();
        let mut max = 0.0f64;
        let mut sum = 0.0;
        for x in 0..self.cfg.n() {
            let r = self.kernel.rate_raw(occ, x);
            sum += r;
            max = max.max((r - self.rates.get(x)).abs());
        }
        (max, (sum - self.rates.total()).abs())
    }

    fn run_audit(&mut self) {
        let (rate, total) = self.refresh_error();
        self.audit.audits += 1;
        self.audit.max_rate_error = self.audit.max_rate_error.max(rate);
        self.audit.max_total_error = self.audit.max_total_error.max(total);
    }

    /// Advances to time `target`; the event that would cross it is dropped
    /// (the waiting times are memoryless). Returns `false` if the
    /// configuration froze before.
    pub fn advance_to(&mut self, target: f64) -> bool {
        assert!(target >= self.t, "cannot go back from {} to {target}", self.t);
        loop {
            if self.is_frozen() {
                self.t = target;
                return false;
            }
            let dt = self.wait();
            if self.t + dt > target {
                self.rate_integral += (target - self.t) * self.total_rate();
                self.t = target;
                return true;
            }
            self.rate_integral += dt * self.total_rate();
            self.t += dt;
            self.fire();
        }
    }

    /// Box-averaged densities at each of the ascending `times`.
    pub fn run(&mut self, times: &[f64], eps: f64) -> Result<RunOutput> {
        let width = box_width(self.cfg.n(), eps)?;
        if times.windows(2).any(|w| w[1] < w[0]) || times.first().is_some_and(|&t| t < self.t) {
            return Err(Error::InvalidConfig("sample times must be ascending".into()));
        }
        let mut out = RunOutput::default();
        for &s in times {
            if !self.advance_to(s) && out.frozen_at.is_none() {
                out.frozen_at = Some(self.t);
            }
            out.snapshots.push(Snapshot {
                t: s,
                density: EmpiricalMeasure::new(&self.cfg, width),
            });
        }
        out.events = self.events;
        out.audit = self.audit;
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub density: EmpiricalMeasure,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunOutput {
    pub snapshots: Vec<Snapshot>,
    /// Time at which every rate vanished, if that happened before the last
    /// sample time; later snapshots repeat the frozen configuration.
    pub frozen_at: Option<f64>,
    pub events: u64,
    pub audit: AuditSummary,
}

impl RunOutput {
    /// CSV with header `t,box_index,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,box_index,density\n");
        for s in &self.snapshots {
            for (i, v) in s.density.values.iter().enumerate() {
                out.push_str(&format!("{},{},{}\n", s.t, i, v));
            }
        }
        out
    }
}
