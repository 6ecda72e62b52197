//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pde::DEFAULT_FLOOR;
use crate::profile::Profile;

/// Default truncation `max(2, ceil(log2 n))`.
pub fn default_ell(n: usize) -> usize {
    let log = usize::BITS - n.saturating_sub(1).leading_zeros();
    (log as usize).max(2)
}

fn default_profile() -> String {
    "cosine:0.5:0.3".into()
}

fn default_eps() -> f64 {
    1.0 / 32.0
}

fn default_pde_grid() -> usize {
    512
}

fn default_replicas() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub m: f64,
    /// Fixed truncation for every `n`; [`default_ell`] when absent.
    #[serde(default)]
    pub ell: Option<usize>,
    pub ns: Vec<usize>,
    #[serde(default = "default_profile")]
    pub profile: String,
    pub times: Vec<f64>,
    #[serde(default = "default_eps")]
    pub eps: f64,
    #[serde(default = "default_replicas")]
    pub replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_pde_grid")]
    pub pde_grid: usize,
    /// Wall-clock cap for the whole experiment.
    #[serde(default)]
    pub budget_secs: Option<f64>,
    /// Largest admissible L1 distance at the largest `n`.
    #[serde(default)]
    pub threshold: Option<f64>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn ell_for(&self, n: usize) -> usize {
        self.ell.unwrap_or_else(|| default_ell(n))
    }

    pub fn parsed_profile(&self) -> Result<Profile> {
        Profile::parse(&self.profile)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.m > 0.0 && self.m <= 2.0) {
            return Err(Error::InvalidExponent(self.m));
        }
        if self.ns.is_empty() || self.ns.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("ns must be non-empty and increasing, got {:?}", self.ns));
        }
        for &n in &self.ns {
            let ell = self.ell_for(n);
            if ell < 2 {
                return Err(Error::InvalidTruncation(ell));
            }
            if ell > n {
                return Err(Error::TruncationExceedsLattice { ell, n });
            }
        }
        if self.eps * (self.ns[0] as f64) < 4.0 || self.eps >= 1.0 {
            return bad(format!("eps = {} gives boxes under 4 sites at n = {}", self.eps, self.ns[0]));
        }
        if self.times.is_empty()
            || self.times[0] < 0.0
            || self.times.windows(2).any(|w| w[1] <= w[0])
        {
            return bad(format!("times must be non-negative and increasing, got {:?}", self.times));
        }
        if self.replicas == 0 {
            return bad("at least one replica is needed".into());
        }
        if self.pde_grid < 8 {
            return bad(format!("pde grid of {} cells", self.pde_grid));
        }
        let profile = self.parsed_profile()?;
        if self.m < 1.0 {
            let (lo, hi) = profile.range();
            if lo < DEFAULT_FLOOR || hi > 1.0 - DEFAULT_FLOOR {
                return Err(Error::InvalidProfile(format!(
                    "fast diffusion needs densities in [{DEFAULT_FLOOR}, {}], profile spans [{lo}, {hi}]",
                    1.0 - DEFAULT_FLOOR
                )));
            }
        }
        Ok(())
    }
}
