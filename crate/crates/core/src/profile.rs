//! Initial density profiles on the periodic unit interval.

use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Constant { rho: f64 },
    /// `mean + amplitude cos(2 pi u)`.
    Cosine { mean: f64, amplitude: f64 },
    /// Values on the uniform grid `i / len`, linearly interpolated and periodic.
    Table { values: Vec<f64> },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Cosine {
            mean: 0.5,
            amplitude: 0.3,
        }
    }
}

impl Profile {
    /// Parses `constant:RHO`, `cosine`, `cosine:MEAN:AMP`, or reads a file.
    ///
    /// Files hold one value per line, or `u,rho` pairs of which the last
    /// column is used; lines that do not parse as numbers are skipped.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut parts = spec.split(':');
        let head = parts.next().unwrap_or_default();
        let nums: Vec<&str> = parts.collect();
        let num = |s: &str| {
            s.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidProfile(format!("bad number {s:?} in {spec:?}")))
        };
        let p = match (head, nums.len()) {
            ("constant", 1) => Profile::Constant { rho: num(nums[0])? },
            ("cosine", 0) => Profile::default(),
            ("cosine", 2) => Profile::Cosine {
                mean: num(nums[0])?,
                amplitude: num(nums[1])?,
            },
            _ if Path::new(spec).is_file() => Self::from_file(Path::new(spec))?,
            _ => return Err(Error::InvalidProfile(format!("unknown profile {spec:?}"))),
        };
        p.check_range()?;
        Ok(p)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let values: Vec<f64> = text
            .lines()
            .filter_map(|line| {
                line.split(|c: char| c == ',' || c.is_whitespace())
                    .rfind(|s| !s.is_empty())
                    .and_then(|s| s.parse().ok())
            })
            .collect();
        if values.is_empty() {
            return Err(Error::InvalidProfile(format!(
                "no values in {}",
                path.display()
            )));
        }
        Ok(Profile::Table { values })
    }

    pub fn eval(&self, u: f64) -> f64 {
        match self {
            Profile::Constant { rho } => *rho,
            Profile::Cosine { mean, amplitude } => mean + amplitude * (TAU * u).cos(),
            Profile::Table { values } => {
                let len = values.len();
                let s = u.rem_euclid(1.0) * len as f64;
                let i = (s.floor() as usize).min(len - 1);
                let w = s - i as f64;
                (1.0 - w) * values[i] + w * values[(i + 1) % len]
            }
        }
    }

    /// Values at `i / n`, `i = 0..n`.
    pub fn grid(&self, n: usize) -> Vec<f64> {
        (0..n).map(|i| self.eval(i as f64 / n as f64)).collect()
    }

    /// Infimum and supremum over the whole interval.
    pub fn range(&self) -> (f64, f64) {
        match self {
            Profile::Constant { rho } => (*rho, *rho),
            Profile::Cosine { mean, amplitude } => {
                (mean - amplitude.abs(), mean + amplitude.abs())
            }
            Profile::Table { values } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    /// Mean over the unit interval.
    pub fn mass(&self) -> f64 {
        match self {
            Profile::Constant { rho } => *rho,
            Profile::Cosine { mean, .. } => *mean,
            Profile::Table { values } => values.iter().sum::<f64>() / values.len() as f64,
        }
    }

    pub fn check_range(&self) -> Result<()> {
        let (lo, hi) = self.range();
        if !(lo >= 0.0 && hi <= 1.0) {
            return Err(Error::InvalidProfile(format!(
                "{self} takes values in [{lo}, {hi}], outside [0, 1]"
            )));
        }
        Ok(())
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Constant { rho } => write!(f, "constant:{rho}"),
            Profile::Cosine { mean, amplitude } => write!(f, "cosine:{mean}:{amplitude}"),
            Profile::Table { values } => write!(f, "table[{}]", values.len()),
        }
    }
}
