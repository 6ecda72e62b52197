//! Box-averaged empirical densities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Configuration;

/// `floor(eps n)`, required to be at least 1.
pub fn box_width(n: usize, eps: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidConfig(format!("box fraction {eps} outside (0, 1)")));
    }
    let w = (eps * n as f64).floor() as usize;
    if w == 0 {
        return Err(Error::InvalidConfig(format!("box fraction {eps} empty on {n} sites")));
    }
    Ok(w)
}

/// `values[x] = (1/w) sum_{y = x}^{x + w - 1} eta(y)` for every site `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalMeasure {
    pub box_width: usize,
    pub values: Vec<f64>,
}

impl EmpiricalMeasure {
    pub fn new(cfg: &Configuration, box_width: usize) -> Self {
        assert!(box_width >= 1 && box_width <= cfg.n());
        let occ = cfg.occupations();
        let n = occ.len();
        let mut count: usize = occ[..box_width].iter().map(|&v| v as usize).sum();
        let mut values = Vec::with_capacity(n);
        for x in 0..n {
            values.push(count as f64 / box_width as f64);
            count = count + occ[(x + box_width) % n] as usize - occ[x] as usize;
        }
        Self { box_width, values }
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Macroscopic centre `(x + (w - 1) / 2) / n` of box `x`.
    pub fn centre(&self, x: usize) -> f64 {
        (x as f64 + (self.box_width as f64 - 1.0) / 2.0) / self.n() as f64
    }
}
