//! Rate, constraint and gradient functions of the integer PMM(k) family and
//! of the interpolating model.

pub mod interp;
pub mod pmm;
pub mod validators;

pub use interp::{GapTable, RateKernel, NEGATIVE_RATE_TOLERANCE};
pub use pmm::{c_k, c_k_from_gaps, h_k, r_k, s_j, HForm};

use crate::lattice::Configuration;

/// Exchange rate across every edge `{x, x+1}` of a configuration.
pub trait EdgeRates {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64;
}

/// Simple symmetric exclusion, `r = a`.
#[derive(Debug, Clone, Copy)]
pub struct Ssep;

impl EdgeRates for Ssep {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64 {
        cfg.exclusion_factor(x) as f64
    }
}

/// PMM(k): `r = c^(k)(tau_x eta) a`.
#[derive(Debug, Clone, Copy)]
pub struct Pmm(pub usize);

impl EdgeRates for Pmm {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64 {
        r_k(&cfg.view(x as i64), self.0) as f64
    }
}

/// Flipped PMM(k): `r = c^(k)(tau_x eta-bar) a`, constraint on empty sites.
#[derive(Debug, Clone, Copy)]
pub struct FlippedPmm(pub usize);

impl EdgeRates for FlippedPmm {
    fn rate(&self, cfg: &Configuration, x: usize) -> f64 {
        let v = cfg.view(x as i64);
        if v.exclusion_factor() == 0 {
            0.0
        } else {
            c_k(&v.flipped(), self.0) as f64
        }
    }
}
