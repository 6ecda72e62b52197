//! Generalized binomial coefficients `binom(m, k) = m (m-1) ... (m-k+1) / k!`
//! for real `m`, the truncated expansions of `m rho^(m-1)` and `rho^m` built
//! from them, and the tail mass of `|binom(m-1, k)|` past the truncation order.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};

/// `binom(m, k)` by the multiplicative recurrence.
///
/// Exactly zero when `m` is a non-negative integer smaller than `k`, since the
/// factor `m - m` enters the product.
pub fn gen_binom(m: f64, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c *= (m - i as f64) / (i as f64 + 1.0);
    }
    c
}

/// Tail mass `sum_{k >= ell} |binom(m-1, k)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TailMass {
    Finite(f64),
    /// `m < 1`: the series blows up at `rho = 0` and the tail is never used.
    Divergent,
}

impl TailMass {
    pub fn value(&self) -> Option<f64> {
        match self {
            TailMass::Finite(v) => Some(*v),
            TailMass::Divergent => None,
        }
    }
}

/// Coefficients `binom(m, k)` for `k = 0..=ell` together with the tail mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinomialTable {
    m: f64,
    ell: usize,
    coeffs: Vec<f64>,
    delta: TailMass,
}

impl BinomialTable {
    pub fn new(m: f64, ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidTruncation(ell));
        }
        if !m.is_finite() {
            return Err(Error::InvalidExponent(m));
        }
        let mut coeffs = Vec::with_capacity(ell + 1);
        coeffs.push(1.0);
        for k in 0..ell {
            let next = coeffs[k] * (m - k as f64) / (k as f64 + 1.0);
            coeffs.push(next);
        }
        let delta = tail_mass(m, ell);
        Ok(Self {
            m,
            ell,
            coeffs,
            delta,
        })
    }

    /// Table whose recurrence has its sign flipped, `binom(m,k+1) = binom(m,k) (k-m)/(k+1)`.
    /// Only used to check that the validators catch a broken kernel.
    #[doc(hidden)]
    pub fn with_flipped_recurrence(m: f64, ell: usize) -> Result<Self> {
        let mut t = Self::new(m, ell)?;
        for k in 0..ell {
            t.coeffs[k + 1] = t.coeffs[k] * (k as f64 - m) / (k as f64 + 1.0);
        }
        Ok(t)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn ell(&self) -> usize {
        self.ell
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs[k]
    }

    pub fn delta(&self) -> TailMass {
        self.delta
    }

    /// Weight `binom(m, k) (-1)^(k-1)` multiplying the flipped PMM(k-1)
    /// constraint in the interpolating rate, for `k = 1..=ell`.
    pub fn weight(&self, k: usize) -> f64 {
        if k % 2 == 1 {
            self.coeffs[k]
        } else {
            -self.coeffs[k]
        }
    }

    /// `sum_{k=1}^{ell} |binom(m,k)| k`, the largest rate when `m < 1`.
    pub fn max_weighted_sum(&self) -> f64 {
        (1..=self.ell).map(|k| self.coeffs[k].abs() * k as f64).sum()
    }
}

/// Convenience alias matching the table constructor.
pub fn build_table(m: f64, ell: usize) -> Result<BinomialTable> {
    BinomialTable::new(m, ell)
}

fn tail_mass(m: f64, ell: usize) -> TailMass {
    if m < 1.0 {
        return TailMass::Divergent;
    }
    if m == 1.0 {
        return TailMass::Finite(0.0);
    }
    // For 1 < m < 3 the terms (-1)^k binom(m-1,k), k >= ell >= 2, share one sign
    // and the full alternating series sums to (1-1)^(m-1) = 0.
    let c = m - 1.0;
    let mut b = 1.0;
    let mut partial = 1.0;
    for k in 1..ell {
        b *= (c - (k - 1) as f64) / k as f64;
        partial += if k % 2 == 0 { b } else { -b };
    }
    TailMass::Finite(partial.abs())
}

/// `sum_{k=1}^{ell} binom(m,k) (-1)^(k-1) k (1-rho)^(k-1)`, which tends to
/// `m rho^(m-1)` as `ell` grows.
pub fn truncated_diffusion(m: f64, ell: usize, rho: f64) -> f64 {
    let q = 1.0 - rho;
    let mut b = 1.0;
    let mut pow = 1.0;
    let mut sum = 0.0;
    for k in 1..=ell {
        b *= (m - (k - 1) as f64) / k as f64;
        let term = b * k as f64 * pow;
        sum += if k % 2 == 1 { term } else { -term };
        pow *= q;
    }
    sum
}

/// `sum_{k=0}^{ell} binom(m,k) (-1)^k (1-rho)^k`, the antiderivative of
/// [`truncated_diffusion`] that tends to `rho^m`.
pub fn truncated_potential(m: f64, ell: usize, rho: f64) -> f64 {
    let q = 1.0 - rho;
    let mut b = 1.0;
    let mut pow = 1.0;
    let mut sum = 1.0;
    for k in 1..=ell {
        b *= (m - (k - 1) as f64) / k as f64;
        pow *= q;
        let term = b * pow;
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}

/// Gamma-function sandwich for `|binom(m-1, k)|`, valid for `m > 0` and `k >= 2`:
///
/// `G |sin(pi(k-m))| / (pi (k+1)^m) < |binom(m-1,k)| < G |sin(pi(k-m))| / (pi (k-m)^m)`
/// with `G = Gamma(m)`. The upper bound is returned as `+inf` when `k <= m`.
pub fn bin_bound(m: f64, k: usize) -> (f64, f64) {
    let kf = k as f64;
    let c = gamma(m) * (PI * (kf - m)).sin().abs() / PI;
    let lower = c / (kf + 1.0).powf(m);
    let upper = if kf > m {
        c / (kf - m).powf(m)
    } else {
        f64::INFINITY
    };
    (lower, upper)
}

/// Bounds on the tail mass `sum_{k >= ell} |binom(m-1,k)|` for `1 < m < 2`,
/// obtained by summing [`bin_bound`] and comparing with integrals.
pub fn tail_mass_bounds(m: f64, ell: usize) -> (f64, f64) {
    let c = gamma(m) * (PI * m).sin().abs() / PI;
    let l = ell as f64;
    let lower = c / ((m - 1.0) * (l + 1.0).powf(m - 1.0));
    let upper = c / (l - m).powf(m) + c / ((m - 1.0) * (l - m).powf(m - 1.0));
    (lower, upper)
}
